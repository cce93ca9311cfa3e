"""Support for simultaneous Diophantine approximation by additive functions."""
from __future__ import annotations

from dataclasses import dataclass, field
import re
from typing import Any

__version__ = "0.1.0"


def dict_get(data: dict, path: str, default=None):
    pathList = re.split(r"\.", path, flags=re.IGNORECASE)
    result = data
    for key in pathList:
        try:
            key = int(key) if key.isnumeric() else key
            result = result[key]
        except (KeyError, IndexError, TypeError):
            result = default
            break

    return result


@dataclass(frozen=True)
class Violation:
    """A single failed condition of a check."""

    code: str
    message: str
    context: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Verdict:
    """Outcome of a check that reports instead of raising."""

    violations: tuple[Violation, ...] = ()
    inconclusive: bool = False

    @property
    def passed(self) -> bool:
        return not self.violations and not self.inconclusive

    @property
    def codes(self) -> list[str]:
        return [violation.code for violation in self.violations]

    def __bool__(self) -> bool:
        return self.passed

    @classmethod
    def collect(cls, violations, inconclusive: bool = False) -> Verdict:
        return cls(tuple(violations), inconclusive)


class DioApproxError(Exception):
    """Base error, identified by a key into strings.json."""

    key = "unknown"

    def __init__(self, message: str = "", **context: Any) -> None:
        super().__init__(message or self.key)
        self.context = context

    def annotate(self, **context: Any) -> DioApproxError:
        for name, value in context.items():
            self.context.setdefault(name, value)
        return self


class ParameterRejected(DioApproxError):
    """Input violates a stated hypothesis."""

    key = "parameter_rejected"


class ResourceExhausted(DioApproxError):
    """Configured memory or effort budget exceeded."""

    key = "resource_exhausted"


class IncompatibleCongruences(DioApproxError):
    """Two congruences disagree modulo a shared factor."""

    key = "incompatible_congruences"


class UnsupportedInput(DioApproxError):
    """UnsupportedInput."""

    key = "unsupported_input"


class IncompleteFactorization(DioApproxError):
    """A value depends on a factorization that was not completed."""

    key = "incomplete_factorization"


class UnknownFunction(DioApproxError):
    """UnknownFunction."""

    key = "unknown_function"


class NoPrimeFound(DioApproxError):
    """No prime value of f falls in the requested window."""

    key = "no_prime_found"


class PartitionExhausted(DioApproxError):
    """A ladder level has too few collision-free sub-intervals."""

    key = "partition_exhausted"


class InsufficientPrimes(DioApproxError):
    """The available primes cannot reach the requested sum."""

    key = "insufficient_primes"


class RefinementFailed(DioApproxError):
    """No partition prime lies in a refinement window."""

    key = "refinement_failed"


class ConstructionFailed(DioApproxError):
    """A congruence system could not be assembled."""

    key = "construction_failed"
