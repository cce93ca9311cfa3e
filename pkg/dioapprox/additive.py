"""Additive functions of the regularity class and their inversion on primes."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
import logging
from typing import Callable

import gmpy2
import sympy
from sympy.core.function import AppliedUndef
from sympy.parsing.sympy_parser import parse_expr

from . import (
    IncompleteFactorization,
    NoPrimeFound,
    ParameterRejected,
    UnknownFunction,
    Verdict,
    Violation,
)
from .const import (
    BUILTIN_FUNCTIONS,
    BUILTIN_SIGMA_LOG,
    BUILTIN_TOTIENT_LOG,
    CONF_C,
    CONF_DELTA,
    CONF_EXPRESSION,
    CONF_LAMBDA,
    CONF_MONOTONE_FROM,
    CONF_RESIDUE_FILTER,
    CONF_T0,
    DEFAULT_C,
    DEFAULT_DELTA,
    DEFAULT_LAMBDA,
    DEFAULT_MEMBERSHIP_PRIME_LIMIT,
    DEFAULT_MEMBERSHIP_SAMPLES,
    DEFAULT_MONOTONE_FROM,
    DEFAULT_PRECISION_BITS,
    DEFAULT_T0,
)
from .pyarith import Arithmetic, Factorization
from .reals import real, real_context, real_str

_LOGGER = logging.getLogger(__name__)

# prime candidates beyond 2^MAX_SEARCH_BITS are never scanned
MAX_SEARCH_BITS = 160

_P = sympy.Symbol("p", positive=True, integer=True)
_V = sympy.Symbol("v", positive=True, integer=True)
_GRAMMAR = {"p": _P, "v": _V, "log": sympy.log, "exp": sympy.exp, "sqrt": sympy.sqrt}
_REAL_MODULES = [{"log": gmpy2.log, "exp": gmpy2.exp, "sqrt": gmpy2.sqrt}, "math"]


@dataclass(frozen=True)
class ResidueFilter:
    """Primes allowed by their residue modulo a fixed modulus."""

    modulus: int
    residues: frozenset

    def allows(self, p: int) -> bool:
        return p % self.modulus in self.residues

    @classmethod
    def parse(cls, text: str) -> ResidueFilter:
        try:
            modulus, residues = text.split(":")
            modulus = int(modulus)
            allowed = frozenset(int(r) % modulus for r in residues.split(","))
        except ValueError as err:
            raise ParameterRejected(
                f"residue filter '{text}' is not of the form modulus:r1,r2",
                key=CONF_RESIDUE_FILTER,
            ) from err
        if modulus < 1 or not allowed:
            raise ParameterRejected(
                f"residue filter '{text}' is empty", key=CONF_RESIDUE_FILTER
            )
        return cls(modulus, allowed)

    def __str__(self) -> str:
        return f"{self.modulus}:{','.join(str(r) for r in sorted(self.residues))}"


def _totient_log(p, v):
    return gmpy2.log1p(gmpy2.mpfr(gmpy2.mpq(1, p - 1)))


def _sigma_log(p, v):
    pv = gmpy2.mpz(p) ** v
    return gmpy2.log1p(gmpy2.mpfr(gmpy2.mpq(pv - 1, pv * (p - 1))))


_BUILTIN_RULES = {
    BUILTIN_TOTIENT_LOG: _totient_log,
    BUILTIN_SIGMA_LOG: _sigma_log,
}


@dataclass(frozen=True)
class AdditiveFunction:
    """An additive function given by its values on prime powers.

    prime_power_value(p, v) is evaluated inside the caller's real context.
    """

    name: str
    prime_power_value: Callable = field(compare=False, repr=False)
    delta: float = DEFAULT_DELTA
    lam: float = DEFAULT_LAMBDA
    C: float = DEFAULT_C
    t0: float = DEFAULT_T0
    residue_filter: ResidueFilter | None = None
    monotone_from: int = DEFAULT_MONOTONE_FROM
    precision: int = DEFAULT_PRECISION_BITS
    expression: str | None = None
    multiplicative: str | None = None

    def __post_init__(self):
        if not 0 < self.delta <= 1:
            raise ParameterRejected(
                f"{self.name}: delta must lie in (0, 1]", key=CONF_DELTA
            )
        if self.lam <= 0 or self.delta * self.lam >= 1:
            raise ParameterRejected(
                f"{self.name}: need lambda > 0 and delta*lambda < 1", key=CONF_LAMBDA
            )
        if self.C <= 0:
            raise ParameterRejected(f"{self.name}: C must be positive", key=CONF_C)
        if self.t0 <= 0:
            raise ParameterRejected(f"{self.name}: t0 must be positive", key=CONF_T0)

    def value(self, p: int, v: int = 1):
        with real_context(self.precision):
            return self.prime_power_value(p, v)

    def prime_value(self, p: int):
        return self.value(p, 1)

    def allows(self, p: int) -> bool:
        return self.residue_filter is None or self.residue_filter.allows(p)

    def with_precision(self, precision: int) -> AdditiveFunction:
        return replace(self, precision=precision)

    def same_rule(self, other: AdditiveFunction) -> bool:
        return self.name == other.name and self.expression == other.expression

    def describe(self) -> dict:
        description = {
            "name": self.name,
            CONF_DELTA: self.delta,
            CONF_LAMBDA: self.lam,
            CONF_C: self.C,
            CONF_T0: self.t0,
            CONF_MONOTONE_FROM: self.monotone_from,
        }
        if self.expression is not None:
            description[CONF_EXPRESSION] = self.expression
        if self.residue_filter is not None:
            description[CONF_RESIDUE_FILTER] = str(self.residue_filter)
        return description


def builtin(name: str, **overrides) -> AdditiveFunction:
    """One of the two corollary functions, with overridable constants."""
    if name not in BUILTIN_FUNCTIONS:
        raise UnknownFunction(f"unknown additive function '{name}'", name=name)
    info = BUILTIN_FUNCTIONS[name]
    residue_filter = overrides.pop(CONF_RESIDUE_FILTER, None)
    if isinstance(residue_filter, str):
        residue_filter = ResidueFilter.parse(residue_filter)
    params = {
        "delta": info[CONF_DELTA],
        "monotone_from": info[CONF_MONOTONE_FROM],
        "multiplicative": info["multiplicative"],
    }
    for key, attr in ((CONF_LAMBDA, "lam"), (CONF_C, "C"), (CONF_T0, "t0")):
        if key in overrides:
            params[attr] = overrides.pop(key)
    params.update(overrides)
    return AdditiveFunction(
        name, _BUILTIN_RULES[name], residue_filter=residue_filter, **params
    )


def from_expression(
    name: str,
    expression: str,
    delta: float = DEFAULT_DELTA,
    lam: float = DEFAULT_LAMBDA,
    C: float = DEFAULT_C,
    t0: float = DEFAULT_T0,
    residue_filter: ResidueFilter | str | None = None,
    monotone_from: int = DEFAULT_MONOTONE_FROM,
    precision: int = DEFAULT_PRECISION_BITS,
) -> AdditiveFunction:
    """Custom function from a closed form over p and v."""
    try:
        parsed = parse_expr(expression, local_dict=dict(_GRAMMAR))
    except (SyntaxError, TypeError, ValueError) as err:
        raise ParameterRejected(
            f"{name}: cannot parse '{expression}'", key=CONF_EXPRESSION
        ) from err
    unknown = parsed.free_symbols - {_P, _V}
    if unknown or parsed.atoms(AppliedUndef):
        raise ParameterRejected(
            f"{name}: '{expression}' uses names other than p, v, log, exp, sqrt",
            key=CONF_EXPRESSION,
        )
    rule = sympy.lambdify((_P, _V), parsed, modules=_REAL_MODULES)

    def prime_power_value(p, v):
        return gmpy2.mpfr(rule(gmpy2.mpfr(p), v))

    if isinstance(residue_filter, str):
        residue_filter = ResidueFilter.parse(residue_filter)
    return AdditiveFunction(
        name,
        prime_power_value,
        delta=delta,
        lam=lam,
        C=C,
        t0=t0,
        residue_filter=residue_filter,
        monotone_from=monotone_from,
        precision=precision,
        expression=expression,
    )


def from_description(description: dict, precision: int = DEFAULT_PRECISION_BITS):
    """Rebuild a function from AdditiveFunction.describe() output."""
    params = {
        CONF_LAMBDA: description.get(CONF_LAMBDA, DEFAULT_LAMBDA),
        CONF_C: description.get(CONF_C, DEFAULT_C),
        CONF_T0: description.get(CONF_T0, DEFAULT_T0),
        CONF_RESIDUE_FILTER: description.get(CONF_RESIDUE_FILTER),
    }
    if CONF_EXPRESSION in description:
        return from_expression(
            description["name"],
            description[CONF_EXPRESSION],
            delta=description.get(CONF_DELTA, DEFAULT_DELTA),
            lam=params[CONF_LAMBDA],
            C=params[CONF_C],
            t0=params[CONF_T0],
            residue_filter=params[CONF_RESIDUE_FILTER],
            monotone_from=description.get(CONF_MONOTONE_FROM, DEFAULT_MONOTONE_FROM),
            precision=precision,
        )
    return builtin(description["name"], precision=precision, **params)


def evaluate(f: AdditiveFunction, n, arith: Arithmetic | None = None):
    """f(n) from a factorization (or an integer, factored on the spot)."""
    if not isinstance(n, Factorization):
        n = (arith or Arithmetic()).factorize(n)
    if not n.complete:
        raise IncompleteFactorization(
            f"cannot evaluate {f.name} at {n.value}: cofactors "
            f"{', '.join(str(c) for c in n.unfactored)} are not factored",
            value=n.value,
            unfactored=list(n.unfactored),
        )
    with real_context(f.precision):
        total = gmpy2.mpfr(0)
        for p, v in n.factors:
            total += f.prime_power_value(p, v)
        return total


def _first_at_most(f, target, low, high):
    """smallest integer x in [low, high] with f(x) <= target (f decreasing)"""
    while low < high:
        mid = (low + high) // 2
        if f.prime_value(mid) <= target:
            high = mid
        else:
            low = mid + 1
    return low


def _last_at_least(f, target, low, high):
    """largest integer x in [low, high] with f(x) >= target (f decreasing)"""
    while low < high:
        mid = (low + high + 1) // 2
        if f.prime_value(mid) >= target:
            low = mid
        else:
            high = mid - 1
    return low


def invert_on_primes(
    f: AdditiveFunction, t, lam, arith: Arithmetic | None = None
) -> int:
    """Smallest allowed prime p with t - t^(1+lam) <= f(p) <= t."""
    arith = arith or Arithmetic()
    with real_context(f.precision):
        t = real(t, f.precision)
        hi = t
        lo = t - t ** (1 + real(lam, f.precision))
    if lo <= 0:
        raise ParameterRejected(
            f"window [{real_str(lo, 64)}, {real_str(hi, 64)}] is not positive",
            t=str(t),
            lam=lam,
        )
    if t > f.t0:
        _LOGGER.warning(
            f"inverting {f.name} at t={real_str(t, 64)} above t0={f.t0}"
        )

    # below the monotone threshold every prime is tested directly
    for p in range(2, f.monotone_from):
        if arith.is_prime(p) and f.allows(p) and lo <= f.prime_value(p) <= hi:
            return p

    start = max(f.monotone_from, 2)
    ceiling = 1 << MAX_SEARCH_BITS
    searched = (start, start - 1)
    if f.prime_value(start) >= lo:
        top = start
        while f.prime_value(top) >= lo and top < ceiling:
            top *= 2
        last = _last_at_least(f, lo, start, top)
        first = _first_at_most(f, hi, start, last + 1)
        searched = (first, last)
        p = arith.next_prime(first - 1)
        while p <= last:
            if f.allows(p) and lo <= f.prime_value(p) <= hi:
                return p
            p = arith.next_prime(p)

    raise NoPrimeFound(
        f"no prime with {f.name}(p) in [{real_str(lo, 64)}, {real_str(hi, 64)}]",
        function=f.name,
        t=real_str(t, 64),
        lam=lam,
        window=[real_str(lo, 64), real_str(hi, 64)],
        searched=list(searched),
    )


def check_membership(
    f: AdditiveFunction,
    prime_limit: int = DEFAULT_MEMBERSHIP_PRIME_LIMIT,
    samples: int = DEFAULT_MEMBERSHIP_SAMPLES,
    arith: Arithmetic | None = None,
) -> Verdict:
    """Empirical evidence for the decay and window conditions of the class."""
    arith = arith or Arithmetic()
    violations = []

    with real_context(f.precision):
        for p in arith.sieve_primes(max(prime_limit, 2)):
            for v in range(1, 4):
                value = f.value(p, v)
                bound = real(f.C, f.precision) / gmpy2.mpfr(p) ** real(
                    f.delta, f.precision
                )
                if abs(value) > bound:
                    violations.append(
                        Violation(
                            "decay",
                            f"|{f.name}({p}^{v})| exceeds C/p^delta",
                            {"p": p, "v": v, "value": real_str(value, 64)},
                        )
                    )
                    break

    # geometric grid of t over four decades below t0
    for index in range(samples):
        t = f.t0 * 10 ** (-4 * index / max(samples - 1, 1))
        try:
            invert_on_primes(f, t, f.lam, arith)
        except NoPrimeFound as err:
            violations.append(Violation("window", str(err), dict(err.context)))
        except ParameterRejected as err:
            violations.append(Violation("window", str(err), dict(err.context)))

    if f.delta * f.lam >= 1:
        violations.append(
            Violation("delta_lambda", "delta*lambda must be below 1", {})
        )
    return Verdict.collect(violations)
