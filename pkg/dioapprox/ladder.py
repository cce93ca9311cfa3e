"""Interval ladder and disjoint prime partitions."""
from __future__ import annotations

from bisect import bisect_left, insort
from dataclasses import dataclass, field
import logging

import gmpy2

from . import (
    NoPrimeFound,
    ParameterRejected,
    PartitionExhausted,
    Verdict,
    Violation,
)
from .additive import AdditiveFunction, invert_on_primes
from .const import CONF_V0, CONF_XI, DEFAULT_PRECISION_BITS
from .pyarith import Arithmetic
from .reals import real, real_context, real_str

_LOGGER = logging.getLogger(__name__)

# hard stop for ladder_depth_for
MAX_LADDER_DEPTH = 10_000_000


@dataclass(frozen=True)
class IntervalLadder:
    """v_0 > v_1 > ... with v_{j+1} = v_j - v_j^(1+xi)."""

    v0: float
    xi: float
    values: tuple
    precision: int = DEFAULT_PRECISION_BITS

    @property
    def depth(self) -> int:
        return len(self.values) - 1

    def interval(self, j: int):
        """(v_{j+1}, v_j]"""
        return self.values[j + 1], self.values[j]

    def extended(self, J: int) -> IntervalLadder:
        if J <= self.depth:
            return self
        values = list(self.values)
        with real_context(self.precision):
            exponent = 1 + real(self.xi, self.precision)
            v = values[-1]
            for _ in range(J - self.depth):
                v = v - v**exponent
                values.append(v)
        return IntervalLadder(self.v0, self.xi, tuple(values), self.precision)


def extend_ladder(v0, xi, J: int, precision: int = DEFAULT_PRECISION_BITS):
    if not 0 < v0 < 1:
        raise ParameterRejected(f"v0 must lie in (0, 1), got {v0}", key=CONF_V0)
    if xi <= 0:
        raise ParameterRejected(f"xi must be positive, got {xi}", key=CONF_XI)
    if J < 0:
        raise ParameterRejected(f"depth must be nonnegative, got {J}", key="depth")
    ladder = IntervalLadder(v0, xi, (real(v0, precision),), precision)
    return ladder.extended(J)


def ladder_depth_for(v0, xi, floor, precision: int = DEFAULT_PRECISION_BITS) -> int:
    """Smallest J with v_J < floor."""
    with real_context(precision):
        exponent = 1 + real(xi, precision)
        floor = real(floor, precision)
        v = real(v0, precision)
        J = 0
        while v >= floor:
            v = v - v**exponent
            J += 1
            if J > MAX_LADDER_DEPTH:
                raise ParameterRejected(
                    f"ladder would need more than {MAX_LADDER_DEPTH} levels",
                    floor=real_str(floor, 64),
                )
    return J


@dataclass(frozen=True)
class PartitionRequest:
    functions: tuple
    K: int
    J: int
    xi: float
    A: int = field(init=False)

    def __post_init__(self):
        if not self.functions:
            raise ParameterRejected("partition needs at least one function")
        first = self.functions[0]
        identical = all(f.same_rule(first) for f in self.functions)
        object.__setattr__(self, "A", 1 if identical else 2)
        if not 0 < self.xi < self.lam_min / self.A:
            raise ParameterRejected(
                f"xi={self.xi} must lie in (0, lambda_min/A={self.lam_min / self.A})",
                key=CONF_XI,
            )

    @property
    def k(self) -> int:
        return len(self.functions)

    @property
    def lam_min(self) -> float:
        return min(f.lam for f in self.functions)

    @property
    def precision(self) -> int:
        return max(f.precision for f in self.functions)


def check_v0(request: PartitionRequest, v0, arith: Arithmetic | None = None) -> Verdict:
    """Verdict on the explicit smallness conditions for v0."""
    arith = arith or Arithmetic()
    violations = []
    k, lam, xi = request.k, request.lam_min, request.xi

    if not 0 < v0 < 1:
        return Verdict.collect(
            [Violation("domain", f"v0={v0} must lie in (0, 1)", {"v0": v0})]
        )

    t0_min = min(f.t0 for f in request.functions)
    if not v0 < t0_min:
        violations.append(
            Violation("v0a", f"v0={v0} is not below min t0={t0_min}", {"t0": t0_min})
        )

    if request.K >= 2:
        small = arith.sieve_primes(request.K)
        for i, f in enumerate(request.functions):
            positive = [value for value in map(f.prime_value, small) if value > 0]
            if positive and not v0 < min(positive):
                violations.append(
                    Violation(
                        "v0b",
                        f"v0={v0} reaches a value of f_{i} at a prime <= K={request.K}",
                        {"i": i, "bound": real_str(min(positive), 64)},
                    )
                )

    precision = request.precision
    with real_context(precision):
        exponent = real(xi, precision) - real(lam, precision)
        if request.A == 1:
            if not real(v0, precision) ** exponent >= 2 * k:
                violations.append(
                    Violation(
                        "v0c1",
                        f"v0^(xi-lambda) < 2k={2 * k}",
                        {"value": real_str(real(v0, precision) ** exponent, 64)},
                    )
                )
        else:
            ladder = extend_ladder(v0, xi, request.J, precision)
            for j, v in enumerate(ladder.values):
                if not v**exponent >= 2 * k * k * (j + 1):
                    violations.append(
                        Violation(
                            "v0c2",
                            f"v_j^(xi-lambda) < 2k^2(j+1) first fails at j={j}",
                            {"j": j, "value": real_str(v**exponent, 64)},
                        )
                    )
                    break
    return Verdict.collect(violations)


def subintervals(upper, lower, lam, precision: int = DEFAULT_PRECISION_BITS):
    """Anchored windows (t - t^(1+lam), t] packed top-down until they pass lower.

    The last window may reach below lower; callers keep only values above it.
    """
    windows = []
    with real_context(precision):
        exponent = 1 + real(lam, precision)
        t = upper
        while t > lower:
            bottom = t - t**exponent
            windows.append((bottom, t))
            t = bottom
    return windows


@dataclass(frozen=True)
class PrimePartition:
    ladder: IntervalLadder
    functions: tuple
    sets: tuple
    spares: tuple
    residual_floor: int

    @property
    def depth(self) -> int:
        return len(self.sets[0]) - 1

    def chosen_primes(self) -> frozenset:
        chosen = set()
        for column in self.sets + self.spares:
            chosen.update(column)
        return frozenset(chosen)

    def column(self, i: int) -> tuple:
        return self.sets[i]

    def residual_primes(self, limit: int, arith: Arithmetic | None = None) -> list:
        """Primes K < p <= limit outside every set and spare column."""
        arith = arith or Arithmetic()
        chosen = self.chosen_primes()
        return [
            p
            for p in arith.primes_between(self.residual_floor, limit)
            if p not in chosen
        ]

    def records(self) -> list:
        rows = []
        for i, f in enumerate(self.functions):
            for j, (p, spare) in enumerate(zip(self.sets[i], self.spares[i])):
                lower, upper = self.ladder.interval(j)
                rows.append(
                    {
                        "i": i,
                        "j": j,
                        "prime": p,
                        "value": real_str(f.prime_value(p), 64),
                        "spare": spare,
                        "spare_value": real_str(f.prime_value(spare), 64),
                        "lower": real_str(lower, 64),
                        "upper": real_str(upper, 64),
                    }
                )
        return rows

    def validate(self) -> Verdict:
        violations = []
        everything = [p for column in self.sets + self.spares for p in column]
        if len(everything) != len(set(everything)):
            violations.append(Violation("disjoint", "a prime is used twice", {}))
        for p in everything:
            if p <= self.residual_floor:
                violations.append(
                    Violation("floor", f"{p} <= K={self.residual_floor}", {"p": p})
                )
        for i, f in enumerate(self.functions):
            for columns in (self.sets, self.spares):
                for j, p in enumerate(columns[i]):
                    lower, upper = self.ladder.interval(j)
                    if not lower < f.prime_value(p) <= upper:
                        violations.append(
                            Violation(
                                "interval",
                                f"f_{i}({p}) outside level {j}",
                                {"i": i, "j": j, "p": p},
                            )
                        )
        return Verdict.collect(violations)

    def residual_divergence(self) -> list:
        """Per function: (sum of f over spares, sum of v_{j+1}) up to the depth."""
        sums = []
        with real_context(self.ladder.precision):
            floor_sum = gmpy2.fsum(self.ladder.values[1 : self.depth + 2])
            for i, f in enumerate(self.functions):
                spare_sum = gmpy2.fsum(f.prime_value(p) for p in self.spares[i])
                sums.append((spare_sum, floor_sum))
        return sums


def build_partition(
    request: PartitionRequest, v0, arith: Arithmetic | None = None, strict: bool = True
) -> PrimePartition:
    """Greedy per-level choice of one prime and one spare for each function.

    strict=False builds even when v0 fails its smallness conditions; the
    violations are logged and disjointness is then only what the greedy finds.
    """
    arith = arith or Arithmetic()
    verdict = check_v0(request, v0, arith)
    if not verdict:
        if strict or "domain" in verdict.codes:
            raise ParameterRejected(
                f"v0={v0} rejected: {', '.join(verdict.codes)}",
                key=CONF_V0,
                violations=verdict.codes,
            )
        _LOGGER.warning(f"building with v0={v0} despite {', '.join(verdict.codes)}")
    precision = request.precision
    ladder = extend_ladder(v0, request.xi, request.J + 1, precision)
    lam = request.lam_min
    k = request.k

    chosen = set()
    # per function, sorted values f_i(q) over every chosen q
    burned = [[] for _ in range(k)]
    sets = [[] for _ in range(k)]
    spares = [[] for _ in range(k)]

    def is_burned(lo, hi):
        for values in burned:
            index = bisect_left(values, lo)
            if index < len(values) and values[index] <= hi:
                return True
        return False

    def take(p):
        chosen.add(p)
        for index, f in enumerate(request.functions):
            insort(burned[index], f.prime_value(p))

    for j in range(request.J + 1):
        lower, upper = ladder.interval(j)
        windows = subintervals(upper, lower, lam, precision)
        used = set()
        for i, f in enumerate(request.functions):
            picked = []
            failure = None
            for index, (lo, hi) in enumerate(windows):
                if len(picked) == 2:
                    break
                if index in used or is_burned(lo, hi):
                    continue
                try:
                    p = invert_on_primes(f, hi, lam, arith)
                except NoPrimeFound as err:
                    failure = err
                    _LOGGER.warning(
                        f"skipping sub-interval {index} of level {j} for f_{i}: {err}"
                    )
                    continue
                if p in chosen or p <= request.K:
                    continue
                if not lower < f.prime_value(p) <= upper:
                    continue
                used.add(index)
                take(p)
                picked.append(p)
            if len(picked) < 2:
                if failure is not None:
                    raise failure.annotate(
                        i=i,
                        j=j,
                        interval=[real_str(lower, 64), real_str(upper, 64)],
                    )
                raise PartitionExhausted(
                    f"level {j} has too few usable sub-intervals for f_{i}",
                    level=j,
                    i=i,
                    windows=len(windows),
                    needed=2 * k,
                )
            sets[i].append(picked[0])
            spares[i].append(picked[1])

    _LOGGER.debug(f"partition built to depth {request.J} with {len(chosen)} primes")
    return PrimePartition(
        ladder=ladder,
        functions=tuple(request.functions),
        sets=tuple(tuple(column) for column in sets),
        spares=tuple(tuple(column) for column in spares),
        residual_floor=request.K,
    )
