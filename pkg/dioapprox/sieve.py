"""
congruence systems for m = h + sN and the exact segmented rough sieve over s.

a system keeps, for every form, the integer polynomial in s that remains after
dividing out its planned part; s survives when the product of those
polynomials has no prime factor <= z.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
import itertools
import logging
import math

import gmpy2
from mpmath import li
import numpy as np

from . import (
    ConstructionFailed,
    IncompatibleCongruences,
    ParameterRejected,
    ResourceExhausted,
    UnsupportedInput,
)
from .const import (
    BETA_PLACEHOLDER_FACTOR,
    BETA_TABLE,
    CONF_EPSILON,
    CONF_SIEVE_MEMORY,
    DEFAULT_GAMMA_ASSUMED,
    DEFAULT_GAMMA_PRIME_ASSUMED,
    DEFAULT_MAX_Z,
    DEFAULT_SEGMENT_SIZE,
    DEFAULT_SIEVE_MEMORY,
    DEFAULT_WORKERS,
    DEFAULT_XI_PRIME_SHARE,
    DENSITY_TOLERANCE,
    DIMENSION_EXHAUSTIVE_PRIMES,
    MODE_ERDOS,
    MODE_POLY,
    MODE_THEOREM1,
    MODE_THEOREM2,
)
from .pyarith import Arithmetic, Congruence, Factorization

_LOGGER = logging.getLogger(__name__)

# square-root combinations kept as alternative residues of a quadratic system
ALTERNATIVE_CAP = 64
# largest prime power whose root count is found by scanning residues
PRIME_POWER_SCAN_LIMIT = 1 << 20

LINEAR = "linear"
QUADRATIC = "quadratic"


@dataclass(frozen=True)
class CofactorRow:
    """Integer polynomial c0 + c1 s + c2 s^2 whose values must be rough."""

    coefficients: tuple
    label: str = ""

    @property
    def degree(self) -> int:
        degree = len(self.coefficients) - 1
        while degree > 0 and self.coefficients[degree] == 0:
            degree -= 1
        return degree

    def value(self, s: int) -> int:
        result = 0
        for c in reversed(self.coefficients):
            result = result * s + c
        return result

    def roots_mod(self, p: int, arith: Arithmetic):
        """Roots in [0, p) of the row mod a prime p; None when it vanishes identically."""
        c = [x % p for x in self.coefficients] + [0, 0]
        c0, c1, c2 = c[0], c[1], c[2]
        if c0 == c1 == c2 == 0:
            return None
        if p == 2:
            return [s for s in (0, 1) if (c0 + c1 * s + c2 * s * s) % 2 == 0]
        if c2 == 0:
            if c1 == 0:
                return []
            return [(-c0 * int(gmpy2.invert(c1, p))) % p]
        disc = (c1 * c1 - 4 * c2 * c0) % p
        inverse = int(gmpy2.invert(2 * c2, p))
        if disc == 0:
            return [(-c1 * inverse) % p]
        return sorted({((-c1 + r) * inverse) % p for r in arith.prime_sqrt(disc, p)})


@dataclass(frozen=True)
class LinearSystem:
    """Rows of the reduced congruence m = h (mod N) and their cofactor polynomials."""

    forms: tuple
    L: int
    moduli: tuple
    extras: tuple
    solution: Congruence
    rows: tuple
    planned: tuple
    mode: str = LINEAR
    prime_form_index: int | None = None
    alternatives: tuple = ()

    @property
    def h(self) -> int:
        return self.solution.residue

    @property
    def N(self) -> int:
        return self.solution.modulus

    def m_of(self, s: int) -> int:
        return self.h + s * self.N

    @property
    def sieve_rows(self) -> tuple:
        return tuple(
            row
            for index, row in enumerate(self.rows)
            if index != self.prime_form_index
        )

    @property
    def prime_form(self):
        """(q, r) with q s + r the cofactor that must be prime, if any."""
        if self.prime_form_index is None:
            return None
        row = self.rows[self.prime_form_index]
        return row.coefficients[1], row.coefficients[0]

    def arguments(self, m: int) -> list:
        if self.mode == QUADRATIC:
            return [m * m + c for c in self.forms]
        return [a * m + b for a, b in self.forms]

    @classmethod
    def from_rows(cls, rows, label: str = "toy") -> LinearSystem:
        """A bare system over m = s whose cofactors are the given rows."""
        rows = tuple(
            row if isinstance(row, CofactorRow) else CofactorRow(tuple(row), label)
            for row in rows
        )
        return cls(
            forms=(),
            L=1,
            moduli=(),
            extras=(),
            solution=Congruence(0, 1),
            rows=rows,
            planned=tuple(1 for _ in rows),
        )


def _modulus_value(n) -> int:
    return n.value if isinstance(n, Factorization) else int(n)


def assemble_system(
    forms,
    moduli,
    L: int = 1,
    extras=(),
    prime_form_index: int | None = None,
    arith: Arithmetic | None = None,
) -> LinearSystem:
    """Reduce L | m and n_i | a_i m + b_i to one congruence and cofactor rows."""
    arith = arith or Arithmetic()
    forms = tuple((int(a), int(b)) for a, b in forms)
    moduli = tuple(_modulus_value(n) for n in moduli)
    if len(forms) != len(moduli):
        raise ConstructionFailed(
            f"{len(forms)} forms but {len(moduli)} moduli", stage="assemble"
        )
    congruences = [Congruence(0, L)]
    for (a, b), n in zip(forms, moduli):
        if n == 1:
            continue
        if math.gcd(a, n) != 1:
            raise ConstructionFailed(
                f"a={a} is not invertible modulo {n}", stage="assemble"
            )
        congruences.append(Congruence.of(-b * int(gmpy2.invert(a, n)), n))
    congruences.extend(extras)
    try:
        solution = arith.crt_solve(congruences)
    except IncompatibleCongruences as err:
        raise err.annotate(stage="assemble")

    rows, planned = [], []
    h, N = solution.residue, solution.modulus
    for (a, b), n in zip(forms, moduli):
        D = abs(b) * n if b else a * L * n
        if (a * h + b) % D or (a * N) % D:
            raise ConstructionFailed(
                f"planned part {D} does not divide {a}m{b:+d}", stage="assemble"
            )
        rows.append(CofactorRow(((a * h + b) // D, (a * N) // D), f"({a}m{b:+d})/{D}"))
        planned.append(D)
    return LinearSystem(
        forms=forms,
        L=L,
        moduli=moduli,
        extras=tuple(extras),
        solution=solution,
        rows=tuple(rows),
        planned=tuple(planned),
        prime_form_index=prime_form_index,
    )


def _square_roots(a: int, n: Factorization, arith: Arithmetic) -> list:
    try:
        return arith.modular_sqrt(a, n, max_roots=ALTERNATIVE_CAP)
    except ResourceExhausted:
        # too many combinations: keep the one built from the least root per prime
        single = [Congruence(arith.prime_sqrt(a, p)[0], p) for p in n.primes]
        return [arith.crt_solve(single).residue]


def assemble_quadratic(
    constants, moduli, parity: int = 2, arith: Arithmetic | None = None
) -> LinearSystem:
    """parity | m and n_t | m^2 + c_t, with rows (m^2 + c_t)/(n_t gcd(parity^2, c_t))."""
    arith = arith or Arithmetic()
    choices = []
    for c, n in zip(constants, moduli):
        if n.value == 1:
            continue
        try:
            roots = _square_roots(-c % n.value, n, arith)
        except UnsupportedInput as err:
            raise ConstructionFailed(str(err), stage="assemble", **err.context)
        if not roots:
            raise ConstructionFailed(
                f"m^2 + {c} = 0 has no solution modulo {n.value}",
                stage="assemble",
                modulus=n.value,
            )
        choices.append([Congruence(r, n.value) for r in roots])

    alternatives = sorted(
        {
            arith.crt_solve([Congruence(0, parity)] + list(choice))
            for choice in itertools.islice(itertools.product(*choices), ALTERNATIVE_CAP)
        },
        key=lambda congruence: congruence.residue,
    )
    solution = alternatives[0]
    h, N = solution.residue, solution.modulus

    rows, planned = [], []
    for c, n in zip(constants, moduli):
        D = n.value * math.gcd(parity * parity, c)
        coefficients = (h * h + c, 2 * h * N, N * N)
        if any(x % D for x in coefficients):
            raise ConstructionFailed(
                f"planned part {D} does not divide m^2 + {c}", stage="assemble"
            )
        rows.append(CofactorRow(tuple(x // D for x in coefficients), f"(m^2+{c})/{D}"))
        planned.append(D)
    return LinearSystem(
        forms=tuple(constants),
        L=parity,
        moduli=tuple(n.value for n in moduli),
        extras=(),
        solution=solution,
        rows=tuple(rows),
        planned=tuple(planned),
        mode=QUADRATIC,
        alternatives=tuple(alternatives),
    )


def prime_roots(system: LinearSystem, p: int, arith: Arithmetic):
    """Sorted roots of P(s) mod p, or None when every s is a root."""
    roots = set()
    for row in system.sieve_rows:
        row_roots = row.roots_mod(p, arith)
        if row_roots is None:
            return None
        roots.update(row_roots)
    return sorted(roots)


def omega(system: LinearSystem, d: int, arith: Arithmetic | None = None) -> int:
    """#{0 <= s < d : P(s) = 0 mod d}, multiplied out over prime powers."""
    arith = arith or Arithmetic()
    if d < 1:
        raise ParameterRejected(f"omega needs d >= 1, got {d}")
    count = 1
    for p, e in arith.require_complete(d).factors:
        if e == 1:
            roots = prime_roots(system, p, arith)
            count *= p if roots is None else len(roots)
            continue
        q = p**e
        if q > PRIME_POWER_SCAN_LIMIT:
            raise ResourceExhausted(
                f"root count modulo {p}^{e} needs a scan of {q} residues",
                limit=PRIME_POWER_SCAN_LIMIT,
            )
        count *= sum(1 for s in range(q) if _product_mod(system, s, q) == 0)
    return count


def _product_mod(system: LinearSystem, s: int, d: int) -> int:
    result = 1
    for row in system.sieve_rows:
        result = result * row.value(s) % d
    return result


def remainder_term(system: LinearSystem, d: int, s_range: range, arith=None) -> Fraction:
    """#{s in range : d | P(s)} - omega(d)/d * |range|, exactly."""
    hits = sum(1 for s in s_range if _product_mod(system, s, d) == 0)
    return hits - Fraction(omega(system, d, arith), d) * len(s_range)


def sieve_limit(kappa: int):
    """(beta_kappa, authoritative)"""
    if kappa in BETA_TABLE:
        return BETA_TABLE[kappa], True
    _LOGGER.warning(
        f"no recorded sieve limit for dimension {kappa}, using placeholder "
        f"{BETA_PLACEHOLDER_FACTOR * kappa}"
    )
    return BETA_PLACEHOLDER_FACTOR * kappa, False


def exponent_threshold(
    mode: str,
    k: int,
    delta: float = 1.0,
    lam: float = 0.45,
    A: int = 1,
    a1: int | None = None,
    eh: bool = False,
    gamma_assumed: float = DEFAULT_GAMMA_ASSUMED,
    gamma_prime_assumed: float = DEFAULT_GAMMA_PRIME_ASSUMED,
    via_theorem1: bool = False,
    h: int | None = None,
) -> float:
    """Supremum of the admissible exponents c for a mode."""
    if mode == MODE_THEOREM1:
        if k == 1 and a1 in (1, 2):
            return delta * lam
        return delta * lam / (A * k + lam * sieve_limit(k)[0])
    if mode == MODE_THEOREM2:
        if via_theorem1:
            return delta * lam / (A * (k + 1) + lam * sieve_limit(k + 1)[0])
        if k == 1:
            return delta * lam / (1 + (2 if eh else 4) * lam)
        return delta * lam / (A * k + lam * sieve_limit(k + 1)[0])
    if mode == MODE_ERDOS:
        if h is not None:
            share = 1 - gamma_assumed
            return share / (h + share * sieve_limit(h + 1)[0])
        return (1 - gamma_assumed) / (5 - 4 * gamma_assumed)
    if mode == MODE_POLY:
        share = 1 - gamma_prime_assumed
        return share / (1 + share * sieve_limit(2)[0])
    raise ParameterRejected(f"unknown mode '{mode}'", key="mode")


@dataclass(frozen=True)
class SieveConfig:
    mu: float
    epsilon: float
    z: int
    kappa: int
    beta: float
    c0: float
    segment_size: int = DEFAULT_SEGMENT_SIZE
    require_prime_form: tuple | None = None
    beta_authoritative: bool = True
    xi_prime: float = 0.0
    max_z: int = DEFAULT_MAX_Z
    workers: int = DEFAULT_WORKERS
    shortcut: bool = False

    def with_modulus(self, N: int) -> SieveConfig:
        """z = N^c0, capped at max_z."""
        if self.c0 <= 0:
            return replace(self, z=1)
        z = self.max_z
        if math.log(N) * self.c0 < math.log(self.max_z):
            z = max(1, math.ceil(math.exp(self.c0 * math.log(N))))
        return replace(self, z=z)

    def factor_count_bound(self) -> int | None:
        """floor((1 + mu)/c0 + 1), the prime-factor bound for a rough cofactor."""
        if self.c0 <= 0:
            return None
        return math.floor((1 + self.mu) / self.c0 + 1)


def choose_parameters(
    k: int,
    delta: float,
    lambda_eff: float,
    A: int,
    epsilon: float,
    mode: str = MODE_THEOREM1,
    a1: int | None = None,
    xi_prime: float | None = None,
    eh: bool = False,
    max_z: int = DEFAULT_MAX_Z,
    segment_size: int = DEFAULT_SEGMENT_SIZE,
    workers: int = DEFAULT_WORKERS,
):
    """(SieveConfig, predicted c) for a run of the given shape."""
    if not 0 < epsilon < 1 / 3:
        raise ParameterRejected(
            f"epsilon={epsilon} must lie in (0, 1/3)", key=CONF_EPSILON
        )
    if xi_prime is None:
        xi_prime = DEFAULT_XI_PRIME_SHARE * lambda_eff / A
    common = dict(
        epsilon=epsilon,
        xi_prime=xi_prime,
        max_z=max_z,
        segment_size=segment_size,
        workers=workers,
        z=1,
    )

    if mode == MODE_THEOREM1 and k == 1 and a1 in (1, 2):
        config = SieveConfig(mu=0.0, kappa=1, beta=2.0, c0=0.0, shortcut=True, **common)
        return config, delta * xi_prime

    if mode in (MODE_THEOREM2, MODE_ERDOS) and k == 1:
        # prime-form variant: the second row must be a prime q s + r
        level = (1 - epsilon) if eh else (0.5 - epsilon)
        mu = 2 * xi_prime / (level * (1 - epsilon))
        c0 = mu * level * (1 - epsilon) / 2
        config = SieveConfig(mu=mu, kappa=1, beta=2.0, c0=c0, **common)
        return config, delta * xi_prime / (1 + mu)

    if mode == MODE_POLY:
        kappa, rows = 2, 1
    elif mode == MODE_THEOREM1:
        kappa, rows = k, k
    else:
        kappa, rows = k + 1, k
    beta, authoritative = sieve_limit(kappa)
    mu = xi_prime * beta / (rows * (1 - 3 * epsilon))
    c0 = mu * (1 - 2 * epsilon) * (1 - epsilon) / beta
    predicted = delta * xi_prime / (rows + xi_prime * beta / (1 - 3 * epsilon))
    config = SieveConfig(
        mu=mu,
        kappa=kappa,
        beta=beta,
        c0=c0,
        beta_authoritative=authoritative,
        **common,
    )
    return config, predicted


def search_window(N: int, mu: float, limit: int, shifted: bool = False):
    """(range of s, truncated) for 1 <= s <= N^mu, or N^mu < s <= 2N^mu when shifted."""
    log_scale = mu * math.log(N)
    if log_scale < math.log(limit):
        scale = max(1, math.ceil(math.exp(log_scale)))
        if shifted:
            return range(scale + 1, 2 * scale + 1), False
        return range(1, scale + 1), False
    _LOGGER.warning(
        f"search range N^mu = e^{log_scale:.1f} truncated to {limit} values of s"
    )
    return range(1, limit + 1), True


@dataclass(frozen=True)
class Survivor:
    s: int
    m: int
    cofactors: tuple
    smooth_parts: tuple = field(default=(), repr=False)


class RoughSieve(object):
    """Segment sieve of P(s) over a range of s"""

    def __init__(self, system: LinearSystem, config: SieveConfig, arith=None, opts=None):
        if opts is None:
            opts = {}
        self._system = system
        self._config = config
        self._arith = arith or Arithmetic()
        self._memory = int(opts.get(CONF_SIEVE_MEMORY, DEFAULT_SIEVE_MEMORY))
        self._table = None

    def root_table(self) -> list:
        """(p, roots) for every prime p <= z with at least one root."""
        if self._table is None:
            table = []
            if self._config.z >= 2:
                for p in self._arith.sieve_primes(self._config.z):
                    roots = prime_roots(self._system, p, self._arith)
                    if roots is None:
                        table.append((p, None))
                    elif roots:
                        table.append((p, np.array(roots, dtype=np.int64)))
            self._table = table
        return self._table

    def _segment(self, bounds):
        low, high = bounds
        alive = np.ones(high - low, dtype=bool)
        for p, roots in self.root_table():
            if roots is None:
                return []
            for start in ((roots - low) % p).tolist():
                alive[start::p] = False
        return (np.flatnonzero(alive) + low).tolist()

    def search(self, s_range: range) -> list:
        if len(s_range) == 0:
            return []
        if s_range.step != 1:
            raise ParameterRejected("s_range must be contiguous")
        size = self._config.segment_size
        if size > self._memory:
            raise ResourceExhausted(
                f"segment of {size} flags exceeds the memory budget {self._memory}; "
                "use a smaller segment_size",
                segment_size=size,
                budget=self._memory,
            )
        self.root_table()
        segments = [
            (low, min(low + size, s_range.stop))
            for low in range(s_range.start, s_range.stop, size)
        ]
        if self._config.workers > 1 and len(segments) > 1:
            with ThreadPoolExecutor(max_workers=self._config.workers) as pool:
                parts = list(pool.map(self._segment, segments))
        else:
            parts = [self._segment(bounds) for bounds in segments]

        prime_form = self._config.require_prime_form or self._system.prime_form
        survivors = []
        for s in itertools.chain.from_iterable(parts):
            if prime_form is not None:
                q, r = prime_form
                if not self._arith.is_prime(q * s + r):
                    continue
            survivors.append(
                Survivor(
                    s=s,
                    m=self._system.m_of(s),
                    cofactors=tuple(row.value(s) for row in self._system.rows),
                    smooth_parts=tuple(Factorization(1) for _ in self._system.rows),
                )
            )
        return survivors


def segmented_rough_search(
    system: LinearSystem, config: SieveConfig, s_range: range, arith=None, opts=None
) -> list:
    return RoughSieve(system, config, arith, opts).search(s_range)


def sieve_density(system: LinearSystem, z: int, arith=None) -> float:
    """prod over p <= z of (1 - omega(p)/p)"""
    arith = arith or Arithmetic()
    density = 1.0
    if z < 2:
        return density
    for p in arith.sieve_primes(z):
        roots = prime_roots(system, p, arith)
        count = p if roots is None else len(roots)
        density *= 1 - count / p
    return density


def density_report(
    system: LinearSystem, config: SieveConfig, s_range: range, observed: int, arith=None
) -> dict:
    """Observed survivors against X * prod(1 - omega(p)/p)."""
    arith = arith or Arithmetic()
    prime_form = config.require_prime_form or system.prime_form
    if prime_form is not None:
        q, r = prime_form
        phi = arith.totient(arith.require_complete(q))
        X = float(li(q * (s_range.stop - 1) + r) - li(q * s_range.start + r)) / phi
    else:
        X = float(len(s_range))
    predicted = X * sieve_density(system, config.z, arith)
    ratio = observed / predicted if predicted > 0 else math.inf
    sane = 1 / DENSITY_TOLERANCE <= ratio <= DENSITY_TOLERANCE
    if not sane:
        _LOGGER.warning(
            f"survivor density off: observed {observed}, predicted {predicted:.1f}"
        )
    return {
        "observed": observed,
        "predicted": predicted,
        "ratio": ratio,
        "sane": sane,
    }


def dimension_constant(system: LinearSystem, kappa: int, z: int, arith=None) -> float:
    """Least A with prod_{v<=p<w}(1-omega(p)/p)^-1 <= (log w/log v)^kappa (1 + A/log v)."""
    arith = arith or Arithmetic()
    if z < 3:
        return 0.0
    primes = np.array(arith.sieve_primes(z), dtype=np.float64)
    counts = []
    for p in primes.astype(np.int64).tolist():
        roots = prime_roots(system, p, arith)
        counts.append(p if roots is None else len(roots))
    counts = np.array(counts, dtype=np.float64)
    if np.any(counts >= primes):
        return math.inf
    # S[i] = sum_{t < i} -log(1 - omega(p_t)/p_t)
    S = np.concatenate(([0.0], np.cumsum(-np.log1p(-counts / primes))))
    indices = np.arange(len(primes))
    if len(primes) > DIMENSION_EXHAUSTIVE_PRIMES:
        grid = np.unique(
            np.geomspace(1, len(primes), DIMENSION_EXHAUSTIVE_PRIMES).astype(np.int64) - 1
        )
        indices = grid
    logs = np.log(primes[indices])
    worst = 0.0
    for position in range(len(indices) - 1):
        i = indices[position]
        j = indices[position + 1 :]
        log_v = logs[position]
        ratio = np.exp(S[j] - S[i]) / (logs[position + 1 :] / log_v) ** kappa
        worst = max(worst, float((log_v * (ratio - 1)).max()))
    return worst
