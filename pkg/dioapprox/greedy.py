"""Greedy moduli n_0 | n_1 | ... approximating a target value of f."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
import logging
import math

import gmpy2

from . import (
    InsufficientPrimes,
    ParameterRejected,
    RefinementFailed,
    Verdict,
    Violation,
)
from .additive import AdditiveFunction, evaluate
from .const import CONF_ETA, DEFAULT_BASE_FILL
from .ladder import PrimePartition
from .pyarith import Arithmetic, Factorization
from .reals import real, real_context, real_str, slack

_LOGGER = logging.getLogger(__name__)


def check_eta(eta, v0, xi, gammas, xi_prime=None) -> Verdict:
    """0 < eta < min(v0, 6^(-1/xi), gammas) and, with xi', (eta/2)^xi' > eta^xi."""
    violations = []
    bounds = {"v0": v0, "six": 6 ** (-1 / xi)}
    for i, gamma in enumerate(gammas):
        bounds[f"gamma_{i}"] = gamma
    if not eta > 0:
        violations.append(Violation("eta", f"eta={eta} must be positive", {}))
    for name, bound in bounds.items():
        if not eta < bound:
            violations.append(
                Violation(
                    "eta",
                    f"eta={eta} is not below {name}={float(bound):.6g}",
                    {"bound": name},
                )
            )
    if xi_prime is not None and eta > 0:
        if not xi_prime < xi:
            violations.append(
                Violation("etaxi", f"xi'={xi_prime} must be below xi={xi}", {})
            )
        elif not (eta / 2) ** xi_prime > eta**xi:
            violations.append(
                Violation(
                    "etaxi",
                    f"(eta/2)^xi' <= eta^xi for xi'={xi_prime}",
                    {"xi_prime": xi_prime},
                )
            )
    return Verdict.collect(violations)


def prime_limit_for(f: AdditiveFunction, eta) -> int:
    """A prime bound past which every value of f is below eta/4."""
    return max(int(2 * (4 * f.C / float(eta)) ** (1 / f.delta)), 100)


def build_base(
    f: AdditiveFunction,
    gamma,
    eta,
    allowed_primes,
    forbidden_primes=(),
    fill: float = DEFAULT_BASE_FILL,
) -> Factorization:
    """Squarefree n_0 with gamma - fill*eta < f(n_0) < gamma - eta/2.

    Primes are taken largest value first, skipping any that would pass
    gamma - eta/2, so tau_0 = gamma - f(n_0) lands in (eta/2, fill*eta).
    """
    if not gamma > eta:
        raise ParameterRejected(f"gamma must exceed eta={eta}", key=CONF_ETA)
    if not 0.5 < fill <= 1:
        raise ParameterRejected(f"base fill {fill} must lie in (1/2, 1]", key=CONF_ETA)
    forbidden = set(forbidden_primes)
    with real_context(f.precision):
        gamma = real(gamma, f.precision)
        eta = real(eta, f.precision)
        low = gamma - real(fill, f.precision) * eta
        high = gamma - eta / 2
        candidates = [
            (f.prime_value(p), p)
            for p in allowed_primes
            if p not in forbidden and f.allows(p)
        ]
        candidates.sort(key=lambda pair: (-pair[0], pair[1]))

        total = gmpy2.mpfr(0)
        chosen = []
        for value, p in candidates:
            if total > low:
                break
            if value <= 0:
                continue
            if total + value < high:
                total += value
                chosen.append(p)

        if not total > low:
            raise InsufficientPrimes(
                f"allowed primes reach only {real_str(total, 64)} of "
                f"{real_str(low, 64)}",
                deficit=real_str(low - total, 64),
                available=len(candidates),
            )
    return Factorization.of_primes(chosen)


@dataclass(frozen=True)
class GreedyState:
    function: AdditiveFunction
    gamma: object
    eta: object
    xi: float
    base: Factorization
    tau0: object
    chain: tuple = ()
    used: frozenset = field(default_factory=frozenset)

    @property
    def j(self) -> int:
        return len(self.chain)

    @property
    def tau(self):
        return self.chain[-1][1] if self.chain else self.tau0

    @property
    def primes(self) -> list:
        return self.base.primes + [p for p, _ in self.chain]

    @property
    def factorization(self) -> Factorization:
        return Factorization.of_primes(self.primes)

    @property
    def modulus(self) -> int:
        return self.factorization.value

    def records(self) -> dict:
        precision = self.function.precision
        return {
            "j": self.j,
            "n": str(self.modulus),
            "factors": [str(p) for p in self.primes],
            "value": real_str(evaluate(self.function, self.factorization), precision),
            "tau": real_str(self.tau, precision),
            "bound": real_str(error_bound(self.eta, self.xi, self.j, precision), precision),
        }


def start_state(f: AdditiveFunction, gamma, eta, xi, base: Factorization) -> GreedyState:
    with real_context(f.precision):
        gamma = real(gamma, f.precision)
        eta = real(eta, f.precision)
        value = evaluate(f, base)
    with real_context(f.precision, gmpy2.RoundUp):
        tau0 = gamma - value
    return GreedyState(
        function=f,
        gamma=gamma,
        eta=eta,
        xi=xi,
        base=base,
        tau0=tau0,
        used=frozenset(base.primes),
    )


def refine_step(state: GreedyState, partition_column) -> GreedyState:
    """Append the partition prime closest to tau - tau^(1+xi) from below."""
    f = state.function
    tau = state.tau
    if not tau > 0:
        raise RefinementFailed(f"tau={real_str(tau, 64)} is not positive", j=state.j)
    with real_context(f.precision):
        power = tau ** (1 + real(state.xi, f.precision))
        hi = tau - power
        lo = tau - 3 * power
        best = None
        for p in partition_column:
            if p in state.used:
                continue
            value = f.prime_value(p)
            if lo < value <= hi and (best is None or value > best[0]):
                best = (value, p)
        if best is None:
            raise RefinementFailed(
                f"no partition prime with f in ({real_str(lo, 64)}, {real_str(hi, 64)}]",
                j=state.j,
                window=[real_str(lo, 64), real_str(hi, 64)],
            )
        value, p = best
    with real_context(f.precision, gmpy2.RoundUp):
        new_tau = tau - value
    return replace(
        state,
        chain=state.chain + ((p, new_tau),),
        used=state.used | {p},
    )


@dataclass(frozen=True)
class ModulusSequence:
    index: int
    snapshots: tuple

    @property
    def moduli(self) -> list:
        return [state.modulus for state in self.snapshots]

    @property
    def final(self) -> GreedyState:
        return self.snapshots[-1]

    def at(self, j: int) -> GreedyState:
        return self.snapshots[j]


def construct_sequence(
    f: AdditiveFunction,
    gamma,
    eta,
    partition: PrimePartition,
    i: int,
    J: int,
    forbidden_primes=(),
    prime_limit: int | None = None,
    arith: Arithmetic | None = None,
) -> ModulusSequence:
    """Base from residual primes, then J refinements from column i."""
    arith = arith or Arithmetic()
    limit = prime_limit or prime_limit_for(f, eta)
    allowed = partition.residual_primes(limit, arith)
    base = build_base(f, gamma, eta, allowed, forbidden_primes)
    state = start_state(f, gamma, eta, partition.ladder.xi, base)
    snapshots = [state]
    column = partition.column(i)
    for _ in range(J):
        state = refine_step(state, column)
        snapshots.append(state)
    return ModulusSequence(i, tuple(snapshots))


def construct_all(
    functions, gammas, eta, partition: PrimePartition, J: int, forbidden=(), arith=None
) -> list:
    """One sequence per function with pairwise disjoint prime supports."""
    arith = arith or Arithmetic()
    sequences = []
    forbidden = set(forbidden)
    for i, (f, gamma) in enumerate(zip(functions, gammas)):
        sequence = construct_sequence(
            f, gamma, eta, partition, i, J, forbidden_primes=forbidden, arith=arith
        )
        forbidden.update(sequence.final.primes)
        sequences.append(sequence)
    return sequences


def error_bound(eta, xi, j: int, precision: int):
    """3^j eta^((1+xi)^j), rounded up."""
    with real_context(precision, gmpy2.RoundUp):
        eta = real(eta, precision, gmpy2.RoundUp)
        return gmpy2.mpfr(3) ** j * eta ** (real(1 + xi, precision) ** j)


def size_bound(f: AdditiveFunction, eta, xi, j: int, base: int) -> int:
    """ceil((2C)^(j/delta) n_0 / (eta/2)^((1+xi)^j/(delta xi)))"""
    precision = f.precision
    with real_context(precision, gmpy2.RoundUp):
        delta = real(f.delta, precision)
        growth = (2 * real(f.C, precision)) ** (j / delta)
        exponent = real(1 + xi, precision) ** j / (delta * real(xi, precision))
    with real_context(precision, gmpy2.RoundDown):
        shrink = (real(eta, precision) / 2) ** exponent
    with real_context(precision, gmpy2.RoundUp):
        return int(gmpy2.ceil(growth * base / shrink))


def certify_sequence(
    sequence: ModulusSequence, K: int = 1, arith: Arithmetic | None = None
) -> Verdict:
    """Re-derive every snapshot invariant from a fresh factorization."""
    arith = arith or Arithmetic()
    violations = []
    previous = None
    for state in sequence.snapshots:
        f = state.function
        precision = f.precision
        eps = slack(precision)
        fac = arith.factorize(state.modulus)
        if not fac.complete:
            return Verdict.collect(violations, inconclusive=True)
        with real_context(precision):
            tau = state.gamma - evaluate(f, fac)
            context = {"i": sequence.index, "j": state.j}
            if abs(tau - state.tau) > eps:
                violations.append(
                    Violation("tau_drift", "recorded tau disagrees", context)
                )
            if not 0 < tau <= error_bound(state.eta, state.xi, state.j, precision) + eps:
                violations.append(
                    Violation("error_bound", "tau exceeds 3^j eta^((1+xi)^j)", context)
                )
            if previous is None:
                if not state.eta / 2 - eps < tau < state.eta + eps:
                    violations.append(
                        Violation("base_window", "tau_0 outside (eta/2, eta)", context)
                    )
            else:
                power = previous ** (1 + real(state.xi, precision))
                if not power - eps <= tau < 3 * power + eps:
                    violations.append(
                        Violation("recursion", "tau_j outside the recursion", context)
                    )
            previous = tau
        if not fac.is_squarefree() or any(p <= K for p in fac.primes):
            violations.append(
                Violation("support", "modulus not squarefree above K", context)
            )
        if state.modulus > size_bound(f, state.eta, state.xi, state.j, state.base.value):
            violations.append(Violation("size", "n_j exceeds the size bound", context))
    moduli = sequence.moduli
    for j in range(1, len(moduli)):
        if moduli[j] % moduli[j - 1]:
            violations.append(
                Violation("divisibility", f"n_{j - 1} does not divide n_{j}", {"j": j})
            )
    return Verdict.collect(violations)


def coprime_moduli(sequences, j: int) -> bool:
    moduli = [sequence.at(j).modulus for sequence in sequences]
    return all(
        math.gcd(a, b) == 1
        for index, a in enumerate(moduli)
        for b in moduli[index + 1 :]
    )
