"""
exact integer arithmetic consumed by every other stage.

every method is a pure function of its arguments; the only shared state is the
class-level prime table, which readers access without locking and which is
only ever replaced (never mutated) under _prime_lock.
"""

from dataclasses import dataclass
from functools import reduce
import itertools
import math
import operator
import random
import threading

import gmpy2
import numpy as np
from sympy.ntheory.residue_ntheory import sqrt_mod

from .. import (
    IncompatibleCongruences,
    IncompleteFactorization,
    ResourceExhausted,
    UnsupportedInput,
)
from ..const import (
    CONF_RHO_ATTEMPTS,
    CONF_RHO_ITERATIONS,
    CONF_SEED,
    CONF_SIEVE_MEMORY,
    CONF_TRIAL_BOUND,
    DEFAULT_RHO_ATTEMPTS,
    DEFAULT_RHO_ITERATIONS,
    DEFAULT_SEED,
    DEFAULT_SIEVE_MEMORY,
    DEFAULT_TRIAL_BOUND,
    DETERMINISTIC_PRIMALITY_BASES,
    DETERMINISTIC_PRIMALITY_LIMIT,
    PROBABILISTIC_PRIMALITY_ROUNDS,
)

# primes per gcd block used by trial division of large cofactors
TRIAL_BLOCK = 256
# batch size of the Brent rho gcd accumulation
RHO_BATCH = 128


@dataclass(frozen=True)
class Factorization:
    """Prime-power decomposition of a positive integer.

    `unfactored` holds composite cofactors left over when the effort budget
    ran out; a factorization is complete only when it is empty.
    """

    value: int
    factors: tuple = ()
    unfactored: tuple = ()

    @property
    def complete(self):
        return not self.unfactored

    @property
    def primes(self):
        return [p for p, _ in self.factors]

    def product(self):
        result = 1
        for p, v in self.factors:
            result *= p**v
        for cofactor in self.unfactored:
            result *= cofactor
        return result

    def is_squarefree(self):
        return self.complete and all(v == 1 for _, v in self.factors)

    def exponent(self, p):
        for q, v in self.factors:
            if q == p:
                return v
        return 0

    def multiply(self, other):
        """Factorization of self.value * other.value."""
        merged = {}
        for p, v in itertools.chain(self.factors, other.factors):
            merged[p] = merged.get(p, 0) + v
        return Factorization(
            self.value * other.value,
            tuple(sorted(merged.items())),
            tuple(sorted(self.unfactored + other.unfactored)),
        )

    def records(self):
        return {
            "value": str(self.value),
            "factors": [[str(p), v] for p, v in self.factors],
            "unfactored": [str(c) for c in self.unfactored],
        }

    @classmethod
    def from_records(cls, records):
        return cls(
            int(records["value"]),
            tuple((int(p), int(v)) for p, v in records.get("factors", [])),
            tuple(int(c) for c in records.get("unfactored", [])),
        )

    @classmethod
    def of_primes(cls, primes):
        primes = sorted(primes)
        return cls(reduce(operator.mul, primes, 1), tuple((p, 1) for p in primes))

    def __str__(self):
        if self.value == 1:
            return "1"
        parts = [f"{p}^{v}" if v > 1 else f"{p}" for p, v in self.factors]
        parts += [f"[{c}]" for c in self.unfactored]
        return " * ".join(parts)


@dataclass(frozen=True)
class Congruence:
    """x = residue (mod modulus) with 0 <= residue < modulus."""

    residue: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError(f"modulus must be positive, got {self.modulus}")
        if not 0 <= self.residue < self.modulus:
            raise ValueError(
                f"residue {self.residue} outside [0, {self.modulus})"
            )

    @classmethod
    def of(cls, residue, modulus):
        return cls(int(residue) % int(modulus), int(modulus))

    def holds(self, x):
        return (x - self.residue) % self.modulus == 0

    def __str__(self):
        return f"{self.residue} mod {self.modulus}"


class Arithmetic(object):
    """Exact arithmetic toolkit"""

    _prime_lock = threading.Lock()
    _prime_limit = 1
    _prime_table = np.zeros(0, dtype=np.int64)
    _block_products = ()

    def __init__(self, opts=None):
        """Arithmetic initializer."""

        if opts is None:
            opts = {}

        self._opts = opts
        self._seed = int(opts.get(CONF_SEED, DEFAULT_SEED))
        self._trial_bound = int(opts.get(CONF_TRIAL_BOUND, DEFAULT_TRIAL_BOUND))
        self._rho_iterations = int(
            opts.get(CONF_RHO_ITERATIONS, DEFAULT_RHO_ITERATIONS)
        )
        self._rho_attempts = int(opts.get(CONF_RHO_ATTEMPTS, DEFAULT_RHO_ATTEMPTS))
        self._sieve_memory = int(opts.get(CONF_SIEVE_MEMORY, DEFAULT_SIEVE_MEMORY))

    @property
    def seed(self):
        return self._seed

    @property
    def trial_bound(self):
        return self._trial_bound

    def _simple_sieve(self, limit):
        is_prime = np.ones(limit + 1, dtype=bool)
        is_prime[:2] = False
        for p in range(2, math.isqrt(limit) + 1):
            if is_prime[p]:
                is_prime[p * p :: p] = False
        return np.flatnonzero(is_prime).astype(np.int64)

    def _primes_upto(self, limit):
        if limit > self._sieve_memory:
            raise ResourceExhausted(
                f"sieve limit {limit} exceeds memory budget {self._sieve_memory}",
                limit=limit,
                budget=self._sieve_memory,
            )
        table = Arithmetic._prime_table
        if Arithmetic._prime_limit < limit:
            with Arithmetic._prime_lock:
                if Arithmetic._prime_limit < limit:
                    # grow geometrically so repeated small extensions stay cheap
                    new_limit = min(
                        max(limit, 2 * Arithmetic._prime_limit), self._sieve_memory
                    )
                    Arithmetic._prime_table = self._simple_sieve(new_limit)
                    Arithmetic._block_products = ()
                    Arithmetic._prime_limit = new_limit
                table = Arithmetic._prime_table
        return table[: np.searchsorted(table, limit, side="right")]

    def sieve_primes(self, limit):
        """Primes <= limit in ascending order."""
        if limit < 2:
            raise ValueError(f"limit must be at least 2, got {limit}")
        return self._primes_upto(int(limit)).tolist()

    def primes_between(self, low, high):
        """Primes p with low < p <= high, ascending."""
        if high <= 2 * self._trial_bound:
            primes = self._primes_upto(max(int(high), 2))
            start = np.searchsorted(primes, low, side="right")
            return primes[start:].tolist()
        result = []
        p = self.next_prime(low)
        while p <= high:
            result.append(p)
            p = self.next_prime(p)
        return result

    def _is_probable_prime(self, n):
        if n < DETERMINISTIC_PRIMALITY_LIMIT:
            return all(gmpy2.is_strong_prp(n, a) for a in DETERMINISTIC_PRIMALITY_BASES)
        rng = random.Random(self._seed * 1_000_003 + n)
        if not gmpy2.is_strong_prp(n, 2):
            return False
        for _ in range(PROBABILISTIC_PRIMALITY_ROUNDS):
            if not gmpy2.is_strong_prp(n, rng.randrange(3, n - 1)):
                return False
        return True

    def is_prime(self, n):
        n = int(n)
        if n < 2:
            return False
        for p in DETERMINISTIC_PRIMALITY_BASES:
            if n == p:
                return True
            if n % p == 0:
                return False
        if n < 43 * 43:
            return True
        return self._is_probable_prime(gmpy2.mpz(n))

    def next_prime(self, n):
        """Smallest prime > n."""
        candidate = int(gmpy2.next_prime(max(int(n), 1)))
        while not self.is_prime(candidate):
            candidate = int(gmpy2.next_prime(candidate))
        return candidate

    def _blocks(self, primes):
        blocks = Arithmetic._block_products
        if len(blocks) * TRIAL_BLOCK < len(primes):
            blocks = tuple(
                (
                    int(primes[i]),
                    reduce(
                        operator.mul,
                        (gmpy2.mpz(int(p)) for p in primes[i : i + TRIAL_BLOCK]),
                        gmpy2.mpz(1),
                    ),
                    primes[i : i + TRIAL_BLOCK].tolist(),
                )
                for i in range(0, len(primes), TRIAL_BLOCK)
            )
            with Arithmetic._prime_lock:
                Arithmetic._block_products = blocks
        return blocks

    def _trial_divide(self, n, factors):
        primes = self._primes_upto(self._trial_bound)
        if n < (1 << 62):
            # small enough for a vectorized remainder scan
            limit = np.searchsorted(primes, math.isqrt(n), side="right")
            candidates = primes[:limit]
            divisors = candidates[(n % candidates) == 0].tolist()
        else:
            divisors = []
            for first, product, block in self._blocks(primes):
                if first * first > n:
                    break
                if gmpy2.gcd(product, n) > 1:
                    divisors.extend(p for p in block if n % p == 0)
        for p in divisors:
            while n % p == 0:
                factors[p] = factors.get(p, 0) + 1
                n //= p
        return n

    def _perfect_root(self, n):
        for k in range(n.bit_length(), 1, -1):
            root, exact = gmpy2.iroot(gmpy2.mpz(n), k)
            if exact:
                return int(root), k
        return n, 1

    def _brent(self, n):
        """a nontrivial factor of composite n, or None when the budget runs out"""
        n = gmpy2.mpz(n)
        rng = random.Random(self._seed * 7_919 + int(n))
        budget = self._rho_iterations
        for _ in range(self._rho_attempts):
            y = gmpy2.mpz(rng.randrange(1, n))
            c = gmpy2.mpz(rng.randrange(1, n))
            g = r = q = gmpy2.mpz(1)
            x = ys = y
            while g == 1 and budget > 0:
                x = y
                for _ in range(r):
                    y = (y * y + c) % n
                k = 0
                while k < r and g == 1:
                    ys = y
                    for _ in range(min(RHO_BATCH, r - k)):
                        y = (y * y + c) % n
                        q = q * abs(x - y) % n
                    g = gmpy2.gcd(q, n)
                    k += RHO_BATCH
                budget -= 2 * r
                r *= 2
            if g == n:
                g = gmpy2.mpz(1)
                while g == 1:
                    ys = (ys * ys + c) % n
                    g = gmpy2.gcd(x - ys, n)
            if 1 < g < n:
                return int(g)
            if budget <= 0:
                break
        return None

    def factorize(self, n):
        """Factorization of n; incomplete when the rho budget is exhausted."""
        n = int(n)
        if n < 1:
            raise ValueError(f"cannot factor {n}")
        factors = {}
        unfactored = []
        remaining = self._trial_divide(n, factors)
        bound_sq = self._trial_bound * self._trial_bound
        stack = [remaining] if remaining > 1 else []
        while stack:
            c = stack.pop()
            if c < bound_sq or self.is_prime(c):
                # below bound^2 every cofactor left by trial division is prime
                factors[c] = factors.get(c, 0) + 1
                continue
            root, k = self._perfect_root(c)
            if k > 1:
                stack.extend([root] * k)
                continue
            d = self._brent(c)
            if d is None:
                unfactored.append(c)
                continue
            stack.extend([d, c // d])
        return Factorization(n, tuple(sorted(factors.items())), tuple(sorted(unfactored)))

    def require_complete(self, n):
        fac = self.factorize(n)
        if not fac.complete:
            raise IncompleteFactorization(
                f"could not factor {n} within budget",
                value=n,
                unfactored=list(fac.unfactored),
            )
        return fac

    def crt_solve(self, congruences):
        """Single congruence equivalent to all inputs (modulus = lcm)."""
        congruences = list(congruences)
        if not congruences:
            raise ValueError("crt_solve needs at least one congruence")
        residue, modulus = 0, 1
        for index, congruence in enumerate(congruences):
            g = math.gcd(modulus, congruence.modulus)
            if (congruence.residue - residue) % g:
                raise self._incompatibility(congruences, index)
            step = congruence.modulus // g
            if step == 1:
                continue
            t = (congruence.residue - residue) // g
            t = t * int(gmpy2.invert(modulus // g, step)) % step
            residue += modulus * t
            modulus *= step
            residue %= modulus
        return Congruence(residue, modulus)

    def _incompatibility(self, congruences, index):
        second = congruences[index]
        for first in congruences[:index]:
            g = math.gcd(first.modulus, second.modulus)
            if (first.residue - second.residue) % g:
                break
        else:
            first = congruences[0]
        return IncompatibleCongruences(
            f"{first} and {second} conflict",
            first=str(first),
            second=str(second),
        )

    def prime_sqrt(self, a, p):
        """All x in [0, p) with x^2 = a (mod p), ascending."""
        a %= p
        if a == 0:
            return [0]
        if p == 2:
            return [1]
        roots = sqrt_mod(a, p, all_roots=True) or []
        return sorted(int(r) for r in roots)

    def modular_sqrt(self, a, n, max_roots=None):
        """All roots of x^2 = a modulo a squarefree n of known factorization."""
        if not n.complete or not n.is_squarefree():
            raise UnsupportedInput(
                f"modulus {n.value} must be squarefree with known factorization",
                modulus=n.value,
            )
        if math.gcd(a, n.value) != 1:
            raise UnsupportedInput(
                f"gcd({a}, {n.value}) != 1", a=a, modulus=n.value
            )
        if n.value == 1:
            return [0]
        per_prime = []
        for p in n.primes:
            roots = self.prime_sqrt(a, p)
            if not roots:
                return []
            per_prime.append([Congruence(r, p) for r in roots])
        count = reduce(operator.mul, (len(roots) for roots in per_prime), 1)
        if max_roots is not None and count > max_roots:
            raise ResourceExhausted(
                f"{count} square roots exceed the limit {max_roots}",
                count=count,
                limit=max_roots,
            )
        return sorted(
            self.crt_solve(choice).residue for choice in itertools.product(*per_prime)
        )

    def totient(self, fac):
        if not fac.complete:
            raise IncompleteFactorization(value=fac.value)
        result = 1
        for p, v in fac.factors:
            result *= (p - 1) * p ** (v - 1)
        return result

    def sigma(self, fac):
        if not fac.complete:
            raise IncompleteFactorization(value=fac.value)
        result = 1
        for p, v in fac.factors:
            result *= (p ** (v + 1) - 1) // (p - 1)
        return result

    def largest_prime_factor(self, n):
        if n < 2:
            return 1
        return self.require_complete(n).primes[-1]
