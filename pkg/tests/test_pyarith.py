"""Arithmetic core."""
from __future__ import annotations

import math
import random

import pytest

from dioapprox import (
    IncompatibleCongruences,
    IncompleteFactorization,
    ResourceExhausted,
    UnsupportedInput,
)
from dioapprox.const import CONF_RHO_ATTEMPTS, CONF_RHO_ITERATIONS, CONF_TRIAL_BOUND
from dioapprox.pyarith import Arithmetic, Congruence, Factorization

from .conftest import brute_factor


@pytest.mark.parametrize(
    "limit, expected",
    [
        (2, [2]),
        (10, [2, 3, 5, 7]),
        (30, [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]),
    ],
)
def test_sieve_primes(arith, limit, expected):
    assert arith.sieve_primes(limit) == expected


def test_sieve_primes_rejects_small_limit(arith):
    with pytest.raises(ValueError):
        arith.sieve_primes(1)


def test_sieve_memory_budget():
    arith = Arithmetic({"sieve_memory": 10_000})
    with pytest.raises(ResourceExhausted):
        arith.sieve_primes(20_000)


def test_primes_between(arith):
    assert arith.primes_between(7, 20) == [11, 13, 17, 19]
    assert arith.primes_between(20, 22) == []


def test_is_prime_and_next_prime(arith):
    primes = set(arith.sieve_primes(5000))
    assert [n for n in range(5001) if arith.is_prime(n)] == sorted(primes)
    assert arith.next_prime(1) == 2
    assert arith.next_prime(2) == 3
    assert arith.next_prime(1_000_000) == 1_000_003


@pytest.mark.parametrize(
    "n, factors",
    [
        (1, ()),
        (360, ((2, 3), (3, 2), (5, 1))),
        (1_000_003, ((1_000_003, 1),)),
    ],
)
def test_factorize_examples(arith, n, factors):
    fac = arith.factorize(n)
    assert fac.complete
    assert fac.factors == factors
    assert fac.product() == n


def test_factorize_matches_trial_division(arith):
    for n in range(1, 2000):
        assert list(arith.factorize(n).factors) == brute_factor(n)


def test_factorize_large_semiprime_and_power(arith):
    p, q = 1_000_003, 1_000_033
    assert arith.factorize(p * q).factors == ((p, 1), (q, 1))
    assert arith.factorize(p**3).factors == ((p, 3),)


def test_factorize_reports_unfactored_cofactor():
    arith = Arithmetic(
        {CONF_TRIAL_BOUND: 100, CONF_RHO_ITERATIONS: 1, CONF_RHO_ATTEMPTS: 1}
    )
    n = 1_000_003 * 1_000_033
    fac = arith.factorize(2 * n)
    assert not fac.complete
    assert fac.factors == ((2, 1),)
    assert fac.unfactored == (n,)
    assert fac.product() == 2 * n
    with pytest.raises(IncompleteFactorization):
        arith.require_complete(2 * n)
    with pytest.raises(IncompleteFactorization):
        arith.totient(fac)


def test_factorization_helpers():
    fac = Factorization.of_primes([7, 3, 5])
    assert fac.value == 105
    assert fac.is_squarefree()
    assert fac.primes == [3, 5, 7]
    merged = fac.multiply(Factorization(9, ((3, 2),)))
    assert merged.value == 945
    assert merged.exponent(3) == 3
    assert not merged.is_squarefree()
    assert Factorization.from_records(merged.records()) == merged
    assert str(merged) == "3^3 * 5 * 7"


@pytest.mark.parametrize(
    "congruences, expected",
    [
        ([(0, 4), (2, 3)], (8, 12)),
        ([(0, 1)], (0, 1)),
        ([(1, 4), (3, 6)], (9, 12)),
    ],
)
def test_crt_examples(arith, congruences, expected):
    solution = arith.crt_solve([Congruence(r, n) for r, n in congruences])
    assert (solution.residue, solution.modulus) == expected


def test_crt_incompatible(arith):
    with pytest.raises(IncompatibleCongruences):
        arith.crt_solve([Congruence(0, 2), Congruence(1, 2)])


def test_crt_against_search(arith):
    moduli = [4, 6, 9, 5]
    for x in range(0, 180, 7):
        congruences = [Congruence.of(x, n) for n in moduli]
        solution = arith.crt_solve(congruences)
        assert solution.modulus == 180
        assert solution.residue == x % 180


def random_moduli(rng: random.Random, bound: int = 10**5) -> list:
    moduli = [rng.randint(2, 400)]
    while len(moduli) < 4:
        n = rng.randint(2, 400)
        if math.prod(moduli) * n > bound:
            break
        moduli.append(n)
    return moduli


@pytest.mark.parametrize(
    "seed",
    [
        seed if seed < 5 else pytest.param(seed, marks=pytest.mark.slow)
        for seed in range(40)
    ],
)
def test_crt_against_residue_search(arith, seed):
    rng = random.Random(seed)
    moduli = random_moduli(rng)
    lcm = math.lcm(*moduli)
    if seed % 2:
        x = rng.randrange(lcm)
        residues = [x % n for n in moduli]
    else:
        residues = [rng.randrange(n) for n in moduli]
    congruences = [Congruence(r, n) for r, n in zip(residues, moduli)]
    solutions = [
        x for x in range(lcm) if all(x % n == r for r, n in zip(residues, moduli))
    ]
    if not solutions:
        with pytest.raises(IncompatibleCongruences):
            arith.crt_solve(congruences)
        return
    solution = arith.crt_solve(congruences)
    assert solutions == [solution.residue]
    assert solution.modulus == lcm


def test_congruence_rejects_bad_residue():
    with pytest.raises(ValueError):
        Congruence(5, 5)
    assert Congruence.of(-1, 5) == Congruence(4, 5)


@pytest.mark.parametrize("n, roots", [(5, [2, 3]), (13, [5, 8]), (3, [])])
def test_modular_sqrt_of_minus_one(arith, n, roots):
    assert arith.modular_sqrt(-1, arith.factorize(n)) == roots


@pytest.mark.parametrize("bound", [300, pytest.param(1001, marks=pytest.mark.slow)])
def test_modular_sqrt_against_search(arith, bound):
    for n in range(3, bound, 2):
        fac = arith.factorize(n)
        if not fac.is_squarefree():
            continue
        for a in (-1, -2):
            expected = [x for x in range(n) if (x * x - a) % n == 0]
            assert arith.modular_sqrt(a, fac) == expected


def test_modular_sqrt_edge_cases(arith):
    assert arith.modular_sqrt(3, Factorization(1)) == [0]
    with pytest.raises(UnsupportedInput):
        arith.modular_sqrt(-1, arith.factorize(25))
    with pytest.raises(UnsupportedInput):
        arith.modular_sqrt(5, arith.factorize(15))
    with pytest.raises(ResourceExhausted):
        arith.modular_sqrt(-1, arith.factorize(5 * 13 * 17), max_roots=4)


def test_prime_sqrt(arith):
    assert arith.prime_sqrt(0, 7) == [0]
    assert arith.prime_sqrt(1, 2) == [1]
    assert arith.prime_sqrt(2, 7) == [3, 4]


def test_totient_and_sigma(arith):
    for n in range(1, 500):
        fac = arith.factorize(n)
        phi = sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)
        sigma = sum(d for d in range(1, n + 1) if n % d == 0)
        assert arith.totient(fac) == phi
        assert arith.sigma(fac) == sigma


def test_largest_prime_factor(arith):
    assert arith.largest_prime_factor(1) == 1
    assert arith.largest_prime_factor(2) == 2
    assert arith.largest_prime_factor(360) == 5
