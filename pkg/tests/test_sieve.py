"""Congruence systems and the rough sieve."""
from __future__ import annotations

from dataclasses import replace
from fractions import Fraction
import math
import random

import pytest

from dioapprox import ConstructionFailed, IncompatibleCongruences, ParameterRejected
from dioapprox.const import MODE_ERDOS, MODE_POLY, MODE_THEOREM1, MODE_THEOREM2
from dioapprox.sieve import (
    LinearSystem,
    SieveConfig,
    assemble_quadratic,
    assemble_system,
    choose_parameters,
    density_report,
    dimension_constant,
    exponent_threshold,
    omega,
    remainder_term,
    search_window,
    segmented_rough_search,
    sieve_density,
    sieve_limit,
)


def toy_config(z: int, **kwargs) -> SieveConfig:
    return SieveConfig(mu=1.0, epsilon=0.05, z=z, kappa=1, beta=2.0, c0=0.0, **kwargs)


def test_assemble_example(arith):
    system = assemble_system([(1, 1)], [35], L=4, arith=arith)
    assert (system.h, system.N) == (104, 140)
    assert system.rows[0].coefficients == (3, 4)
    assert system.planned == (35,)
    for s in range(5):
        m = system.m_of(s)
        assert m % 4 == 0 and (m + 1) % 35 == 0


def test_assemble_trivial_modulus(arith):
    system = assemble_system([(1, 1)], [1], L=4, arith=arith)
    assert system.h % 4 == 0
    assert system.N == 4


def test_assemble_failures(arith):
    with pytest.raises(ConstructionFailed):
        assemble_system([(2, 1)], [4], arith=arith)
    with pytest.raises(IncompatibleCongruences) as info:
        assemble_system([(1, 0), (1, 1)], [2, 2], arith=arith)
    assert info.value.context["stage"] == "assemble"
    with pytest.raises(ConstructionFailed):
        assemble_system([(1, 1)], [3, 5], arith=arith)


def test_assemble_quadratic_example(arith):
    system = assemble_quadratic((1,), [arith.factorize(5)], arith=arith)
    assert (system.h, system.N) == (2, 10)
    assert system.rows[0].coefficients == (1, 8, 20)
    assert sorted(c.residue for c in system.alternatives) == [2, 8]
    for s in range(10):
        m = system.m_of(s)
        assert m % 2 == 0
        assert (m * m + 1) % 5 == 0
        assert system.rows[0].value(s) * 5 == m * m + 1


def test_assemble_quadratic_without_roots(arith):
    with pytest.raises(ConstructionFailed):
        assemble_quadratic((1,), [arith.factorize(3)], arith=arith)


def test_omega_examples(arith):
    system = assemble_system([(1, 1)], [35], L=4, arith=arith)
    # 2 | L and the row 3 + 4s is odd
    assert omega(system, 2, arith) == 0
    assert omega(system, 1, arith) == 1
    toy = LinearSystem.from_rows([(0, 1), (1, 2)])
    assert omega(toy, 3, arith) == 2


def test_omega_against_counting(arith):
    system = assemble_system([(1, 1), (2, 1)], [3, 5], L=2, arith=arith)
    for d in (13, 9, 4, 7 * 11):
        count = 0
        for s in range(d):
            product = 1
            for row in system.sieve_rows:
                product = product * row.value(s) % d
            count += product == 0
        assert omega(system, d, arith) == count


def test_search_example(arith):
    toy = LinearSystem.from_rows([(1, 2)])
    survivors = segmented_rough_search(toy, toy_config(5), range(1, 11), arith)
    assert [survivor.s for survivor in survivors] == [3, 5, 6, 8, 9]
    assert survivors[0].cofactors == (7,)


def test_search_trivial_cases(arith):
    toy = LinearSystem.from_rows([(1, 2)])
    everything = segmented_rough_search(toy, toy_config(1), range(1, 11), arith)
    assert len(everything) == 10
    assert segmented_rough_search(toy, toy_config(5), range(4, 4), arith) == []


def test_search_matches_factoring(arith):
    system = assemble_system([(1, 1), (2, 1)], [3, 5], L=2, arith=arith)
    z = 13
    s_range = range(1, 400)
    config = toy_config(z, segment_size=64, workers=2)
    survivors = segmented_rough_search(system, config, s_range, arith)
    found = [survivor.s for survivor in survivors]
    expected = [
        s
        for s in s_range
        if all(
            all(p > z for p in arith.factorize(row.value(s)).primes)
            for row in system.rows
        )
    ]
    assert found == expected


def test_search_prime_form(arith):
    system = assemble_system(
        [(1, 0), (1, 1)], [3, 5], L=4, prime_form_index=1, arith=arith
    )
    assert len(system.sieve_rows) == 1
    survivors = segmented_rough_search(system, toy_config(7), range(1, 300), arith)
    assert survivors
    for survivor in survivors:
        assert arith.is_prime(survivor.cofactors[1])


def test_remainder_term_and_density(arith):
    toy = LinearSystem.from_rows([(1, 2)])
    assert remainder_term(toy, 3, range(0, 30), arith) == 0
    # 1 + 2s is never a multiple of 15 for s < 7
    assert remainder_term(toy, 15, range(0, 7), arith) == Fraction(-7, 15)
    assert sieve_density(toy, 5, arith) == pytest.approx(2 / 3 * 4 / 5)
    report = density_report(toy, toy_config(5), range(1, 3001), 1600, arith)
    assert report["predicted"] == pytest.approx(1600)
    assert report["sane"]


def test_dimension_constant(arith):
    toy = LinearSystem.from_rows([(1, 2)])
    value = dimension_constant(toy, 1, 200, arith)
    assert 0 <= value < math.inf
    even = LinearSystem.from_rows([(0, 2)])
    assert dimension_constant(even, 1, 50, arith) == math.inf


def test_sieve_limit():
    assert sieve_limit(1) == (2.0, True)
    assert sieve_limit(2) == (4.2665, True)
    assert sieve_limit(3) == (9.0, False)


@pytest.mark.parametrize(
    "mode, kwargs, expected",
    [
        (MODE_THEOREM1, {"k": 1, "a1": 1}, 0.45),
        (MODE_THEOREM1, {"k": 2, "A": 2}, 0.45 / (4 + 0.45 * 4.2665)),
        (MODE_THEOREM2, {"k": 1}, 0.45 / 2.8),
        (MODE_THEOREM2, {"k": 1, "eh": True}, 0.45 / 1.9),
        (MODE_ERDOS, {"k": 1}, 0.475 / 2.9),
        (MODE_POLY, {"k": 1}, 0.47 / (1 + 0.47 * 4.2665)),
    ],
)
def test_exponent_threshold(mode, kwargs, expected):
    assert exponent_threshold(mode, **kwargs) == pytest.approx(expected)


def test_exponent_threshold_unknown_mode():
    with pytest.raises(ParameterRejected):
        exponent_threshold("bogus", 1)


def test_choose_parameters():
    config, predicted = choose_parameters(1, 1.0, 0.45, 1, 0.05, a1=1, xi_prime=0.2)
    assert config.shortcut
    assert predicted == pytest.approx(0.2)

    config, predicted = choose_parameters(
        1, 1.0, 0.45, 1, 0.05, mode=MODE_THEOREM2, xi_prime=0.2
    )
    assert config.c0 > 0 and config.mu > 0
    assert predicted == pytest.approx(0.2 / (1 + config.mu))
    assert config.factor_count_bound() == math.floor((1 + config.mu) / config.c0 + 1)

    config, predicted = choose_parameters(2, 1.0, 0.45, 2, 0.05, xi_prime=0.2)
    assert config.kappa == 2 and config.beta == 4.2665
    assert 0 < predicted < 0.2

    with pytest.raises(ParameterRejected):
        choose_parameters(1, 1.0, 0.45, 1, 0.4)


def test_config_with_modulus():
    config = toy_config(1)
    assert config.with_modulus(10**6).z == 1
    sized = SieveConfig(mu=1.0, epsilon=0.05, z=1, kappa=1, beta=2.0, c0=0.5)
    assert sized.with_modulus(50).z == 8
    assert sized.with_modulus(10**40).z == sized.max_z
    assert sized.with_modulus(2**5000).z == sized.max_z
    # 2^(5000/2000) is about 5.66
    tiny = replace(sized, c0=0.0005)
    assert tiny.with_modulus(2**5000).z == 6


def test_search_window():
    assert search_window(50, 0.5, 1000) == (range(1, 9), False)
    assert search_window(50, 0.5, 1000, shifted=True) == (range(9, 17), False)
    s_range, truncated = search_window(10**30, 1.0, 1000)
    assert truncated and s_range == range(1, 1001)


def random_system(seed: int):
    """Up to three positive rows, some quadratic, and a roughness bound."""
    rng = random.Random(seed)
    rows = [
        (rng.randint(1, 10**4), rng.randint(1, 10**4), rng.choice((0, 0, 1)))
        for _ in range(rng.randint(1, 3))
    ]
    return LinearSystem.from_rows(rows), rng.randint(2, 50)


def seeded(count: int, fast: int):
    return [
        seed if seed < fast else pytest.param(seed, marks=pytest.mark.slow)
        for seed in range(count)
    ]


@pytest.mark.parametrize("seed", seeded(50, 3))
def test_search_matches_gcd_oracle(arith, seed):
    system, z = random_system(seed)
    primorial = math.prod(arith.sieve_primes(z))
    s_range = range(1, 10**4 + 1)
    config = toy_config(z, segment_size=1024, workers=2)
    survivors = segmented_rough_search(system, config, s_range, arith)
    expected = [
        s
        for s in s_range
        if all(math.gcd(row.value(s), primorial) == 1 for row in system.rows)
    ]
    assert [survivor.s for survivor in survivors] == expected
    for survivor in survivors:
        assert survivor.cofactors == tuple(row.value(survivor.s) for row in system.rows)


def count_roots(system, d: int) -> int:
    count = 0
    for s in range(d):
        product = 1
        for row in system.sieve_rows:
            product = product * row.value(s) % d
        count += product == 0
    return count


@pytest.mark.parametrize("seed", seeded(5, 1))
def test_omega_counts_every_modulus(arith, seed):
    system, _ = random_system(seed)
    for d in range(1, 1001):
        assert omega(system, d, arith) == count_roots(system, d), d


@pytest.mark.parametrize("seed", seeded(10, 3))
def test_omega_is_multiplicative(arith, seed):
    system, _ = random_system(seed)
    rng = random.Random(1000 + seed)
    checked = 0
    while checked < 100:
        d1, d2 = rng.randint(1, 1000), rng.randint(1, 1000)
        if math.gcd(d1, d2) != 1:
            continue
        product = omega(system, d1, arith) * omega(system, d2, arith)
        assert omega(system, d1 * d2, arith) == product
        checked += 1
