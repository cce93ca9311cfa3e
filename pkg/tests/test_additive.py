"""Additive functions and their inversion on primes."""
from __future__ import annotations

import gmpy2
import pytest

from dioapprox import NoPrimeFound, ParameterRejected, UnknownFunction
from dioapprox.additive import (
    ResidueFilter,
    builtin,
    check_membership,
    evaluate,
    from_description,
    from_expression,
    invert_on_primes,
)
from dioapprox.pipelines import brute_force_tables
from dioapprox.reals import real_context

TOLERANCE = gmpy2.mpfr(2) ** -240
# brute-force table rows checked per slow case
BLOCK = 10**4


def exact_log(numerator, denominator):
    with real_context(256):
        return gmpy2.log(gmpy2.mpfr(gmpy2.mpq(numerator, denominator)))


def close(x, y, tolerance=TOLERANCE):
    with real_context(256):
        return abs(x - y) < tolerance


def test_evaluate_examples(totient_log, sigma_log):
    assert evaluate(totient_log, 1) == 0
    assert close(evaluate(totient_log, 2), exact_log(2, 1))
    assert close(evaluate(sigma_log, 6), exact_log(2, 1))


def test_evaluate_matches_closed_forms(arith, totient_log, sigma_log):
    for n in range(1, 400):
        fac = arith.factorize(n)
        assert close(evaluate(totient_log, fac), exact_log(n, arith.totient(fac)))
        assert close(evaluate(sigma_log, fac, arith), exact_log(arith.sigma(fac), n))


@pytest.fixture(scope="module")
def tables():
    return brute_force_tables(10 * BLOCK)


@pytest.mark.slow
@pytest.mark.parametrize("block", range(10))
def test_evaluate_matches_tables(arith, totient_log, sigma_log, tables, block):
    phi, sigma = tables
    for n in range(max(1, block * BLOCK), (block + 1) * BLOCK + 1):
        fac = arith.factorize(n)
        assert close(evaluate(totient_log, fac), exact_log(n, int(phi[n])))
        assert close(evaluate(sigma_log, fac, arith), exact_log(int(sigma[n]), n))


def test_prime_power_values(totient_log, sigma_log):
    assert close(totient_log.value(3, 5), exact_log(3, 2))
    assert close(sigma_log.value(2, 1), exact_log(3, 2))
    assert close(sigma_log.value(2, 2), exact_log(7, 4))


@pytest.mark.parametrize("t, lam, expected", [(0.01, 0.5, 101), (0.5, 1, 3)])
def test_invert_examples(arith, totient_log, t, lam, expected):
    assert invert_on_primes(totient_log, t, lam, arith) == expected


def test_invert_no_prime(arith, totient_log):
    with pytest.raises(NoPrimeFound) as info:
        invert_on_primes(totient_log, 0.55, 3, arith)
    assert info.value.context["function"] == "totient_log"


def test_invert_lands_in_window(arith, sigma_log):
    lam = 0.45
    for t in (0.3, 0.05, 0.004, 0.0002):
        p = invert_on_primes(sigma_log, t, lam, arith)
        value = sigma_log.prime_value(p)
        assert t - t ** (1 + lam) <= value <= t
        assert arith.is_prime(p)
        # no smaller prime qualifies
        for q in (arith.sieve_primes(p - 1) if p > 2 else []):
            assert not t - t ** (1 + lam) <= sigma_log.prime_value(q) <= t


def test_invert_respects_residue_filter(arith):
    f = builtin("totient_log", residue_filter="4:1")
    with pytest.raises(NoPrimeFound):
        invert_on_primes(f, 0.5, 1, arith)
    p = invert_on_primes(f, 0.01, 0.5, arith)
    assert p % 4 == 1


def test_invert_rejects_nonpositive_window(arith, totient_log):
    with pytest.raises(ParameterRejected):
        invert_on_primes(totient_log, 2, 1, arith)


def test_residue_filter_parse():
    f = ResidueFilter.parse("4:1,3")
    assert f.allows(5) and f.allows(7)
    assert not f.allows(2)
    assert str(f) == "4:1,3"
    with pytest.raises(ParameterRejected):
        ResidueFilter.parse("bad")


def test_builtin_overrides_and_rejections():
    f = builtin("sigma_log", **{"lambda": 0.4, "C": 3.0})
    assert f.lam == 0.4 and f.C == 3.0
    with pytest.raises(UnknownFunction):
        builtin("mobius_log")
    with pytest.raises(ParameterRejected):
        builtin("totient_log", **{"lambda": 1.5})


def test_from_expression_matches_builtin(totient_log):
    f = from_expression("custom", "log(1 + 1/(p - 1))")
    for p in (2, 3, 7, 101):
        assert close(f.prime_value(p), totient_log.prime_value(p), gmpy2.mpfr(2) ** -200)
    assert not f.same_rule(totient_log)


@pytest.mark.parametrize("expression", ["q + p", "foo(p)"])
def test_from_expression_rejects_unknown_names(expression):
    with pytest.raises(ParameterRejected):
        from_expression("bad", expression)


def test_describe_round_trip():
    f = from_expression("custom", "1/p", lam=0.4, residue_filter="8:1,3")
    g = from_description(f.describe())
    assert g.expression == "1/p"
    assert g.lam == 0.4
    assert str(g.residue_filter) == "8:1,3"
    h = from_description(builtin("sigma_log").describe())
    assert h.name == "sigma_log" and h.multiplicative == "sigma"


def test_membership_of_builtin(arith, totient_log):
    verdict = check_membership(totient_log, prime_limit=200, samples=4, arith=arith)
    assert verdict.passed, verdict.codes


def test_membership_flags_slow_decay(arith):
    f = from_expression("slow", "1/sqrt(p)")
    verdict = check_membership(f, prime_limit=200, samples=2, arith=arith)
    assert "decay" in verdict.codes
