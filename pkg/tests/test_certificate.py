"""Certificates and their verification."""
from __future__ import annotations

from dataclasses import replace
import json
import random

import pytest

from dioapprox import IncompleteFactorization
from dioapprox.additive import evaluate
from dioapprox.certificate import (
    ABSOLUTE,
    DIFFERENCE,
    Certificate,
    beats,
    build_certificate,
    measure,
    verify_certificate,
)
from dioapprox.const import MODE_ERDOS, MODE_POLY, MODE_THEOREM1, POLY_ROW_N0, POLY_ROW_N1
from dioapprox.pyarith import Arithmetic, Factorization
from dioapprox.reals import real_context


@pytest.fixture
def certificate(arith, sigma_log):
    # sigma(6)/6 = 2, so m = 5 hits log 2 exactly
    target = evaluate(sigma_log, 6, arith)
    return build_certificate(
        MODE_THEOREM1,
        ABSOLUTE,
        [sigma_log],
        [(1, 1)],
        [target],
        5,
        0.05,
        [1],
        arith=arith,
    )


def test_build_and_verify(arith, certificate):
    assert certificate.arguments == (6,)
    assert certificate.evidence[0].factors == ((2, 1), (3, 1))
    assert certificate.passes()
    assert certificate.witnessed_c > 1
    verdict = verify_certificate(certificate, arith)
    assert verdict.passed, verdict.codes


def test_document_round_trip(arith, certificate):
    document = json.loads(json.dumps(certificate.to_document()))
    restored = Certificate.from_document(document)
    assert restored.m == 5
    assert restored.forms == ((1, 1),)
    assert verify_certificate(restored, arith).passed


def test_tampered_m_fails(arith, certificate):
    verdict = verify_certificate(replace(certificate, m=certificate.m + 1), arith)
    assert not verdict.passed
    assert "argument_mismatch" in verdict.codes
    assert "evidence_mismatch" in verdict.codes
    assert "record_mismatch" in verdict.codes


def test_tampered_evidence_fails(arith, certificate):
    forged = Factorization(6, ((6, 1),))
    verdict = verify_certificate(replace(certificate, evidence=(forged,)), arith)
    assert verdict.codes == ["evidence_not_prime"]


def test_roughness_and_factor_count(arith, certificate):
    verdict = verify_certificate(replace(certificate, z=2), arith)
    assert "cofactor_not_rough" in verdict.codes
    verdict = verify_certificate(replace(certificate, factor_count_bound=1), arith)
    assert "factor_count" in verdict.codes


def test_overclaimed_exponent(arith, sigma_log):
    cert = build_certificate(
        MODE_THEOREM1, ABSOLUTE, [sigma_log], [(1, 1)], [0.7], 5, 4.0, [1], arith=arith
    )
    assert not cert.passes()
    assert "inequality_violated" in verify_certificate(cert, arith).codes


def test_difference_measure():
    records = measure([1, 3, 6], [2, 2], DIFFERENCE, 256)
    assert [record.index for record in records] == [1, 2]
    assert [float(record.error) for record in records] == [0.0, 1.0]


def test_erdos_integer_check(arith, totient_log):
    # phi(15) = 8 and phi(14) = 6
    cert = build_certificate(
        MODE_ERDOS,
        DIFFERENCE,
        [totient_log, totient_log],
        [(1, 0), (1, 1)],
        [0],
        14,
        0.05,
        [1, 1],
        arith=arith,
    )
    assert cert.extra["integer"]["difference"] == "2"
    assert cert.extra["integer"]["passed"]


def test_beats_rounding():
    assert beats(0.001, 10**6, 0.4, 256)
    assert not beats(0.1, 10**6, 0.4, 256)


def test_incomplete_factorization_is_raised(sigma_log):
    weak = Arithmetic({"trial_bound": 100, "rho_iterations": 1, "rho_attempts": 1})
    m = 1_000_003 * 1_000_033 - 1
    with pytest.raises(IncompleteFactorization):
        build_certificate(
            MODE_THEOREM1, ABSOLUTE, [sigma_log], [(1, 1)], [0.1], m, 0.05, [1], arith=weak
        )


@pytest.mark.parametrize(
    ("zeta", "passed"),
    [(-114, True), (10**9, False)],
)
def test_poly_multiplicative_check(arith, sigma_log, zeta, passed):
    # sigma(102) = 216 and sigma(101) = 102
    cert = build_certificate(
        MODE_POLY,
        DIFFERENCE,
        [sigma_log, sigma_log],
        (POLY_ROW_N0, POLY_ROW_N1),
        [0],
        10,
        1.9,
        [1, 1],
        quadratic=True,
        parameters={"zeta_multiplicative": zeta},
        arith=arith,
    )
    check = cert.extra["multiplicative"]
    assert check["difference"] == "-114"
    assert check["passed"] is passed
    codes = verify_certificate(cert, arith).codes
    assert ("multiplicative_inequality" in codes) is not passed
    if not passed:
        assert not cert.passes()


def tamper(cert, arith, rng):
    """(tampered certificate, violation code it must raise)"""
    kind = rng.choice(["m", "evidence", "target", "record", "planned", "z"])
    offset = rng.choice([-1, 1]) * rng.uniform(0.01, 1)
    if kind == "m":
        m = rng.choice([k for k in range(1, 60) if k != cert.m])
        return replace(cert, m=m), "argument_mismatch"
    if kind == "evidence":
        other = rng.choice([k for k in range(2, 1000) if k != cert.arguments[0]])
        return replace(cert, evidence=(arith.factorize(other),)), "evidence_mismatch"
    if kind == "target":
        with real_context(cert.precision):
            target = cert.targets[0] + offset
        return replace(cert, targets=(target,)), "record_mismatch"
    if kind == "record":
        record = cert.records[0]
        with real_context(cert.precision):
            error = record.error + abs(offset)
        return replace(cert, records=(replace(record, error=error),)), "record_mismatch"
    if kind == "planned":
        d = rng.choice([4, 5, 7, 9, 12, 25])
        return replace(cert, planned=(d,)), "planned_mismatch"
    return replace(cert, z=rng.randint(2, 100)), "cofactor_not_rough"


@pytest.mark.parametrize("seed", range(100))
def test_random_tampering_fails(arith, certificate, seed):
    forged, code = tamper(certificate, arith, random.Random(seed))
    verdict = verify_certificate(forged, arith)
    assert not verdict.passed
    assert code in verdict.codes
