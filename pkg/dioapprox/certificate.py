"""Certificates for found integers m and their independent verification."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
import logging

import gmpy2

from . import Verdict, Violation
from .additive import evaluate, from_description
from .const import (
    CERTIFICATE_SCHEMA_VERSION,
    DEFAULT_PRECISION_BITS,
    MODE_ERDOS,
    MODE_POLY,
)
from .pyarith import Arithmetic, Factorization
from .reals import below_power, real, real_context, real_str, slack

_LOGGER = logging.getLogger(__name__)

ABSOLUTE = "absolute"
DIFFERENCE = "difference"


@dataclass(frozen=True)
class TargetRecord:
    index: int
    value: object
    target: object
    error: object


def arguments_of(m: int, forms, quadratic: bool = False) -> list:
    if quadratic:
        return [m * m + c for c in forms]
    return [a * m + b for a, b in forms]


def measure(values_at, targets, kind: str, precision: int) -> list:
    """Per-target records from evaluated f_i(arg_i)."""
    records = []
    with real_context(precision):
        if kind == ABSOLUTE:
            for i, (value, target) in enumerate(zip(values_at, targets)):
                target = real(target, precision)
                records.append(TargetRecord(i, value, target, abs(value - target)))
        else:
            for i in range(1, len(values_at)):
                value = values_at[i] - values_at[i - 1]
                target = real(targets[i - 1], precision)
                records.append(TargetRecord(i, value, target, abs(value - target)))
    return records


def witnessed_exponent(records, m: int, precision: int):
    """min_i(-log error_i / log m), rounded toward zero."""
    if m < 2:
        return gmpy2.mpfr(0)
    with real_context(precision, gmpy2.RoundUp):
        log_m = gmpy2.log(gmpy2.mpfr(m))
        eps = slack(precision)
    worst = gmpy2.inf()
    for record in records:
        with real_context(precision, gmpy2.RoundUp):
            error = record.error + eps
            log_error = gmpy2.log(error)
        with real_context(precision, gmpy2.RoundDown):
            worst = min(worst, -log_error / log_m)
    return worst


def beats(error, m: int, c, precision: int) -> bool:
    """error < m^-c with error rounded up and the bound rounded down."""
    with real_context(precision, gmpy2.RoundUp):
        lhs = error + slack(precision)
    with real_context(precision, gmpy2.RoundDown):
        rhs = gmpy2.mpfr(m) ** -real(c, precision, gmpy2.RoundUp)
    return lhs < rhs


def multiplicative_value(name: str, fac: Factorization, arith: Arithmetic) -> int:
    if name == "totient":
        return arith.totient(fac)
    return arith.sigma(fac)


@dataclass(frozen=True)
class Certificate:
    mode: str
    kind: str
    m: int
    functions: tuple
    forms: tuple
    targets: tuple
    claimed_c: float
    records: tuple
    witnessed_c: object
    arguments: tuple
    evidence: tuple
    planned: tuple
    z: int = 1
    factor_count_bound: int | None = None
    quadratic: bool = False
    precision: int = DEFAULT_PRECISION_BITS
    parameters: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def cofactors(self) -> list:
        return [arg // d for arg, d in zip(self.arguments, self.planned)]

    @property
    def max_error(self):
        return max(record.error for record in self.records)

    def passes(self) -> bool:
        return all(
            beats(record.error, self.m, self.claimed_c, self.precision)
            for record in self.records
        ) and all(check.get("passed", True) for check in self.extra.values())

    def to_document(self) -> dict:
        precision = self.precision
        return {
            "schema": CERTIFICATE_SCHEMA_VERSION,
            "mode": self.mode,
            "kind": self.kind,
            "m": str(self.m),
            "functions": [f.describe() for f in self.functions],
            "forms": [
                [str(x) for x in form] if isinstance(form, tuple) else str(form)
                for form in self.forms
            ],
            "quadratic": self.quadratic,
            "targets": [real_str(real(t, precision), precision) for t in self.targets],
            "claimed_c": self.claimed_c,
            "witnessed_c": real_str(self.witnessed_c, precision),
            "precision_bits": precision,
            "records": [
                {
                    "index": record.index,
                    "value": real_str(record.value, precision),
                    "target": real_str(record.target, precision),
                    "error": real_str(record.error, precision),
                }
                for record in self.records
            ],
            "arguments": [str(arg) for arg in self.arguments],
            "evidence": [fac.records() for fac in self.evidence],
            "planned": [str(d) for d in self.planned],
            "z": str(self.z),
            "factor_count_bound": self.factor_count_bound,
            "parameters": self.parameters,
            "extra": self.extra,
        }

    @classmethod
    def from_document(cls, document: dict) -> Certificate:
        precision = int(document.get("precision_bits", DEFAULT_PRECISION_BITS))
        quadratic = bool(document.get("quadratic", False))
        if quadratic:
            forms = tuple(int(c) for c in document["forms"])
        else:
            forms = tuple((int(a), int(b)) for a, b in document["forms"])
        return cls(
            mode=document["mode"],
            kind=document["kind"],
            m=int(document["m"]),
            functions=tuple(
                from_description(description, precision)
                for description in document["functions"]
            ),
            forms=forms,
            targets=tuple(real(t, precision) for t in document["targets"]),
            claimed_c=float(document["claimed_c"]),
            records=tuple(
                TargetRecord(
                    record["index"],
                    real(record["value"], precision),
                    real(record["target"], precision),
                    real(record["error"], precision),
                )
                for record in document["records"]
            ),
            witnessed_c=real(document["witnessed_c"], precision),
            arguments=tuple(int(arg) for arg in document["arguments"]),
            evidence=tuple(Factorization.from_records(r) for r in document["evidence"]),
            planned=tuple(int(d) for d in document["planned"]),
            z=int(document.get("z", 1)),
            factor_count_bound=document.get("factor_count_bound"),
            quadratic=quadratic,
            precision=precision,
            parameters=document.get("parameters", {}),
            extra=document.get("extra", {}),
        )


def _integer_checks(mode, functions, parameters, m, claimed_c, evidence, arith):
    checks = {}
    if mode == MODE_ERDOS:
        name = functions[0].multiplicative
        low, high = (multiplicative_value(name, fac, arith) for fac in evidence)
        difference = abs(high - low)
        exponent = 1 - Fraction(str(claimed_c))
        checks["integer"] = {
            "function": name,
            "difference": str(difference),
            "exponent": str(exponent),
            "passed": below_power(difference, m, exponent),
        }
    elif mode == MODE_POLY:
        name = functions[0].multiplicative
        row2, row1 = (multiplicative_value(name, fac, arith) for fac in evidence)
        zeta = Fraction(str(parameters.get("zeta_multiplicative", 0)))
        difference = row1 - row2
        exponent = 2 - Fraction(str(claimed_c))
        checks["multiplicative"] = {
            "function": name,
            "difference": str(difference),
            "zeta": str(zeta),
            "exponent": str(exponent),
            "passed": below_power(difference - zeta, m, exponent),
        }
    return checks


def build_certificate(
    mode: str,
    kind: str,
    functions,
    forms,
    targets,
    m: int,
    claimed_c: float,
    planned,
    z: int = 1,
    factor_count_bound: int | None = None,
    quadratic: bool = False,
    parameters: dict | None = None,
    arith: Arithmetic | None = None,
) -> Certificate:
    """Factor, evaluate and measure every argument at m."""
    arith = arith or Arithmetic()
    precision = max(f.precision for f in functions)
    parameters = dict(parameters or {})
    arguments = arguments_of(m, forms, quadratic)
    evidence = []
    for arg, d in zip(arguments, planned):
        planned_fac = arith.require_complete(d)
        cofactor_fac = arith.require_complete(arg // d)
        evidence.append(planned_fac.multiply(cofactor_fac))
    values = [evaluate(f, fac) for f, fac in zip(functions, evidence)]
    records = measure(values, targets, kind, precision)
    return Certificate(
        mode=mode,
        kind=kind,
        m=m,
        functions=tuple(functions),
        forms=tuple(forms),
        targets=tuple(targets),
        claimed_c=claimed_c,
        records=tuple(records),
        witnessed_c=witnessed_exponent(records, m, precision),
        arguments=tuple(arguments),
        evidence=tuple(evidence),
        planned=tuple(planned),
        z=z,
        factor_count_bound=factor_count_bound,
        quadratic=quadratic,
        precision=precision,
        parameters=parameters,
        extra=_integer_checks(
            mode, functions, parameters, m, claimed_c, evidence, arith
        ),
    )


def verify_certificate(
    cert: Certificate, arith: Arithmetic | None = None, precision: int | None = None
) -> Verdict:
    """Re-derive every claim of a certificate from m alone."""
    arith = arith or Arithmetic()
    precision = precision or 2 * cert.precision
    functions = [f.with_precision(precision) for f in cert.functions]
    eps = slack(cert.precision)
    violations = []
    inconclusive = False

    arguments = arguments_of(cert.m, cert.forms, cert.quadratic)
    for i, (arg, recorded) in enumerate(zip(arguments, cert.arguments)):
        if arg != recorded:
            violations.append(
                Violation("argument_mismatch", f"argument {i} is not {arg}", {"i": i})
            )
    for i, (fac, arg) in enumerate(zip(cert.evidence, arguments)):
        if fac.product() != arg or fac.value != arg:
            violations.append(
                Violation(
                    "evidence_mismatch",
                    f"evidence for argument {i} does not multiply to {arg}",
                    {"i": i},
                )
            )
        if not fac.complete or not all(arith.is_prime(p) for p in fac.primes):
            violations.append(
                Violation("evidence_not_prime", f"evidence {i} has a composite", {"i": i})
            )

    fresh = []
    for arg in arguments:
        fac = arith.factorize(arg)
        if not fac.complete:
            inconclusive = True
        fresh.append(fac)
    if inconclusive:
        _LOGGER.warning(f"verification of m={cert.m} is inconclusive")
        return Verdict.collect(violations, inconclusive=True)

    values = [evaluate(f, fac) for f, fac in zip(functions, fresh)]
    records = measure(values, cert.targets, cert.kind, precision)
    for record, recorded in zip(records, cert.records):
        context = {"i": record.index}
        if not beats(record.error, cert.m, cert.claimed_c, precision):
            violations.append(
                Violation(
                    "inequality_violated",
                    f"target {record.index} misses m^-{cert.claimed_c}",
                    context,
                )
            )
        with real_context(precision):
            if abs(record.error - recorded.error) > eps:
                violations.append(
                    Violation("record_mismatch", "recorded error disagrees", context)
                )

    witnessed = witnessed_exponent(records, cert.m, precision)
    if not witnessed > cert.claimed_c:
        violations.append(
            Violation(
                "exponent_not_witnessed",
                f"witnessed exponent {real_str(witnessed, 64)} <= {cert.claimed_c}",
                {},
            )
        )

    for i, (arg, d) in enumerate(zip(arguments, cert.planned)):
        if d < 1 or arg % d:
            violations.append(
                Violation("planned_mismatch", f"{d} does not divide argument {i}", {"i": i})
            )
            continue
        cofactor = arith.factorize(arg // d)
        if not cofactor.complete:
            inconclusive = True
            continue
        if cofactor.primes and cofactor.primes[0] <= cert.z:
            violations.append(
                Violation(
                    "cofactor_not_rough",
                    f"cofactor {i} has the prime {cofactor.primes[0]} <= z={cert.z}",
                    {"i": i},
                )
            )
        if cert.factor_count_bound is not None:
            count = sum(v for _, v in cofactor.factors)
            if count > cert.factor_count_bound:
                violations.append(
                    Violation(
                        "factor_count",
                        f"cofactor {i} has {count} prime factors",
                        {"i": i, "bound": cert.factor_count_bound},
                    )
                )

    checks = _integer_checks(
        cert.mode,
        functions,
        cert.parameters,
        cert.m,
        cert.claimed_c,
        fresh,
        arith,
    )
    for name, check in checks.items():
        if not check.get("passed", True):
            violations.append(
                Violation(
                    f"{name}_inequality",
                    f"{name} inequality fails: difference {check['difference']}",
                    {},
                )
            )
    return Verdict.collect(violations, inconclusive=inconclusive)
