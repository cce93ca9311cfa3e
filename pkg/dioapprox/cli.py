"""Command-line surface: ladder, construct, search, solve and verify."""
from __future__ import annotations

import argparse
from concurrent.futures import ThreadPoolExecutor
import json
import logging
from pathlib import Path
import sys

import sympy
from sympy.parsing.sympy_parser import parse_expr
import voluptuous as vol

from . import DioApproxError, ParameterRejected, __version__, dict_get
from .certificate import Certificate, verify_certificate
from .config import OPEN_UNIT, POSITIVE, Config
from .const import (
    CONF_DEPTH,
    CONF_EH,
    CONF_EPSILON,
    CONF_ERDOS_BOUND,
    CONF_GAMMA_ASSUMED,
    CONF_GAMMA_PRIME_ASSUMED,
    CONF_MU,
    CONF_PRECISION_BITS,
    CONF_SEARCH_LIMIT,
    CONF_SEED,
    CONF_SEGMENT_SIZE,
    CONF_V0,
    CONF_WORKERS,
    CONF_XI,
    CONF_Z,
    DEFAULT_DEPTH,
    DEFAULT_EPSILON,
    DEFAULT_ERDOS_BOUND,
    DEFAULT_PRECISION_BITS,
    DEFAULT_SEARCH_LIMIT,
    DEFAULT_SEGMENT_SIZE,
    DEFAULT_WORKERS,
    DEFAULT_XI,
    EXIT_CERTIFICATES,
    EXIT_EMPTY,
    EXIT_INTERNAL,
    EXIT_REJECTED,
    MODE_ERDOS,
    MODE_POLY,
    MODE_THEOREM1,
    MODES,
    SUBCOMMAND_CONSTRUCT,
    SUBCOMMAND_LADDER,
    SUBCOMMAND_SEARCH,
    SUBCOMMAND_SOLVE,
    SUBCOMMAND_VERIFY,
)
from .greedy import certify_sequence
from .ladder import PartitionRequest, build_partition, check_v0, extend_ladder
from .pipelines import ProblemSpec, Solver, solve, solve_erdos, solve_poly
from .pyarith import Arithmetic
from .reals import digits, real, real_str
from .sieve import (
    SieveConfig,
    assemble_system,
    density_report,
    search_window,
    segmented_rough_search,
    sieve_limit,
)

_LOGGER = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
# survivors and hits listed in the summary table
SUMMARY_ROWS = 10

_STRINGS = json.loads(
    Path(__file__).with_name("strings.json").read_text(encoding="utf-8")
)


class _Context(dict):
    def __missing__(self, key):
        return "?"


def describe_error(err: DioApproxError) -> str:
    template = _STRINGS["error"].get(err.key, _STRINGS["error"]["unknown"])
    return template.format_map(_Context(err.context, message=str(err)))


def describe_violation(violation) -> str:
    text = _STRINGS["verdict"].get(violation.code, violation.code)
    return f"{violation.code}: {text} ({violation.message})"


def parse_form(value):
    """'a,b' -> (a, b)"""
    try:
        a, b = (int(part) for part in str(value).split(","))
    except ValueError as err:
        raise vol.Invalid(f"form '{value}' is not 'a,b'") from err
    return a, b


def parse_range(value):
    """'lo,hi' -> (lo, hi) with 1 <= lo <= hi"""
    try:
        lo, hi = (int(part) for part in str(value).split(","))
    except ValueError as err:
        raise vol.Invalid(f"range '{value}' is not 'lo,hi'") from err
    if not 1 <= lo <= hi:
        raise vol.Invalid(f"range '{value}' needs 1 <= lo <= hi")
    return lo, hi


def parse_real(text, precision: int = DEFAULT_PRECISION_BITS):
    """A constant expression such as 0.5, -1/3 or log(2) as an mpfr."""
    try:
        expr = parse_expr(
            str(text),
            local_dict={
                "log": sympy.log,
                "exp": sympy.exp,
                "sqrt": sympy.sqrt,
                "pi": sympy.pi,
            },
        )
    except (SyntaxError, TypeError, ValueError) as err:
        raise vol.Invalid(f"cannot parse real '{text}'") from err
    if expr.free_symbols or not expr.is_real:
        raise vol.Invalid(f"'{text}' is not a real constant")
    return real(str(expr.evalf(digits(precision) + 10)), precision)


def _key_value(text: str):
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got '{text}'")
    return key.strip(), value.strip()


LADDER_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_V0): OPEN_UNIT,
        vol.Required(CONF_XI): POSITIVE,
        vol.Required(CONF_DEPTH): vol.All(vol.Coerce(int), vol.Range(min=0)),
        vol.Optional("function", default=[]): [str],
        vol.Optional("K", default=1): vol.All(vol.Coerce(int), vol.Range(min=1)),
    },
    extra=vol.ALLOW_EXTRA,
)

CONSTRUCT_SCHEMA = vol.Schema(
    {
        vol.Required("function"): vol.All([str], vol.Length(min=1)),
        vol.Required("gamma"): vol.All([str], vol.Length(min=1)),
        vol.Required(CONF_DEPTH): vol.All(vol.Coerce(int), vol.Range(min=0)),
        vol.Optional("K", default=1): vol.All(vol.Coerce(int), vol.Range(min=1)),
    },
    extra=vol.ALLOW_EXTRA,
)

SEARCH_SCHEMA = vol.Schema(
    {
        vol.Required("form"): vol.All([parse_form], vol.Length(min=1)),
        vol.Required("modulus"): vol.All([vol.Coerce(int)], vol.Length(min=1)),
        vol.Optional("L", default=1): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Required(CONF_Z): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_MU, default=None): vol.Any(None, POSITIVE),
        vol.Optional(CONF_EPSILON, default=None): vol.Any(
            None,
            vol.All(
                vol.Coerce(float),
                vol.Range(min=0, max=1 / 3, min_included=False, max_included=False),
            ),
        ),
        vol.Optional("range", default=None): vol.Any(None, parse_range),
        vol.Optional(CONF_SEGMENT_SIZE, default=None): vol.Any(
            None, vol.All(vol.Coerce(int), vol.Range(min=64))
        ),
        vol.Optional("prime_form", default=None): vol.Any(
            None, vol.All(vol.Coerce(int), vol.Range(min=0))
        ),
    },
    extra=vol.ALLOW_EXTRA,
)

SOLVE_SCHEMA = vol.Schema(
    {
        vol.Required("mode"): vol.In(MODES),
        vol.Required("c"): POSITIVE,
        vol.Optional("function", default=[]): [str],
        vol.Optional("form", default=[]): [parse_form],
        vol.Optional("target", default=[]): [str],
        vol.Optional(CONF_DEPTH, default=None): vol.Any(
            None, vol.All(vol.Coerce(int), vol.Range(min=0))
        ),
        vol.Optional("h", default="sigma"): vol.In(["totient", "sigma"]),
        vol.Optional("bound", default=None): vol.Any(
            None, vol.All(vol.Coerce(int), vol.Range(min=2))
        ),
        vol.Optional("brute_force_only", default=False): vol.Boolean(),
    },
    extra=vol.ALLOW_EXTRA,
)

VERIFY_SCHEMA = vol.Schema(
    {vol.Required("certificates"): str},
    extra=vol.ALLOW_EXTRA,
)


class Session(object):
    """Merged configuration and shared arithmetic for one invocation"""

    def __init__(self, args: argparse.Namespace) -> None:
        config = Config.load(args.config) if args.config else Config()
        overrides = dict(args.set or [])
        overrides.update(
            {
                CONF_PRECISION_BITS: args.precision_bits,
                CONF_SEED: args.seed,
                CONF_GAMMA_ASSUMED: args.gamma_assumed,
                CONF_GAMMA_PRIME_ASSUMED: args.gamma_prime_assumed,
                CONF_EH: True if args.eh else None,
            }
        )
        self.config = config
        self.params = config.merged(overrides)
        self.precision = self.params.get(CONF_PRECISION_BITS, DEFAULT_PRECISION_BITS)
        self.arith = Arithmetic(self.params)
        self.json_out = args.json_out

    def function(self, name: str):
        return self.config.function(name, self.precision)

    def real(self, text):
        try:
            return parse_real(text, self.precision)
        except vol.Invalid as err:
            raise ParameterRejected(str(err), key="target") from err

    def emit(self, document: dict) -> None:
        if not self.json_out:
            return
        with open(self.json_out, "w", encoding="utf-8") as handle:
            json.dump(document, handle, indent=2, default=str)
            handle.write("\n")
        _LOGGER.info(f"wrote {self.json_out}")


def _ladder(session: Session, data: dict) -> int:
    ladder = extend_ladder(data[CONF_V0], data[CONF_XI], data[CONF_DEPTH], session.precision)
    document = {"ladder": [real_str(v, 64) for v in ladder.values]}
    print(f"ladder v0={data[CONF_V0]} xi={data[CONF_XI]} depth={ladder.depth}")
    for j, v in enumerate(ladder.values[:SUMMARY_ROWS]):
        print(f"  v_{j} = {real_str(v, 64)}")

    if data["function"]:
        functions = tuple(session.function(name) for name in data["function"])
        request = PartitionRequest(functions, data["K"], data[CONF_DEPTH], data[CONF_XI])
        verdict = check_v0(request, data[CONF_V0], session.arith)
        document["verdict"] = {"passed": verdict.passed, "codes": verdict.codes}
        for violation in verdict.violations:
            print(f"  {describe_violation(violation)}")
        if verdict:
            partition = build_partition(request, data[CONF_V0], session.arith)
            document["partition"] = partition.records()
            for i, column in enumerate(partition.sets):
                print(f"  P_{i}: {', '.join(str(p) for p in column[:SUMMARY_ROWS])}")
    session.emit(document)
    return EXIT_CERTIFICATES


def _construct(session: Session, data: dict) -> int:
    functions = [session.function(name) for name in data["function"]]
    gammas = [session.real(text) for text in data["gamma"]]
    if len(functions) != len(gammas):
        raise ParameterRejected("one gamma per function is needed", key="gamma")
    spec = ProblemSpec(
        mode=MODE_THEOREM1,
        functions=tuple(functions),
        forms=(),
        targets=tuple(gammas),
        c=1.0,
        depth=data[CONF_DEPTH],
        params=session.params,
    )
    solver = Solver(spec, session.arith)
    _, sequences = solver.plan(functions, gammas, data["K"])
    document = {"diagnostics": solver.diagnostics, "sequences": []}
    for sequence in sequences:
        verdict = certify_sequence(sequence, data["K"], session.arith)
        document["sequences"].append(
            {
                "index": sequence.index,
                "snapshots": [state.records() for state in sequence.snapshots],
                "verdict": {"passed": verdict.passed, "codes": verdict.codes},
            }
        )
        print(f"sequence {sequence.index}: {'certified' if verdict else 'FAILED'}")
        for state in sequence.snapshots:
            print(f"  j={state.j} n={state.modulus} tau={real_str(state.tau, 64)}")
        for violation in verdict.violations:
            print(f"  {describe_violation(violation)}")
    session.emit(document)
    return EXIT_CERTIFICATES


def _search(session: Session, data: dict) -> int:
    system = assemble_system(
        data["form"],
        data["modulus"],
        data["L"],
        prime_form_index=data["prime_form"],
        arith=session.arith,
    )
    params = session.params
    kappa = len(system.sieve_rows) or 1
    beta, authoritative = sieve_limit(kappa)
    config = SieveConfig(
        mu=data[CONF_MU] or 1.0,
        epsilon=data[CONF_EPSILON] or params.get(CONF_EPSILON, DEFAULT_EPSILON),
        z=data[CONF_Z],
        kappa=kappa,
        beta=beta,
        c0=0.0,
        segment_size=data[CONF_SEGMENT_SIZE]
        or params.get(CONF_SEGMENT_SIZE, DEFAULT_SEGMENT_SIZE),
        beta_authoritative=authoritative,
        workers=params.get(CONF_WORKERS, DEFAULT_WORKERS),
    )
    if data["range"]:
        lo, hi = data["range"]
        s_range, truncated = range(lo, hi + 1), False
    else:
        limit = params.get(CONF_SEARCH_LIMIT, DEFAULT_SEARCH_LIMIT)
        s_range, truncated = search_window(system.N, config.mu, limit)
    survivors = segmented_rough_search(system, config, s_range, session.arith, params)
    report = density_report(system, config, s_range, len(survivors), session.arith)
    print(
        f"m = {system.h} (mod {system.N}), s in [{s_range.start}, {s_range.stop - 1}]"
        f"{' (truncated)' if truncated else ''}: {len(survivors)} survivors"
    )
    for survivor in survivors[:SUMMARY_ROWS]:
        print(f"  s={survivor.s} m={survivor.m} cofactors={list(survivor.cofactors)}")
    session.emit(
        {
            "h": str(system.h),
            "N": str(system.N),
            "range": [s_range.start, s_range.stop - 1],
            "truncated": truncated,
            "epsilon": config.epsilon,
            "eh": bool(params.get(CONF_EH, False)),
            "survivors": [
                {"s": s.s, "m": str(s.m), "cofactors": [str(c) for c in s.cofactors]}
                for s in survivors
            ],
            "density": report,
        }
    )
    return EXIT_CERTIFICATES if survivors else EXIT_EMPTY


def _print_certificates(certificates) -> None:
    for cert in certificates:
        print(
            f"  m={cert.m} c*={real_str(cert.witnessed_c, 64)} "
            f"max error={real_str(cert.max_error, 64)}"
        )


def _solve(session: Session, data: dict) -> int:
    mode = data["mode"]
    depth = data[CONF_DEPTH]
    if depth is None:
        depth = session.params.get(CONF_DEPTH, DEFAULT_DEPTH)

    if mode == MODE_ERDOS:
        bound = data["bound"] or session.params.get(CONF_ERDOS_BOUND, DEFAULT_ERDOS_BOUND)
        result = solve_erdos(
            data["c"],
            bound,
            depth,
            session.params,
            session.arith,
            pipeline=not data["brute_force_only"],
        )
        for label, hits in (("phi", result.totient), ("sigma", result.sigma)):
            preview = ", ".join(f"{n}:{d}" for n, d in hits[:SUMMARY_ROWS])
            print(f"brute force |{label}(n+1) - {label}(n)|: {len(hits)} hits [{preview}]")
        found = 0
        for name, certificates in result.certificates.items():
            print(f"pipeline {name}: {len(certificates)} certificates")
            _print_certificates(certificates)
            missed = dict_get(result.diagnostics, f"runs.{name}.cross_check", [])
            if missed:
                print(f"  certified but absent from brute force: {missed}")
            found += len(certificates)
        session.emit(
            {
                "brute_force": {"totient": result.totient, "sigma": result.sigma},
                "certificates": {
                    name: [cert.to_document() for cert in certificates]
                    for name, certificates in result.certificates.items()
                },
                "diagnostics": result.diagnostics,
            }
        )
        if data["brute_force_only"]:
            return EXIT_CERTIFICATES
        return EXIT_CERTIFICATES if found else EXIT_EMPTY

    targets = tuple(session.real(text) for text in data["target"])
    if mode == MODE_POLY:
        if len(targets) != 1:
            raise ParameterRejected("poly mode takes exactly one --target", key="target")
        result = solve_poly(
            data["h"], targets[0], data["c"], depth, session.params, session.arith
        )
    else:
        spec = ProblemSpec(
            mode=mode,
            functions=tuple(session.function(name) for name in data["function"]),
            forms=tuple(data["form"]),
            targets=targets,
            c=data["c"],
            depth=depth,
            params=session.params,
        )
        result = solve(spec, session.arith)

    print(f"{mode}: {len(result.certificates)} certificates")
    _print_certificates(result.certificates)
    if not result.certificates:
        for entry in result.diagnostics.get("depths", []):
            print(
                f"  depth {entry['j']}: survivors={entry.get('survivors', '-')} "
                f"best error={entry.get('best_error')}"
            )
    session.emit(
        {
            "certificates": [cert.to_document() for cert in result.certificates],
            "diagnostics": result.diagnostics,
        }
    )
    return EXIT_CERTIFICATES if result.certificates else EXIT_EMPTY


def load_certificates(path) -> list:
    """Every certificate document in a solve output or a bare certificate file."""
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as err:
        raise ParameterRejected(f"cannot read {path}: {err}", key="certificates") from err
    if "m" in document:
        documents = [document]
    else:
        found = document.get("certificates", [])
        if isinstance(found, dict):
            documents = [doc for docs in found.values() for doc in docs]
        else:
            documents = list(found)
    try:
        return [Certificate.from_document(doc) for doc in documents]
    except (KeyError, TypeError, ValueError) as err:
        raise ParameterRejected(f"malformed certificate in {path}: {err}") from err


def _verify(session: Session, data: dict) -> int:
    certificates = load_certificates(data["certificates"])
    if not certificates:
        print("no certificates to verify")
        return EXIT_EMPTY
    workers = session.params.get(CONF_WORKERS, DEFAULT_WORKERS)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        verdicts = list(
            pool.map(lambda cert: verify_certificate(cert, session.arith), certificates)
        )
    results = []
    for cert, verdict in zip(certificates, verdicts):
        status = "pass" if verdict else ("inconclusive" if verdict.inconclusive else "FAIL")
        print(f"m={cert.m}: {status}")
        for violation in verdict.violations:
            print(f"  {describe_violation(violation)}")
        results.append(
            {
                "m": str(cert.m),
                "passed": verdict.passed,
                "inconclusive": verdict.inconclusive,
                "codes": verdict.codes,
            }
        )
    session.emit({"verdicts": results})
    return EXIT_CERTIFICATES if all(verdicts) else EXIT_EMPTY


class SubcommandRegistrar:
    def __init__(self, parser: argparse.ArgumentParser) -> None:
        self._subparsers = parser.add_subparsers(dest="subcommand", required=True)

    def _add(self, name, help, schema, handler):
        sub = self._subparsers.add_parser(name, help=help)
        sub.set_defaults(handler=handler, schema=schema)
        return sub

    def register(self):
        sub = self._add(
            SUBCOMMAND_LADDER,
            "interval ladder, v0 conditions and prime partition",
            LADDER_SCHEMA,
            _ladder,
        )
        sub.add_argument("--v0", type=float, required=True)
        sub.add_argument("--xi", type=float, default=DEFAULT_XI)
        sub.add_argument("--depth", type=int, required=True)
        sub.add_argument("--function", action="append", default=[])
        sub.add_argument("--K", type=int, default=1)

        sub = self._add(
            SUBCOMMAND_CONSTRUCT,
            "greedy moduli approximating gamma_i, with certification",
            CONSTRUCT_SCHEMA,
            _construct,
        )
        sub.add_argument("--function", action="append", required=True)
        sub.add_argument("--gamma", action="append", required=True)
        sub.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
        sub.add_argument("--K", type=int, default=1)

        sub = self._add(
            SUBCOMMAND_SEARCH,
            "rough search over a linear congruence system",
            SEARCH_SCHEMA,
            _search,
        )
        sub.add_argument("--form", action="append", required=True, help="a,b")
        sub.add_argument("--modulus", action="append", required=True)
        sub.add_argument("--L", type=int, default=1)
        sub.add_argument("--z", type=int, required=True)
        sub.add_argument("--mu", type=float)
        sub.add_argument("--epsilon", type=float)
        sub.add_argument("--range", help="lo,hi")
        sub.add_argument("--segment-size", dest="segment_size", type=int)
        sub.add_argument(
            "--require-prime-form", "--prime-form", dest="prime_form", type=int
        )

        sub = self._add(
            SUBCOMMAND_SOLVE,
            "end-to-end solver producing certificates",
            SOLVE_SCHEMA,
            _solve,
        )
        sub.add_argument("--mode", choices=MODES, required=True)
        sub.add_argument("--c", type=float, required=True)
        sub.add_argument("--function", action="append", default=[])
        sub.add_argument("--form", action="append", default=[], help="a,b")
        sub.add_argument("--target", action="append", default=[])
        sub.add_argument("--depth", type=int)
        sub.add_argument("--h", default="sigma")
        sub.add_argument("--bound", type=int)
        sub.add_argument("--brute-force-only", dest="brute_force_only", action="store_true")

        sub = self._add(
            SUBCOMMAND_VERIFY,
            "re-derive every claim of saved certificates",
            VERIFY_SCHEMA,
            _verify,
        )
        sub.add_argument("certificates")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dioapprox", description=_STRINGS["title"]
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--precision-bits", dest="precision_bits", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--config")
    parser.add_argument("--json-out", dest="json_out")
    parser.add_argument("--gamma-assumed", dest="gamma_assumed", type=float)
    parser.add_argument("--gamma-prime-assumed", dest="gamma_prime_assumed", type=float)
    parser.add_argument("--eh", action="store_true")
    parser.add_argument(
        "--set", action="append", type=_key_value, metavar="KEY=VALUE"
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    SubcommandRegistrar(parser).register()
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO, format=LOG_FORMAT
    )
    arguments = {
        key: value
        for key, value in vars(args).items()
        if key not in ("handler", "schema")
    }
    try:
        data = args.schema(arguments)
        session = Session(args)
        return args.handler(session, data)
    except vol.Invalid as err:
        _LOGGER.error(f"invalid arguments: {err}")
        return EXIT_REJECTED
    except ParameterRejected as err:
        _LOGGER.error(describe_error(err))
        return EXIT_REJECTED
    except ValueError as err:
        _LOGGER.error(f"invalid value: {err}")
        return EXIT_REJECTED
    except DioApproxError as err:
        _LOGGER.error(describe_error(err))
        return EXIT_INTERNAL
    except (MemoryError, OSError) as err:
        _LOGGER.error(f"{type(err).__name__}: {err}")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
