"""Command-line front end."""
from __future__ import annotations

import argparse
from collections.abc import Mapping, Sequence
import csv
from datetime import datetime, timezone
import io
import json
import logging
import math
import sys
from typing import Any

from . import __version__
from .analysis import (
    classify_correlations,
    extract_coefficients,
    independent_crossover_L,
    p_r_full,
    p_r_independent,
    sample_root_flip_rate,
    threshold_curve,
    threshold_pu,
)
from .const import (
    ATTRIBUTIONS,
    DEFAULT_GEOMETRY,
    DEFAULT_L_GRID,
    DEFAULT_LOG_BASE,
    DEFAULT_P_F_MAX,
    DEFAULT_SAMPLES,
    DEFAULT_TARGET_P_R,
    ERROR_CONVENTIONS,
    EXIT_INFEASIBLE,
    EXIT_INVALID_ARGUMENT,
    EXIT_OK,
    EXIT_OUTPUT,
    EXIT_RESOURCE,
    EXIT_VERIFICATION,
    FORMAT_CSV,
    FORMAT_JSON,
    MIN_LEAVES_CAP,
    RESOURCE_CSV_HEADER,
    THRESHOLD_CSV_HEADER,
    VARIANTS,
)
from .coordinator import SamplingCoordinator
from .core.config_manager import config_manager
from .core.faults import ALL_SOURCES
from .core.tableau import verify_against_oracle
from .core.util import parse_circuit, parse_grid, parse_int_list, sample_rng
from .exceptions import (
    InfeasibleThresholdError,
    InvalidArgumentError,
    OutputWriteError,
    ResourceLimitError,
    ResourceRangeError,
    StarClusterError,
    VerificationError,
)
from .models.config import Conventions
from .models.params import ProtocolParams, Variant, default_seed
from .protocol import estimate_failure_rate, failure_probability, min_leaves
from .resources import (
    OperatingPoint,
    comparison_table,
    estimate_resources,
    implied_r_towc,
    log_base_sensitivity,
)
from .suite import builtin_suite

_LOGGER = logging.getLogger(__name__)

EXIT_CODES: dict[type[StarClusterError], int] = {
    VerificationError: EXIT_VERIFICATION,
    InfeasibleThresholdError: EXIT_INFEASIBLE,
    ResourceLimitError: EXIT_RESOURCE,
    ResourceRangeError: EXIT_RESOURCE,
    InvalidArgumentError: EXIT_INVALID_ARGUMENT,
    OutputWriteError: EXIT_OUTPUT,
}


# Options that change how a run executes but not what it computes; the value
# says whether the option consumes the next token.
EXECUTION_OPTIONS: dict[str, bool] = {
    "--workers": True,
    "--output": True,
    "-o": True,
    "--verbose": False,
    "-v": False,
}


def recorded_argv(argv: Sequence[str]) -> list[str]:
    """Return argv without execution-only options, as echoed in provenance."""
    recorded: list[str] = []
    skip_value = False
    for token in argv:
        if skip_value:
            skip_value = False
            continue
        name, has_value, _ = token.partition("=")
        if name in EXECUTION_OPTIONS:
            skip_value = EXECUTION_OPTIONS[name] and not has_value
            continue
        recorded.append(token)
    return recorded


class Output:
    """Data sink: provenance block plus a table or a key-value document."""

    def __init__(self, args: argparse.Namespace, argv: Sequence[str]) -> None:
        """Initialize from parsed arguments."""
        self.format = args.format
        self.path = args.output
        self.provenance: dict[str, Any] = {
            "command": args.command,
            "argv": recorded_argv(argv),
            "version": __version__,
            "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }

    def table(self, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
        """Emit a table."""
        if self.format == FORMAT_JSON:
            self._write_json([dict(zip(header, row)) for row in rows])
            return
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([[_cell(value) for value in row] for row in rows])
        self._write(self._csv_provenance() + buffer.getvalue())

    def document(self, data: Mapping[str, Any]) -> None:
        """Emit a key-value document (flattened to key,value rows in CSV)."""
        if self.format == FORMAT_JSON:
            self._write_json(data)
            return
        self.table(("key", "value"), list(_flatten(data).items()))

    def _csv_provenance(self) -> str:
        return "".join(
            f"# {key}: {json.dumps(value, sort_keys=True)}\n"
            for key, value in self.provenance.items()
        )

    def _write_json(self, data: Any) -> None:
        text = json.dumps({"provenance": self.provenance, "data": data}, indent=2, default=_default)
        self._write(text + "\n")

    def _write(self, text: str) -> None:
        if self.path:
            try:
                with open(self.path, "w", encoding="utf-8") as f:
                    f.write(text)
            except OSError as err:
                raise OutputWriteError(f"cannot write {self.path}: {err.strerror or err}") from err
        else:
            sys.stdout.write(text)


def _default(value: Any) -> Any:
    # Enums, Fractions and other non-JSON leaves.
    return str(value)


def _cell(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    return value


def _flatten(data: Mapping[str, Any], prefix: str = "") -> dict[str, Any]:
    flat: dict[str, Any] = {}
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(_flatten(value, f"{name}."))
        elif isinstance(value, (list, tuple)):
            flat[name] = " ".join(str(_cell(v)) for v in value)
        else:
            flat[name] = value
    return flat


def _probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from err
    if not 0 <= value <= 1:
        raise argparse.ArgumentTypeError(f"probability out of [0, 1]: {value}")
    return value


def _point(text: str) -> OperatingPoint:
    try:
        p_s, p_u, r_towc = (float(part) for part in text.split(":"))
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"expected p_s:p_u:r_towc, got {text!r}") from err
    return OperatingPoint(p_s, p_u, r_towc)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=(FORMAT_CSV, FORMAT_JSON), default=FORMAT_CSV)
    parser.add_argument("--output", "-o", help="write data here instead of stdout")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")


def _add_protocol(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--variant", choices=VARIANTS, default="p1")
    parser.add_argument("--ps", type=_probability, default=0.9)
    parser.add_argument("--pu", type=_probability, default=0.0)
    parser.add_argument("--pp", type=_probability, default=0.0)
    parser.add_argument("--pm", type=_probability, default=0.0)
    parser.add_argument("--L", type=int, default=None, help="leaves; default min_leaves(ps)")
    parser.add_argument("--pf-max", type=_probability, default=DEFAULT_P_F_MAX)
    parser.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--geometry", default=DEFAULT_GEOMETRY)
    parser.add_argument(
        "--measurement-convention", choices=ERROR_CONVENTIONS, default=ERROR_CONVENTIONS[0]
    )
    parser.add_argument("--prep-convention", choices=ERROR_CONVENTIONS, default=ERROR_CONVENTIONS[0])
    parser.add_argument("--count-benign-as-flip", action="store_true")
    parser.add_argument("--failed-gate-noise", action="store_true")
    parser.add_argument("--attribution", choices=ATTRIBUTIONS, default=ATTRIBUTIONS[0])


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser."""
    parser = argparse.ArgumentParser(
        prog="starcluster",
        description="Star-cluster assembly with probabilistic gates: formulas and simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    lmin = sub.add_parser("lmin", help="minimal leaves for a star-failure bound")
    lmin.add_argument("--ps", type=_probability, required=True)
    lmin.add_argument("--pf-max", type=_probability, default=DEFAULT_P_F_MAX)
    lmin.add_argument("--cap", type=int, default=MIN_LEAVES_CAP)

    pf = sub.add_parser("pf", help="star-failure probability")
    pf.add_argument("--L", type=int, required=True)
    pf.add_argument("--ps", type=_probability, required=True)

    renorm = sub.add_parser("renorm", help="renormalized root error with breakdown")
    renorm.add_argument("--variant", choices=VARIANTS, required=True)
    renorm.add_argument("--pu", type=_probability, required=True)
    renorm.add_argument("--pp", type=_probability, default=None)
    renorm.add_argument("--pm", type=_probability, default=None)
    renorm.add_argument("--L", type=int, required=True)
    renorm.add_argument("--memory", type=_probability, default=0.0)
    renorm.add_argument("--independent", action="store_true", help="single-rate leading order")
    renorm.add_argument("--fold-failures-ps", type=_probability, default=None)

    threshold = sub.add_parser("threshold", help="p_u threshold per success probability")
    group = threshold.add_mutually_exclusive_group(required=True)
    group.add_argument("--ps", type=_probability)
    group.add_argument("--grid", type=parse_grid)
    threshold.add_argument("--variant", choices=(*VARIANTS, "both"), default="both")
    threshold.add_argument("--target", type=_probability, default=DEFAULT_TARGET_P_R)
    threshold.add_argument("--pf-max", type=_probability, default=DEFAULT_P_F_MAX)
    threshold.add_argument("--pp", type=_probability, default=None, help="fixed p_P")
    threshold.add_argument("--pm", type=_probability, default=None, help="fixed p_M")
    threshold.add_argument("--memory", type=_probability, default=0.0)
    threshold.add_argument("--fold-failures", action="store_true")

    simulate = sub.add_parser("simulate", help="simulation-based estimates")
    kinds = simulate.add_subparsers(dest="kind", required=True)
    coeffs = kinds.add_parser("coeffs", help="fit p_r / p against L")
    coeffs.add_argument("--L-grid", type=parse_int_list, default=list(DEFAULT_L_GRID))
    coeffs.add_argument("--sources", default="gate", help="comma list of gate,prep,meas")
    correlations = kinds.add_parser("correlations", help="classify correlated root flips")
    flips = kinds.add_parser("flips", help="random-fault flip rate vs leading order")
    flips.add_argument("--shots", type=int, default=256)
    pf_mc = kinds.add_parser("pf", help="star-failure Monte Carlo vs binomial")
    for kind in (coeffs, correlations, flips, pf_mc):
        _add_protocol(kind)
        _add_common(kind)

    verify = sub.add_parser("verify", help="frame propagation vs stabilizer oracle")
    verify.add_argument("--seed", type=int, default=None)
    verify.add_argument("--circuit", help="circuit dump file instead of the built-in suite")

    resources = sub.add_parser("resources", help="gate-count overhead")
    resources.add_argument("--L", type=int, required=True)
    resources.add_argument("--ps", type=_probability, required=True)
    resources.add_argument("--rtowc", type=float, required=True)
    resources.add_argument("--improved", action="store_true")
    resources.add_argument("--log-base", type=float, default=DEFAULT_LOG_BASE)
    resources.add_argument("--quoted-total", type=float, default=None)

    compare = sub.add_parser("compare", help="comparison with published schemes")
    compare.add_argument("--point", type=_point, action="append", default=[])
    compare.add_argument("--improved", action="store_true")
    compare.add_argument("--pf-max", type=_probability, default=DEFAULT_P_F_MAX)

    for name, command in sub.choices.items():
        if name != "simulate":
            _add_common(command)
    return parser


def _params_from_args(args: argparse.Namespace) -> ProtocolParams:
    L = args.L if args.L is not None else min_leaves(args.ps, args.pf_max)
    return ProtocolParams(
        variant=Variant.parse(args.variant),
        p_s=args.ps,
        p_u=args.pu,
        p_P=args.pp,
        p_M=args.pm,
        L=L,
        p_f_target=args.pf_max,
        seed=args.seed if args.seed is not None else default_seed(),
        geometry=config_manager.get_geometry(args.geometry),
        conventions=Conventions(
            measurement_convention=args.measurement_convention,
            prep_convention=args.prep_convention,
            count_benign_as_flip=args.count_benign_as_flip,
            failed_gate_noise=args.failed_gate_noise,
            attribution=args.attribution,
        ),
    )


def _cmd_lmin(args: argparse.Namespace, out: Output) -> int:
    L = min_leaves(args.ps, args.pf_max, args.cap)
    out.provenance["inputs"] = {"p_s": args.ps, "p_f_max": args.pf_max}
    out.table(("L",), [(L,)])
    return EXIT_OK


def _cmd_pf(args: argparse.Namespace, out: Output) -> int:
    out.provenance["inputs"] = {"L": args.L, "p_s": args.ps}
    out.table(("p_f",), [(failure_probability(args.L, args.ps),)])
    return EXIT_OK


def _cmd_renorm(args: argparse.Namespace, out: Output) -> int:
    if args.independent:
        result = p_r_independent(args.variant, args.pu, args.L)
    else:
        p_P = args.pu if args.pp is None else args.pp
        p_M = (args.pu if args.pm is None else args.pm) + args.memory
        folded = 0.0
        if args.fold_failures_ps is not None:
            folded = failure_probability(args.L, args.fold_failures_ps)
        result = p_r_full(args.variant, args.pu, p_P, p_M, args.L, folded)
    out.provenance["inputs"] = {
        "variant": args.variant,
        "p_u": args.pu,
        "p_P": args.pp,
        "p_M": args.pm,
        "memory": args.memory,
        "L": args.L,
        "independent": args.independent,
    }
    data = result.as_dict()
    data["crossover_L"] = float(independent_crossover_L())
    out.document(data)
    return EXIT_OK


def _cmd_threshold(args: argparse.Namespace, out: Output) -> int:
    variants = list(VARIANTS) if args.variant == "both" else [args.variant]
    options = {
        "p_P": args.pp,
        "p_M": args.pm,
        "memory_error": args.memory,
        "fold_failures": args.fold_failures,
    }
    out.provenance["inputs"] = {
        "variants": variants,
        "target": args.target,
        "p_f_max": args.pf_max,
        "mode": "equal" if args.pp is None and args.pm is None else "fixed",
        **options,
    }
    if args.ps is not None:
        points = [threshold_pu(args.ps, v, args.target, args.pf_max, **options) for v in variants]
    else:
        points = threshold_curve(args.grid, variants, args.target, args.pf_max, **options)
    out.table(THRESHOLD_CSV_HEADER, [point.as_row() for point in points])
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace, out: Output) -> int:
    params = _params_from_args(args)
    coordinator = SamplingCoordinator(workers=args.workers)
    _LOGGER.info("Simulating %s with %d workers", args.kind, coordinator.workers)
    out.provenance["params"] = params.as_dict()
    out.provenance["samples"] = args.samples
    if args.kind == "coeffs":
        sources = [s.strip() for s in args.sources.split(",") if s.strip()]
        unknown = set(sources) - set(ALL_SOURCES)
        if unknown:
            raise InvalidArgumentError(f"unknown fault sources {sorted(unknown)}")
        fit = extract_coefficients(params, args.L_grid, args.samples, sources, coordinator)
        out.document(fit.as_dict())
    elif args.kind == "correlations":
        out.document(classify_correlations(params, args.samples, coordinator).as_dict())
    elif args.kind == "flips":
        estimate = sample_root_flip_rate(params, args.samples, args.shots, coordinator)
        data = estimate.as_dict()
        data["z_score"] = (
            (estimate.rate - estimate.leading_order) / estimate.stderr
            if estimate.stderr
            else math.nan
        )
        out.document(data)
    else:
        estimate = estimate_failure_rate(params, args.samples, sample_rng(params.seed, 0))
        out.document(
            {
                "L": estimate.L,
                "p_s": estimate.p_s,
                "samples": estimate.samples,
                "failures": estimate.failures,
                "rate": estimate.rate,
                "expected": estimate.expected,
                "stderr": estimate.stderr,
                "z_score": estimate.z_score,
            }
        )
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace, out: Output) -> int:
    seed = args.seed if args.seed is not None else default_seed()
    out.provenance["seed"] = seed
    if args.circuit:
        with open(args.circuit, "r", encoding="utf-8") as f:
            circuits = {args.circuit: parse_circuit(f.read())}
    else:
        circuits = builtin_suite()
    rows = []
    failures = []
    for name, circuit in circuits.items():
        report = verify_against_oracle(circuit, seed)
        rows.append(
            (name, report.qubits, report.faults_checked, report.detectors, len(report.disagreements))
        )
        for disagreement in report.disagreements:
            failures.append(f"{name}: {disagreement.kind}: {disagreement.detail}")
    out.table(("circuit", "qubits", "faults", "detectors", "disagreements"), rows)
    if failures:
        raise VerificationError(f"{len(failures)} disagreement(s); first: {failures[0]}")
    return EXIT_OK


def _cmd_resources(args: argparse.Namespace, out: Output) -> int:
    estimate = estimate_resources(args.L, args.ps, args.rtowc, args.improved, args.log_base)
    data = estimate.as_dict()
    if args.L >= 2:
        data["log_base_sensitivity"] = log_base_sensitivity(args.L, args.ps)
    if args.quoted_total is not None:
        implied = implied_r_towc(args.quoted_total, estimate.r_star)
        out.provenance["implied_r_towc_log10"] = implied.log10
    out.provenance["inputs"] = {"L": args.L, "p_s": args.ps, "r_towc": args.rtowc}
    out.document(data)
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace, out: Output) -> int:
    rows = comparison_table(args.point, args.pf_max, args.improved)
    out.provenance["inputs"] = {
        "points": [vars(point) for point in args.point],
        "improved": args.improved,
    }
    out.table(RESOURCE_CSV_HEADER, [[row[key] for key in RESOURCE_CSV_HEADER] for row in rows])
    return EXIT_OK


COMMANDS = {
    "lmin": _cmd_lmin,
    "pf": _cmd_pf,
    "renorm": _cmd_renorm,
    "threshold": _cmd_threshold,
    "simulate": _cmd_simulate,
    "verify": _cmd_verify,
    "resources": _cmd_resources,
    "compare": _cmd_compare,
}


def _exit_code(err: StarClusterError) -> int:
    for error_type, code in EXIT_CODES.items():
        if isinstance(err, error_type):
            return code
    return EXIT_INVALID_ARGUMENT


def run(argv: Sequence[str] | None = None) -> int:
    """Parse argv, dispatch and return the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or EXIT_OK)

    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    out = Output(args, argv)
    try:
        return COMMANDS[args.command](args, out)
    except StarClusterError as err:
        code = _exit_code(err)
        _LOGGER.error("%s: %s", type(err).__name__, err)
        sys.stderr.write(
            json.dumps({"error": type(err).__name__, "message": str(err), "exit_code": code})
            + "\n"
        )
        return code


def main() -> None:
    """Console entry point."""
    sys.exit(run())
