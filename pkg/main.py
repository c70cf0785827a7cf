"""Command-line front end for graphon-ldp."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
from pydantic import ValidationError

from core.cut_metric import CutDistanceCalculator
from core.discretization import DyadicProjector
from core.entropy_rate import graphon_entropy, optimal_kernel, per_cell_entropy
from core.exporters import OutputExporter, build_manifest
from core.graphon_core import embed_graph
from core.loaders import InputParser
from core.rate_minimizer import RateMinimizer
from core.sampling_ldp import LdpVerifier, conditional_sample, sample_graph, sample_sized
from core.selftest import SelfTestRunner
from core.utils.errors import GraphonLdpError, NumericalFailure, ValidationFailure
from core.utils.models import (
    DensityGraphon,
    DensityMeasure,
    GraphonConfig,
    RunConfig,
    SearchMode,
    StepGraphon,
    VerifyMode,
    WeightedGraph,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("graphon_ldp")


def _n_list(text: str) -> List[int]:
    try:
        sizes = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")
    if not sizes:
        raise argparse.ArgumentTypeError("n-list is empty")
    return sizes


class GraphonLdpCli:
    """Runs one subcommand: parse inputs, compute, export, summarize."""

    def __init__(self, run: RunConfig, args: argparse.Namespace):
        """Initialize the command.

        Args:
            run: Validated run parameters
            args: Parsed flags of the subcommand
        """
        self.run = run
        self.args = args
        self.config = run.config
        self.parser = InputParser()
        self.exporter = OutputExporter(build_manifest(run.subcommand, self.config, run.seed))

    def execute(self) -> str:
        handler: Callable[[], str] = getattr(self, f"cmd_{self.run.subcommand}")
        return handler()

    # ------------------------------------------------------------------
    # inputs
    # ------------------------------------------------------------------

    def _graphon(self, path: str) -> StepGraphon:
        document = self.parser.parse(path)
        if isinstance(document, WeightedGraph):
            return embed_graph(document)
        if not isinstance(document, StepGraphon):
            raise ValidationFailure(f"{path} holds neither a graphon nor a weighted graph")
        return document

    # ------------------------------------------------------------------
    # subcommands
    # ------------------------------------------------------------------

    def cmd_sample(self) -> str:
        args = self.args
        if args.graphon:
            graph = sample_sized(self._graphon(args.graphon), args.n, self.run.seed)
        else:
            graph = sample_graph(args.n, self.parser.parse_as(args.measure, "measure"), self.run.seed)
        path = self.exporter.export_json(args.out, graph)
        return f"sampled a {graph.n}-vertex graph -> {path}"

    def cmd_dist(self) -> str:
        args = self.args
        calculator = CutDistanceCalculator(self.config)
        first = self._graphon(args.first)
        mode = SearchMode(args.mode)
        if args.metric == "overlay":
            kernel = self.parser.parse_as(args.second, "kernel")
            value, permutation = calculator.overlay_with_permutation(first, kernel, mode)
            path = self.exporter.export_json(args.out, {"overlay": value, "permutation": permutation})
            return f"overlay = {value:.6g} -> {path}"

        second = self._graphon(args.second)
        if args.metric == "d":
            result = calculator.d_cut(first, second)
        elif args.metric == "colored":
            result = calculator.d_cut_colored(first, second)
        else:
            result = calculator.delta_cut(first, second, mode, args.refine)
        payload = result.model_dump()
        if not args.emit_witness:
            payload.pop("witness")
        path = self.exporter.export_json(args.out, payload)
        if args.emit_witness:
            self.exporter.export_json(args.emit_witness, result.witness)
        return f"{result.distance} = {result.value:.6g} ({result.mode.value}) -> {path}"

    def cmd_entropy(self) -> str:
        args = self.args
        W = self._graphon(args.graphon)
        nu = self.parser.parse_as(args.measure, "measure")
        value = graphon_entropy(W, nu)
        payload: Dict[str, object] = {"entropy": value, "per_cell": per_cell_entropy(W, nu)}
        if args.dual:
            payload["dual"] = optimal_kernel(W, nu).values
        path = self.exporter.export_json(args.out, payload)
        if not np.isfinite(value):
            print("   [WARN] graphon is not absolutely continuous with respect to the edge law")
        return f"entropy = {value:.6g} -> {path}"

    def cmd_project(self) -> str:
        args = self.args
        scheme = self.parser.parse_as(args.scheme, "scheme")
        projector = DyadicProjector(scheme)
        source = self.parser.parse(args.density)
        level = scheme.depth_max if args.level is None else args.level
        if isinstance(source, DensityMeasure):
            projection = projector.project_measure(source, level)
        elif isinstance(source, DensityGraphon):
            projection = projector.project_graphon(source, level)
        else:
            raise ValidationFailure(f"{args.density} holds neither a density nor a density graphon")
        payload: Dict[str, object] = {"level": level, "projection": projection}
        summary = f"projected onto level {level}"
        if args.rate:
            if not args.reference:
                raise ValidationFailure("--rate needs --reference")
            reference = self.parser.parse_as(args.reference, "density")
            rates = projector.rate_by_projections(source, reference, args.m_max)
            payload["rates"] = rates
            summary += f", rate at level {len(rates)} = {rates[-1]:.6g}" if rates else ""
        path = self.exporter.export_json(args.out, payload)
        return f"{summary} -> {path}"

    def cmd_verify(self) -> str:
        args = self.args
        nu = self.parser.parse_as(args.measure, "measure")
        event = self.parser.parse_as(args.event, "event")
        report = LdpVerifier(self.config).verify_ldp(nu, event, self.run.n_list, VerifyMode(args.mode), self.run.seed)
        path = self.exporter.export_ldp_report(args.out, report)
        last = report.rows[-1]
        return f"n={last.n}: scaled={last.scaled:.6g}, rate={last.rate_target:.6g}, gap={last.gap:.3g} -> {path}"

    def cmd_condition(self) -> str:
        args = self.args
        nu = self.parser.parse_as(args.measure, "measure")
        event = self.parser.parse_as(args.event, "event")
        graph = conditional_sample(args.n, nu, event, self.run.seed, self.config)
        path = self.exporter.export_json(args.out, graph)
        return f"conditioned {graph.n}-vertex graph -> {path}"

    def cmd_concentrate(self) -> str:
        args = self.args
        nu = self.parser.parse_as(args.measure, "measure")
        event = self.parser.parse_as(args.event, "event")
        report = LdpVerifier(self.config).concentration_experiment(nu, event, self.run.n_list, args.reps,
                                                                   self.run.seed)
        path = self.exporter.export_concentration(args.out, report)
        medians = ", ".join(f"{row.n}:{row.median:.4g}" for row in report.rows)
        return f"median distances {medians} -> {path}"

    def cmd_minimize(self) -> str:
        args = self.args
        nu = self.parser.parse_as(args.measure, "measure")
        constraints = self.parser.parse_as(args.constraints, "constraints")
        result = RateMinimizer(self.config).minimize_rate(nu, constraints)
        if args.out_graphon:
            self.exporter.export_json(args.out_graphon, result.graphon)
        payload = result.model_dump(exclude={"graphon"})
        path = self.exporter.export_json(args.out, payload)
        if not result.feasible:
            print(f"   [WARN] best iterate violates the constraints by {result.max_violation:.3g}")
        return f"rate = {result.value:.6g}, kkt residual {result.kkt_residual:.3g} -> {path}"

    def cmd_selftest(self) -> str:
        report = SelfTestRunner(self.config, self.run.seed or 0).run()
        for check in report.checks:
            status = "[OK]" if check.passed else "[ERROR]"
            print(f"   {status} {check.module}: {check.name} ({check.detail})")
        if self.args.out:
            self.exporter.export_json(self.args.out, report)
        if not report.passed:
            raise NumericalFailure(f"{len(report.failures)} of {len(report.checks)} self-test checks failed")
        return f"all {len(report.checks)} self-test checks passed"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="JSON file of engine constants")
    common.add_argument("--seed", type=int, help="Base seed of every random draw")
    common.add_argument("--threads", type=int, help="Worker cap (overrides GRAPHON_LDP_THREADS)")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="Debug logging")
    verbosity.add_argument("--quiet", action="store_true", help="Errors only")

    parser = argparse.ArgumentParser(
        prog="graphon-ldp",
        description="graphon-ldp - probability graphons, cut metrics and large deviations",
    )
    commands = parser.add_subparsers(dest="subcommand", required=True)

    sample = commands.add_parser("sample", parents=[common], help="Sample a weighted graph")
    source = sample.add_mutually_exclusive_group(required=True)
    source.add_argument("--measure", type=str, help="Edge law file (i.i.d. edges)")
    source.add_argument("--graphon", type=str, help="Step graphon file")
    sample.add_argument("--n", type=int, required=True, help="Vertex count")
    sample.add_argument("--out", type=str, required=True, help="Graph JSON output")

    dist = commands.add_parser("dist", parents=[common], help="Cut distances and overlay")
    dist.add_argument("--first", type=str, required=True, help="Graphon or graph file")
    dist.add_argument("--second", type=str, required=True, help="Graphon, graph or kernel file")
    dist.add_argument("--metric", choices=["d", "delta", "colored", "overlay"], default="d")
    dist.add_argument("--mode", choices=[mode.value for mode in SearchMode], default=SearchMode.EXACT.value)
    dist.add_argument("--refine", type=int, help="Block refinement factor for delta")
    dist.add_argument("--emit-witness", type=str, help="Write the witness to this JSON file")
    dist.add_argument("--out", type=str, required=True, help="Result JSON output")

    entropy = commands.add_parser("entropy", parents=[common], help="Graphon entropy against an edge law")
    entropy.add_argument("--graphon", type=str, required=True)
    entropy.add_argument("--measure", type=str, required=True)
    entropy.add_argument("--dual", action="store_true", help="Also emit the optimal dual kernel")
    entropy.add_argument("--out", type=str, required=True)

    project = commands.add_parser("project", parents=[common], help="Dyadic projection of densities")
    project.add_argument("--scheme", type=str, required=True, help="Partition scheme file")
    project.add_argument("--density", type=str, required=True, help="Density or density graphon file")
    project.add_argument("--level", type=int, help="Projection level (default depth_max)")
    project.add_argument("--rate", action="store_true", help="Emit the projected rate sequence")
    project.add_argument("--reference", type=str, help="Reference density for --rate")
    project.add_argument("--m-max", type=int, help="Deepest level of the rate sequence")
    project.add_argument("--out", type=str, required=True)

    verify = commands.add_parser("verify", parents=[common], help="Tabulate scaled log-probabilities")
    verify.add_argument("--measure", type=str, required=True)
    verify.add_argument("--event", type=str, required=True)
    verify.add_argument("--n-list", type=_n_list, required=True, help="Comma-separated graph sizes")
    verify.add_argument("--mode", choices=[mode.value for mode in VerifyMode], default=VerifyMode.EXACT.value)
    verify.add_argument("--out", type=str, required=True, help="CSV output")

    condition = commands.add_parser("condition", parents=[common], help="Sample conditioned on an event")
    condition.add_argument("--measure", type=str, required=True)
    condition.add_argument("--event", type=str, required=True)
    condition.add_argument("--n", type=int, required=True)
    condition.add_argument("--out", type=str, required=True)

    concentrate = commands.add_parser("concentrate", parents=[common], help="Conditional concentration table")
    concentrate.add_argument("--measure", type=str, required=True)
    concentrate.add_argument("--event", type=str, required=True)
    concentrate.add_argument("--n-list", type=_n_list, required=True)
    concentrate.add_argument("--reps", type=int, default=10)
    concentrate.add_argument("--out", type=str, required=True, help="CSV output")

    minimize = commands.add_parser("minimize", parents=[common], help="Minimize the rate over constraints")
    minimize.add_argument("--measure", type=str, required=True)
    minimize.add_argument("--constraints", type=str, required=True)
    minimize.add_argument("--out-graphon", type=str, help="Minimizer graphon JSON output")
    minimize.add_argument("--out", type=str, required=True)

    selftest = commands.add_parser("selftest", parents=[common], help="Run the bundled invariant suite")
    selftest.add_argument("--out", type=str, help="Report JSON output")

    return parser


INPUT_FLAGS = ("measure", "graphon", "first", "second", "event", "constraints", "scheme", "density", "reference")
OUTPUT_FLAGS = ("out", "out_graphon", "emit_witness")


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Validated run parameters; explicit flags override the --config file."""
    overrides = {"threads": args.threads}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.config:
        config = InputParser().parse_config(args.config, **overrides)
    else:
        config = GraphonConfig.from_env(**{key: value for key, value in overrides.items() if value is not None})
    inputs = {flag: getattr(args, flag) for flag in INPUT_FLAGS if getattr(args, flag, None)}
    outputs = {flag: getattr(args, flag) for flag in OUTPUT_FLAGS if getattr(args, flag, None)}
    if args.config:
        inputs["config"] = args.config
    return RunConfig(
        subcommand=args.subcommand,
        inputs=inputs,
        outputs=outputs,
        seed=args.seed,
        n_list=tuple(getattr(args, "n_list", None) or ()),
        mode=getattr(args, "mode", None),
        config=config,
    )


def configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.ERROR if args.quiet else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)


def run(argv: Optional[List[str]] = None) -> int:
    """Parse argv, run one subcommand and return its exit status."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage errors
        return EXIT_OK if exc.code in (0, None) else EXIT_VALIDATION
    configure_logging(args)

    try:
        cli = GraphonLdpCli(build_run_config(args), args)
        summary = cli.execute()
    except NumericalFailure as exc:
        print(f"[ERROR] {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValidationFailure, ValidationError, ValueError, GraphonLdpError) as exc:
        print(f"[ERROR] {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"[OK] {summary}")
    for path in cli.exporter.written:
        log.info("wrote %s", Path(path))
    return EXIT_OK


def main():
    """Main entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
