#!/usr/bin/env python3
"""doflab: exact DoF regions, feedback schemes and their simulation for the two-user MIMO IC.

Usage:
    doflab region 6 2 4 3 --family fb_dcsit
    doflab classify 8 4 6 5
    doflab plan 8 4 6 5 --point p2
    doflab simulate 6 2 4 3 --point p0 --trials 100
    doflab sweep 8 --checks inclusions,corners
    doflab plot 6 2 4 3 --families no_csit_fixture,d_csit,fb_dcsit --output fig.svg
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from dof_lab import DEFAULT_TRIALS, MODES, DofLab, SweepReport
from dof_linalg import RankDeficient
from dof_regions import AntennaConfig, DofLabError, InvalidConfig, RegionError
from dof_schemes import POINTS, NotApplicable, SchemeError
from dof_simkernel import DEFAULT_BOUND

logger = logging.getLogger("doflab.cli")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VIOLATION = 3
EXIT_RANK = 4

COMMANDS = ("region", "classify", "plan", "simulate", "share", "sweep", "plot")
DEFAULT_PLOT_FAMILIES = "d_csit,fb_dcsit,p_csit"


@dataclass(frozen=True)
class RunConfig:
    """Parsed command line; ``antennas`` is None only for ``sweep``."""

    command: str
    antennas: AntennaConfig | None
    family: str = "fb_dcsit"
    families: tuple[str, ...] = ()
    point: str = "p0"
    trials: int = DEFAULT_TRIALS
    seed: int | None = None
    mode: str = "exact"
    workers: int = 1
    bound: int = DEFAULT_BOUND
    theta: str = "1/2"
    max_antennas: int = 0
    checks: str | None = None
    fmt: str = "json"
    output: Path | None = None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        antennas = None
        if args.command != "sweep":
            antennas = AntennaConfig.of(args.antennas)
        families = tuple(
            f.strip() for f in getattr(args, "families", "").split(",") if f.strip()
        )
        return cls(
            command=args.command,
            antennas=antennas,
            family=getattr(args, "family", "fb_dcsit"),
            families=families,
            point=getattr(args, "point", "p0"),
            trials=getattr(args, "trials", DEFAULT_TRIALS),
            seed=getattr(args, "seed", None),
            mode=getattr(args, "mode", "exact"),
            workers=getattr(args, "workers", 1),
            bound=getattr(args, "bound", DEFAULT_BOUND),
            theta=getattr(args, "theta", "1/2"),
            max_antennas=getattr(args, "max_antennas", 0),
            checks=getattr(args, "checks", None),
            fmt=getattr(args, "format", "json"),
            output=args.output,
        )


def _add_antennas(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "antennas", nargs=4, type=int, metavar=("M1", "M2", "N1", "N2"),
        help="Antennas at Tx1, Tx2, Rx1, Rx2.",
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level for stderr diagnostics (default: WARNING).",
    )
    common.add_argument("--output", type=Path, default=None, help="Write to a file, not stdout.")

    parser = argparse.ArgumentParser(prog="doflab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, **kwargs: Any) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], **kwargs)

    region = add("region", help="Print the canonical half-planes and vertices.")
    _add_antennas(region)
    region.add_argument("--family", default="fb_dcsit")
    region.add_argument("--format", choices=["json", "csv"], default="json")

    classify = add("classify", help="EqualDelayed / CaseA / CaseB with witness.")
    _add_antennas(classify)

    plan = add("plan", help="Dump the slot-by-slot plan and its counting report.")
    _add_antennas(plan)
    plan.add_argument("--point", choices=POINTS, required=True)

    simulate = add("simulate", help="Monte Carlo decoding of a corner-point plan.")
    _add_antennas(simulate)
    simulate.add_argument("--point", choices=POINTS, required=True)
    simulate.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    simulate.add_argument("--seed", type=int, default=None, help="Falls back to $DOFLAB_SEED.")
    simulate.add_argument("--mode", choices=MODES, default="exact")
    simulate.add_argument("--workers", type=int, default=1)
    simulate.add_argument("--bound", type=int, default=DEFAULT_BOUND)

    share = add("share", help="Time-share between P1 and P2 of a CaseB config.")
    _add_antennas(share)
    share.add_argument("--theta", default="1/2", help="Weight on P1, a rational in [0, 1].")

    sweep = add("sweep", help="Check every config with antennas in [1, MAX].")
    sweep.add_argument("max_antennas", type=int, metavar="MAX")
    sweep.add_argument("--checks", default=None, help="Comma-separated subset; default all.")
    sweep.add_argument("--format", choices=["json", "csv"], default="json")

    plot = add("plot", help="Overlay region polygons as SVG or PNG.")
    _add_antennas(plot)
    plot.add_argument("--families", default=DEFAULT_PLOT_FAMILIES)
    plot.add_argument("--format", choices=["svg", "png"], default="svg")
    return parser


def _json(document: dict[str, Any]) -> str:
    return json.dumps(document, indent=2) + "\n"


def _region_csv(document: dict[str, Any]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["kind", "d1", "d2", "a1", "a2", "b"])
    for hp in document["halfplanes"]:
        writer.writerow(["halfplane", "", "", hp["a1"], hp["a2"], hp["b"]])
    for d1, d2 in document["vertices"]:
        writer.writerow(["vertex", d1, d2, "", "", ""])
    return buffer.getvalue()


def _sweep_csv(report: SweepReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["M1", "M2", "N1", "N2", "tag", "swapped", "violations"])
    for row in report.rows:
        writer.writerow(
            [*row.config.as_tuple(), row.tag.value, row.swapped, "; ".join(row.violations)]
        )
    return buffer.getvalue()


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    temp_path = output.with_suffix(f"{output.suffix}.tmp")
    temp_path.write_text(text)
    temp_path.replace(output)


def execute(run: RunConfig) -> int:
    lab = DofLab(run.seed, mode=run.mode, workers=run.workers, bound=run.bound, trials=run.trials)
    cfg = run.antennas
    logger.debug("Running %s", run)

    if run.command == "region":
        document = lab.region(cfg, run.family)
        _emit(_region_csv(document) if run.fmt == "csv" else _json(document), run.output)
        return EXIT_OK

    if run.command == "classify":
        _emit(_json(lab.classify(cfg)), run.output)
        return EXIT_OK

    if run.command == "plan":
        _emit(_json(lab.plan(cfg, run.point)), run.output)
        return EXIT_OK

    if run.command == "simulate":
        summary = lab.monte_carlo(cfg, run.point, trials=run.trials)
        _emit(_json(summary.to_dict()), run.output)
        if summary.rank_failures:
            return EXIT_RANK
        return EXIT_OK if summary.confirmed and summary.hermetic else EXIT_VIOLATION

    if run.command == "share":
        _emit(_json(lab.share(cfg, run.theta)), run.output)
        return EXIT_OK

    if run.command == "sweep":
        report = lab.sweep(run.max_antennas, run.checks)
        text = _sweep_csv(report) if run.fmt == "csv" else _json(report.to_dict())
        _emit(text, run.output)
        return EXIT_OK if report.ok else EXIT_VIOLATION

    if run.command == "plot":
        families = run.families or (run.family,)
        if run.fmt == "png":
            if run.output is None:
                raise InvalidConfig("--format png needs --output.")
            lab.plot(cfg, families, path=run.output, fmt="png")
        else:
            _emit(lab.plot(cfg, families), run.output)
        return EXIT_OK

    raise InvalidConfig(f"Unknown command '{run.command}'. Use one of: {list(COMMANDS)}")


def exit_code_for(exc: DofLabError) -> int:
    if isinstance(exc, RankDeficient):
        return EXIT_RANK
    if isinstance(exc, InvalidConfig | NotApplicable | RegionError):
        return EXIT_USAGE
    if isinstance(exc, SchemeError):
        return EXIT_VIOLATION
    return EXIT_USAGE


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        stream=sys.stderr,
    )
    try:
        run = RunConfig.from_args(args)
        return execute(run)
    except DofLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
