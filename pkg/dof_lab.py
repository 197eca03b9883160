"""High-level facade shared by the CLI and the MCP server, plus the exhaustive config sweep."""

from __future__ import annotations

import logging
import os
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from pathlib import Path
from typing import Any

from dof_plot import render_png, render_svg
from dof_regions import (
    SCHEMA_VERSION,
    AntennaConfig,
    DofRegion,
    HalfPlane,
    InvalidConfig,
    Point,
    RegimeTag,
    RegionFamily,
    build_region,
    classify_any,
    contains_point,
    format_point,
    is_subset,
    parse_rational,
    reflect,
    region_delayed_csit,
    region_equal,
    region_fb_dcsit,
    region_perfect_csit,
    region_to_dict,
    swap_to_canonical,
)
from dof_schemes import (
    NotApplicable,
    SchemeError,
    SchemePlan,
    corner_points,
    feasibility,
    plan_for,
    plan_p0_p1,
    plan_p2,
    time_share,
    validate_causality,
)
from dof_simkernel import DEFAULT_BOUND, DistributionSpec, MonteCarloSummary, monte_carlo

logger = logging.getLogger("doflab.lab")

SEED_ENV = "DOFLAB_SEED"
DEFAULT_SEED = 0
DEFAULT_TRIALS = 100
MODES = ("exact", "float")
SWEEP_CHECKS = ("inclusions", "classification", "corners", "vertices", "mirror")
SWEEP_FAMILIES = (
    RegionFamily.PERFECT_CSIT,
    RegionFamily.FB_DELAYED_CSIT,
    RegionFamily.DELAYED_CSIT,
)


def resolve_seed(seed: int | str | None = None) -> int:
    """Explicit seed, else ``$DOFLAB_SEED``, else 0."""

    raw = seed if seed is not None else os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return DEFAULT_SEED
    try:
        value = int(raw)
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(f"Seed must be an integer, got {raw!r}.") from exc
    if not 0 <= value < 2**64:
        raise InvalidConfig(f"Seed must lie in [0, 2^64), got {value}.")
    return value


def parse_checks(value: str | Iterable[str] | None) -> tuple[str, ...]:
    if value is None:
        return SWEEP_CHECKS
    items = value.split(",") if isinstance(value, str) else list(value)
    checks = [item.strip().lower() for item in items if item.strip()]
    unknown = sorted(set(checks) - set(SWEEP_CHECKS))
    if unknown:
        raise InvalidConfig(f"Unknown sweep checks {unknown}. Use any of: {list(SWEEP_CHECKS)}")
    return tuple(c for c in SWEEP_CHECKS if c in checks)


def brute_force_vertices(bounds: Sequence[HalfPlane]) -> set[Point]:
    """Every feasible pairwise intersection of the boundary lines, in plain rationals."""

    found: set[Point] = set()
    for h, g in combinations(bounds, 2):
        det = h.a1 * g.a2 - h.a2 * g.a1
        if det == 0:
            continue
        point = ((h.b * g.a2 - h.a2 * g.b) / det, (h.a1 * g.b - h.b * g.a1) / det)
        if all(hp.contains(point) for hp in bounds):
            found.add(point)
    return found


@dataclass
class SweepRow:
    config: AntennaConfig
    tag: RegimeTag
    swapped: bool
    violations: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "config": list(self.config.as_tuple()),
            "tag": self.tag.value,
            "swapped": self.swapped,
            "violations": list(self.violations),
        }


@dataclass
class SweepReport:
    max_antennas: int
    checks: tuple[str, ...]
    rows: list[SweepRow] = field(default_factory=list)
    equal_delayed_fb_is_perfect: int = 0

    @property
    def configs(self) -> int:
        return len(self.rows)

    @property
    def violations(self) -> list[str]:
        return [f"{row.config}: {v}" for row in self.rows for v in row.violations]

    @property
    def ok(self) -> bool:
        return not any(row.violations for row in self.rows)

    def regimes(self) -> dict[str, int]:
        counts = Counter(row.tag.value for row in self.rows)
        return {tag.value: counts.get(tag.value, 0) for tag in RegimeTag}

    def to_dict(self) -> dict[str, Any]:
        return {
            "version": SCHEMA_VERSION,
            "max_antennas": self.max_antennas,
            "checks": list(self.checks),
            "configs": self.configs,
            "regimes": self.regimes(),
            "violations": self.violations,
            "ok": self.ok,
            "recorded": {"equal_delayed_fb_equals_perfect": self.equal_delayed_fb_is_perfect},
        }


def _check_inclusions(cfg: AntennaConfig, tag: RegimeTag) -> list[str]:
    problems = []
    delayed, fb, perfect = (
        region_delayed_csit(cfg),
        region_fb_dcsit(cfg),
        region_perfect_csit(cfg),
    )
    if not is_subset(delayed, fb):
        problems.append("d_csit not inside fb_dcsit")
    if not is_subset(fb, perfect):
        problems.append("fb_dcsit not inside p_csit")
    if cfg.condition_1() and cfg.condition_2():
        problems.append("conditions 1 and 2 hold together")
    if tag is RegimeTag.CASE_A and not region_equal(fb, perfect):
        problems.append("CaseA but fb_dcsit differs from p_csit")
    if tag is RegimeTag.CASE_B and region_equal(fb, perfect):
        problems.append("CaseB but fb_dcsit equals p_csit")
    if tag is not RegimeTag.EQUAL_DELAYED and region_equal(delayed, fb):
        problems.append(f"{tag.value} but d_csit equals fb_dcsit")
    return problems


def _check_classification(cfg: AntennaConfig, tag: RegimeTag) -> list[str]:
    strictly_larger = not region_equal(region_delayed_csit(cfg), region_fb_dcsit(cfg))
    if strictly_larger != (tag is not RegimeTag.EQUAL_DELAYED):
        return [f"{tag.value} disagrees with d_csit/fb_dcsit comparison"]
    return []


def _check_plan(plan: SchemePlan, target: Point, region: DofRegion) -> list[str]:
    problems = []
    name = plan.point
    if plan.user_dof != target:
        problems.append(
            f"{name} claims {format_point(plan.user_dof)}, corner is {format_point(target)}"
        )
    if plan.user_dof not in region.vertices:
        problems.append(f"{name} point {format_point(plan.user_dof)} is not a fb_dcsit vertex")
    if not feasibility(plan).ok:
        problems.append(f"{name} plan fails its counting inequalities")
    try:
        validate_causality(plan)
    except SchemeError as exc:
        problems.append(f"{name} plan is not causal: {exc}")
    fresh = (len(plan.ledger.rx1_symbols), len(plan.ledger.rx2_symbols))
    if fresh != (plan.total_slots * plan.claimed_dof[0], plan.total_slots * plan.claimed_dof[1]):
        problems.append(f"{name} symbol count {fresh} differs from L * claimed_dof")
    return problems


def _check_corners(cfg: AntennaConfig, tag: RegimeTag) -> list[str]:
    if tag is RegimeTag.EQUAL_DELAYED:
        return []
    corners = corner_points(cfg)
    region = region_fb_dcsit(cfg)
    builders = [plan_p0_p1] if tag is RegimeTag.CASE_A else [plan_p0_p1, plan_p2]
    problems = []
    for build in builders:
        try:
            plan = build(cfg)
        except SchemeError as exc:
            problems.append(f"{build.__name__} failed: {exc}")
            continue
        problems += _check_plan(plan, corners[plan.point], region)
    return problems


def _check_vertices(cfg: AntennaConfig) -> list[str]:
    problems = []
    for family in SWEEP_FAMILIES:
        region = build_region(cfg, family)
        if brute_force_vertices(region.bounds) != set(region.vertices):
            problems.append(f"{family.value} vertices disagree with brute force")
    return problems


def _check_mirror(cfg: AntennaConfig) -> list[str]:
    problems = []
    for family in SWEEP_FAMILIES:
        mirrored = {reflect(v) for v in build_region(cfg, family).vertices}
        if set(build_region(cfg.swapped(), family).vertices) != mirrored:
            problems.append(f"{family.value} is not mirror symmetric")
    return problems


def run_sweep(max_antennas: int, checks: Sequence[str] | str | None = None) -> SweepReport:
    """Check every config with all antenna counts in [1, max_antennas]."""

    if max_antennas < 1:
        raise InvalidConfig(f"max_antennas must be >= 1, got {max_antennas}.")
    selected = parse_checks(checks)
    report = SweepReport(max_antennas=max_antennas, checks=selected)
    counts = range(1, max_antennas + 1)
    for index, values in enumerate(product(counts, repeat=4), start=1):
        cfg = AntennaConfig(*values)
        regime, swapped = classify_any(cfg)
        tag = regime.tag
        row = SweepRow(config=cfg, tag=tag, swapped=swapped)
        if "inclusions" in selected:
            row.violations += _check_inclusions(cfg, tag)
        if "classification" in selected:
            row.violations += _check_classification(cfg, tag)
        if "corners" in selected:
            row.violations += _check_corners(cfg, tag)
        if "vertices" in selected:
            row.violations += _check_vertices(cfg)
        if "mirror" in selected:
            row.violations += _check_mirror(cfg)
        if tag is RegimeTag.EQUAL_DELAYED and region_equal(
            region_fb_dcsit(cfg), region_perfect_csit(cfg)
        ):
            report.equal_delayed_fb_is_perfect += 1
        for violation in row.violations:
            logger.warning("Sweep violation at %s: %s", cfg, violation)
        report.rows.append(row)
        if index % 512 == 0:
            logger.info("Sweep progress: %d configs checked", index)
    logger.info(
        "Sweep up to %d antennas: %d configs, %d violations",
        max_antennas, report.configs, len(report.violations),
    )
    return report


class DofLab:
    """Entry point for computing regions, plans and simulations as JSON-ready documents."""

    def __init__(
        self,
        seed: int | str | None = None,
        *,
        mode: str = "exact",
        workers: int = 1,
        bound: int = DEFAULT_BOUND,
        trials: int = DEFAULT_TRIALS,
    ) -> None:
        if mode not in MODES:
            raise InvalidConfig(f"Unknown mode '{mode}'. Use one of: {list(MODES)}")
        if workers < 1:
            raise InvalidConfig(f"workers must be >= 1, got {workers}.")
        self.seed = resolve_seed(seed)
        self.mode = mode
        self.workers = workers
        self.bound = bound
        self.trials = trials

    def region(self, cfg: AntennaConfig, family: str = "fb_dcsit") -> dict[str, Any]:
        return region_to_dict(build_region(cfg, family))

    def classify(self, cfg: AntennaConfig) -> dict[str, Any]:
        regime, swapped = classify_any(cfg)
        canonical, _ = swap_to_canonical(cfg)
        return {
            "version": SCHEMA_VERSION,
            "config": list(cfg.as_tuple()),
            "canonical": list(canonical.as_tuple()),
            "swapped": swapped,
            "condition_1": cfg.condition_1(),
            "condition_2": cfg.condition_2(),
            **regime.to_dict(),
            "corners": {
                name: format_point(point) for name, point in corner_points(cfg).items()
            },
        }

    def plan(self, cfg: AntennaConfig, point: str) -> dict[str, Any]:
        built = plan_for(cfg, point)
        return {
            **built.to_dict(),
            "feasibility": feasibility(built).to_dict(),
            "causal": validate_causality(built),
        }

    def monte_carlo(
        self, cfg: AntennaConfig, point: str, *, trials: int | None = None
    ) -> MonteCarloSummary:
        built = plan_for(cfg, point)
        return monte_carlo(
            built,
            DistributionSpec.for_mode(self.mode, self.bound),
            self.trials if trials is None else trials,
            self.seed,
            workers=self.workers,
        )

    def simulate(
        self, cfg: AntennaConfig, point: str, *, trials: int | None = None
    ) -> dict[str, Any]:
        return self.monte_carlo(cfg, point, trials=trials).to_dict()

    def share(self, cfg: AntennaConfig, theta: str | Fraction) -> dict[str, Any]:
        """Time-share between P1 and P2 of a CaseB config."""

        corners = corner_points(cfg)
        if set(corners) != {"p1", "p2"}:
            raise NotApplicable(f"{cfg} has no P1/P2 pair; time sharing needs a CaseB config.")
        theta = parse_rational(theta)
        point = time_share(corners["p1"], corners["p2"], theta)
        return {
            "version": SCHEMA_VERSION,
            "config": list(cfg.as_tuple()),
            "theta": str(theta),
            "point": format_point(point),
            "in_fb_dcsit": contains_point(region_fb_dcsit(cfg), point),
        }

    def sweep(self, max_antennas: int, checks: Sequence[str] | str | None = None) -> SweepReport:
        return run_sweep(max_antennas, checks)

    def plot(
        self,
        cfg: AntennaConfig,
        families: Sequence[str],
        *,
        path: Path | None = None,
        fmt: str = "svg",
    ) -> str | Path:
        regions = [build_region(cfg, family) for family in families]
        title = f"DoF regions for {cfg}"
        if fmt == "svg":
            return render_svg(regions, title)
        if fmt == "png":
            if path is None:
                raise InvalidConfig("PNG output needs an output path.")
            return render_png(regions, path, title)
        raise InvalidConfig(f"Unknown plot format '{fmt}'. Use 'svg' or 'png'.")
