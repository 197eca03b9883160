#!/usr/bin/env python3
"""
Exact degrees-of-freedom regions of the two-user MIMO interference channel.

Regions are 2-D polytopes in the (d1, d2) plane stored as a canonical list of
half-planes with ``Fraction`` coefficients plus their counterclockwise vertex
list. Builders cover perfect CSIT, delayed CSIT and local (or global) output
feedback with delayed CSIT; the no-CSIT region is only available as the
(6,2,4,3) fixture because no general formula is implemented.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction
from functools import cmp_to_key, lru_cache
from itertools import combinations
from math import lcm
from typing import Any

SCHEMA_VERSION = "v1"

logger = logging.getLogger("doflab.regions")

Point = tuple[Fraction, Fraction]


class DofLabError(Exception):
    """Base exception for doflab operations."""


class InvalidConfig(DofLabError, ValueError):
    """Raised when an antenna tuple, selector or parameter is out of range."""


class RegionError(DofLabError):
    """Raised when a region cannot be built or enumerated."""


class UnboundedRegion(RegionError):
    """Raised when a half-plane intersection is unbounded."""


class EmptyRegion(RegionError):
    """Raised when a half-plane intersection is empty."""


class RegionFamily(StrEnum):
    NO_CSIT_FIXTURE = "no_csit_fixture"
    PERFECT_CSIT = "p_csit"
    DELAYED_CSIT = "d_csit"
    FB_DELAYED_CSIT = "fb_dcsit"


FAMILY_ALIASES: dict[str, RegionFamily] = {
    "no_csit_fixture": RegionFamily.NO_CSIT_FIXTURE,
    "no_csit": RegionFamily.NO_CSIT_FIXTURE,
    "p_csit": RegionFamily.PERFECT_CSIT,
    "perfect": RegionFamily.PERFECT_CSIT,
    "d_csit": RegionFamily.DELAYED_CSIT,
    "delayed": RegionFamily.DELAYED_CSIT,
    "fb_dcsit": RegionFamily.FB_DELAYED_CSIT,
    "feedback": RegionFamily.FB_DELAYED_CSIT,
    # Global feedback with delayed CSIT has the same region as local feedback.
    "gfb_dcsit": RegionFamily.FB_DELAYED_CSIT,
}


class RegimeTag(StrEnum):
    EQUAL_DELAYED = "EqualDelayed"
    CASE_A = "CaseA"
    CASE_B = "CaseB"


def resolve_family(value: str | RegionFamily) -> RegionFamily:
    if isinstance(value, RegionFamily):
        return value
    family = FAMILY_ALIASES.get(value.strip().lower())
    if family is None:
        raise InvalidConfig(
            f"Unknown region family '{value}'. Use one of: {sorted(FAMILY_ALIASES)}"
        )
    return family


def format_rational(value: Fraction | int) -> str:
    return str(Fraction(value))


def parse_rational(value: str | int | Fraction) -> Fraction:
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidConfig(f"Not a rational number: {value!r}") from exc


def format_point(point: Point) -> list[str]:
    return [format_rational(point[0]), format_rational(point[1])]


@dataclass(frozen=True)
class AntennaConfig:
    """Antenna counts (M1, M2, N1, N2) of transmitters and receivers."""

    m1: int
    m2: int
    n1: int
    n2: int

    def __post_init__(self) -> None:
        for name in ("m1", "m2", "n1", "n2"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise InvalidConfig(f"{name.upper()} must be a positive integer, got {value!r}.")

    @classmethod
    def of(cls, values: Sequence[int]) -> AntennaConfig:
        if len(values) != 4:
            raise InvalidConfig(f"Expected four antenna counts (M1 M2 N1 N2), got {list(values)}.")
        return cls(*(int(v) for v in values))

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.m1, self.m2, self.n1, self.n2)

    @property
    def m1_eff(self) -> int:
        """Effective transmit dimension of Tx1, min(M1, N1 + N2)."""
        return min(self.m1, self.n1 + self.n2)

    @property
    def is_canonical(self) -> bool:
        return self.n1 >= self.n2

    def swapped(self) -> AntennaConfig:
        return AntennaConfig(self.m2, self.m1, self.n2, self.n1)

    def condition_1(self) -> bool:
        m1, m2, n1, n2 = self.as_tuple()
        if not (m1 > n1 + n2 - m2 > n1 > n2 > m2):
            return False
        return m2 > Fraction(n2 * (n2 - m2), n1 - m2)

    def condition_2(self) -> bool:
        return self.swapped().condition_1()

    def __str__(self) -> str:
        return "({},{},{},{})".format(*self.as_tuple())


@dataclass(frozen=True)
class HalfPlane:
    """The closed half-plane a1*d1 + a2*d2 <= b."""

    a1: Fraction
    a2: Fraction
    b: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "a1", Fraction(self.a1))
        object.__setattr__(self, "a2", Fraction(self.a2))
        object.__setattr__(self, "b", Fraction(self.b))
        if self.a1 == 0 and self.a2 == 0:
            raise InvalidConfig("A half-plane needs a nonzero coefficient.")

    def normalized(self) -> HalfPlane:
        lead = abs(self.a1) if self.a1 != 0 else abs(self.a2)
        if lead == 1:
            return self
        return HalfPlane(self.a1 / lead, self.a2 / lead, self.b / lead)

    def value(self, point: Point) -> Fraction:
        return self.a1 * point[0] + self.a2 * point[1]

    def contains(self, point: Point) -> bool:
        return self.value(point) <= self.b

    def is_tight(self, point: Point) -> bool:
        return self.value(point) == self.b

    @property
    def is_axis(self) -> bool:
        return self.normalized() in AXIS_BOUNDS

    def mirrored(self) -> HalfPlane:
        return HalfPlane(self.a2, self.a1, self.b).normalized()

    def to_dict(self) -> dict[str, str]:
        return {
            "a1": format_rational(self.a1),
            "a2": format_rational(self.a2),
            "b": format_rational(self.b),
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> HalfPlane:
        return cls(
            parse_rational(payload["a1"]),
            parse_rational(payload["a2"]),
            parse_rational(payload["b"]),
        )

    def __str__(self) -> str:
        terms = []
        for coeff, name in ((self.a1, "d1"), (self.a2, "d2")):
            if coeff == 0:
                continue
            sign = "-" if coeff < 0 else "+"
            magnitude = abs(coeff)
            body = name if magnitude == 1 else f"{magnitude}*{name}"
            terms.append((sign, body))
        text = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for sign, body in terms[1:]:
            text += f" {sign} {body}"
        return f"{text} <= {self.b}"


AXIS_BOUNDS = (HalfPlane(-1, 0, 0), HalfPlane(0, -1, 0))


@dataclass(frozen=True)
class DofRegion:
    """A bounded convex DoF polytope in canonical form."""

    config: AntennaConfig | None
    family: RegionFamily
    halfplanes: tuple[HalfPlane, ...]
    vertices: tuple[Point, ...]
    bounds: tuple[HalfPlane, ...] = ()

    def contains(self, point: Sequence[Fraction | int]) -> bool:
        return contains_point(self, point)

    def to_dict(self) -> dict[str, Any]:
        return region_to_dict(self)


@dataclass(frozen=True)
class RegimeClass:
    """Regime of a canonical config and the values that decided it."""

    tag: RegimeTag
    lhs: Fraction
    rhs: Fraction | None
    ordered: bool
    condition_1: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "tag": self.tag.value,
            "witness": {
                "lhs": format_rational(self.lhs),
                "rhs": None if self.rhs is None else format_rational(self.rhs),
                "ordered": self.ordered,
                "condition_1": self.condition_1,
            },
        }


# Integer form of a half-plane: (A1, A2, B) with A1*d1 + A2*d2 <= B.
_IntPlane = tuple[int, int, int]


def _int_plane(hp: HalfPlane) -> _IntPlane:
    scale = lcm(hp.a1.denominator, hp.a2.denominator, hp.b.denominator)
    return (
        hp.a1.numerator * (scale // hp.a1.denominator),
        hp.a2.numerator * (scale // hp.a2.denominator),
        hp.b.numerator * (scale // hp.b.denominator),
    )


def _dedupe(halfplanes: Iterable[HalfPlane]) -> list[HalfPlane]:
    seen: dict[HalfPlane, None] = {}
    for hp in halfplanes:
        seen.setdefault(hp.normalized(), None)
    return list(seen)


def _intersections(planes: Sequence[_IntPlane]) -> set[tuple[int, int, int]]:
    """Feasible pairwise intersections as (X, Y, D) with D > 0, point = (X/D, Y/D)."""

    found: set[tuple[int, int, int]] = set()
    for (a1, a2, b), (c1, c2, e) in combinations(planes, 2):
        det = a1 * c2 - a2 * c1
        if det == 0:
            continue
        x = b * c2 - a2 * e
        y = a1 * e - b * c1
        if det < 0:
            det, x, y = -det, -x, -y
        if all(p1 * x + p2 * y <= q * det for p1, p2, q in planes):
            found.add((x, y, det))
    return found


def _parallel_feasible(planes: Sequence[HalfPlane]) -> bool:
    direction = (planes[0].a1, planes[0].a2)
    lower: Fraction | None = None
    upper: Fraction | None = None
    for hp in planes:
        if (hp.a1, hp.a2) == direction:
            upper = hp.b if upper is None else min(upper, hp.b)
        else:
            lower = -hp.b if lower is None else max(lower, -hp.b)
    return lower is None or upper is None or lower <= upper


def _has_recession_direction(planes: Sequence[HalfPlane]) -> bool:
    for hp in planes:
        for direction in ((-hp.a2, hp.a1), (hp.a2, -hp.a1)):
            if all(other.a1 * direction[0] + other.a2 * direction[1] <= 0 for other in planes):
                return True
    return False


def _ccw_order(points: Iterable[Point]) -> list[Point]:
    pts = list(points)
    if len(pts) <= 2:
        return sorted(pts, key=lambda p: (p[1], p[0]))
    cx = sum(p[0] for p in pts) / len(pts)
    cy = sum(p[1] for p in pts) / len(pts)

    def half(p: Point) -> int:
        dx, dy = p[0] - cx, p[1] - cy
        return 0 if dy > 0 or (dy == 0 and dx > 0) else 1

    def compare(p: Point, q: Point) -> int:
        hp, hq = half(p), half(q)
        if hp != hq:
            return hp - hq
        cross = (p[0] - cx) * (q[1] - cy) - (p[1] - cy) * (q[0] - cx)
        return -1 if cross > 0 else (1 if cross < 0 else 0)

    ordered = sorted(pts, key=cmp_to_key(compare))
    start = min(range(len(ordered)), key=lambda i: (ordered[i][1], ordered[i][0]))
    return ordered[start:] + ordered[:start]


def vertices(halfplanes: Iterable[HalfPlane]) -> list[Point]:
    """Extreme points of a bounded, feasible half-plane intersection, counterclockwise."""

    planes = _dedupe(halfplanes)
    if not planes:
        raise UnboundedRegion("No constraints given; the whole plane is unbounded.")

    found = _intersections([_int_plane(hp) for hp in planes])
    if not found:
        spans = any(h.a1 * g.a2 - h.a2 * g.a1 != 0 for h, g in combinations(planes, 2))
        if spans or not _parallel_feasible(planes):
            raise EmptyRegion("Half-plane intersection is empty.")
        raise UnboundedRegion("Half-plane intersection is a strip or half-plane.")
    if _has_recession_direction(planes):
        raise UnboundedRegion("Half-plane intersection is unbounded.")

    points = {(Fraction(x, d), Fraction(y, d)) for x, y, d in found}
    return _ccw_order(points)


def canonicalize(
    halfplanes: Iterable[HalfPlane],
) -> tuple[tuple[HalfPlane, ...], tuple[Point, ...]]:
    """Drop redundant constraints: keep axis bounds and planes tight at two or more vertices."""

    planes = _dedupe([*AXIS_BOUNDS, *halfplanes])
    verts = tuple(vertices(planes))
    kept = [
        hp
        for hp in planes
        if hp in AXIS_BOUNDS or sum(1 for v in verts if hp.is_tight(v)) >= 2
    ]
    kept.sort(key=lambda hp: (hp.a1, hp.a2, hp.b))
    return tuple(kept), verts


def _region(
    cfg: AntennaConfig | None, family: RegionFamily, bounds: Sequence[HalfPlane]
) -> DofRegion:
    stated = tuple(_dedupe([*AXIS_BOUNDS, *bounds]))
    halfplanes, verts = canonicalize(stated)
    logger.debug(
        "Built %s region for %s: %d bounds, %d canonical, %d vertices",
        family.value,
        cfg,
        len(stated),
        len(halfplanes),
        len(verts),
    )
    return DofRegion(
        config=cfg, family=family, halfplanes=halfplanes, vertices=verts, bounds=stated
    )


def _perfect_bounds(cfg: AntennaConfig) -> list[HalfPlane]:
    m1, m2, n1, n2 = cfg.as_tuple()
    total = min(m1 + m2, n1 + n2, max(m1, n2), max(m2, n1))
    return [
        HalfPlane(1, 0, min(m1, n1)),
        HalfPlane(0, 1, min(m2, n2)),
        HalfPlane(1, 1, total),
    ]


def _feedback_bounds(cfg: AntennaConfig) -> list[HalfPlane]:
    m1, m2, n1, n2 = cfg.as_tuple()
    return [
        *_perfect_bounds(cfg),
        HalfPlane(
            Fraction(1, min(n1 + n2, m1)),
            Fraction(1, min(n2, m1)),
            Fraction(min(n2, m1 + m2), min(n2, m1)),
        ),
        HalfPlane(
            Fraction(1, min(n1, m2)),
            Fraction(1, min(n1 + n2, m2)),
            Fraction(min(n1, m1 + m2), min(n1, m2)),
        ),
    ]


@lru_cache(maxsize=16384)
def region_perfect_csit(cfg: AntennaConfig) -> DofRegion:
    return _region(cfg, RegionFamily.PERFECT_CSIT, _perfect_bounds(cfg))


@lru_cache(maxsize=16384)
def region_fb_dcsit(cfg: AntennaConfig) -> DofRegion:
    """Local output feedback with delayed CSIT; also the global-feedback region."""
    return _region(cfg, RegionFamily.FB_DELAYED_CSIT, _feedback_bounds(cfg))


@lru_cache(maxsize=16384)
def region_delayed_csit(cfg: AntennaConfig) -> DofRegion:
    m1, m2, n1, n2 = cfg.as_tuple()
    bounds = _feedback_bounds(cfg)
    if cfg.condition_1():
        bounds.append(HalfPlane(1, Fraction(n1 + 2 * n2 - m2, n2), n1 + n2))
    if cfg.condition_2():
        bounds.append(HalfPlane(Fraction(n2 + 2 * n1 - m1, n1), 1, n1 + n2))
    return _region(cfg, RegionFamily.DELAYED_CSIT, bounds)


NO_CSIT_FIXTURE_CONFIG = AntennaConfig(6, 2, 4, 3)


@lru_cache(maxsize=1)
def no_csit_fixture_6243() -> DofRegion:
    """Literal no-CSIT region of the (6,2,4,3) channel; not a general builder."""
    return _region(
        NO_CSIT_FIXTURE_CONFIG,
        RegionFamily.NO_CSIT_FIXTURE,
        [HalfPlane(1, 0, 4), HalfPlane(0, 1, 2), HalfPlane(1, Fraction(3, 2), 4)],
    )


def build_region(cfg: AntennaConfig, family: str | RegionFamily) -> DofRegion:
    family = resolve_family(family)
    if family is RegionFamily.PERFECT_CSIT:
        return region_perfect_csit(cfg)
    if family is RegionFamily.DELAYED_CSIT:
        return region_delayed_csit(cfg)
    if family is RegionFamily.FB_DELAYED_CSIT:
        return region_fb_dcsit(cfg)
    if cfg == NO_CSIT_FIXTURE_CONFIG:
        return no_csit_fixture_6243()
    if cfg == NO_CSIT_FIXTURE_CONFIG.swapped():
        return mirror_region(no_csit_fixture_6243())
    raise RegionError(
        f"The no-CSIT region is only available as a fixture for {NO_CSIT_FIXTURE_CONFIG} "
        f"(or its mirror); no general no-CSIT formula is implemented, got {cfg}."
    )


def reflect(point: Point) -> Point:
    return (point[1], point[0])


def mirror_region(region: DofRegion) -> DofRegion:
    """Reflect a region across d1 = d2 (user indices swapped)."""

    halfplanes, verts = canonicalize(hp.mirrored() for hp in region.halfplanes)
    return DofRegion(
        config=None if region.config is None else region.config.swapped(),
        family=region.family,
        halfplanes=halfplanes,
        vertices=verts,
        bounds=tuple(hp.mirrored() for hp in region.bounds),
    )


def contains_point(region: DofRegion, point: Sequence[Fraction | int]) -> bool:
    p = (Fraction(point[0]), Fraction(point[1]))
    return all(hp.contains(p) for hp in region.halfplanes)


def is_subset(r1: DofRegion, r2: DofRegion) -> bool:
    return all(hp.contains(v) for v in r1.vertices for hp in r2.halfplanes)


def region_equal(r1: DofRegion, r2: DofRegion) -> bool:
    return is_subset(r1, r2) and is_subset(r2, r1)


def region_area(region: DofRegion) -> Fraction:
    pts = region.vertices
    twice = sum(
        (pts[i][0] * pts[(i + 1) % len(pts)][1] - pts[(i + 1) % len(pts)][0] * pts[i][1]
         for i in range(len(pts))),
        Fraction(0),
    )
    return abs(twice) / 2


def swap_to_canonical(cfg: AntennaConfig) -> tuple[AntennaConfig, bool]:
    if cfg.n1 < cfg.n2:
        return cfg.swapped(), True
    return cfg, False


def classify(cfg: AntennaConfig) -> RegimeClass:
    """Decide EqualDelayed / CaseA / CaseB for a canonical config (N1 >= N2).

    CaseA and CaseB need the feedback region to be strictly larger than the
    delayed-CSIT one, i.e. Condition 1 (which implies M1 > N1 > N2 > M2).
    Ties in the CaseA/CaseB comparison go to CaseA.
    """

    if not cfg.is_canonical:
        raise InvalidConfig(f"classify expects N1 >= N2; swap {cfg} with swap_to_canonical first.")

    m1, m2, n1, n2 = cfg.as_tuple()
    lhs = Fraction(cfg.m1_eff)
    rhs = Fraction(n2 * (n1 - m2), n2 - m2) if n2 > m2 else None
    ordered = m1 > n1 > n2 > m2
    cond_1 = cfg.condition_1()

    if not cond_1 or rhs is None:
        tag = RegimeTag.EQUAL_DELAYED
    elif lhs >= rhs:
        tag = RegimeTag.CASE_A
    else:
        tag = RegimeTag.CASE_B
    return RegimeClass(tag=tag, lhs=lhs, rhs=rhs, ordered=ordered, condition_1=cond_1)


def classify_any(cfg: AntennaConfig) -> tuple[RegimeClass, bool]:
    canonical, swapped = swap_to_canonical(cfg)
    return classify(canonical), swapped


def region_to_dict(region: DofRegion) -> dict[str, Any]:
    return {
        "version": SCHEMA_VERSION,
        "config": None if region.config is None else list(region.config.as_tuple()),
        "family": region.family.value,
        "halfplanes": [hp.to_dict() for hp in region.halfplanes],
        "vertices": [format_point(v) for v in region.vertices],
        "bounds": [hp.to_dict() for hp in region.bounds],
    }


def region_from_dict(payload: dict[str, Any]) -> DofRegion:
    version = payload.get("version")
    if version != SCHEMA_VERSION:
        raise InvalidConfig(f"Unsupported region document version {version!r}.")
    config = payload.get("config")
    return DofRegion(
        config=None if config is None else AntennaConfig.of(config),
        family=resolve_family(payload["family"]),
        halfplanes=tuple(HalfPlane.from_dict(item) for item in payload["halfplanes"]),
        vertices=tuple(
            (parse_rational(x), parse_rational(y)) for x, y in payload["vertices"]
        ),
        bounds=tuple(HalfPlane.from_dict(item) for item in payload.get("bounds", [])),
    )
