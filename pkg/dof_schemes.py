#!/usr/bin/env python3
"""
Slot-by-slot transmission plans for the feedback + delayed CSIT corner points.

A plan lists, for every slot and transmit antenna, whether the antenna carries
a fresh symbol, a component Tx1 reconstructed from past feedback and past
channel matrices, or the known constant (sent as zero). Components come in two
kinds:

- ``P{t}.{k}``: Tx1's slot-t signal as seen by Rx2 antenna k (interference at Rx2)
- ``Q{t}.{k}``: Tx2's slot-t signal as seen by Rx2 antenna k (needs feedback)

Plans are built on the canonical config (N1 >= N2) and mirrored for swapped
configs.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator
from dataclasses import dataclass, replace
from enum import StrEnum
from fractions import Fraction
from typing import Any

from dof_regions import (
    SCHEMA_VERSION,
    AntennaConfig,
    DofLabError,
    InvalidConfig,
    Point,
    RegimeTag,
    classify,
    format_point,
    parse_rational,
    reflect,
    swap_to_canonical,
)

logger = logging.getLogger("doflab.schemes")

POINTS = ("p0", "p1", "p2")


class SchemeError(DofLabError):
    """Base exception for plan construction and validation."""


class NotApplicable(SchemeError):
    """Raised when a plan is requested for a config outside its regime."""


class InfeasiblePlan(SchemeError):
    """Raised when a plan violates a counting or antenna constraint."""


class CausalityViolation(SchemeError):
    """Raised when a transmitter would need information it cannot have yet."""

    def __init__(self, message: str, *, slot: int, component: str | None = None) -> None:
        super().__init__(message)
        self.slot = slot
        self.component = component


class KnowledgeMode(StrEnum):
    NO_CSIT = "no_csit"
    PERFECT_CSIT = "p_csit"
    DELAYED_CSIT = "d_csit"
    LOCAL_FEEDBACK = "local_fb"
    FB_DELAYED_CSIT = "fb_dcsit"
    GLOBAL_FB_DELAYED_CSIT = "gfb_dcsit"

    @property
    def has_csit(self) -> bool:
        return self in {
            KnowledgeMode.PERFECT_CSIT,
            KnowledgeMode.DELAYED_CSIT,
            KnowledgeMode.FB_DELAYED_CSIT,
            KnowledgeMode.GLOBAL_FB_DELAYED_CSIT,
        }

    @property
    def has_feedback(self) -> bool:
        return self in {
            KnowledgeMode.LOCAL_FEEDBACK,
            KnowledgeMode.FB_DELAYED_CSIT,
            KnowledgeMode.GLOBAL_FB_DELAYED_CSIT,
        }


class EntryKind(StrEnum):
    FRESH = "fresh"
    COMPONENT = "component"
    ZERO = "zero"


class ComponentKind(StrEnum):
    INTERFERENCE = "P"
    SIGNAL = "Q"


@dataclass(frozen=True)
class AntennaEntry:
    kind: EntryKind
    id: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "id": self.id}

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> AntennaEntry:
        return cls(EntryKind(payload["kind"]), payload.get("id"))


ZERO = AntennaEntry(EntryKind.ZERO)


def _fresh(symbol: str) -> AntennaEntry:
    return AntennaEntry(EntryKind.FRESH, symbol)


def _forward(component: str) -> AntennaEntry:
    return AntennaEntry(EntryKind.COMPONENT, component)


@dataclass(frozen=True)
class SlotSpec:
    """Per-antenna transmit spec of both transmitters in one slot (1-based index)."""

    index: int
    tx1: tuple[AntennaEntry, ...]
    tx2: tuple[AntennaEntry, ...]

    def entries(self, tx: int) -> tuple[AntennaEntry, ...]:
        return self.tx1 if tx == 1 else self.tx2

    def fresh_ids(self, tx: int) -> list[str]:
        return [e.id for e in self.entries(tx) if e.kind is EntryKind.FRESH]

    def component_ids(self) -> list[str]:
        return [e.id for e in (*self.tx1, *self.tx2) if e.kind is EntryKind.COMPONENT]

    def to_dict(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "tx1": [e.to_dict() for e in self.tx1],
            "tx2": [e.to_dict() for e in self.tx2],
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> SlotSpec:
        return cls(
            index=int(payload["index"]),
            tx1=tuple(AntennaEntry.from_dict(e) for e in payload["tx1"]),
            tx2=tuple(AntennaEntry.from_dict(e) for e in payload["tx2"]),
        )


@dataclass(frozen=True)
class Component:
    """A derived component defined by slot ``slot`` at Rx2 antenna ``antenna`` (1-based)."""

    id: str
    kind: ComponentKind
    slot: int
    antenna: int

    @classmethod
    def make(cls, kind: ComponentKind, slot: int, antenna: int) -> Component:
        return cls(f"{kind.value}{slot}.{antenna}", kind, slot, antenna)

    def to_dict(self) -> dict[str, Any]:
        return {"id": self.id, "kind": self.kind.value, "slot": self.slot, "antenna": self.antenna}

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> Component:
        return cls(
            payload["id"], ComponentKind(payload["kind"]), int(payload["slot"]),
            int(payload["antenna"]),
        )


@dataclass(frozen=True)
class SymbolLedger:
    rx1_symbols: tuple[str, ...]
    rx2_symbols: tuple[str, ...]
    components: tuple[Component, ...]

    def __post_init__(self) -> None:
        ids = [*self.rx1_symbols, *self.rx2_symbols, *(c.id for c in self.components)]
        if len(ids) != len(set(ids)):
            raise InvalidConfig("Ledger ids must be unique.")

    def component(self, component_id: str) -> Component:
        for component in self.components:
            if component.id == component_id:
                return component
        raise KeyError(component_id)

    def to_dict(self) -> dict[str, Any]:
        return {
            "rx1_symbols": {"count": len(self.rx1_symbols), "ids": list(self.rx1_symbols)},
            "rx2_symbols": {"count": len(self.rx2_symbols), "ids": list(self.rx2_symbols)},
            "components": [c.to_dict() for c in self.components],
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> SymbolLedger:
        return cls(
            rx1_symbols=tuple(payload["rx1_symbols"]["ids"]),
            rx2_symbols=tuple(payload["rx2_symbols"]["ids"]),
            components=tuple(Component.from_dict(c) for c in payload["components"]),
        )


@dataclass(frozen=True)
class KnowledgeSet:
    """What transmitter ``tx`` may use when encoding slot ``slot``."""

    tx: int
    slot: int
    mode: KnowledgeMode
    own_symbols: tuple[str, ...]
    feedback_receivers: tuple[int, ...]
    feedback_slots: tuple[int, ...]
    channel_slots: tuple[int, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "tx": self.tx,
            "slot": self.slot,
            "mode": self.mode.value,
            "own_symbols": list(self.own_symbols),
            "feedback_receivers": list(self.feedback_receivers),
            "feedback_slots": list(self.feedback_slots),
            "channel_slots": list(self.channel_slots),
        }


@dataclass(frozen=True)
class SchemePlan:
    """A complete plan on a canonical config; ``mirrored`` plans serve the swapped config."""

    cfg: AntennaConfig
    point: str
    total_slots: int
    phase1_slots: int
    slots: tuple[SlotSpec, ...]
    ledger: SymbolLedger
    claimed_dof: Point
    knowledge: KnowledgeMode = KnowledgeMode.FB_DELAYED_CSIT
    mirrored: bool = False
    notes: tuple[str, ...] = ()

    def slot(self, index: int) -> SlotSpec:
        return self.slots[index - 1]

    @property
    def phase2_slots(self) -> tuple[SlotSpec, ...]:
        return self.slots[self.phase1_slots:]

    @property
    def user_cfg(self) -> AntennaConfig:
        return self.cfg.swapped() if self.mirrored else self.cfg

    @property
    def user_dof(self) -> Point:
        return reflect(self.claimed_dof) if self.mirrored else self.claimed_dof

    def interference_ids(self) -> list[str]:
        """Every P component of Phase 1, forwarded or not (Rx2's nuisance unknowns)."""
        return [
            Component.make(ComponentKind.INTERFERENCE, t, k).id
            for t in range(1, self.phase1_slots + 1)
            for k in range(1, self.cfg.n2 + 1)
        ]

    def to_dict(self) -> dict[str, Any]:
        return plan_to_dict(self)


@dataclass(frozen=True)
class FeasibilityReport:
    """Dimension counts at both receivers, from the plan's own bookkeeping."""

    form: str
    rx2_equations: int
    rx2_unknowns: int
    rx1_equations: int
    rx1_unknowns: int
    tx2_capacity: int | None = None
    tx2_symbols: int | None = None

    @property
    def rx2_ok(self) -> bool:
        return self.rx2_equations >= self.rx2_unknowns

    @property
    def rx1_ok(self) -> bool:
        return self.rx1_equations >= self.rx1_unknowns

    @property
    def rx2_tight(self) -> bool:
        return self.rx2_equations == self.rx2_unknowns

    @property
    def rx1_tight(self) -> bool:
        return self.rx1_equations == self.rx1_unknowns

    @property
    def tx2_ok(self) -> bool:
        return self.tx2_capacity is None or self.tx2_capacity >= self.tx2_symbols

    @property
    def ok(self) -> bool:
        return self.rx1_ok and self.rx2_ok and self.tx2_ok

    def to_dict(self) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "form": self.form,
            "rx2": {
                "equations": self.rx2_equations,
                "unknowns": self.rx2_unknowns,
                "ok": self.rx2_ok,
                "tight": self.rx2_tight,
            },
            "rx1": {
                "equations": self.rx1_equations,
                "unknowns": self.rx1_unknowns,
                "ok": self.rx1_ok,
                "tight": self.rx1_tight,
            },
        }
        if self.tx2_capacity is not None:
            payload["tx2"] = {
                "capacity": self.tx2_capacity,
                "symbols": self.tx2_symbols,
                "ok": self.tx2_ok,
            }
        payload["ok"] = self.ok
        return payload


def _ids(prefix: str, count: int) -> Iterator[str]:
    return (f"{prefix}{j}" for j in range(1, count + 1))


def _pad(entries: list[AntennaEntry], width: int) -> tuple[AntennaEntry, ...]:
    if len(entries) > width:
        raise InfeasiblePlan(f"{len(entries)} entries do not fit on {width} antennas.")
    return tuple(entries) + (ZERO,) * (width - len(entries))


def _balanced(total: int, bins: int) -> list[int]:
    base, extra = divmod(total, bins)
    return [base + 1] * extra + [base] * (bins - extra)


def _canonical_regime(cfg: AntennaConfig) -> tuple[AntennaConfig, bool, RegimeTag]:
    canonical, swapped = swap_to_canonical(cfg)
    return canonical, swapped, classify(canonical).tag


def _mirror(plan: SchemePlan) -> SchemePlan:
    return replace(
        plan,
        mirrored=True,
        notes=(*plan.notes, f"built on canonical config {plan.cfg} and mirrored"),
    )


def _two_phase_plan(cfg: AntennaConfig, tag: RegimeTag) -> SchemePlan:
    m1, m2, n1, n2 = cfg.as_tuple()
    m1_eff = cfg.m1_eff
    capacity = n1 - m2
    ratio = max(Fraction(m1_eff, capacity), Fraction(n2, n2 - m2))
    phase1, total = ratio.denominator, ratio.numerator
    phase2 = total - phase1

    u_ids = list(_ids("u", phase1 * m1_eff))
    v_ids = list(_ids("v", total * m2))
    u_iter, v_iter = iter(u_ids), iter(v_ids)

    slots: list[SlotSpec] = []
    for t in range(1, phase1 + 1):
        tx1 = [_fresh(next(u_iter)) for _ in range(m1_eff)]
        tx2 = [_fresh(next(v_iter)) for _ in range(m2)]
        slots.append(SlotSpec(t, _pad(tx1, m1), _pad(tx2, m2)))

    q_parts = [
        Component.make(ComponentKind.SIGNAL, t, k)
        for t in range(1, phase1 + 1)
        for k in range(1, m2 + 1)
    ]
    # k-major so every Phase-1 slot gets its share of interference equations.
    p_queue = [
        Component.make(ComponentKind.INTERFERENCE, t, k)
        for k in range(1, n2 + 1)
        for t in range(1, phase1 + 1)
    ]
    q_loads = _balanced(len(q_parts), phase2)

    forwarded: list[Component] = []
    q_iter = iter(q_parts)
    for offset, q_load in enumerate(q_loads):
        qs = [next(q_iter) for _ in range(q_load)]
        room = capacity - q_load
        ps, p_queue = p_queue[:room], p_queue[room:]
        forwarded += ps + qs
        tx1 = [_forward(c.id) for c in (*ps, *qs)]
        tx2 = [_fresh(next(v_iter)) for _ in range(m2)]
        slots.append(SlotSpec(phase1 + 1 + offset, _pad(tx1, m1), _pad(tx2, m2)))

    point = "p0" if tag is RegimeTag.CASE_A else "p1"
    plan = SchemePlan(
        cfg=cfg,
        point=point,
        total_slots=total,
        phase1_slots=phase1,
        slots=tuple(slots),
        ledger=SymbolLedger(
            rx1_symbols=tuple(u_ids),
            rx2_symbols=tuple(v_ids),
            components=tuple(sorted(forwarded, key=lambda c: (c.kind, c.slot, c.antenna))),
        ),
        claimed_dof=(Fraction(len(u_ids), total), Fraction(len(v_ids), total)),
        notes=(
            f"T={phase1} is the least positive integer making "
            f"L = T*max(M1eff/(N1-M2), N2/(N2-M2)) = {total} an integer",
        ),
    )
    logger.debug(
        "Two-phase plan %s for %s: T=%d L=%d, %d components",
        point, cfg, phase1, total, len(forwarded),
    )
    return plan


def plan_p0_p1(cfg: AntennaConfig) -> SchemePlan:
    """Two-phase plan reaching P0 (CaseA) or P1 (CaseB)."""

    canonical, swapped, tag = _canonical_regime(cfg)
    if tag is RegimeTag.EQUAL_DELAYED:
        raise NotApplicable(
            f"{cfg} is EqualDelayed: delayed CSIT alone reaches every corner, no feedback plan."
        )
    plan = _two_phase_plan(canonical, tag)
    return _mirror(plan) if swapped else plan


def plan_p2(cfg: AntennaConfig) -> SchemePlan:
    """Plan reaching P2, the corner where the sum bound meets the feedback bound (CaseB).

    In Phase-2 slot ``j`` Tx1 forwards ``P{t}.{j}`` for every Phase-1 slot ``t``, so
    ``phase1 * phase2`` interference components go out in total. That count is what keeps
    Rx1's decoding system square.
    """

    canonical, swapped, tag = _canonical_regime(cfg)
    if tag is not RegimeTag.CASE_B:
        raise NotApplicable(f"{cfg} is {tag.value}; the P2 corner exists only in CaseB.")

    m1, m2, n1, n2 = canonical.as_tuple()
    m1_eff = canonical.m1_eff
    phase1 = n1 - n2
    total = m1_eff - n2
    phase2 = m1_eff - n1
    tx2_total = n2 * phase2
    if total * m2 < tx2_total:
        raise InfeasiblePlan(
            f"{canonical}: Tx2 can send at most L*M2 = {total * m2} symbols, "
            f"plan needs {tx2_total}."
        )

    loads: list[int] = []
    remaining = tx2_total
    for _ in range(total):
        loads.append(min(m2, remaining))
        remaining -= loads[-1]

    u_ids = list(_ids("u", phase1 * m1_eff))
    v_ids = list(_ids("v", tx2_total))
    u_iter, v_iter = iter(u_ids), iter(v_ids)

    slots: list[SlotSpec] = []
    for t in range(1, phase1 + 1):
        tx1 = [_fresh(next(u_iter)) for _ in range(m1_eff)]
        tx2 = [_fresh(next(v_iter)) for _ in range(loads[t - 1])]
        slots.append(SlotSpec(t, _pad(tx1, m1), _pad(tx2, m2)))

    q_queue = [
        Component.make(ComponentKind.SIGNAL, t, k)
        for t in range(1, phase1 + 1)
        for k in range(1, loads[t - 1] + 1)
    ]
    forwarded: list[Component] = []
    for j in range(1, phase2 + 1):
        sent = loads[phase1 + j - 1]
        ps = [Component.make(ComponentKind.INTERFERENCE, t, j) for t in range(1, phase1 + 1)]
        qs, q_queue = q_queue[: n2 - sent], q_queue[n2 - sent:]
        forwarded += ps + qs
        tx1 = [_forward(c.id) for c in (*ps, *qs)]
        tx2 = [_fresh(next(v_iter)) for _ in range(sent)]
        slots.append(SlotSpec(phase1 + j, _pad(tx1, m1), _pad(tx2, m2)))
    if q_queue:
        raise InfeasiblePlan(f"{canonical}: {len(q_queue)} signal components left unsent.")

    plan = SchemePlan(
        cfg=canonical,
        point="p2",
        total_slots=total,
        phase1_slots=phase1,
        slots=tuple(slots),
        ledger=SymbolLedger(
            rx1_symbols=tuple(u_ids),
            rx2_symbols=tuple(v_ids),
            components=tuple(sorted(forwarded, key=lambda c: (c.kind, c.slot, c.antenna))),
        ),
        claimed_dof=(Fraction(len(u_ids), total), Fraction(len(v_ids), total)),
        notes=(f"Tx2 loads per slot: {loads}",),
    )
    return _mirror(plan) if swapped else plan


def plan_for(cfg: AntennaConfig, point: str) -> SchemePlan:
    point = point.strip().lower()
    if point not in POINTS:
        raise InvalidConfig(f"Unknown corner point '{point}'. Use one of: {list(POINTS)}")
    if point == "p2":
        return plan_p2(cfg)
    plan = plan_p0_p1(cfg)
    if plan.point != point:
        raise NotApplicable(
            f"{cfg} reaches {plan.point} with the two-phase plan, not {point}."
        )
    return plan


def corner_points(cfg: AntennaConfig) -> dict[str, Point]:
    """Closed-form corner points the feedback plans target, in the caller's user order."""

    canonical, swapped, tag = _canonical_regime(cfg)
    m1, m2, n1, n2 = canonical.as_tuple()
    m1_eff = canonical.m1_eff
    points: dict[str, Point] = {}
    if tag is RegimeTag.CASE_A:
        points["p0"] = (Fraction(n1 - m2), Fraction(m2))
    elif tag is RegimeTag.CASE_B:
        points["p1"] = (Fraction(m1_eff * (n2 - m2), n2), Fraction(m2))
        points["p2"] = (
            Fraction(m1_eff * (n1 - n2), m1_eff - n2),
            Fraction(n2 * (m1_eff - n1), m1_eff - n2),
        )
    if swapped:
        points = {name: reflect(p) for name, p in points.items()}
    return points


def feasibility(plan: SchemePlan) -> FeasibilityReport:
    cfg = plan.cfg
    rx1_count = len(plan.ledger.rx1_symbols)
    rx2_count = len(plan.ledger.rx2_symbols)
    report = FeasibilityReport(
        form="p2" if plan.point == "p2" else "two_phase",
        rx2_equations=plan.total_slots * cfg.n2,
        rx2_unknowns=rx2_count + plan.phase1_slots * cfg.n2,
        rx1_equations=plan.total_slots * cfg.n1,
        rx1_unknowns=rx1_count + rx2_count,
        tx2_capacity=plan.total_slots * cfg.m2 if plan.point == "p2" else None,
        tx2_symbols=rx2_count if plan.point == "p2" else None,
    )
    return report


def knowledge_set(plan: SchemePlan, tx: int, slot: int) -> KnowledgeSet:
    mode = plan.knowledge
    past = tuple(range(1, slot))
    if mode is KnowledgeMode.PERFECT_CSIT:
        channels = tuple(range(1, slot + 1))
    elif mode.has_csit:
        channels = past
    else:
        channels = ()
    if mode is KnowledgeMode.GLOBAL_FB_DELAYED_CSIT:
        receivers: tuple[int, ...] = (1, 2)
    elif mode.has_feedback:
        receivers = (tx,)
    else:
        receivers = ()
    ledger = plan.ledger
    return KnowledgeSet(
        tx=tx,
        slot=slot,
        mode=mode,
        own_symbols=ledger.rx1_symbols if tx == 1 else ledger.rx2_symbols,
        feedback_receivers=receivers,
        feedback_slots=past if receivers else (),
        channel_slots=channels,
    )


def _check_component(plan: SchemePlan, tx: int, slot: int, component_id: str) -> None:
    try:
        component = plan.ledger.component(component_id)
    except KeyError:
        raise CausalityViolation(
            f"Slot {slot}: component {component_id} is not in the ledger.",
            slot=slot, component=component_id,
        ) from None

    if tx != 1:
        raise CausalityViolation(
            f"Slot {slot}: Tx2 cannot form {component_id}; it never learns Tx1's symbols.",
            slot=slot, component=component_id,
        )
    known = knowledge_set(plan, tx, slot)
    if component.slot not in known.channel_slots or component.slot >= slot:
        raise CausalityViolation(
            f"Slot {slot}: {component_id} depends on slot {component.slot}'s channel, "
            f"which Tx1 does not know yet under {plan.knowledge.value}.",
            slot=slot, component=component_id,
        )
    if component.kind is ComponentKind.SIGNAL:
        if component.slot not in known.feedback_slots:
            raise CausalityViolation(
                f"Slot {slot}: {component_id} needs Tx2's slot-{component.slot} symbols, "
                f"which Tx1 only learns from output feedback.",
                slot=slot, component=component_id,
            )
        unknowns = len(plan.slot(component.slot).fresh_ids(2))
        if unknowns > plan.cfg.n1:
            raise CausalityViolation(
                f"Slot {slot}: {component_id} needs {unknowns} Tx2 symbols recovered from "
                f"{plan.cfg.n1} feedback outputs.",
                slot=slot, component=component_id,
            )


def validate_causality(plan: SchemePlan) -> bool:
    """True when every forwarded component is computable from the sender's knowledge set."""

    if len(plan.slots) != plan.total_slots:
        raise InfeasiblePlan(f"Plan lists {len(plan.slots)} slots, expected {plan.total_slots}.")
    for spec in plan.slots:
        if len(spec.tx1) > plan.cfg.m1 or len(spec.tx2) > plan.cfg.m2:
            raise InfeasiblePlan(f"Slot {spec.index} uses more antennas than available.")
        for tx in (1, 2):
            for entry in spec.entries(tx):
                if entry.kind is EntryKind.COMPONENT:
                    _check_component(plan, tx, spec.index, entry.id)
    return True


def time_share(p1: Point, p2: Point, theta: Fraction | int | str) -> Point:
    """theta * p1 + (1 - theta) * p2, exactly."""

    theta = parse_rational(theta)
    if not 0 <= theta <= 1:
        raise InvalidConfig(f"theta must lie in [0, 1], got {theta}.")
    return (
        theta * Fraction(p1[0]) + (1 - theta) * Fraction(p2[0]),
        theta * Fraction(p1[1]) + (1 - theta) * Fraction(p2[1]),
    )


def plan_to_dict(plan: SchemePlan) -> dict[str, Any]:
    return {
        "version": SCHEMA_VERSION,
        "config": list(plan.cfg.as_tuple()),
        "point": plan.point,
        "mirrored": plan.mirrored,
        "total_slots": plan.total_slots,
        "phase1_slots": plan.phase1_slots,
        "knowledge": plan.knowledge.value,
        "claimed_dof": format_point(plan.claimed_dof),
        "user_dof": format_point(plan.user_dof),
        "ledger": plan.ledger.to_dict(),
        "slots": [s.to_dict() for s in plan.slots],
        "notes": list(plan.notes),
    }


def plan_from_dict(payload: dict[str, Any]) -> SchemePlan:
    version = payload.get("version")
    if version != SCHEMA_VERSION:
        raise InvalidConfig(f"Unsupported plan document version {version!r}.")
    claimed = payload["claimed_dof"]
    return SchemePlan(
        cfg=AntennaConfig.of(payload["config"]),
        point=payload["point"],
        total_slots=int(payload["total_slots"]),
        phase1_slots=int(payload["phase1_slots"]),
        slots=tuple(SlotSpec.from_dict(s) for s in payload["slots"]),
        ledger=SymbolLedger.from_dict(payload["ledger"]),
        claimed_dof=(parse_rational(claimed[0]), parse_rational(claimed[1])),
        knowledge=KnowledgeMode(payload.get("knowledge", KnowledgeMode.FB_DELAYED_CSIT.value)),
        mirrored=bool(payload.get("mirrored", False)),
        notes=tuple(payload.get("notes", ())),
    )
