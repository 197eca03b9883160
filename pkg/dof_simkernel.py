#!/usr/bin/env python3
"""
Execute scheme plans on random generic channels and verify exact decodability.

Exact mode (the default) draws channel entries as uniform integers in [-B, B]
and does all algebra over the rationals; float mode draws standard complex
Gaussian entries and uses SVD rank checks with a relative tolerance. Tx1 only
reaches channel matrices and feedback through a ``_KnowledgeView`` that logs
every access, so a transcript can prove it never used the current slot.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import StrEnum
from typing import Any

import numpy as np

from dof_linalg import (
    DEFAULT_RANK_TOLERANCE,
    LinearSystem,
    Matrix,
    RankDeficient,
    ReconstructionRankFailure,
    Scalar,
    Solution,
    dot,
    encode_scalar,
    matvec,
    solve_system,
    values_match,
)
from dof_regions import (
    SCHEMA_VERSION,
    AntennaConfig,
    InvalidConfig,
    Point,
    format_point,
)
from dof_schemes import (
    CausalityViolation,
    ComponentKind,
    EntryKind,
    KnowledgeSet,
    SchemePlan,
    knowledge_set,
    validate_causality,
)

logger = logging.getLogger("doflab.simkernel")

LINKS = ("11", "12", "21", "22")
DEFAULT_BOUND = 1000
DEFAULT_SYMBOL_BOUND = 100
RESAMPLE_CAP = 5
MAX_SEED = 2**64

LinearForm = dict[str, Scalar]


class DistributionKind(StrEnum):
    UNIFORM_INT = "uniform_int"
    COMPLEX_GAUSSIAN = "complex_gaussian"


@dataclass(frozen=True)
class LinkDistribution:
    """Entry-wise distribution of one link's channel matrices."""

    kind: DistributionKind = DistributionKind.UNIFORM_INT
    bound: int = DEFAULT_BOUND

    def __post_init__(self) -> None:
        if self.kind is DistributionKind.UNIFORM_INT and self.bound < 2:
            raise InvalidConfig(f"Integer draws need a bound B >= 2, got {self.bound}.")

    def sample(
        self, rng: np.random.Generator, shape: tuple[int, int], *, exact: bool
    ) -> Matrix:
        if self.kind is DistributionKind.UNIFORM_INT:
            draws = rng.integers(-self.bound, self.bound, size=shape, endpoint=True)
            if exact:
                return tuple(tuple(int(v) for v in row) for row in draws)
            return tuple(tuple(complex(int(v)) for v in row) for row in draws)
        draws = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
        return tuple(tuple(complex(v) for v in row) for row in draws)

    def to_dict(self) -> dict[str, Any]:
        payload: dict[str, Any] = {"kind": self.kind.value}
        if self.kind is DistributionKind.UNIFORM_INT:
            payload["bound"] = self.bound
        return payload


@dataclass(frozen=True)
class DistributionSpec:
    """Per-link distributions; links are sampled independently and may differ."""

    links: Mapping[str, LinkDistribution] = field(
        default_factory=lambda: {link: LinkDistribution() for link in LINKS}
    )

    def __post_init__(self) -> None:
        unknown = set(self.links) - set(LINKS)
        missing = set(LINKS) - set(self.links)
        if unknown or missing:
            raise InvalidConfig(f"Distribution spec needs exactly links {LINKS}.")

    @classmethod
    def uniform(
        cls,
        bound: int = DEFAULT_BOUND,
        overrides: Mapping[str, LinkDistribution] | None = None,
    ) -> DistributionSpec:
        links = {link: LinkDistribution(DistributionKind.UNIFORM_INT, bound) for link in LINKS}
        links.update(overrides or {})
        return cls(links)

    @classmethod
    def gaussian(cls) -> DistributionSpec:
        return cls({link: LinkDistribution(DistributionKind.COMPLEX_GAUSSIAN) for link in LINKS})

    @classmethod
    def for_mode(cls, mode: str, bound: int = DEFAULT_BOUND) -> DistributionSpec:
        if mode == "exact":
            return cls.uniform(bound)
        if mode == "float":
            return cls.gaussian()
        raise InvalidConfig(f"Unknown mode '{mode}'. Use 'exact' or 'float'.")

    def link(self, name: str) -> LinkDistribution:
        return self.links[name]

    @property
    def exact(self) -> bool:
        return all(d.kind is DistributionKind.UNIFORM_INT for d in self.links.values())

    @property
    def mode(self) -> str:
        return "exact" if self.exact else "float"

    def to_dict(self) -> dict[str, Any]:
        return {link: self.links[link].to_dict() for link in LINKS}


def _link_shape(cfg: AntennaConfig, link: str) -> tuple[int, int]:
    rows = cfg.n1 if link[0] == "1" else cfg.n2
    cols = cfg.m1 if link[1] == "1" else cfg.m2
    return rows, cols


@dataclass(frozen=True)
class ChannelDraw:
    """Channel matrices H_nm(i) for slots 1..slots, keyed by (slot, link)."""

    cfg: AntennaConfig
    slots: int
    seed: int
    exact: bool
    matrices: Mapping[tuple[int, str], Matrix]

    def matrix(self, slot: int, link: str) -> Matrix:
        return self.matrices[(slot, link)]

    def with_matrix(self, slot: int, link: str, matrix: Sequence[Sequence[Scalar]]) -> ChannelDraw:
        shape = _link_shape(self.cfg, link)
        frozen = tuple(tuple(row) for row in matrix)
        if (len(frozen), len(frozen[0]) if frozen else 0) != shape:
            raise InvalidConfig(f"H{link} must be {shape[0]}x{shape[1]}.")
        matrices = dict(self.matrices)
        matrices[(slot, link)] = frozen
        return replace(self, matrices=matrices)

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "mode": "exact" if self.exact else "float",
            "matrices": [
                {
                    "slot": slot,
                    "link": link,
                    "matrix": [[encode_scalar(v) for v in row] for row in self.matrix(slot, link)],
                }
                for slot in range(1, self.slots + 1)
                for link in LINKS
            ],
        }


def _check_seed(seed: int) -> int:
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < MAX_SEED:
        raise InvalidConfig(f"Seeds are 64-bit unsigned integers, got {seed!r}.")
    return seed


def sample_channel(
    cfg: AntennaConfig, slots: int, spec: DistributionSpec, seed: int
) -> ChannelDraw:
    if slots < 1:
        raise InvalidConfig(f"Need at least one slot, got {slots}.")
    rng = np.random.default_rng(_check_seed(seed))
    exact = spec.exact
    matrices = {
        (slot, link): spec.link(link).sample(rng, _link_shape(cfg, link), exact=exact)
        for slot in range(1, slots + 1)
        for link in LINKS
    }
    return ChannelDraw(cfg=cfg, slots=slots, seed=seed, exact=exact, matrices=matrices)


def draw_symbols(
    plan: SchemePlan, seed: int, *, exact: bool = True, bound: int = DEFAULT_SYMBOL_BOUND
) -> dict[str, Scalar]:
    """Ground-truth values for every fresh symbol of the plan."""

    rng = np.random.default_rng(_check_seed(seed))
    ids = [*plan.ledger.rx1_symbols, *plan.ledger.rx2_symbols]
    if exact:
        values = rng.integers(-bound, bound, size=len(ids), endpoint=True)
        return {sid: int(v) for sid, v in zip(ids, values, strict=True)}
    values = (rng.standard_normal(len(ids)) + 1j * rng.standard_normal(len(ids))) / np.sqrt(2)
    return {sid: complex(v) for sid, v in zip(ids, values, strict=True)}


@dataclass(frozen=True)
class AccessRecord:
    """One read of a channel matrix or feedback output while encoding ``slot``."""

    tx: int
    slot: int
    resource: str
    accessed_slot: int

    @property
    def causal(self) -> bool:
        return self.accessed_slot < self.slot

    def to_dict(self) -> dict[str, Any]:
        return {
            "tx": self.tx,
            "slot": self.slot,
            "resource": self.resource,
            "accessed_slot": self.accessed_slot,
        }


class _KnowledgeView:
    """Gatekeeper between a transmitter's encoder and the channel/feedback history."""

    def __init__(
        self,
        known: KnowledgeSet,
        draw: ChannelDraw,
        feedback: Mapping[tuple[int, int], tuple[Scalar, ...]],
        log: list[AccessRecord],
    ) -> None:
        self._known = known
        self._draw = draw
        self._feedback = feedback
        self._log = log

    def channel(self, slot: int, link: str) -> Matrix:
        if slot not in self._known.channel_slots:
            raise CausalityViolation(
                f"Tx{self._known.tx} read H{link}({slot}) while encoding slot {self._known.slot}.",
                slot=self._known.slot,
            )
        self._log.append(AccessRecord(self._known.tx, self._known.slot, f"H{link}", slot))
        return self._draw.matrix(slot, link)

    def feedback(self, receiver: int, slot: int) -> tuple[Scalar, ...]:
        if receiver not in self._known.feedback_receivers or slot not in self._known.feedback_slots:
            raise CausalityViolation(
                f"Tx{self._known.tx} read Y{receiver}({slot}) while encoding slot "
                f"{self._known.slot}.",
                slot=self._known.slot,
            )
        self._log.append(AccessRecord(self._known.tx, self._known.slot, f"Y{receiver}", slot))
        return self._feedback[(receiver, slot)]


class _Tx1Encoder:
    """Tx1's causal encoder: own symbols plus what the knowledge view hands out."""

    def __init__(
        self, plan: SchemePlan, symbols: Mapping[str, Scalar], *, exact: bool, tolerance: float
    ) -> None:
        self._plan = plan
        self._symbols = symbols
        self._exact = exact
        self._tolerance = tolerance
        self._sent: dict[int, tuple[Scalar, ...]] = {}
        self._tx2_estimates: dict[int, tuple[Scalar, ...]] = {}

    def transmit(self, view: _KnowledgeView, index: int) -> tuple[Scalar, ...]:
        out: list[Scalar] = []
        for entry in self._plan.slot(index).tx1:
            if entry.kind is EntryKind.FRESH:
                out.append(self._symbols[entry.id])
            elif entry.kind is EntryKind.ZERO:
                out.append(0)
            else:
                out.append(self._component(view, entry.id))
        self._sent[index] = tuple(out)
        return self._sent[index]

    def _component(self, view: _KnowledgeView, component_id: str) -> Scalar:
        component = self._plan.ledger.component(component_id)
        row = component.antenna - 1
        if component.kind is ComponentKind.INTERFERENCE:
            return dot(view.channel(component.slot, "21")[row], self._sent[component.slot])
        x2 = self._recover_tx2(view, component.slot)
        return dot(view.channel(component.slot, "22")[row], x2)

    def _recover_tx2(self, view: _KnowledgeView, t: int) -> tuple[Scalar, ...]:
        if t in self._tx2_estimates:
            return self._tx2_estimates[t]
        y1 = view.feedback(1, t)
        h11 = view.channel(t, "11")
        h12 = view.channel(t, "12")
        own = matvec(h11, self._sent[t])
        residual = tuple(y - o for y, o in zip(y1, own, strict=True))
        entries = self._plan.slot(t).tx2
        active = [a for a, e in enumerate(entries) if e.kind is EntryKind.FRESH]
        system = LinearSystem(
            label=f"Tx1 feedback inversion at slot {t}",
            matrix=tuple(tuple(row[a] for a in active) for row in h12),
            observations=residual,
            unknowns=tuple(entries[a].id for a in active),
        )
        try:
            solution = solve_system(system, exact=self._exact, tolerance=self._tolerance)
        except RankDeficient as exc:
            raise ReconstructionRankFailure(
                exc.system, exc.rank, exc.expected, "Tx2's symbols are not observable in feedback"
            ) from exc
        x2: list[Scalar] = [0] * len(entries)
        for a in active:
            x2[a] = solution.values[entries[a].id]
        self._tx2_estimates[t] = tuple(x2)
        return self._tx2_estimates[t]


@dataclass(frozen=True)
class Transcript:
    """Everything sent and received in one run, plus the symbolic output map."""

    plan: SchemePlan
    draw: ChannelDraw
    symbols: Mapping[str, Scalar]
    x1: tuple[tuple[Scalar, ...], ...]
    x2: tuple[tuple[Scalar, ...], ...]
    y1: tuple[tuple[Scalar, ...], ...]
    y2: tuple[tuple[Scalar, ...], ...]
    symbol_ids: tuple[str, ...]
    rx1_coefficients: Matrix
    rx2_coefficients: Matrix
    access_log: tuple[AccessRecord, ...]
    noisy: bool = False

    @property
    def exact(self) -> bool:
        return self.draw.exact

    @property
    def hermetic(self) -> bool:
        return all(record.causal for record in self.access_log)

    def y(self, receiver: int, slot: int) -> tuple[Scalar, ...]:
        return (self.y1 if receiver == 1 else self.y2)[slot - 1]

    def x(self, tx: int, slot: int) -> tuple[Scalar, ...]:
        return (self.x1 if tx == 1 else self.x2)[slot - 1]

    def to_dict(self) -> dict[str, Any]:
        return transcript_to_dict(self)


def _entry_forms(plan: SchemePlan, draw: ChannelDraw) -> dict[tuple[int, int], list[LinearForm]]:
    """Every transmitted entry as a linear form in the fresh symbols."""

    forms: dict[tuple[int, int], list[LinearForm]] = {}

    def combine(row: Sequence[Scalar], parts: Sequence[LinearForm]) -> LinearForm:
        out: LinearForm = {}
        for coeff, part in zip(row, parts, strict=True):
            for sid, value in part.items():
                out[sid] = out.get(sid, 0) + coeff * value
        return out

    for spec in plan.slots:
        for tx in (1, 2):
            slot_forms: list[LinearForm] = []
            for entry in spec.entries(tx):
                if entry.kind is EntryKind.FRESH:
                    slot_forms.append({entry.id: 1})
                elif entry.kind is EntryKind.ZERO:
                    slot_forms.append({})
                else:
                    component = plan.ledger.component(entry.id)
                    source_tx, link = (
                        (1, "21") if component.kind is ComponentKind.INTERFERENCE else (2, "22")
                    )
                    row = draw.matrix(component.slot, link)[component.antenna - 1]
                    slot_forms.append(combine(row, forms[(component.slot, source_tx)]))
            forms[(spec.index, tx)] = slot_forms
    return forms


def _output_coefficients(
    plan: SchemePlan,
    draw: ChannelDraw,
    forms: Mapping[tuple[int, int], list[LinearForm]],
    receiver: int,
    symbol_ids: Sequence[str],
) -> Matrix:
    column = {sid: j for j, sid in enumerate(symbol_ids)}
    rows: list[tuple[Scalar, ...]] = []
    for spec in plan.slots:
        h_own = draw.matrix(spec.index, f"{receiver}1")
        h_other = draw.matrix(spec.index, f"{receiver}2")
        for r in range(len(h_own)):
            coeffs: list[Scalar] = [0] * len(symbol_ids)
            for h, tx in ((h_own, 1), (h_other, 2)):
                for a, form in enumerate(forms[(spec.index, tx)]):
                    for sid, value in form.items():
                        coeffs[column[sid]] += h[r][a] * value
            rows.append(tuple(coeffs))
    return tuple(rows)


def _add(a: Sequence[Scalar], b: Sequence[Scalar]) -> tuple[Scalar, ...]:
    return tuple(x + y for x, y in zip(a, b, strict=True))


def run_scheme(
    plan: SchemePlan,
    draw: ChannelDraw,
    symbols: Mapping[str, Scalar],
    *,
    tolerance: float = DEFAULT_RANK_TOLERANCE,
    noise_seed: int | None = None,
) -> Transcript:
    """Run the plan slot by slot; Tx1 forms components only from its knowledge set."""

    validate_causality(plan)
    if draw.cfg != plan.cfg or draw.slots < plan.total_slots:
        raise InvalidConfig(
            f"Draw for {draw.cfg} with {draw.slots} slots does not fit plan on {plan.cfg} "
            f"with {plan.total_slots} slots."
        )
    symbol_ids = (*plan.ledger.rx1_symbols, *plan.ledger.rx2_symbols)
    missing = [sid for sid in symbol_ids if sid not in symbols]
    if missing:
        raise InvalidConfig(f"Missing ground-truth values for {missing[:5]}.")
    if noise_seed is not None and draw.exact:
        raise InvalidConfig("Noise is only supported in float mode.")
    noise_rng = np.random.default_rng(_check_seed(noise_seed)) if noise_seed is not None else None

    encoder = _Tx1Encoder(plan, symbols, exact=draw.exact, tolerance=tolerance)
    feedback: dict[tuple[int, int], tuple[Scalar, ...]] = {}
    log: list[AccessRecord] = []
    x1s, x2s, y1s, y2s = [], [], [], []
    for spec in plan.slots:
        i = spec.index
        view = _KnowledgeView(knowledge_set(plan, 1, i), draw, feedback, log)
        x1 = encoder.transmit(view, i)
        x2 = tuple(symbols[e.id] if e.kind is EntryKind.FRESH else 0 for e in spec.tx2)
        y1 = _add(matvec(draw.matrix(i, "11"), x1), matvec(draw.matrix(i, "12"), x2))
        y2 = _add(matvec(draw.matrix(i, "21"), x1), matvec(draw.matrix(i, "22"), x2))
        if noise_rng is not None:
            y1 = _add(y1, _noise(noise_rng, len(y1)))
            y2 = _add(y2, _noise(noise_rng, len(y2)))
        feedback[(1, i)] = y1
        feedback[(2, i)] = y2
        x1s.append(x1)
        x2s.append(x2)
        y1s.append(y1)
        y2s.append(y2)

    forms = _entry_forms(plan, draw)
    return Transcript(
        plan=plan,
        draw=draw,
        symbols=dict(symbols),
        x1=tuple(x1s),
        x2=tuple(x2s),
        y1=tuple(y1s),
        y2=tuple(y2s),
        symbol_ids=symbol_ids,
        rx1_coefficients=_output_coefficients(plan, draw, forms, 1, symbol_ids),
        rx2_coefficients=_output_coefficients(plan, draw, forms, 2, symbol_ids),
        access_log=tuple(log),
        noisy=noise_rng is not None,
    )


def _noise(rng: np.random.Generator, size: int) -> tuple[complex, ...]:
    values = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2)
    return tuple(complex(v) for v in values)


def verify_transcript(transcript: Transcript) -> list[str]:
    """Noiseless consistency problems; an empty list means the transcript is consistent."""

    problems: list[str] = []
    if transcript.noisy:
        return ["noisy transcript: outputs are not expected to match the noiseless model"]
    draw, exact = transcript.draw, transcript.exact
    truth = [transcript.symbols[sid] for sid in transcript.symbol_ids]
    systems = ((1, transcript.rx1_coefficients), (2, transcript.rx2_coefficients))
    for receiver, coefficients in systems:
        row_index = 0
        for spec in transcript.plan.slots:
            i = spec.index
            expected = _add(
                matvec(draw.matrix(i, f"{receiver}1"), transcript.x(1, i)),
                matvec(draw.matrix(i, f"{receiver}2"), transcript.x(2, i)),
            )
            stored = transcript.y(receiver, i)
            for r, (want, got) in enumerate(zip(expected, stored, strict=True)):
                if not values_match(got, want, exact=exact):
                    problems.append(f"Y{receiver}({i})[{r}] differs from H X")
                symbolic = dot(coefficients[row_index], truth)
                if not values_match(symbolic, got, exact=exact):
                    problems.append(f"Y{receiver}({i})[{r}] differs from its symbolic form")
                row_index += 1
    return problems


def _rx2_system(transcript: Transcript, plan: SchemePlan) -> LinearSystem:
    draw = transcript.draw
    unknowns = (*plan.ledger.rx2_symbols, *plan.interference_ids())
    column = {sid: j for j, sid in enumerate(unknowns)}
    rows: list[tuple[Scalar, ...]] = []
    observations: list[Scalar] = []
    for spec in plan.slots:
        i = spec.index
        h21, h22 = draw.matrix(i, "21"), draw.matrix(i, "22")
        for r in range(plan.cfg.n2):
            coeffs: list[Scalar] = [0] * len(unknowns)
            for a, entry in enumerate(spec.tx2):
                if entry.kind is EntryKind.FRESH:
                    coeffs[column[entry.id]] += h22[r][a]
            if i <= plan.phase1_slots:
                coeffs[column[f"P{i}.{r + 1}"]] += 1
            else:
                for a, entry in enumerate(spec.tx1):
                    if entry.kind is not EntryKind.COMPONENT:
                        continue
                    component = plan.ledger.component(entry.id)
                    if component.kind is ComponentKind.INTERFERENCE:
                        coeffs[column[entry.id]] += h21[r][a]
                        continue
                    source = plan.slot(component.slot).tx2
                    q_row = draw.matrix(component.slot, "22")[component.antenna - 1]
                    for a2, source_entry in enumerate(source):
                        if source_entry.kind is EntryKind.FRESH:
                            coeffs[column[source_entry.id]] += h21[r][a] * q_row[a2]
            rows.append(tuple(coeffs))
            observations.append(transcript.y(2, i)[r])
    return LinearSystem("rx2", tuple(rows), tuple(observations), unknowns)


class _Rx1Decoder:
    """Staged decoding at Rx1.

    1. each Phase-2 slot alone: forwarded components and Tx2's fresh symbols;
    2. Tx2's Phase-1 symbols from the decoded Q components;
    3. cancel Phase-1 interference and solve Tx1's symbols from Phase-1
       outputs plus the decoded P components.
    """

    def __init__(self, transcript: Transcript, plan: SchemePlan, tolerance: float) -> None:
        self._t = transcript
        self._plan = plan
        self._tolerance = tolerance
        self._phase2: dict[str, Scalar] | None = None
        self._phase1_tx2: dict[str, Scalar] | None = None

    def _solve(self, system: LinearSystem) -> dict[str, Scalar]:
        return solve_system(system, exact=self._t.exact, tolerance=self._tolerance).values

    def phase2_values(self) -> dict[str, Scalar]:
        if self._phase2 is not None:
            return self._phase2
        draw = self._t.draw
        values: dict[str, Scalar] = {}
        for spec in self._plan.phase2_slots:
            i = spec.index
            unknowns: list[str] = []
            for entry in (*spec.tx1, *spec.tx2):
                if entry.kind is not EntryKind.ZERO and entry.id not in unknowns:
                    unknowns.append(entry.id)
            column = {sid: j for j, sid in enumerate(unknowns)}
            rows = []
            for r in range(self._plan.cfg.n1):
                coeffs: list[Scalar] = [0] * len(unknowns)
                for link, entries in (("11", spec.tx1), ("12", spec.tx2)):
                    h = draw.matrix(i, link)
                    for a, entry in enumerate(entries):
                        if entry.kind is not EntryKind.ZERO:
                            coeffs[column[entry.id]] += h[r][a]
                rows.append(tuple(coeffs))
            system = LinearSystem(f"rx1 slot {i}", tuple(rows), self._t.y(1, i), tuple(unknowns))
            values.update(self._solve(system))
        self._phase2 = values
        return values

    def phase1_tx2(self) -> dict[str, Scalar]:
        if self._phase1_tx2 is not None:
            return self._phase1_tx2
        decoded = self.phase2_values()
        components = [
            c for c in self._plan.ledger.components
            if c.kind is ComponentKind.SIGNAL and c.id in decoded
        ]
        values: dict[str, Scalar] = {}
        for t in range(1, self._plan.phase1_slots + 1):
            entries = self._plan.slot(t).tx2
            active = [a for a, e in enumerate(entries) if e.kind is EntryKind.FRESH]
            if not active:
                continue
            h22 = self._t.draw.matrix(t, "22")
            mine = [c for c in components if c.slot == t]
            system = LinearSystem(
                f"rx1 signal components of slot {t}",
                tuple(tuple(h22[c.antenna - 1][a] for a in active) for c in mine),
                tuple(decoded[c.id] for c in mine),
                tuple(entries[a].id for a in active),
            )
            values.update(self._solve(system))
        self._phase1_tx2 = values
        return values

    def reduced_system(self) -> LinearSystem:
        decoded = self.phase2_values()
        tx2 = self.phase1_tx2()
        draw = self._t.draw
        unknowns = [
            sid for t in range(1, self._plan.phase1_slots + 1)
            for sid in self._plan.slot(t).fresh_ids(1)
        ]
        column = {sid: j for j, sid in enumerate(unknowns)}
        rows: list[tuple[Scalar, ...]] = []
        observations: list[Scalar] = []

        def add_row(t: int, h_row: Sequence[Scalar], observed: Scalar) -> None:
            coeffs: list[Scalar] = [0] * len(unknowns)
            for a, entry in enumerate(self._plan.slot(t).tx1):
                if entry.kind is EntryKind.FRESH:
                    coeffs[column[entry.id]] += h_row[a]
            rows.append(tuple(coeffs))
            observations.append(observed)

        for t in range(1, self._plan.phase1_slots + 1):
            spec = self._plan.slot(t)
            h11, h12 = draw.matrix(t, "11"), draw.matrix(t, "12")
            x2 = [tx2[e.id] if e.kind is EntryKind.FRESH else 0 for e in spec.tx2]
            cancelled = _add(self._t.y(1, t), tuple(-v for v in matvec(h12, x2)))
            for r in range(self._plan.cfg.n1):
                add_row(t, h11[r], cancelled[r])
            h21 = draw.matrix(t, "21")
            for component in self._plan.ledger.components:
                if component.kind is ComponentKind.INTERFERENCE and component.slot == t:
                    add_row(t, h21[component.antenna - 1], decoded[component.id])
        return LinearSystem("rx1 reduced", tuple(rows), tuple(observations), tuple(unknowns))

    def tx2_symbols(self) -> dict[str, Scalar]:
        decoded = self.phase2_values()
        recovered = {sid: decoded[sid] for sid in self._plan.ledger.rx2_symbols if sid in decoded}
        recovered.update(self.phase1_tx2())
        return recovered


def joint_rx1_system(transcript: Transcript) -> LinearSystem:
    """All of Rx1's outputs against all fresh symbols; the oracle for staged decoding."""

    observations = tuple(v for row in transcript.y1 for v in row)
    return LinearSystem(
        "rx1 joint", transcript.rx1_coefficients, observations, transcript.symbol_ids
    )


def assemble_rx_system(
    transcript: Transcript,
    plan: SchemePlan,
    receiver: int,
    *,
    tolerance: float = DEFAULT_RANK_TOLERANCE,
) -> LinearSystem:
    """Rx2's full system, or Rx1's reduced system after its Phase-2 and cancellation stages."""

    if receiver == 2:
        return _rx2_system(transcript, plan)
    if receiver == 1:
        return _Rx1Decoder(transcript, plan, tolerance).reduced_system()
    raise InvalidConfig(f"Receiver must be 1 or 2, got {receiver}.")


@dataclass(frozen=True)
class ReceiverReport:
    receiver: int
    equations: int
    unknowns: int
    rank: int
    recovered: Mapping[str, Scalar]
    exact_match: bool
    mismatches: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "receiver": self.receiver,
            "equations": self.equations,
            "unknowns": self.unknowns,
            "rank": self.rank,
            "exact_match": self.exact_match,
            "mismatches": list(self.mismatches),
            "recovered": {sid: encode_scalar(v) for sid, v in self.recovered.items()},
        }


@dataclass(frozen=True)
class DecodeReport:
    rx1: ReceiverReport
    rx2: ReceiverReport
    joint_agrees: bool
    delivered_dof: Point | None
    diagnostics: tuple[str, ...] = ()

    @property
    def success(self) -> bool:
        return self.delivered_dof is not None

    def to_dict(self) -> dict[str, Any]:
        return {
            "version": SCHEMA_VERSION,
            "success": self.success,
            "delivered_dof": (
                None if self.delivered_dof is None else format_point(self.delivered_dof)
            ),
            "joint_agrees": self.joint_agrees,
            "rx1": self.rx1.to_dict(),
            "rx2": self.rx2.to_dict(),
            "diagnostics": list(self.diagnostics),
        }


def _receiver_report(
    receiver: int,
    system: LinearSystem,
    solution: Solution,
    intended: Sequence[str],
    truth: Mapping[str, Scalar],
    exact: bool,
) -> ReceiverReport:
    recovered = {sid: solution.values[sid] for sid in intended}
    mismatches = tuple(
        sid for sid in intended if not values_match(recovered[sid], truth[sid], exact=exact)
    )
    return ReceiverReport(
        receiver=receiver,
        equations=system.equations,
        unknowns=len(system.unknowns),
        rank=solution.rank,
        recovered=recovered,
        exact_match=not mismatches,
        mismatches=mismatches,
    )


def decode(
    transcript: Transcript, plan: SchemePlan, *, tolerance: float = DEFAULT_RANK_TOLERANCE
) -> DecodeReport:
    """Solve both receivers' systems and compare against the ground truth."""

    exact = transcript.exact
    truth = transcript.symbols

    rx2_system = _rx2_system(transcript, plan)
    rx2_solution = solve_system(rx2_system, exact=exact, tolerance=tolerance)
    rx2 = _receiver_report(2, rx2_system, rx2_solution, plan.ledger.rx2_symbols, truth, exact)

    staged = _Rx1Decoder(transcript, plan, tolerance)
    rx1_system = staged.reduced_system()
    rx1_solution = solve_system(rx1_system, exact=exact, tolerance=tolerance)
    rx1 = _receiver_report(1, rx1_system, rx1_solution, plan.ledger.rx1_symbols, truth, exact)

    joint = solve_system(joint_rx1_system(transcript), exact=exact, tolerance=tolerance).values
    joint_agrees = all(
        values_match(joint[sid], rx1.recovered[sid], exact=exact) for sid in plan.ledger.rx1_symbols
    )

    diagnostics = []
    if rx1.mismatches:
        diagnostics.append(f"rx1 recovered wrong values for {list(rx1.mismatches)}")
    if rx2.mismatches:
        diagnostics.append(f"rx2 recovered wrong values for {list(rx2.mismatches)}")
    if not joint_agrees:
        diagnostics.append("rx1 staged decoding disagrees with the joint solve")
    delivered = plan.user_dof if rx1.exact_match and rx2.exact_match else None
    return DecodeReport(
        rx1=rx1,
        rx2=rx2,
        joint_agrees=joint_agrees,
        delivered_dof=delivered,
        diagnostics=tuple(diagnostics),
    )


def stronger_rx_decodes_both(
    transcript: Transcript, plan: SchemePlan, *, tolerance: float = DEFAULT_RANK_TOLERANCE
) -> bool:
    """True when Rx1 also recovers every one of Tx2's symbols on its staged decoding path."""

    try:
        recovered = _Rx1Decoder(transcript, plan, tolerance).tx2_symbols()
    except RankDeficient as exc:
        logger.warning("Stronger-receiver check failed: %s", exc)
        return False
    missing = [sid for sid in plan.ledger.rx2_symbols if sid not in recovered]
    if missing:
        logger.warning("Stronger-receiver check: Rx1 never solves for %s", missing)
        return False
    return all(
        values_match(recovered[sid], transcript.symbols[sid], exact=transcript.exact)
        for sid in plan.ledger.rx2_symbols
    )


def derive_seed(seed: int, trial: int, attempt: int, stream: int = 0) -> int:
    sequence = np.random.SeedSequence([_check_seed(seed), trial, attempt, stream])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


FAILURE_RANK = "rank"
FAILURE_MISMATCH = "mismatch"


@dataclass(frozen=True)
class TrialOutcome:
    trial: int
    success: bool
    resamples: int
    stronger: bool
    hermetic: bool
    diagnostic: str | None = None
    failure: str | None = None


def _run_trial(job: tuple[SchemePlan, DistributionSpec, int, int, float]) -> TrialOutcome:
    plan, spec, seed, trial, tolerance = job
    last_error = None
    for attempt in range(RESAMPLE_CAP + 1):
        draw = sample_channel(plan.cfg, plan.total_slots, spec, derive_seed(seed, trial, attempt))
        symbols = draw_symbols(plan, derive_seed(seed, trial, attempt, 1), exact=draw.exact)
        try:
            transcript = run_scheme(plan, draw, symbols, tolerance=tolerance)
            report = decode(transcript, plan, tolerance=tolerance)
        except RankDeficient as exc:
            last_error = str(exc)
            logger.warning("Trial %d attempt %d resampled: %s", trial, attempt, exc)
            continue
        success = report.success and report.joint_agrees
        return TrialOutcome(
            trial=trial,
            success=success,
            resamples=attempt,
            stronger=stronger_rx_decodes_both(transcript, plan, tolerance=tolerance),
            hermetic=transcript.hermetic,
            diagnostic="; ".join(report.diagnostics) or None,
            failure=None if success else FAILURE_MISMATCH,
        )
    return TrialOutcome(
        trial=trial,
        success=False,
        resamples=RESAMPLE_CAP,
        stronger=False,
        hermetic=True,
        diagnostic=f"rank failure after {RESAMPLE_CAP} resamples: {last_error}",
        failure=FAILURE_RANK,
    )


@dataclass(frozen=True)
class MonteCarloSummary:
    point: str
    config: AntennaConfig
    mode: str
    seed: int
    trials: int
    successes: int
    resamples: int
    rank_failures: int
    decode_failures: int
    stronger_rx: int
    hermetic: bool
    claimed_dof: Point
    diagnostics: tuple[str, ...] = ()

    @property
    def confirmed(self) -> bool:
        return self.successes == self.trials

    @property
    def delivered_dof(self) -> Point | None:
        return self.claimed_dof if self.confirmed else None

    def to_dict(self) -> dict[str, Any]:
        return {
            "version": SCHEMA_VERSION,
            "config": list(self.config.as_tuple()),
            "point": self.point,
            "mode": self.mode,
            "seed": self.seed,
            "trials": self.trials,
            "successes": self.successes,
            "resamples": self.resamples,
            "rank_failures": self.rank_failures,
            "decode_failures": self.decode_failures,
            "stronger_rx": self.stronger_rx,
            "hermetic": self.hermetic,
            "claimed_dof": format_point(self.claimed_dof),
            "delivered_dof": (
                None if self.delivered_dof is None else format_point(self.delivered_dof)
            ),
            "diagnostics": list(self.diagnostics),
        }


def monte_carlo(
    plan: SchemePlan,
    spec: DistributionSpec,
    trials: int,
    seed: int,
    *,
    workers: int = 1,
    rank_tolerance: float = DEFAULT_RANK_TOLERANCE,
) -> MonteCarloSummary:
    """Decode over independent draws; non-generic draws are resampled up to the cap."""

    if trials < 1:
        raise InvalidConfig(f"trials must be >= 1, got {trials}.")
    _check_seed(seed)
    jobs = [(plan, spec, seed, trial, rank_tolerance) for trial in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_trial, jobs))
    else:
        outcomes = [_run_trial(job) for job in jobs]

    summary = MonteCarloSummary(
        point=plan.point,
        config=plan.user_cfg,
        mode=spec.mode,
        seed=seed,
        trials=trials,
        successes=sum(o.success for o in outcomes),
        resamples=sum(o.resamples for o in outcomes),
        rank_failures=sum(o.failure == FAILURE_RANK for o in outcomes),
        decode_failures=sum(o.failure == FAILURE_MISMATCH for o in outcomes),
        stronger_rx=sum(o.stronger for o in outcomes),
        hermetic=all(o.hermetic for o in outcomes),
        claimed_dof=plan.user_dof,
        diagnostics=tuple(f"trial {o.trial}: {o.diagnostic}" for o in outcomes if o.diagnostic),
    )
    logger.info(
        "Monte Carlo %s on %s: %d/%d decoded, %d resamples",
        plan.point, plan.user_cfg, summary.successes, trials, summary.resamples,
    )
    return summary


def transcript_to_dict(transcript: Transcript) -> dict[str, Any]:
    def vec(values: Sequence[Scalar]) -> list[Any]:
        return [encode_scalar(v) for v in values]

    return {
        "version": SCHEMA_VERSION,
        "config": list(transcript.plan.cfg.as_tuple()),
        "point": transcript.plan.point,
        "noisy": transcript.noisy,
        "channel": transcript.draw.to_dict(),
        "symbols": {sid: encode_scalar(transcript.symbols[sid]) for sid in transcript.symbol_ids},
        "slots": [
            {
                "index": spec.index,
                "x1": vec(transcript.x(1, spec.index)),
                "x2": vec(transcript.x(2, spec.index)),
                "y1": vec(transcript.y(1, spec.index)),
                "y2": vec(transcript.y(2, spec.index)),
            }
            for spec in transcript.plan.slots
        ],
        "symbol_ids": list(transcript.symbol_ids),
        "rx1_coefficients": [vec(row) for row in transcript.rx1_coefficients],
        "rx2_coefficients": [vec(row) for row in transcript.rx2_coefficients],
        "access_log": [record.to_dict() for record in transcript.access_log],
        "hermetic": transcript.hermetic,
    }

