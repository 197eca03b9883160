"""
Tests for corner-point transmission plans, counting reports and causality checks.
"""

import json
from dataclasses import replace
from fractions import Fraction

import pytest

from dof_regions import AntennaConfig, InvalidConfig, contains_point, region_fb_dcsit
from dof_schemes import (
    AntennaEntry,
    CausalityViolation,
    EntryKind,
    KnowledgeMode,
    NotApplicable,
    SchemePlan,
    corner_points,
    feasibility,
    knowledge_set,
    plan_for,
    plan_from_dict,
    plan_p0_p1,
    plan_p2,
    plan_to_dict,
    time_share,
    validate_causality,
)

F = Fraction


def _tx1_ids(plan: SchemePlan, slot: int) -> list[str | None]:
    return [entry.id for entry in plan.slot(slot).tx1]


@pytest.fixture
def plan_6243() -> SchemePlan:
    return plan_p0_p1(AntennaConfig(6, 2, 4, 3))


@pytest.fixture
def plan_8465_p1() -> SchemePlan:
    return plan_p0_p1(AntennaConfig(8, 4, 6, 5))


@pytest.fixture
def plan_8465_p2() -> SchemePlan:
    return plan_p2(AntennaConfig(8, 4, 6, 5))


def test_p0_plan_6243_reproduces_worked_example(plan_6243: SchemePlan) -> None:
    assert plan_6243.point == "p0"
    assert (plan_6243.phase1_slots, plan_6243.total_slots) == (1, 3)
    assert plan_6243.claimed_dof == (2, 2)
    assert len(plan_6243.ledger.rx1_symbols) == 6
    assert len(plan_6243.ledger.rx2_symbols) == 6
    assert _tx1_ids(plan_6243, 2) == ["P1.1", "Q1.1", None, None, None, None]
    assert _tx1_ids(plan_6243, 3) == ["P1.2", "Q1.2", None, None, None, None]
    assert plan_6243.interference_ids() == ["P1.1", "P1.2", "P1.3"]


def test_p0_plan_6243_counting_is_square(plan_6243: SchemePlan) -> None:
    report = feasibility(plan_6243)

    assert (report.rx2_equations, report.rx2_unknowns) == (9, 9)
    assert (report.rx1_equations, report.rx1_unknowns) == (12, 12)
    assert report.ok
    assert report.rx2_tight and report.rx1_tight


def test_p1_plan_8465(plan_8465_p1: SchemePlan) -> None:
    report = feasibility(plan_8465_p1)

    assert plan_8465_p1.point == "p1"
    assert (plan_8465_p1.phase1_slots, plan_8465_p1.total_slots) == (1, 5)
    assert plan_8465_p1.claimed_dof == (F(8, 5), 4)
    assert (report.rx2_equations, report.rx2_unknowns) == (25, 25)
    assert report.ok
    for slot in range(2, 6):
        assert _tx1_ids(plan_8465_p1, slot)[:2] == [f"P1.{slot - 1}", f"Q1.{slot - 1}"]


def test_p2_plan_8465_forwards_minimal_components(plan_8465_p2: SchemePlan) -> None:
    report = feasibility(plan_8465_p2)

    assert plan_8465_p2.point == "p2"
    assert (plan_8465_p2.phase1_slots, plan_8465_p2.total_slots) == (1, 3)
    assert plan_8465_p2.claimed_dof == (F(8, 3), F(10, 3))
    assert _tx1_ids(plan_8465_p2, 2)[:2] == ["P1.1", "Q1.1"]
    assert _tx1_ids(plan_8465_p2, 3)[:4] == ["P1.2", "Q1.2", "Q1.3", "Q1.4"]
    assert [len(plan_8465_p2.slot(i).fresh_ids(2)) for i in (1, 2, 3)] == [4, 4, 2]
    assert report.rx2_tight and report.rx1_tight
    assert (report.tx2_capacity, report.tx2_symbols) == (12, 10)
    assert report.ok


def test_plan_with_two_phase1_slots() -> None:
    plan = plan_p0_p1(AntennaConfig(12, 1, 9, 3))

    assert plan.point == "p0"
    assert (plan.phase1_slots, plan.total_slots) == (2, 3)
    assert plan.claimed_dof == (8, 1)
    assert _tx1_ids(plan, 3)[:8] == [
        "P1.1", "P2.1", "P1.2", "P2.2", "P1.3", "P2.3", "Q1.1", "Q2.1",
    ]
    assert feasibility(plan).ok


def test_symbol_counts_equal_slots_times_claimed_dof(
    plan_6243: SchemePlan, plan_8465_p1: SchemePlan, plan_8465_p2: SchemePlan
) -> None:
    for plan in (plan_6243, plan_8465_p1, plan_8465_p2):
        counts = (len(plan.ledger.rx1_symbols), len(plan.ledger.rx2_symbols))
        assert counts == (
            plan.total_slots * plan.claimed_dof[0],
            plan.total_slots * plan.claimed_dof[1],
        )


def test_plans_not_applicable_outside_their_regime() -> None:
    with pytest.raises(NotApplicable, match="EqualDelayed"):
        plan_p0_p1(AntennaConfig(2, 2, 2, 2))
    with pytest.raises(NotApplicable, match="only in CaseB"):
        plan_p2(AntennaConfig(6, 2, 4, 3))
    with pytest.raises(NotApplicable, match="not p1"):
        plan_for(AntennaConfig(6, 2, 4, 3), "p1")
    with pytest.raises(InvalidConfig, match="Unknown corner point"):
        plan_for(AntennaConfig(6, 2, 4, 3), "p9")


def test_swapped_config_gets_mirrored_plan() -> None:
    plan = plan_for(AntennaConfig(4, 8, 5, 6), "p1")

    assert plan.mirrored
    assert plan.cfg == AntennaConfig(8, 4, 6, 5)
    assert plan.user_cfg == AntennaConfig(4, 8, 5, 6)
    assert plan.user_dof == (4, F(8, 5))
    assert corner_points(AntennaConfig(4, 8, 5, 6)) == {
        "p1": (4, F(8, 5)),
        "p2": (F(10, 3), F(8, 3)),
    }


def test_corner_points_match_plans() -> None:
    cfg = AntennaConfig(8, 4, 6, 5)

    assert corner_points(cfg) == {"p1": (F(8, 5), 4), "p2": (F(8, 3), F(10, 3))}
    assert corner_points(AntennaConfig(6, 2, 4, 3)) == {"p0": (2, 2)}
    assert corner_points(AntennaConfig(2, 2, 2, 2)) == {}


def test_generated_plans_are_causal(
    plan_6243: SchemePlan, plan_8465_p1: SchemePlan, plan_8465_p2: SchemePlan
) -> None:
    for plan in (plan_6243, plan_8465_p1, plan_8465_p2):
        assert validate_causality(plan)


def test_component_sent_in_its_defining_slot_is_rejected(plan_6243: SchemePlan) -> None:
    first = plan_6243.slot(1)
    moved = replace(first, tx1=(AntennaEntry(EntryKind.COMPONENT, "P1.1"), *first.tx1[1:]))
    mutated = replace(plan_6243, slots=(moved, *plan_6243.slots[1:]))

    with pytest.raises(CausalityViolation, match="P1.1") as excinfo:
        validate_causality(mutated)
    assert excinfo.value.slot == 1


def test_signal_components_need_output_feedback(plan_6243: SchemePlan) -> None:
    with pytest.raises(CausalityViolation, match="feedback"):
        validate_causality(replace(plan_6243, knowledge=KnowledgeMode.DELAYED_CSIT))
    with pytest.raises(CausalityViolation):
        validate_causality(replace(plan_6243, knowledge=KnowledgeMode.NO_CSIT))
    assert validate_causality(replace(plan_6243, knowledge=KnowledgeMode.GLOBAL_FB_DELAYED_CSIT))


def test_knowledge_sets_per_mode(plan_6243: SchemePlan) -> None:
    local = knowledge_set(plan_6243, 1, 3)
    perfect = knowledge_set(replace(plan_6243, knowledge=KnowledgeMode.PERFECT_CSIT), 1, 3)
    global_fb = knowledge_set(
        replace(plan_6243, knowledge=KnowledgeMode.GLOBAL_FB_DELAYED_CSIT), 2, 3
    )

    assert local.channel_slots == (1, 2)
    assert local.feedback_receivers == (1,)
    assert local.feedback_slots == (1, 2)
    assert perfect.channel_slots == (1, 2, 3)
    assert perfect.feedback_receivers == ()
    assert global_fb.feedback_receivers == (1, 2)
    assert global_fb.own_symbols == plan_6243.ledger.rx2_symbols


def test_time_share_is_exact() -> None:
    assert time_share((2, 2), (4, 0), F(1, 2)) == (3, 1)
    assert time_share((2, 2), (4, 0), 1) == (2, 2)

    blend = time_share((F(8, 5), 4), (F(8, 3), F(10, 3)), "3/5")

    assert blend == (F(152, 75), F(56, 15))
    assert contains_point(region_fb_dcsit(AntennaConfig(8, 4, 6, 5)), blend)
    with pytest.raises(InvalidConfig, match=r"theta must lie in \[0, 1\]"):
        time_share((2, 2), (4, 0), F(3, 2))


def test_plan_document_round_trip(plan_8465_p2: SchemePlan) -> None:
    document = json.loads(json.dumps(plan_to_dict(plan_8465_p2)))

    assert document["version"] == "v1"
    assert document["claimed_dof"] == ["8/3", "10/3"]
    assert document["ledger"]["rx2_symbols"]["count"] == 10
    assert plan_from_dict(document) == plan_8465_p2
