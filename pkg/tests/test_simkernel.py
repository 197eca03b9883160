"""
Tests for scheme execution, receiver decoding and Monte Carlo verification.

Exact-mode suites draw integer channels and compare every recovered symbol
with the ground truth using rational arithmetic.
"""

import dataclasses
import json
from fractions import Fraction

import pytest

import dof_simkernel
from dof_linalg import (
    InconsistentSystem,
    LinearSystem,
    RankDeficient,
    ReconstructionRankFailure,
    solve_system,
)
from dof_regions import AntennaConfig, InvalidConfig
from dof_schemes import CausalityViolation, SchemePlan, knowledge_set, plan_p0_p1, plan_p2
from dof_simkernel import (
    RESAMPLE_CAP,
    DistributionKind,
    DistributionSpec,
    LinkDistribution,
    _KnowledgeView,
    assemble_rx_system,
    decode,
    draw_symbols,
    joint_rx1_system,
    monte_carlo,
    run_scheme,
    sample_channel,
    stronger_rx_decodes_both,
    transcript_to_dict,
    verify_transcript,
)

F = Fraction


@pytest.fixture
def plan_6243() -> SchemePlan:
    return plan_p0_p1(AntennaConfig(6, 2, 4, 3))


@pytest.fixture
def exact_spec() -> DistributionSpec:
    return DistributionSpec.uniform()


def _transcript(plan: SchemePlan, spec: DistributionSpec, seed: int = 7):
    draw = sample_channel(plan.cfg, plan.total_slots, spec, seed)
    symbols = draw_symbols(plan, seed + 1, exact=draw.exact)
    return run_scheme(plan, draw, symbols)


# ----------------------------------------------------------------------------
# Linear algebra
# ----------------------------------------------------------------------------


def test_exact_solve_returns_rationals() -> None:
    system = LinearSystem("toy", ((2, 1), (1, 3)), (3, 5), ("x", "y"))

    solution = solve_system(system, exact=True)

    assert solution.values == {"x": F(4, 5), "y": F(7, 5)}
    assert solution.rank == 2


@pytest.mark.parametrize("exact", [True, False])
def test_overdetermined_solve_reports_column_rank(exact: bool) -> None:
    system = LinearSystem("toy", ((1, 0), (0, 1), (1, 1)), (2, 3, 5), ("x", "y"))

    solution = solve_system(system, exact=exact)

    assert system.equations == 3
    assert solution.rank == 2
    assert abs(complex(solution.values["x"]) - 2) < 1e-9
    assert abs(complex(solution.values["y"]) - 3) < 1e-9


def test_rank_deficient_system_reports_gap() -> None:
    system = LinearSystem("toy", ((1, 2), (2, 4)), (1, 2), ("x", "y"))

    with pytest.raises(RankDeficient, match="rank 1 < 2") as excinfo:
        solve_system(system, exact=True)
    assert excinfo.value.gap == 1
    with pytest.raises(RankDeficient):
        solve_system(system, exact=False)


def test_inconsistent_exact_system_is_rejected() -> None:
    system = LinearSystem("toy", ((1, 0), (0, 1), (1, 1)), (1, 1, 3), ("x", "y"))

    with pytest.raises(InconsistentSystem):
        solve_system(system, exact=True)


# ----------------------------------------------------------------------------
# Channel draws
# ----------------------------------------------------------------------------


def test_channel_draw_shapes_and_determinism(exact_spec: DistributionSpec) -> None:
    cfg = AntennaConfig(6, 2, 4, 3)
    first = sample_channel(cfg, 3, exact_spec, 11)
    second = sample_channel(cfg, 3, exact_spec, 11)

    h12 = first.matrix(1, "12")
    assert (len(h12), len(h12[0])) == (4, 2)
    assert (len(first.matrix(3, "21")), len(first.matrix(3, "21")[0])) == (3, 6)
    assert first == second
    assert all(-1000 <= v <= 1000 for row in h12 for v in row)
    assert first.exact


def test_channel_draw_rejects_bad_seeds_and_bounds(exact_spec: DistributionSpec) -> None:
    cfg = AntennaConfig(1, 1, 1, 1)

    with pytest.raises(InvalidConfig, match="64-bit"):
        sample_channel(cfg, 1, exact_spec, -1)
    with pytest.raises(InvalidConfig, match="64-bit"):
        sample_channel(cfg, 1, exact_spec, 2**64)
    with pytest.raises(InvalidConfig, match="B >= 2"):
        LinkDistribution(DistributionKind.UNIFORM_INT, 1)


def test_mixed_spec_switches_to_float_mode() -> None:
    spec = DistributionSpec.uniform(
        overrides={"21": LinkDistribution(DistributionKind.COMPLEX_GAUSSIAN)}
    )

    assert not spec.exact
    assert spec.mode == "float"
    assert DistributionSpec.uniform().mode == "exact"


# ----------------------------------------------------------------------------
# Scheme execution and decoding
# ----------------------------------------------------------------------------


def test_p0_transcript_decodes_all_symbols(
    plan_6243: SchemePlan, exact_spec: DistributionSpec
) -> None:
    transcript = _transcript(plan_6243, exact_spec)
    report = decode(transcript, plan_6243)

    assert verify_transcript(transcript) == []
    assert report.success
    assert report.joint_agrees
    assert report.delivered_dof == (2, 2)
    assert report.rx1.exact_match and report.rx2.exact_match
    assert (report.rx2.rank, report.rx1.rank) == (9, 6)
    assert stronger_rx_decodes_both(transcript, plan_6243)


def test_receiver_system_sizes_match_worked_example(
    plan_6243: SchemePlan, exact_spec: DistributionSpec
) -> None:
    transcript = _transcript(plan_6243, exact_spec)

    assert assemble_rx_system(transcript, plan_6243, 2).shape == (9, 9)
    assert assemble_rx_system(transcript, plan_6243, 1).shape == (6, 6)
    assert joint_rx1_system(transcript).shape == (12, 12)
    with pytest.raises(InvalidConfig, match="Receiver must be 1 or 2"):
        assemble_rx_system(transcript, plan_6243, 3)


def test_p1_rx2_system_is_25_by_25(exact_spec: DistributionSpec) -> None:
    plan = plan_p0_p1(AntennaConfig(8, 4, 6, 5))
    transcript = _transcript(plan, exact_spec)

    assert assemble_rx_system(transcript, plan, 2).shape == (25, 25)
    assert decode(transcript, plan).delivered_dof == (F(8, 5), 4)


def test_outputs_are_linear_in_symbols(
    plan_6243: SchemePlan, exact_spec: DistributionSpec
) -> None:
    draw = sample_channel(plan_6243.cfg, plan_6243.total_slots, exact_spec, 3)
    a = draw_symbols(plan_6243, 4)
    b = draw_symbols(plan_6243, 5)
    both = {sid: a[sid] + b[sid] for sid in a}

    ya, yb, yab = (run_scheme(plan_6243, draw, s) for s in (a, b, both))

    for slot in range(plan_6243.total_slots):
        for receiver in ("y1", "y2"):
            combined = getattr(yab, receiver)[slot]
            parts = zip(getattr(ya, receiver)[slot], getattr(yb, receiver)[slot], strict=True)
            assert list(combined) == [u + v for u, v in parts]

    ra, rb, rab = (decode(t, plan_6243) for t in (ya, yb, yab))
    recovered = [{**r.rx1.recovered, **r.rx2.recovered} for r in (ra, rb, rab)]

    assert all(r.success for r in (ra, rb, rab))
    assert set(recovered[2]) == set(a)
    for sid, value in recovered[2].items():
        assert value == recovered[0][sid] + recovered[1][sid]
        assert value == both[sid]


def test_access_log_never_touches_current_slot(
    plan_6243: SchemePlan, exact_spec: DistributionSpec
) -> None:
    transcript = _transcript(plan_6243, exact_spec)

    assert transcript.access_log
    assert transcript.hermetic
    assert all(record.accessed_slot < record.slot for record in transcript.access_log)
    assert {record.resource for record in transcript.access_log} >= {"H21", "H22", "Y1"}


def test_knowledge_view_blocks_current_slot_reads(
    plan_6243: SchemePlan, exact_spec: DistributionSpec
) -> None:
    draw = sample_channel(plan_6243.cfg, plan_6243.total_slots, exact_spec, 1)
    view = _KnowledgeView(knowledge_set(plan_6243, 1, 2), draw, {}, [])

    with pytest.raises(CausalityViolation, match="H21"):
        view.channel(2, "21")
    with pytest.raises(CausalityViolation, match="Y2"):
        view.feedback(2, 1)


def test_degenerate_cross_channel_blocks_feedback_inversion(
    plan_6243: SchemePlan, exact_spec: DistributionSpec
) -> None:
    draw = sample_channel(plan_6243.cfg, plan_6243.total_slots, exact_spec, 9)
    degenerate = draw.with_matrix(1, "12", [[0, 0]] * 4)
    symbols = draw_symbols(plan_6243, 10)

    with pytest.raises(ReconstructionRankFailure, match="feedback"):
        run_scheme(plan_6243, degenerate, symbols)
    with pytest.raises(InvalidConfig, match="must be 4x2"):
        draw.with_matrix(1, "12", [[0, 0, 0]])


def test_noise_only_in_float_mode(plan_6243: SchemePlan, exact_spec: DistributionSpec) -> None:
    exact_draw = sample_channel(plan_6243.cfg, plan_6243.total_slots, exact_spec, 2)
    with pytest.raises(InvalidConfig, match="float mode"):
        run_scheme(plan_6243, exact_draw, draw_symbols(plan_6243, 2), noise_seed=5)

    float_draw = sample_channel(
        plan_6243.cfg, plan_6243.total_slots, DistributionSpec.gaussian(), 2
    )
    noisy = run_scheme(
        plan_6243, float_draw, draw_symbols(plan_6243, 2, exact=False), noise_seed=5
    )

    assert noisy.noisy
    assert verify_transcript(noisy)


def test_transcript_dump_is_json(plan_6243: SchemePlan, exact_spec: DistributionSpec) -> None:
    document = json.loads(json.dumps(transcript_to_dict(_transcript(plan_6243, exact_spec))))

    assert document["version"] == "v1"
    assert document["hermetic"] is True
    assert len(document["slots"]) == 3
    assert len(document["symbol_ids"]) == 12
    assert len(document["channel"]["matrices"]) == 12


# ----------------------------------------------------------------------------
# Monte Carlo
# ----------------------------------------------------------------------------


def test_monte_carlo_p0_6243_exact(plan_6243: SchemePlan, exact_spec: DistributionSpec) -> None:
    summary = monte_carlo(plan_6243, exact_spec, 100, 0)

    assert summary.successes == 100
    assert summary.resamples <= 2
    assert summary.rank_failures == summary.decode_failures == 0
    assert summary.confirmed
    assert summary.delivered_dof == (2, 2)
    assert summary.stronger_rx == 100
    assert summary.hermetic


def test_monte_carlo_p1_8465_exact(exact_spec: DistributionSpec) -> None:
    summary = monte_carlo(plan_p0_p1(AntennaConfig(8, 4, 6, 5)), exact_spec, 100, 0)

    assert summary.successes == 100
    assert summary.resamples <= 2
    assert summary.rank_failures == summary.decode_failures == 0
    assert summary.delivered_dof == (F(8, 5), 4)
    assert summary.stronger_rx == 100
    assert summary.hermetic


def test_monte_carlo_p2_8465_exact(exact_spec: DistributionSpec) -> None:
    summary = monte_carlo(plan_p2(AntennaConfig(8, 4, 6, 5)), exact_spec, 100, 0)

    assert summary.successes == 100
    assert summary.resamples <= 2
    assert summary.rank_failures == summary.decode_failures == 0
    assert summary.delivered_dof == (F(8, 3), F(10, 3))
    assert summary.stronger_rx == 100
    assert summary.hermetic


def test_monte_carlo_with_two_phase1_slots(exact_spec: DistributionSpec) -> None:
    summary = monte_carlo(plan_p0_p1(AntennaConfig(12, 1, 9, 3)), exact_spec, 20, 3)

    assert summary.confirmed
    assert summary.delivered_dof == (8, 1)


def test_monte_carlo_mirrored_plan_reports_user_orientation(
    exact_spec: DistributionSpec,
) -> None:
    summary = monte_carlo(plan_p2(AntennaConfig(4, 8, 5, 6)), exact_spec, 10, 1)

    assert summary.confirmed
    assert summary.config == AntennaConfig(4, 8, 5, 6)
    assert summary.delivered_dof == (F(10, 3), F(8, 3))


def test_monte_carlo_float_mode(plan_6243: SchemePlan) -> None:
    summary = monte_carlo(plan_6243, DistributionSpec.gaussian(), 20, 0)

    assert summary.mode == "float"
    assert summary.confirmed


def test_monte_carlo_with_per_link_distributions(plan_6243: SchemePlan) -> None:
    spec = DistributionSpec.uniform(
        1000,
        overrides={
            "12": LinkDistribution(DistributionKind.UNIFORM_INT, 10),
            "21": LinkDistribution(DistributionKind.UNIFORM_INT, 50),
        },
    )

    summary = monte_carlo(plan_6243, spec, 30, 2)

    assert summary.confirmed
    assert summary.stronger_rx == 30


def test_monte_carlo_is_deterministic_across_workers(
    plan_6243: SchemePlan, exact_spec: DistributionSpec
) -> None:
    serial = monte_carlo(plan_6243, exact_spec, 6, 42)
    parallel = monte_carlo(plan_6243, exact_spec, 6, 42, workers=2)

    assert serial == parallel
    assert serial.to_dict()["seed"] == 42


def test_monte_carlo_rejects_zero_trials(
    plan_6243: SchemePlan, exact_spec: DistributionSpec
) -> None:
    with pytest.raises(InvalidConfig, match="trials must be >= 1"):
        monte_carlo(plan_6243, exact_spec, 0, 0)


def test_monte_carlo_resamples_degenerate_draw(
    plan_6243: SchemePlan, exact_spec: DistributionSpec, monkeypatch: pytest.MonkeyPatch
) -> None:
    seeds: list[int] = []

    def degenerate_first_draw(cfg, slots, spec, seed):
        draw = sample_channel(cfg, slots, spec, seed)
        seeds.append(seed)
        return draw.with_matrix(1, "12", [[0, 0]] * 4) if len(seeds) == 1 else draw

    monkeypatch.setattr(dof_simkernel, "sample_channel", degenerate_first_draw)
    summary = monte_carlo(plan_6243, exact_spec, 3, 0)

    assert len(seeds) == 4
    assert len(set(seeds)) == 4
    assert summary.successes == 3
    assert summary.resamples == 1
    assert summary.rank_failures == 0
    assert summary.delivered_dof == (2, 2)


def test_monte_carlo_counts_exhausted_resamples(
    plan_6243: SchemePlan, exact_spec: DistributionSpec, monkeypatch: pytest.MonkeyPatch
) -> None:
    def always_degenerate(cfg, slots, spec, seed):
        return sample_channel(cfg, slots, spec, seed).with_matrix(1, "12", [[0, 0]] * 4)

    monkeypatch.setattr(dof_simkernel, "sample_channel", always_degenerate)
    summary = monte_carlo(plan_6243, exact_spec, 2, 0)

    assert summary.successes == 0
    assert summary.rank_failures == 2
    assert summary.decode_failures == 0
    assert summary.resamples == 2 * RESAMPLE_CAP
    assert not summary.confirmed
    assert summary.to_dict()["delivered_dof"] is None
    assert all("rank failure" in line for line in summary.diagnostics)


def test_monte_carlo_separates_decode_mismatches(
    plan_6243: SchemePlan, exact_spec: DistributionSpec, monkeypatch: pytest.MonkeyPatch
) -> None:
    def wrong_values(transcript, plan, **kwargs):
        return dataclasses.replace(decode(transcript, plan, **kwargs), delivered_dof=None)

    monkeypatch.setattr(dof_simkernel, "decode", wrong_values)
    summary = monte_carlo(plan_6243, exact_spec, 3, 0)

    assert summary.successes == 0
    assert summary.decode_failures == 3
    assert summary.rank_failures == 0
    assert summary.to_dict()["decode_failures"] == 3
