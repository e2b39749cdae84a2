import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from oracles import HGS_AVG, HGS_SET_GAPS, brute_pi, brute_wrap
from vrpbench.metrics import (
    PI_CAP,
    RunMetrics,
    StaleBksError,
    Stat,
    aggregate,
    aggregate_values,
    average_reports,
    average_stats,
    evaluate_run,
    gap,
    gap_at_budget,
    improves_bks,
    primal_gap,
    primal_gap_integral,
    primal_integral,
    rpi,
    synchronize,
    wrap,
)
from vrpbench.trajectory import Trajectory


# ------------------------------------------------------------------ gap


@pytest.mark.parametrize("z, bks, expected", [(100, 100, 0.0), (104.09, 100, 4.09), (99, 100, -1.0)])
def test_gap(z, bks, expected):
    assert gap(z, bks) == pytest.approx(expected, abs=1e-12)


def test_gap_flags_new_bks():
    assert improves_bks(99, 100) and not improves_bks(100, 100)


def test_gap_needs_positive_bks():
    with pytest.raises(ValueError):
        gap(1, 0)


def test_gap_at_budget():
    t = Trajectory([10, 50], [110, 105], 100)
    assert gap_at_budget(t, 30, 100) == pytest.approx(10.0)
    assert gap_at_budget(t, 5, 100) is None
    assert gap_at_budget(t, 100, 100) == gap(105, 100)
    for tau in (0, 101):
        with pytest.raises(ValueError):
            gap_at_budget(t, tau, 100)


# ---------------------------------------------------------- primal gap


@pytest.mark.parametrize("z, opt, expected", [(0, 0, 0.0), (-5, 5, 1.0), (125, 100, 0.2),
                                               (100, 100, 0.0)])
def test_primal_gap(z, opt, expected):
    assert primal_gap(z, opt) == pytest.approx(expected)


def test_primal_gap_integral():
    t = Trajectory([10, 50], [125, 100], 100)
    assert primal_gap_integral(t, 100) == pytest.approx((10 * 1 + 40 * 0.2) / 100)
    assert primal_gap_integral(Trajectory.empty(10), 1) == 1.0


# ------------------------------------------------------------------- PI


def test_pi_bks_at_zero():
    assert primal_integral(Trajectory([0.0], [100.0], 50), 100) == 0.0


def test_pi_empty_is_cap():
    assert primal_integral(Trajectory.empty(37.3), 100) == PI_CAP


def test_pi_hand_example():
    t = Trajectory([10, 50], [110, 105], 100)
    assert primal_integral(t, 100) == pytest.approx(7.5, abs=1e-9)


def test_pi_matches_literal_formula_without_caps():
    # first incumbent at 0, all gaps below 10
    times, costs, T, bks = [0, 3, 7], [108, 104, 101], 10.0, 100.0
    literal = 100 * ((108 * 3 + 104 * 4 + 101 * 3) / (T * bks) - 1)
    assert primal_integral(Trajectory(times, costs, T), bks) == pytest.approx(literal)


def test_pi_rejects_cost_below_bks():
    with pytest.raises(StaleBksError):
        primal_integral(Trajectory([1], [99], 10), 100)


# ---------------------------------------------------------------- RPI


@pytest.mark.parametrize("z, zb, bks, expected", [
    (110, 110, 100, 1.0),
    (100, 110, 100, 0.0),
    (105, 110, 100, 0.5),
    (120, 110, 100, 1.0),
    (None, 110, 100, 1.0),
    (105, None, 100, 1.0),
    (100, 100, 100, 1.0),
])
def test_rpi_cases(z, zb, bks, expected):
    assert rpi(z, zb, bks) == expected


def test_rpi_stale_bks():
    with pytest.raises(StaleBksError):
        rpi(105, 99, 100)
    with pytest.raises(StaleBksError):
        rpi(99, 105, 100)


# --------------------------------------------------------------- WRAP


def test_wrap_hand_example():
    base = Trajectory([1], [110], 100)
    cand = Trajectory([2, 10, 60], [120, 105, 100], 100)
    assert wrap(cand, base, 100) == pytest.approx(0.35, abs=1e-12)


def test_wrap_identity():
    base = Trajectory([0.3, 1.7, 9.9], [130, 120, 101], 10)
    assert wrap(base, base, 100) == 1.0


def test_wrap_never_better_is_one():
    base = Trajectory([0.1, 5], [130, 110], 10)
    cand = Trajectory([0.05, 6], [150, 120], 10)
    assert wrap(cand, base, 100) == 1.0


def test_wrap_bks_at_first_event():
    base = Trajectory([0.5, 4], [130, 110], 10)
    cand = Trajectory([3.3], [100], 10)
    assert wrap(cand, base, 100) == 3.3 / 10


def test_wrap_budget_mismatch():
    with pytest.raises(ValueError):
        wrap(Trajectory([1], [1], 10), Trajectory([1], [1], 11), 1)


def test_synchronize_grid():
    base = Trajectory([1, 4], [110, 105], 10)
    cand = Trajectory([2, 4, 7], [108, 104, 102], 10)
    pair = synchronize(base, cand, 100)
    assert pair.grid.tolist() == [0, 1, 2, 4, 7, 10]
    assert np.isnan(pair.base[0]) and np.isnan(pair.cand[1])
    assert pair.base[2] == 110  # base value carried to the candidate's event
    assert pair.cand[3] == 104 and pair.base[3] == 105


def test_synchronize_identical():
    t = Trajectory([1, 3], [5, 4], 6)
    pair = synchronize(t, t, 1)
    assert np.array_equal(pair.base, pair.cand, equal_nan=True)


# --------------------------------------------------- random trajectories


@st.composite
def trajectory_pairs(draw, cells=1000):
    """Trajectories whose event times sit on a grid of ``cells`` cells."""
    budget = draw(st.sampled_from([1.0, 10.0, 37.0, 240.0]))
    bks = draw(st.sampled_from([1.0, 100.0, 21601.80798]))

    def one():
        k = draw(st.integers(0, 8))
        ticks = sorted(draw(st.sets(st.integers(0, cells - 1), min_size=k, max_size=k)))
        drops = draw(st.lists(st.floats(0.001, 0.2), min_size=k, max_size=k))
        z = bks * (1 + draw(st.floats(0.0, 0.3)) + sum(drops))
        costs = []
        for d in drops:
            costs.append(z)
            z -= bks * d
        return np.array(ticks) * (budget / cells), np.array(costs)

    (bt, bz), (ct, cz) = one(), one()
    return budget, bks, bt, bz, ct, cz


@given(trajectory_pairs())
def test_wrap_and_pi_match_oracle(args):
    budget, bks, bt, bz, ct, cz = args
    base, cand = Trajectory(bt, bz, budget), Trajectory(ct, cz, budget)
    assert 0 <= wrap(cand, base, bks) <= 1
    assert 0 <= primal_integral(cand, bks) <= PI_CAP
    assert wrap(cand, base, bks) == pytest.approx(
        brute_wrap(ct, cz, bt, bz, budget, bks, cells=1000), abs=1e-9)
    assert primal_integral(cand, bks) == pytest.approx(
        brute_pi(ct, cz, budget, bks, cells=1000), abs=1e-9)


@given(trajectory_pairs(), st.floats(0.01, 100))
def test_wrap_scale_invariant(args, lam):
    budget, bks, bt, bz, ct, cz = args
    a = wrap(Trajectory(ct, cz, budget), Trajectory(bt, bz, budget), bks)
    b = wrap(Trajectory(ct, cz * lam, budget), Trajectory(bt, bz * lam, budget), bks * lam)
    assert a == pytest.approx(b, abs=1e-9)


@given(trajectory_pairs(), st.data())
def test_cheaper_incumbent_never_hurts(args, data):
    budget, bks, bt, bz, ct, cz = args
    assume(len(ct) > 0)
    k = data.draw(st.integers(0, len(ct) - 1))
    lower = cz[k + 1] if k + 1 < len(cz) else bks
    new = data.draw(st.floats(lower, cz[k], exclude_min=True))
    cz2 = cz.copy()
    cz2[k] = new
    base = Trajectory(bt, bz, budget)
    before, after = Trajectory(ct, cz, budget), Trajectory(ct, cz2, budget)
    assert wrap(after, base, bks) <= wrap(before, base, bks) + 1e-12
    assert primal_integral(after, bks) <= primal_integral(before, bks) + 1e-12


@given(trajectory_pairs(), st.data())
def test_earlier_incumbent_never_hurts(args, data):
    budget, bks, bt, bz, ct, cz = args
    assume(len(ct) > 0)
    k = data.draw(st.integers(0, len(ct) - 1))
    earliest = ct[k - 1] if k > 0 else 0.0
    new_t = data.draw(st.floats(earliest, ct[k]))
    assume(k == 0 or new_t > earliest)
    ct2 = ct.copy()
    ct2[k] = new_t
    base = Trajectory(bt, bz, budget)
    before, after = Trajectory(ct, cz, budget), Trajectory(ct2, cz, budget)
    assert wrap(after, base, bks) <= wrap(before, base, bks) + 1e-12
    assert primal_integral(after, bks) <= primal_integral(before, bks) + 1e-12


@given(trajectory_pairs())
def test_gap_at_budget_non_increasing(args):
    budget, bks, _, _, ct, cz = args
    t = Trajectory(ct, cz, budget)
    prev = math.inf
    for tau in np.linspace(budget / 50, budget, 50):
        g = gap_at_budget(t, tau, bks)
        g = math.inf if g is None else g
        assert g <= prev
        prev = g


@given(trajectory_pairs())
def test_wrap_one_iff_rpi_one(args):
    budget, bks, bt, bz, ct, cz = args
    base, cand = Trajectory(bt, bz, budget), Trajectory(ct, cz, budget)
    pair = synchronize(base, cand, bks)
    ones = all(rpi(c, b, bks) == 1.0 for c, b in zip(pair.cand[:-1], pair.base[:-1]))
    assert (wrap(cand, base, bks) == 1.0) == ones


# ---------------------------------------------------------- aggregation


def test_single_run_identity():
    s = aggregate_values({"a": [0.7]})
    assert s.mean == 0.7 and s.std == 0.0 and s.count == 1


def test_two_runs_sample_std():
    s = aggregate_values({"a": [0.2, 0.4]})
    assert s.mean == pytest.approx(0.3)
    assert s.std == pytest.approx(0.1414, abs=1e-4)


def test_hgs_avg_row():
    stats = [Stat(g, 0.0, 1) for g in HGS_SET_GAPS]
    assert average_stats(stats).mean == pytest.approx(HGS_AVG, abs=5e-5)


def test_set_mean_is_unweighted_over_instances():
    s = aggregate_values({"a": [1.0, 3.0], "b": [10.0]})
    # instance means 2 and 10; replicate means (1+10)/2 and 3
    assert s.mean == 6.0
    assert s.std == pytest.approx(np.std([5.5, 3.0], ddof=1))


def test_none_values_skipped():
    s = aggregate_values({"a": [None, 2.0], "b": [None]})
    assert s.mean == 2.0 and s.count == 1
    assert aggregate_values({"a": [None]}).mean is None


def test_empty_group_rejected():
    with pytest.raises(ValueError):
        aggregate_values({})
    with pytest.raises(ValueError):
        aggregate({"a": []})


def test_report_avg_row_is_mean_of_sets():
    runs_a = {"i": [RunMetrics(1.0, 2.0, 0.5, ((1.0, 1.0),))]}
    runs_b = {"j": [RunMetrics(3.0, 4.0, 0.7, ((1.0, 3.0),))],
              "k": [RunMetrics(5.0, 6.0, 0.9, ((1.0, 5.0),))]}
    avg = average_reports([aggregate(runs_a), aggregate(runs_b)])
    assert avg.gap_percent == pytest.approx((1.0 + 4.0) / 2)
    assert avg.wrap_score == pytest.approx((0.5 + 0.8) / 2)
    assert avg.curve[0][1].mean == avg.gap.mean


def test_evaluate_run_curve_end_equals_gap():
    base = Trajectory([0.1, 5], [130, 110], 10)
    cand = Trajectory([0.6, 4], [120, 103], 10)
    m = evaluate_run(cand, base, 100)
    assert m.curve[-1] == (1.0, m.gap)
    assert m.curve[0] == (0.05, None)
    empty = evaluate_run(Trajectory.empty(10), base, 100)
    assert empty.gap is None and empty.pi == PI_CAP and empty.wrap == 1.0
