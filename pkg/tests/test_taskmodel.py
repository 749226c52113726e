from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from mcsched import (
    Criticality,
    InvalidFraction,
    McTask,
    NoLcTasks,
    TaskSet,
    TaskSetParseError,
    alpha_star_from_per_task,
    as_fraction,
    beta_star_from_lc_estimates,
    distribute_hc_budget_equal,
    utilizations,
)
from mcsched.taskmodel import ServiceConfig, format_taskset, parse_taskset


def test_as_fraction_accepts_int_and_fraction():
    assert as_fraction(3, "v") == F(3)
    assert as_fraction(F(1, 7), "v") == F(1, 7)


def test_as_fraction_rejects_float_and_bool():
    with pytest.raises(TypeError):
        as_fraction(0.5, "v")
    with pytest.raises(TypeError):
        as_fraction(True, "v")


def test_task_validation():
    with pytest.raises(ValueError):
        McTask(1, F(0), F(1), Criticality.LC)  # period > 0
    with pytest.raises(ValueError):
        McTask(1, F(5), F(6), Criticality.LC)  # wcet <= period
    with pytest.raises(ValueError):
        McTask(1, F(5), F(0), Criticality.LC)  # wcet > 0
    with pytest.raises(ValueError):
        McTask(1, F(5), F(2), Criticality.HC, lc_estimate=F(3))  # estimate <= wcet
    with pytest.raises(InvalidFraction):
        McTask(1, F(5), F(2), Criticality.LC, alpha=F(3, 2))  # alpha in [0,1]


def test_zero_lc_estimate_allowed():
    t = McTask(1, F(5), F(2), Criticality.HC, lc_estimate=F(0))
    assert t.lc_estimate == 0


def test_task_properties():
    t = McTask(1, F(10), F(4), Criticality.HC, lc_estimate=F(2))
    assert t.utilization == F(2, 5)
    assert t.is_hc and not t.is_lc
    lc = McTask(2, F(10), F(5), Criticality.LC, alpha=F(1, 2))
    assert lc.degraded_service == F(5, 2)
    assert lc.with_alpha(F(1)).alpha == 1


def test_taskset_unique_ids():
    t = McTask(1, F(5), F(1), Criticality.LC)
    with pytest.raises(ValueError):
        TaskSet((t, t))


def test_utilizations(half_four_fifths_set):
    assert utilizations(half_four_fifths_set) == (F(1, 2), F(4, 5))


def test_alpha_star_is_min_over_lc(contrast_set):
    assert alpha_star_from_per_task(contrast_set) == F(1, 2)
    hc_only = TaskSet((McTask(1, F(5), F(1), Criticality.HC),))
    with pytest.raises(NoLcTasks):
        alpha_star_from_per_task(hc_only)


def test_beta_star_from_lc_estimates(half_four_fifths_set):
    # (2/10 + 2/10) / (4/5) = 1/2
    assert beta_star_from_lc_estimates(half_four_fifths_set) == F(1, 2)


def test_distribute_hc_budget_unclamped_oracle():
    # u = (1/2, 1/2 of U_L each); equal split below 1 stays equal
    ts = TaskSet((
        McTask(1, F(4), F(1), Criticality.LC),
        McTask(2, F(4), F(1), Criticality.LC),
        McTask(3, F(4), F(1), Criticality.HC),
    ))
    got = distribute_hc_budget_equal(ts, F(3, 5))
    assert got == {1: F(3, 5), 2: F(3, 5)}


def test_distribute_hc_budget_clamped_oracle():
    # u = (2/5, 1/10), alpha* = 9/10: water level puts task 2 at 1 and
    # task 1 carries the rest: (9/10 * 1/2 - 1/10) / (2/5) = 7/8
    ts = TaskSet((
        McTask(1, F(10), F(4), Criticality.LC),
        McTask(2, F(10), F(1), Criticality.LC),
        McTask(3, F(10), F(2), Criticality.HC),
    ))
    got = distribute_hc_budget_equal(ts, F(9, 10))
    assert got == {1: F(7, 8), 2: F(1)}


def _water_level_oracle(ts, alpha_star):
    """Independent check: level L with sum(min(L, u_i)) = alpha* U_L."""
    lc = ts.lc_tasks
    total = alpha_star * sum(t.utilization for t in lc)
    lo, hi = F(0), max(t.utilization for t in lc)
    for _ in range(80):
        mid = (lo + hi) / 2
        if sum(min(mid, t.utilization) for t in lc) < total:
            lo = mid
        else:
            hi = mid
    return hi


@given(st.integers(1, 4), st.integers(0, 100), st.integers(1, 997))
@settings(max_examples=60, derandomize=True, deadline=None)
def test_distribute_matches_water_level(n_lc, a_num, salt):
    alpha_star = F(a_num, 100)
    tasks = [McTask(i + 1, F(10), F(1 + (salt * (i + 3)) % 9), Criticality.LC)
             for i in range(n_lc)]
    tasks.append(McTask(99, F(10), F(1), Criticality.HC))
    ts = TaskSet(tuple(tasks))
    got = distribute_hc_budget_equal(ts, alpha_star)
    u_l = sum(t.utilization for t in ts.lc_tasks)
    # exact mass conservation
    assert sum(got[t.id] * t.utilization for t in ts.lc_tasks) == alpha_star * u_l
    assert all(0 <= v <= 1 for v in got.values())
    level = _water_level_oracle(ts, alpha_star)
    for t in ts.lc_tasks:
        if got[t.id] < 1:  # unclamped tasks carry equal mass = the level
            assert abs(got[t.id] * t.utilization - level) < F(1, 10**9)


def test_service_config_validation(half_four_fifths_set):
    cfg = ServiceConfig(F(0), F(1, 4), F(2, 5))
    assert cfg.consistent_with(half_four_fifths_set)
    with pytest.raises(InvalidFraction):
        ServiceConfig(F(0), F(1, 4), F(0))  # x in (0, 1]


def test_format_parse_round_trip(half_four_fifths_set, contrast_set):
    for ts in (half_four_fifths_set, contrast_set):
        assert parse_taskset(format_taskset(ts)) == ts


def test_parse_reports_line_numbers():
    text = "taskset v1\n1 10 4 HC\nbogus line here\n"
    with pytest.raises(TaskSetParseError) as err:
        parse_taskset(text)
    assert "line 3" in str(err.value)


def test_parse_rejects_missing_header():
    with pytest.raises(TaskSetParseError):
        parse_taskset("1 10 4 HC\n")


@given(st.lists(st.tuples(st.integers(1, 50), st.integers(1, 50),
                          st.booleans(), st.integers(0, 100)),
                min_size=1, max_size=6, unique_by=lambda t: t[0]))
@settings(max_examples=60, derandomize=True, deadline=None)
def test_round_trip_property(rows):
    tasks = []
    for tid, c_num, is_hc, a_num in rows:
        period = F(c_num) + F(tid, 7)
        wcet = F(c_num, 3)
        if is_hc:
            tasks.append(McTask(tid, period, wcet, Criticality.HC,
                                lc_estimate=wcet / 2))
        else:
            tasks.append(McTask(tid, period, wcet, Criticality.LC,
                                alpha=F(a_num, 100)))
    ts = TaskSet(tuple(tasks))
    assert parse_taskset(format_taskset(ts)) == ts
