from fractions import Fraction as F

import numpy as np
import pytest

from mcsched import (
    BANDS,
    BUILTIN_DISTRIBUTIONS,
    ConstantDemand,
    Criticality,
    GenParams,
    GenerationTimeout,
    GridDemand,
    UniformDemand,
    gen_job_sequence,
    gen_task,
    gen_taskset,
    parse_demand_model,
    validate_jobs,
)
from mcsched.generator import band_label


def avg_utilization(ts):
    lo = sum(t.lc_estimate / t.period for t in ts.tasks)
    hi = sum(t.wcet / t.period for t in ts.hc_tasks)
    return (lo + hi) / 2


def test_band_table():
    assert BANDS == tuple((F(hi, 100) - F(1, 100), F(hi, 100))
                          for hi in (55, 60, 65, 70, 75))
    assert band_label(BANDS[3]) == "0.70"


def test_optimistic_budget_mean():
    params = GenParams(band=BANDS[0], seed=11)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(11)))
    total = F(0)
    n = 100_000
    for _ in range(n):
        total += gen_task(params, rng).lc_estimate
    mean = total / n
    assert F(545, 100) <= mean <= F(555, 100)  # uniform on [1, 10]


def test_task_draw_bounds():
    params = GenParams(band=BANDS[2], rc=4, seed=3)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(3)))
    saw = {Criticality.LC: 0, Criticality.HC: 0}
    for i in range(2000):
        t = gen_task(params, rng, i + 1)
        saw[t.criticality] += 1
        assert F(1) <= t.lc_estimate <= F(10)
        assert t.wcet <= t.period <= F(200)
        if t.is_hc:
            assert t.lc_estimate <= t.wcet <= 4 * t.lc_estimate
        else:
            assert t.wcet == t.lc_estimate
    assert saw[Criticality.LC] > 0 and saw[Criticality.HC] > 0


def test_inflated_variant_stretches_lc_too():
    params = GenParams(band=BANDS[2], rc=4, seed=3, inflate_lc=True)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(3)))
    stretched = 0
    for i in range(500):
        t = gen_task(params, rng, i + 1)
        assert t.lc_estimate <= t.wcet <= 4 * t.lc_estimate
        if not t.is_hc and t.wcet > t.lc_estimate:
            stretched += 1
    assert stretched > 0


def test_sets_land_in_the_requested_band():
    for trial in range(1000):
        band = BANDS[trial % len(BANDS)]
        ts = gen_taskset(GenParams(band=band),
                         np.random.SeedSequence((41, trial)))
        assert band[0] <= avg_utilization(ts) <= band[1]
        assert [t.id for t in ts.tasks] == list(range(1, len(ts.tasks) + 1))


def test_generation_is_deterministic():
    params = GenParams(band=BANDS[1], rc=2)
    a = gen_taskset(params, np.random.SeedSequence(99))
    b = gen_taskset(params, np.random.SeedSequence(99))
    assert a == b
    c = gen_taskset(params, np.random.SeedSequence(100))
    assert a != c


def test_generation_timeout():
    params = GenParams(band=(F(1, 1000), F(2, 1000)), max_restarts=5)
    with pytest.raises(GenerationTimeout):
        gen_taskset(params, np.random.SeedSequence(0))


def test_params_validation():
    with pytest.raises(ValueError):
        GenParams(band=(F(1, 2), F(1, 2)))
    with pytest.raises(ValueError):
        GenParams(band=(F(0), F(1, 2)))
    with pytest.raises(ValueError):
        GenParams(band=BANDS[0], rc=0)


def test_job_sequence_counts_on_a_common_multiple():
    ts = gen_taskset(GenParams(band=BANDS[0]), np.random.SeedSequence(5))
    horizon = F(400)
    jobs = gen_job_sequence(ts, horizon, ConstantDemand(F(1)),
                            np.random.SeedSequence(5))
    validate_jobs(ts, jobs)
    for t in ts.tasks:
        mine = [j for j in jobs if j.task == t.id]
        expect = int(-(-horizon // t.period))  # ceil(horizon / T)
        assert len(mine) == expect
        assert [j.seq for j in mine] == list(range(expect))
        assert all(j.release == k * t.period for k, j in enumerate(mine))


def test_lc_jobs_demand_full_wcet_and_hc_jobs_scale():
    ts = gen_taskset(GenParams(band=BANDS[4]), np.random.SeedSequence(17))
    jobs = gen_job_sequence(ts, F(1000), GridDemand(),
                            np.random.SeedSequence(17))
    by_id = {t.id: t for t in ts.tasks}
    for j in jobs:
        task = by_id[j.task]
        if task.is_hc:
            assert 0 < j.demand <= task.wcet
        else:
            assert j.demand == task.wcet


def test_jitter_never_undercuts_the_period():
    ts = gen_taskset(GenParams(band=BANDS[0]), np.random.SeedSequence(23))
    jobs = gen_job_sequence(ts, F(2000), ConstantDemand(F(1, 2)),
                            np.random.SeedSequence(23), jitter=F(5))
    validate_jobs(ts, jobs)  # separation check lives in the validator
    with pytest.raises(ValueError):
        gen_job_sequence(ts, F(10), ConstantDemand(F(1)),
                         np.random.SeedSequence(0), jitter=F(-1))


def test_grid_demand_matches_its_distribution():
    dist = BUILTIN_DISTRIBUTIONS["table4"]
    ts = gen_taskset(GenParams(band=BANDS[0], ph=1.0, t_max=2,
                               cl_range=(1, 1), rc=1),
                     np.random.SeedSequence(29))
    jobs = gen_job_sequence(ts, F(10_000 * 2), GridDemand(dist),
                            np.random.SeedSequence(29))
    hc = ts.hc_tasks[0]
    scales = [j.demand / hc.wcet for j in jobs if j.task == hc.id]
    assert len(scales) >= 10_000
    for g, c in zip(dist.grid, dist.cdf):
        emp = sum(1 for s in scales if s <= g) / len(scales)
        assert abs(emp - float(c)) < 0.02


def test_uniform_demand_honours_its_range():
    ts = gen_taskset(GenParams(band=BANDS[0], ph=1.0, t_max=2,
                               cl_range=(1, 1), rc=1),
                     np.random.SeedSequence(31))
    model = UniformDemand(F(3, 10), F(7, 10))
    jobs = gen_job_sequence(ts, F(500), model, np.random.SeedSequence(31))
    hc = ts.hc_tasks[0]
    scales = {j.demand / hc.wcet for j in jobs if j.task == hc.id}
    assert all(F(3, 10) <= s <= F(7, 10) for s in scales)
    assert all((s * 1000).denominator == 1 for s in scales)


def test_demand_model_validation():
    with pytest.raises(ValueError):
        UniformDemand(F(0), F(1))
    with pytest.raises(ValueError):
        UniformDemand(F(1, 2), F(3, 2))
    with pytest.raises(ValueError):
        UniformDemand(F(7, 10), F(3, 10))
    with pytest.raises(ValueError):
        UniformDemand(F(1, 3), F(1, 2))  # 1/3 off the tick lattice
    with pytest.raises(ValueError):
        ConstantDemand(F(0))
    with pytest.raises(ValueError):
        ConstantDemand(F(2))


def test_parse_demand_model():
    assert parse_demand_model("grid") == GridDemand()
    assert parse_demand_model("uniform:1/2:1") == UniformDemand(F(1, 2), F(1))
    assert parse_demand_model("constant:3/4") == ConstantDemand(F(3, 4))
    with pytest.raises(ValueError):
        parse_demand_model("gaussian:0:1")
