"""Reproducible experiment drivers and randomized property suites.

Every driver derives all randomness from the experiment seed through named
``numpy`` seed sequences, writes one CSV per experiment (header row plus a
comment line recording version, seed and parameters) and returns its rows,
so reruns with the same ExperimentSpec are byte-identical.
"""

from __future__ import annotations

import csv
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .analysis import (
    optimal_beta_for_su,
    static_model_su,
    theorem1_test,
    threshold_m,
    total_system_utilization,
)
from .errors import McSchedError
from .generator import (
    BANDS,
    ConstantDemand,
    GenParams,
    GridDemand,
    UniformDemand,
    band_label,
    gen_job_sequence,
    gen_taskset,
)
from .probability import BUILTIN_DISTRIBUTIONS, p_noswitch_dynamic, p_noswitch_static
from .simulator import (
    EdfUvdMeba,
    SimConfig,
    check_lemma2_optimality,
    check_mapping_equivalence,
    mode_switch_instant,
    pool_utilization_violations,
    simulate,
    verify_mc_schedulable,
)
from .taskmodel import (
    Criticality,
    McTask,
    TaskSet,
    beta_star_from_lc_estimates,
    distribute_hc_budget_equal,
    utilizations,
)

DEFAULT_SEED = 1


@dataclass(frozen=True)
class ExperimentSpec:
    """What to run, where to write it, and under which seed."""

    name: str
    out_dir: str = "results"
    seed: int = DEFAULT_SEED
    trials: int | None = None
    jobs: int = 1


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def write_rows(path: Path, header: Sequence[str], rows: Sequence[Sequence],
               comment: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {comment}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def taskset_with_utilizations(u_l: Fraction, u_h: Fraction) -> TaskSet:
    """A minimal synthetic set hitting exact class utilizations (each <= 1)."""
    tasks = []
    if u_l > 0:
        tasks.append(McTask(1, Fraction(1), u_l, Criticality.LC))
    if u_h > 0:
        tasks.append(McTask(2, Fraction(1), u_h, Criticality.HC))
    return TaskSet(tuple(tasks))


def max_alpha_for_generated_set(ts: TaskSet) -> float:
    """Best guaranteed LC service when beta_star comes from the estimates.

    Unschedulable sets score 0; sets missing one criticality class score on
    plain utilization feasibility (an empty LC class makes the guarantee
    vacuous).
    """
    u_l, u_h = utilizations(ts)
    if u_h == 0:
        return 1.0 if u_l <= 1 else 0.0
    if u_l == 0:
        return 1.0 if u_h <= 1 else 0.0
    beta = beta_star_from_lc_estimates(ts)
    m = threshold_m(ts)
    if m <= 0:
        return 1.0
    if beta >= 1:
        return 0.0
    val = 1 - m / (1 - beta)
    return float(min(Fraction(1), max(Fraction(0), val)))


def _table3_cell(args) -> tuple[str, int, float, float, float]:
    seed, band_idx, rc, trials = args
    band = BANDS[band_idx]
    means = []
    for inflate in (False, True):
        params = GenParams(band=band, rc=rc, seed=seed, inflate_lc=inflate)
        samples = []
        for trial in range(trials):
            ss = np.random.SeedSequence((seed, band_idx, rc, trial, int(inflate)))
            samples.append(max_alpha_for_generated_set(gen_taskset(params, ss)))
        means.append(samples)
    primary, inflated = means
    mean = statistics.fmean(primary)
    std = statistics.stdev(primary) if len(primary) > 1 else 0.0
    return (band_label(band), rc, mean, std, statistics.fmean(inflated))


def run_table3_dynamic(spec: ExperimentSpec) -> list[tuple]:
    """Mean best LC service over generated task sets, per band and rc.

    Emits the primary generator variant (LC WCET equal to its optimistic
    draw) plus an LC-inflated sensitivity column, and the per-cell sample
    standard deviation.
    """
    trials = spec.trials or 1000
    cells = [(spec.seed, band_idx, rc, trials)
             for rc in (3, 4, 5) for band_idx in range(len(BANDS))]
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            rows = list(pool.map(_table3_cell, cells))
    else:
        rows = [_table3_cell(cell) for cell in cells]
    write_rows(
        Path(spec.out_dir) / "table3_dynamic.csv",
        ["band", "rc", "mean_max_alpha", "std_max_alpha", "mean_max_alpha_lc_inflated"],
        rows,
        f"mcsched {__version__} name=table3_dynamic seed={spec.seed} trials={trials}",
    )
    return rows


def figure2_grid(u_sum: Fraction = Fraction(3, 2)
                 ) -> tuple[list[Fraction], list[float]]:
    u_l_grid = [Fraction(k, 10) for k in range(10, 0, -1)
                if 0 < u_sum - Fraction(k, 10) <= 1]
    u_l_grid = sorted(u for u in u_l_grid if u <= 1)
    w_grid = [k / 50 for k in range(1, 51)]
    return u_l_grid, w_grid


def run_figure2(spec: ExperimentSpec, u_sum: Fraction = Fraction(3, 2)) -> list[tuple]:
    """Bandwidth scale that maximizes weighted utilization, over a grid."""
    u_l_grid, w_grid = figure2_grid(u_sum)
    rows = []
    for u_l in u_l_grid:
        ts = taskset_with_utilizations(u_l, u_sum - u_l)
        for w in w_grid:
            rows.append((float(u_l), w, optimal_beta_for_su(ts, w)))
    write_rows(
        Path(spec.out_dir) / "figure2.csv",
        ["U_L", "w", "beta_opt"],
        rows,
        f"mcsched {__version__} name=figure2 seed={spec.seed} u_sum={u_sum}",
    )
    return rows


def run_figure3(spec: ExperimentSpec) -> list[tuple]:
    """Busy-interval survival probabilities, static budgets vs dynamic pool."""
    dist = BUILTIN_DISTRIBUTIONS["table4"]
    betas = [Fraction(45, 100), Fraction(55, 100), Fraction(65, 100), Fraction(75, 100)]
    rows = []
    for n in range(1, 9):
        us = [Fraction(1, 10)] * n
        for beta in betas:
            rows.append((n, float(beta), "s", p_noswitch_static(dist, n, beta)))
            rows.append((n, float(beta), "d", p_noswitch_dynamic(dist, us, beta)))
    write_rows(
        Path(spec.out_dir) / "figure3.csv",
        ["n", "beta", "model", "p"],
        rows,
        f"mcsched {__version__} name=figure3 seed={spec.seed}",
    )
    return rows


def run_figure4(spec: ExperimentSpec, u_sum: Fraction = Fraction(13, 10)) -> list[tuple]:
    """Weighted utilization of the dynamic design relative to the static one."""
    u_l_grid = [Fraction(k, 100) for k in (40, 50, 65, 80, 100)
                if 0 < u_sum - Fraction(k, 100) <= 1]
    w_grid = [k / 50 for k in range(1, 51)]
    rows = []
    for u_l in u_l_grid:
        ts = taskset_with_utilizations(u_l, u_sum - u_l)
        for w in w_grid:
            beta_opt = optimal_beta_for_su(ts, w)
            su_dyn = total_system_utilization(ts, w, Fraction(beta_opt))
            su_static = static_model_su(ts, w)
            rows.append((float(u_l), w, su_dyn, su_static, su_dyn / su_static))
    write_rows(
        Path(spec.out_dir) / "figure4.csv",
        ["U_L", "w", "su_dynamic", "su_static", "ratio"],
        rows,
        f"mcsched {__version__} name=figure4 seed={spec.seed} u_sum={u_sum}",
    )
    return rows


@dataclass(frozen=True)
class Scenario:
    """A randomized admissible system plus a job sequence to drive it."""

    ts: TaskSet
    alpha_star: Fraction
    beta_star: Fraction
    x: Fraction
    jobs: tuple
    horizon: Fraction

    def config(self) -> SimConfig:
        return SimConfig(EdfUvdMeba(self.beta_star), self.x, horizon=self.horizon)


def _rng_of(seed_material) -> np.random.Generator:
    if isinstance(seed_material, np.random.Generator):
        return seed_material
    if isinstance(seed_material, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed_material))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed_material)))


def random_feasible_scenario(seed_material, *, switchy: bool = False,
                             fine_demands: bool = False) -> Scenario:
    """Draw a schedulable system and a sporadic job sequence for it.

    Utilization targets stay at or below 0.9 per class so the service-level
    trade-off always admits a pair; levels and the deadline factor are drawn
    inside their exact admissible ranges.  ``switchy`` biases toward small
    bandwidth pools and full demands so degradations are frequent;
    ``fine_demands`` draws demand scales on a fine prime-denominator lattice
    to keep budget boundaries off the release lattice.
    """
    rng = _rng_of(seed_material)
    n_lc = int(rng.integers(1, 3, endpoint=True))
    n_hc = int(rng.integers(1, 3, endpoint=True))
    u_l = Fraction(int(rng.integers(10, 90, endpoint=True)), 100)
    u_h = Fraction(int(rng.integers(10, 90, endpoint=True)), 100)

    def split(total: Fraction, n: int) -> list[Fraction]:
        weights = [int(rng.integers(1, 9, endpoint=True)) for _ in range(n)]
        s = sum(weights)
        return [total * w / s for w in weights]

    tasks = []
    tid = 1
    for crit, shares in ((Criticality.LC, split(u_l, n_lc)),
                         (Criticality.HC, split(u_h, n_hc))):
        for u in shares:
            period = Fraction(int(rng.integers(400, 4000, endpoint=True)), 100)
            tasks.append(McTask(tid, period, u * period, crit))
            tid += 1
    ts0 = TaskSet(tuple(tasks))

    m = threshold_m(ts0)
    if m is None or m <= 0:
        cap = Fraction(1)
        alpha_cap = Fraction(1)
        beta = cap * Fraction(int(rng.integers(0, 100, endpoint=True)), 100)
    else:
        cap = 1 - m
        hi = 40 if switchy else 100
        beta = cap * Fraction(int(rng.integers(0, hi)), 100)
        alpha_cap = 1 - m / (1 - beta)
    alpha_star = alpha_cap * Fraction(int(rng.integers(0, 100, endpoint=True)), 100)
    alphas = distribute_hc_budget_equal(ts0, alpha_star)
    ts = ts0.with_alphas(alphas)
    verdict = theorem1_test(ts, alpha_star, beta)
    if not verdict.schedulable:
        raise McSchedError("scenario factory produced an inadmissible system")
    span = verdict.x_hi - verdict.x_lo
    x = verdict.x_lo + span * Fraction(int(rng.integers(0, 100, endpoint=True)), 100)

    if switchy:
        model = ConstantDemand(Fraction(1))
    else:
        pick = int(rng.integers(0, 3))
        if pick == 0:
            model = GridDemand()
        elif pick == 1:
            lo = Fraction(int(rng.integers(1, 5)), 10)
            model = UniformDemand(lo, Fraction(1))
        else:
            model = ConstantDemand(Fraction(int(rng.integers(50, 100, endpoint=True)), 100))
    if fine_demands:
        k = int(rng.integers(5000, 9973, endpoint=True))
        model = ConstantDemand(Fraction(k, 9973))
    horizon = max(t.period for t in ts.tasks) * int(rng.integers(2, 4, endpoint=True))
    jobs = gen_job_sequence(ts, horizon, model, rng)
    return Scenario(ts, alpha_star, beta, x, jobs, horizon)


def switch_inducing_scenario(seed: int, trial: int, *, attempts: int = 50,
                             fine_demands: bool = False) -> tuple[Scenario, Fraction]:
    """A scenario whose dynamic run degrades; returns it with its t*."""
    for attempt in range(attempts):
        sc = random_feasible_scenario(
            np.random.SeedSequence((seed, trial, attempt)),
            switchy=True, fine_demands=fine_demands)
        trace = simulate(sc.ts, sc.config(), sc.jobs, stop_after_switch=True)
        t_star = mode_switch_instant(trace)
        if t_star is not None:
            return sc, t_star
    raise McSchedError(f"no degradation found for trial {trial} in {attempts} attempts")


def random_budget_vectors(ts: TaskSet, beta_star: Fraction, rng, count: int,
                          include: Sequence[dict] = ()) -> list[dict]:
    """Fixed budget vectors whose bandwidth never exceeds the pool."""
    rng = _rng_of(rng)
    _, u_h = utilizations(ts)
    pool = beta_star * u_h
    hc = ts.hc_tasks
    vectors = [dict(v) for v in include]
    while len(vectors) < count:
        shares = [int(rng.integers(0, 100, endpoint=True)) for _ in hc]
        vectors.append({
            t.id: t.period * pool * Fraction(s, 100 * len(hc))
            for t, s in zip(hc, shares)
        })
    return vectors[:count]


def run_lemma2_fuzz(spec: ExperimentSpec, *, vectors_per_sequence: int = 20
                    ) -> list[tuple]:
    """Fixed feasible budgets must never outlast the dynamic allocation."""
    trials = spec.trials or 200
    rows = []
    for trial in range(trials):
        sc = random_feasible_scenario(
            np.random.SeedSequence((spec.seed, 2, trial)), switchy=True)
        rng = _rng_of(np.random.SeedSequence((spec.seed, 3, trial)))
        trace = simulate(sc.ts, sc.config(), sc.jobs, stop_after_switch=True)
        t_dyn = mode_switch_instant(trace)
        include = [{t.id: Fraction(0) for t in sc.ts.hc_tasks}]
        switch_ev = next((ev for ev in trace.events
                          if ev.snapshot is not None), None)
        if switch_ev is not None:
            include.append({tid: val for tid, val in switch_ev.snapshot})
        vecs = random_budget_vectors(sc.ts, sc.beta_star, rng,
                                     vectors_per_sequence, include)
        ok = check_lemma2_optimality(sc.ts, sc.beta_star, sc.jobs, vecs, x=sc.x)
        rows.append((trial, "" if t_dyn is None else t_dyn, int(ok)))
    return rows


def run_mapping_fuzz(spec: ExperimentSpec) -> list[tuple]:
    """The static reduction must replay the dynamic schedule."""
    trials = spec.trials or 100
    rows = []
    for trial in range(trials):
        sc, t_star = switch_inducing_scenario(spec.seed, trial, fine_demands=True)
        alphas = {t.id: t.alpha for t in sc.ts.lc_tasks}
        ok = check_mapping_equivalence(sc.ts, alphas, sc.x, sc.jobs,
                                       beta_star=sc.beta_star)
        rows.append((trial, t_star, int(ok)))
    return rows


def run_e2e_verify(spec: ExperimentSpec) -> list[tuple]:
    """Admissible systems must produce clean traces and clean accounting."""
    trials = spec.trials or 500
    rows = []
    for trial in range(trials):
        sc = random_feasible_scenario(np.random.SeedSequence((spec.seed, 4, trial)))
        trace = simulate(sc.ts, sc.config(), sc.jobs)
        ok, violations = verify_mc_schedulable(sc.ts, sc.config(), trace)
        audit = pool_utilization_violations(sc.ts, sc.beta_star, trace)
        switched = mode_switch_instant(trace) is not None
        rows.append((trial, int(switched), int(ok and not audit)))
    return rows


PROPERTY_SUITES: dict[str, Callable[[ExperimentSpec], list[tuple]]] = {
    "lemma2_fuzz": run_lemma2_fuzz,
    "mapping_fuzz": run_mapping_fuzz,
    "e2e_verify": run_e2e_verify,
}


def run_property_suites(spec: ExperimentSpec) -> int:
    """Run one (or all) randomized suites; returns the violation count."""
    names = [spec.name] if spec.name in PROPERTY_SUITES else list(PROPERTY_SUITES)
    violations = 0
    for name in names:
        rows = PROPERTY_SUITES[name](replace(spec, name=name))
        violations += sum(1 for row in rows if not row[-1])
        write_rows(
            Path(spec.out_dir) / f"{name}.csv",
            ["trial", "t_star", "ok"],
            rows,
            f"mcsched {__version__} name={name} seed={spec.seed} trials={len(rows)}",
        )
    return violations


EXPERIMENTS = ("table3_dynamic", "figure2", "figure3", "figure4",
               "lemma2_fuzz", "mapping_fuzz", "e2e_verify")


def run_experiment(spec: ExperimentSpec) -> int:
    """Dispatch an experiment by name; returns the violation count."""
    if spec.name == "table3_dynamic":
        run_table3_dynamic(spec)
        return 0
    if spec.name == "figure2":
        run_figure2(spec)
        return 0
    if spec.name == "figure3":
        run_figure3(spec)
        return 0
    if spec.name == "figure4":
        run_figure4(spec)
        return 0
    if spec.name in PROPERTY_SUITES:
        return run_property_suites(spec)
    raise ValueError(f"unknown experiment {spec.name!r}; choose from {EXPERIMENTS}")
