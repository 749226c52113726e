"""Random task-set and job-sequence generation.

Task sets are grown one task at a time until the average utilization
(U_L + U_H + sum of optimistic HC bandwidths) / 2 lands inside a target
band; overshooting discards the attempt and restarts.  Draws are realized
as integer ticks on a fixed resolution so that every period, WCET and
demand is an exact rational.

Reproducibility contract: the same ``GenParams`` (including seed) always
produce the same task set, and each restart attempt uses its own child
stream, so the draws of earlier attempts never leak into later ones.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .errors import GenerationTimeout
from .probability import BUILTIN_DISTRIBUTIONS, ExecDistribution
from .simulator import Job
from .taskmodel import Criticality, McTask, TaskSet, Time, as_fraction

# Average-utilization bands used by the bundled experiments, keyed by their
# upper edge at width 0.01.
BANDS: tuple[tuple[Fraction, Fraction], ...] = tuple(
    (Fraction(hi, 100) - Fraction(1, 100), Fraction(hi, 100))
    for hi in (55, 60, 65, 70, 75)
)


def band_label(band: tuple[Fraction, Fraction]) -> str:
    return f"{float(band[1]):.2f}"


@dataclass(frozen=True)
class GenParams:
    """Knobs for task-set generation.

    Attributes:
        band: Target (lo, hi) range for the average utilization.
        rc: WCET inflation bound; HC full budgets draw from
            [C_L, rc * C_L].
        ph: Probability that a task is high-criticality.
        cl_range: Range (inclusive) for the optimistic execution draw.
        t_max: Upper bound (inclusive) of the period draw.
        seed: Root seed; every restart attempt derives its own stream.
        resolution: Ticks per time unit for all draws.
        max_restarts: Attempt budget before GenerationTimeout.
        inflate_lc: Also inflate LC WCETs by rc (sensitivity variant; the
            primary design keeps LC WCET equal to its optimistic draw).
    """

    band: tuple[Fraction, Fraction]
    rc: int = 3
    ph: float = 0.5
    cl_range: tuple[int, int] = (1, 10)
    t_max: int = 200
    seed: int = 0
    resolution: int = 100
    max_restarts: int = 10**6
    inflate_lc: bool = False

    def __post_init__(self):
        lo = as_fraction(self.band[0], "band lo")
        hi = as_fraction(self.band[1], "band hi")
        if not 0 < lo < hi:
            raise ValueError(f"band must satisfy 0 < lo < hi, got {self.band}")
        object.__setattr__(self, "band", (lo, hi))
        if self.rc < 1:
            raise ValueError(f"rc must be at least 1, got {self.rc}")


RngLike = Union[int, np.random.SeedSequence, np.random.Generator, None]


def _coerce_rng(rng: RngLike, fallback_seed: int = 0) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(rng))
    if rng is None:
        rng = fallback_seed
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(rng)))


def gen_task(params: GenParams, rng: RngLike, task_id: int = 1) -> McTask:
    """Draw one task: criticality, optimistic budget, WCET, period.

    The optimistic execution C_L is uniform on ``cl_range``; HC WCETs are
    uniform on [C_L, rc * C_L]; periods are uniform on [C, t_max].  All
    uniforms are discretized to ``resolution`` ticks.
    """
    rng = _coerce_rng(rng, params.seed)
    res = params.resolution
    is_hc = bool(rng.random() < params.ph)
    cl = int(rng.integers(params.cl_range[0] * res, params.cl_range[1] * res,
                          endpoint=True))
    if is_hc or params.inflate_lc:
        c = int(rng.integers(cl, params.rc * cl, endpoint=True))
    else:
        c = cl
    t = int(rng.integers(c, params.t_max * res, endpoint=True))
    return McTask(
        id=task_id,
        period=Fraction(t, res),
        wcet=Fraction(c, res),
        criticality=Criticality.HC if is_hc else Criticality.LC,
        alpha=Fraction(0),
        lc_estimate=Fraction(cl, res),
    )


def gen_taskset(params: GenParams, rng: RngLike = None) -> TaskSet:
    """Grow task sets until the average utilization lands in the band.

    Adding a task strictly increases the average utilization, so each
    attempt terminates; attempts that overshoot the band restart with a
    fresh child stream.

    Raises:
        GenerationTimeout: after ``max_restarts`` failed attempts.
    """
    lo2, hi2 = 2 * params.band[0], 2 * params.band[1]
    base: np.random.Generator | None = None
    if isinstance(rng, np.random.Generator):
        base = rng
    for attempt in range(params.max_restarts):
        if base is not None:
            stream = base.spawn(1)[0]
        elif isinstance(rng, np.random.SeedSequence):
            stream = _coerce_rng(np.random.SeedSequence(
                entropy=rng.entropy, spawn_key=rng.spawn_key + (attempt,)))
        else:
            root = params.seed if rng is None else rng
            stream = _coerce_rng(np.random.SeedSequence((root, attempt)))
        tasks: list[McTask] = []
        acc = Fraction(0)  # U_L + U_H + sum of optimistic HC bandwidths
        while True:
            task = gen_task(params, stream, task_id=len(tasks) + 1)
            tasks.append(task)
            acc += task.utilization
            if task.is_hc:
                acc += task.lc_estimate / task.period
            if lo2 <= acc <= hi2:
                return TaskSet(tuple(tasks))
            if acc > hi2:
                break
    raise GenerationTimeout(
        f"no task set hit band {params.band} in {params.max_restarts} attempts")


@dataclass(frozen=True)
class GridDemand:
    """HC demands are ``s * C_i`` with the scale drawn from a grid CDF."""

    dist: ExecDistribution = BUILTIN_DISTRIBUTIONS["table4"]


@dataclass(frozen=True)
class UniformDemand:
    """HC demand scales are uniform on [lo, hi], discretized to ``resolution``."""

    lo: Fraction = Fraction(1, 10)
    hi: Fraction = Fraction(1)
    resolution: int = 1000

    def __post_init__(self):
        lo = as_fraction(self.lo, "lo")
        hi = as_fraction(self.hi, "hi")
        if not 0 < lo <= hi <= 1:
            raise ValueError(f"scale range must satisfy 0 < lo <= hi <= 1, got {lo}, {hi}")
        if (lo * self.resolution).denominator != 1 or (hi * self.resolution).denominator != 1:
            raise ValueError("lo and hi must be multiples of 1/resolution")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)


@dataclass(frozen=True)
class ConstantDemand:
    """Every HC job demands exactly ``scale * C_i``."""

    scale: Fraction = Fraction(1)

    def __post_init__(self):
        s = as_fraction(self.scale, "scale")
        if not 0 < s <= 1:
            raise ValueError(f"scale must lie in (0, 1], got {s}")
        object.__setattr__(self, "scale", s)


DemandModel = Union[GridDemand, UniformDemand, ConstantDemand]


def _draw_scale(model: DemandModel, rng: np.random.Generator) -> Fraction:
    if isinstance(model, ConstantDemand):
        return model.scale
    if isinstance(model, UniformDemand):
        lo = int(model.lo * model.resolution)
        hi = int(model.hi * model.resolution)
        return Fraction(int(rng.integers(lo, hi, endpoint=True)), model.resolution)
    u = float(rng.random())
    for g, c in zip(model.dist.grid, model.dist.cdf):
        if u <= float(c):
            return g
    return model.dist.grid[-1]


def parse_demand_model(text: str) -> DemandModel:
    """Parse CLI syntax: ``grid``, ``uniform:LO:HI`` or ``constant:S``."""
    parts = text.split(":")
    if parts[0] == "grid" and len(parts) == 1:
        return GridDemand()
    if parts[0] == "uniform" and len(parts) == 3:
        return UniformDemand(Fraction(parts[1]), Fraction(parts[2]))
    if parts[0] == "constant" and len(parts) == 2:
        return ConstantDemand(Fraction(parts[1]))
    raise ValueError(f"unknown demand model {text!r}")


def gen_job_sequence(ts: TaskSet, horizon, demand_model: DemandModel,
                     rng: RngLike, *, jitter=Fraction(0),
                     jitter_resolution: int = 100) -> tuple[Job, ...]:
    """Release jobs for every task over [0, horizon).

    Releases start at 0 and step by the period plus an optional uniform
    jitter in [0, jitter], so separations never undercut the period.  LC
    jobs demand their full WCET; HC jobs demand a scaled WCET according to
    ``demand_model``.  Tasks are processed in task-set order, so one stream
    yields a deterministic sequence.
    """
    horizon = as_fraction(horizon, "horizon")
    jitter = as_fraction(jitter, "jitter")
    if jitter < 0:
        raise ValueError("jitter must be non-negative")
    rng = _coerce_rng(rng)
    jobs: list[Job] = []
    for task in ts.tasks:
        release = Fraction(0)
        seq = 0
        while release < horizon:
            if task.is_hc:
                demand = _draw_scale(demand_model, rng) * task.wcet
            else:
                demand = task.wcet
            jobs.append(Job(task.id, release, demand, seq))
            seq += 1
            step = task.period
            if jitter > 0:
                ticks = int(jitter * jitter_resolution)
                step += Fraction(int(rng.integers(0, ticks, endpoint=True)),
                                 jitter_resolution)
            release += step
    jobs.sort(key=lambda j: (j.release, j.task, j.seq))
    return tuple(jobs)
