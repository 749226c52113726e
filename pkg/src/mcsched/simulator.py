"""Deterministic discrete-event simulation of dual-criticality EDF policies.

Three preemptive uniprocessor policies share one event loop:

* ``EdfUvdMeba``: in the nominal mode every task runs against a shrunk
  virtual deadline ``r + x * T``; an LC job falls back to its original
  deadline once it has executed ``alpha_i * C_i``.  HC budgets are granted
  dynamically from a shared pool (:mod:`mcsched.meba`) and an exhaustion
  degrades the system for the rest of the busy interval.  In the degraded
  mode LC service is capped at ``alpha_i * C_i`` per job.
* ``EdfVdStatic``: the classic static baseline.  Only HC tasks get virtual
  deadlines; per-job nominal budgets are the fixed ``lc_estimate`` values;
  at a degradation all pending LC jobs are discarded and LC releases are
  rejected until the processor idles.
* ``FixedBudget``: identical scheduling to ``EdfUvdMeba`` but with a constant
  per-job budget vector instead of the dynamic pool, which isolates the
  effect of the allocation policy on the degradation instant.

Ties between equal effective deadlines are broken by (task id, job sequence
number).  A processor idle instant ends the busy interval and returns the
system to the nominal mode in every policy.  All event times are exact
rationals, so traces are reproducible bit for bit.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .errors import BudgetSumViolation, InvalidJobSequence
from .meba import MebaState, Mode
from .taskmodel import (
    Criticality,
    McTask,
    TaskSet,
    Time,
    as_fraction,
    utilizations,
)
from .analysis import map_to_static


class EventKind(enum.Enum):
    DISPATCH = "dispatch"
    PREEMPT = "preempt"
    COMPLETE = "complete"
    DEADLINE_CHANGE = "deadline_change"
    MODE_SWITCH = "mode_switch"
    IDLE = "idle"
    DROP = "drop"


@dataclass(frozen=True)
class Job:
    """One released job: task id, release instant, execution demand, index."""

    task: int
    release: Time
    demand: Time
    seq: int


def make_jobs(entries: Iterable[tuple]) -> tuple[Job, ...]:
    """Build a job tuple from (task, release, demand) triples.

    Sequence numbers are assigned per task in release order.
    """
    counters: dict[int, int] = {}
    jobs = []
    for task, release, demand in sorted(
        ((t, as_fraction(r, "release"), as_fraction(d, "demand")) for t, r, d in entries),
        key=lambda e: (e[1], e[0]),
    ):
        seq = counters.get(task, 0)
        counters[task] = seq + 1
        jobs.append(Job(task, release, demand, seq))
    return tuple(jobs)


@dataclass(frozen=True)
class TraceEvent:
    """One scheduling event; ``snapshot`` carries execution maxima at a switch."""

    time: Time
    kind: EventKind
    task: int | None = None
    job: int | None = None
    detail: str = ""
    snapshot: tuple[tuple[int, Time], ...] | None = None


@dataclass(frozen=True)
class EdfUvdMeba:
    beta_star: Fraction

    def __post_init__(self):
        object.__setattr__(self, "beta_star", as_fraction(self.beta_star, "beta_star"))


@dataclass(frozen=True)
class EdfVdStatic:
    pass


@dataclass(frozen=True)
class FixedBudget:
    budgets: tuple[tuple[int, Time], ...]

    def __init__(self, budgets):
        if isinstance(budgets, Mapping):
            items = tuple(sorted((int(k), as_fraction(v, "budget")) for k, v in budgets.items()))
        else:
            items = tuple(sorted((int(k), as_fraction(v, "budget")) for k, v in budgets))
        object.__setattr__(self, "budgets", items)

    def budget_of(self, task_id: int) -> Time:
        for tid, b in self.budgets:
            if tid == task_id:
                return b
        return Fraction(0)


Policy = Union[EdfUvdMeba, EdfVdStatic, FixedBudget]


@dataclass(frozen=True)
class SimConfig:
    """Simulation parameters.

    ``x`` is the virtual deadline factor; for the dynamic policy it should
    lie inside the admissible window reported by the analysis for the
    guarantee to hold (not enforced here so that counterexamples can be
    simulated too).  ``horizon`` bounds verification, not the run itself.
    ``demand_model`` records how generated sequences drew their demands.
    """

    policy: Policy
    x: Fraction
    horizon: Time | None = None
    demand_model: object | None = None

    def __post_init__(self):
        x = as_fraction(self.x, "x")
        if not 0 < x <= 1:
            raise ValueError(f"x must lie in (0, 1], got {x}")
        object.__setattr__(self, "x", x)
        if self.horizon is not None:
            object.__setattr__(self, "horizon", as_fraction(self.horizon, "horizon"))


@dataclass(frozen=True)
class ScheduleTrace:
    """Event list plus the job sequence it was produced from."""

    events: tuple[TraceEvent, ...]
    jobs: tuple[Job, ...]
    horizon: Time | None = None

    def mode_switches(self) -> tuple[Time, ...]:
        return tuple(e.time for e in self.events if e.kind is EventKind.MODE_SWITCH)

    def service_segments(self) -> dict[tuple[int, int], list[tuple[Time, Time]]]:
        """Per-job execution segments [(start, end), ...], zero-length removed."""
        open_at: dict[tuple[int, int], Time] = {}
        segs: dict[tuple[int, int], list[tuple[Time, Time]]] = {
            (j.task, j.seq): [] for j in self.jobs
        }
        for ev in self.events:
            if ev.task is None or ev.job is None:
                continue
            key = (ev.task, ev.job)
            if ev.kind is EventKind.DISPATCH:
                open_at[key] = ev.time
            elif ev.kind in (EventKind.PREEMPT, EventKind.COMPLETE, EventKind.DROP):
                start = open_at.pop(key, None)
                if start is not None and ev.time > start:
                    segs[key].append((start, ev.time))
        return segs

    def served_by(self, segments: Sequence[tuple[Time, Time]], t: Time) -> Time:
        total = Fraction(0)
        for s, e in segments:
            if s >= t:
                break
            total += min(e, t) - s
        return total

    def write_csv(self, path) -> None:
        save_trace_csv(self, path)


def mode_switch_instant(trace: ScheduleTrace) -> Time | None:
    """Time of the first degradation in the trace, or None."""
    for ev in trace.events:
        if ev.kind is EventKind.MODE_SWITCH:
            return ev.time
    return None


def validate_jobs(ts: TaskSet, jobs: Sequence[Job]) -> None:
    """Check sporadic separation and demand bounds.

    Raises:
        InvalidJobSequence: on unknown task ids, non-positive or excessive
            demands, or consecutive releases closer than the task period.
    """
    tasks = {t.id: t for t in ts.tasks}
    last_release: dict[int, Time] = {}
    by_task: dict[int, list[Job]] = {}
    for job in sorted(jobs, key=lambda j: (j.release, j.task, j.seq)):
        task = tasks.get(job.task)
        if task is None:
            raise InvalidJobSequence(f"job references unknown task {job.task}")
        if not 0 < job.demand <= task.wcet:
            raise InvalidJobSequence(
                f"task {job.task} job {job.seq}: demand {job.demand} outside (0, {task.wcet}]")
        if job.release < 0:
            raise InvalidJobSequence(f"task {job.task} job {job.seq}: negative release")
        prev = last_release.get(job.task)
        if prev is not None and job.release - prev < task.period:
            raise InvalidJobSequence(
                f"task {job.task}: releases {prev} and {job.release} closer than T={task.period}")
        last_release[job.task] = job.release
        by_task.setdefault(job.task, []).append(job)
    for task_jobs in by_task.values():
        seqs = [j.seq for j in task_jobs]
        if seqs != list(range(len(seqs))):
            raise InvalidJobSequence("job sequence numbers must count releases from 0")


class _Run:
    """Mutable per-job execution state inside the simulator."""

    __slots__ = ("job", "task", "deadline", "eff", "consumed", "limit", "cap",
                 "demoted", "budget")

    def __init__(self, job: Job, task: McTask):
        self.job = job
        self.task = task
        self.deadline = job.release + task.period
        self.eff = self.deadline
        self.consumed = Fraction(0)
        self.limit = job.demand
        self.cap = task.alpha * task.wcet if task.is_lc else None
        self.demoted = False
        self.budget: Time | None = None


def _prio(run: _Run) -> tuple:
    return (run.eff, run.task.id, run.job.seq)


def simulate(ts: TaskSet, cfg: SimConfig, jobs: Sequence[Job], *,
             stop_after_switch: bool = False) -> ScheduleTrace:
    """Run one policy over a job sequence and return the event trace.

    The run always executes every job to its service limit (there is no
    horizon cutoff), so traces from overloaded scenarios terminate too.

    Args:
        ts: Task set; LC tasks contribute their ``alpha`` caps, HC tasks
            their budgets (policy dependent).
        cfg: Policy, deadline factor and optional verification horizon.
        jobs: Released jobs; validated for sporadic separation first.
        stop_after_switch: Stop right after the first degradation (used by
            callers that only need the switch instant).

    Raises:
        InvalidJobSequence: from :func:`validate_jobs`.
        ValueError: if the static policy misses an ``lc_estimate``.
    """
    ordered = tuple(sorted(jobs, key=lambda j: (j.release, j.task, j.seq)))
    validate_jobs(ts, ordered)
    tasks = {t.id: t for t in ts.tasks}
    policy = cfg.policy
    x = cfg.x
    uvd = isinstance(policy, EdfUvdMeba)
    static = isinstance(policy, EdfVdStatic)
    fixed = isinstance(policy, FixedBudget)
    if static:
        for t in ts.hc_tasks:
            if t.lc_estimate is None:
                raise ValueError(f"static policy needs lc_estimate on HC task {t.id}")
    meba = MebaState.for_taskset(ts, policy.beta_star) if uvd else None

    events: list[TraceEvent] = []
    mode = Mode.LC
    ready: list[_Run] = []
    running: _Run | None = None
    busy = False
    i = 0
    now = ordered[0].release if ordered else Fraction(0)
    stop = False

    def emit(kind, t, run: _Run | None = None, detail: str = "", snapshot=None):
        events.append(TraceEvent(
            t, kind,
            run.task.id if run is not None else None,
            run.job.seq if run is not None else None,
            detail, snapshot))

    def admit(job: Job):
        task = tasks[job.task]
        run = _Run(job, task)
        if task.is_lc:
            if mode is Mode.HC:
                if static or run.cap == 0:
                    # No nominal service left to honour; reject outright.
                    emit(EventKind.DROP, now, run, detail="served=0")
                    return
                run.limit = min(job.demand, run.cap)
                run.demoted = True
            else:
                if not static and task.alpha > 0:
                    run.eff = job.release + x * task.period
                else:
                    run.demoted = True
        else:
            if mode is Mode.LC:
                run.eff = job.release + x * task.period
            if static:
                run.budget = task.lc_estimate
            elif fixed:
                run.budget = policy.budget_of(task.id)
        ready.append(run)

    def degrade(t: Time, trigger: _Run):
        nonlocal mode
        if uvd:
            info = meba.on_budget_exhausted(trigger.task.id, t)
            snapshot = tuple(sorted(info.e_m.items()))
        else:
            snapshot = None
        emit(EventKind.MODE_SWITCH, t, trigger,
             detail=f"trigger={trigger.task.id}", snapshot=snapshot)
        mode = Mode.HC
        for run in list(ready):
            run.eff = run.deadline
            run.budget = None if run.task.is_hc else run.budget
            if run.task.is_lc:
                if static:
                    emit(EventKind.DROP, t, run, detail=f"served={run.consumed}")
                    ready.remove(run)
                elif run.consumed >= run.cap:
                    emit(EventKind.DROP, t, run, detail=f"served={run.consumed}")
                    ready.remove(run)
                else:
                    run.limit = min(run.limit, run.cap)

    while True:
        while i < len(ordered) and ordered[i].release == now:
            admit(ordered[i])
            i += 1
        nxt = min(ready, key=_prio) if ready else None
        if nxt is None:
            if busy:
                emit(EventKind.IDLE, now)
                busy = False
                if meba is not None:
                    meba.on_idle()
                mode = Mode.LC
            if i >= len(ordered) or stop:
                break
            now = ordered[i].release
            continue
        if stop:
            break
        busy = True
        if nxt is not running:
            if running is not None:
                emit(EventKind.PREEMPT, now, running)
                if uvd and mode is Mode.LC and running.task.is_hc:
                    meba.on_preempt_or_complete(running.task.id, running.consumed)
            running = nxt
            emit(EventKind.DISPATCH, now, running)
            if mode is Mode.LC and running.task.is_hc:
                if uvd:
                    running.budget = meba.on_dispatch(running.task.id)
                if running.budget is not None and running.budget <= running.consumed:
                    # Nothing left to grant an incomplete job: degrade now.
                    degrade(now, running)
                    if stop_after_switch:
                        stop = True
                    continue

        rem = running.limit - running.consumed
        t_next = now + rem
        action = "finish"
        if mode is Mode.LC and running.task.is_hc and running.budget is not None:
            t_budget = now + (running.budget - running.consumed)
            if t_budget < t_next:
                t_next, action = t_budget, "degrade"
        if (mode is Mode.LC and running.task.is_lc and not running.demoted
                and running.cap < running.limit):
            t_cap = now + (running.cap - running.consumed)
            if t_cap < t_next:
                t_next, action = t_cap, "demote"
        if i < len(ordered) and ordered[i].release < t_next:
            t_next, action = ordered[i].release, "release"

        running.consumed += t_next - now
        now = t_next
        if action == "finish":
            if running.consumed == running.job.demand:
                emit(EventKind.COMPLETE, now, running)
            else:
                emit(EventKind.DROP, now, running, detail=f"served={running.consumed}")
            if uvd and mode is Mode.LC and running.task.is_hc:
                meba.on_preempt_or_complete(running.task.id, running.consumed)
            ready.remove(running)
            running = None
        elif action == "degrade":
            degrade(now, running)
            if stop_after_switch:
                stop = True
        elif action == "demote":
            running.demoted = True
            running.eff = running.deadline
            emit(EventKind.DEADLINE_CHANGE, now, running,
                 detail=f"deadline={running.deadline}")
        # "release" falls through; the loop head admits it.

    return ScheduleTrace(tuple(events), ordered, cfg.horizon)


@dataclass(frozen=True)
class Violation:
    task: int
    seq: int
    deadline: Time
    required: Time
    received: Time
    reason: str


def _mode_timeline(trace: ScheduleTrace) -> list[tuple[Time, Mode]]:
    timeline = []
    for ev in trace.events:
        if ev.kind is EventKind.MODE_SWITCH:
            timeline.append((ev.time, Mode.HC))
        elif ev.kind is EventKind.IDLE:
            timeline.append((ev.time, Mode.LC))
    return timeline


def _mode_at(timeline: Sequence[tuple[Time, Mode]], t: Time) -> Mode:
    mode = Mode.LC
    for when, m in timeline:
        if when <= t:
            mode = m
        else:
            break
    return mode


def verify_mc_schedulable(ts: TaskSet, cfg: SimConfig, trace: ScheduleTrace
                          ) -> tuple[bool, list[Violation]]:
    """Check the dual-criticality service obligations against a trace.

    For every job with a deadline inside the horizon:

    * HC jobs must receive their full demand by the deadline.
    * LC jobs untouched by degradation must receive their full demand by
      the deadline.
    * LC jobs hit by a degradation (one fires inside their release-to-
      deadline window, or they are released while the system is already
      degraded) owe only ``min(demand, alpha_i * C_i)``.

    An empty trace is vacuously schedulable.  Returns (ok, violations).
    """
    tasks = {t.id: t for t in ts.tasks}
    segs = trace.service_segments()
    timeline = _mode_timeline(trace)
    switch_times = [ev.time for ev in trace.events
                    if ev.kind is EventKind.MODE_SWITCH]
    horizon = cfg.horizon
    violations: list[Violation] = []
    for job in trace.jobs:
        task = tasks[job.task]
        deadline = job.release + task.period
        if horizon is not None and deadline > horizon:
            continue
        served = trace.served_by(segs[(job.task, job.seq)], deadline)
        degraded = (any(job.release <= t <= deadline for t in switch_times)
                    or _mode_at(timeline, job.release) is Mode.HC)
        if task.is_hc:
            required = job.demand
            reason = "hc_full_service"
        elif not degraded:
            required = job.demand
            reason = "lc_nominal_service"
        else:
            required = min(job.demand, task.alpha * task.wcet)
            reason = "lc_degraded_service"
        if served < required:
            violations.append(Violation(job.task, job.seq, deadline,
                                        required, served, reason))
    return (not violations), violations


def pool_utilization_violations(ts: TaskSet, beta_star, trace: ScheduleTrace
                                ) -> list[str]:
    """Replay a dynamic-policy trace and audit the budget pool accounting.

    Independent of :class:`MebaState`: per-task execution maxima are
    recomputed from the dispatch segments alone.  Within each busy interval,
    at every event instant up to a degradation the maxima utilization must
    stay at or below ``beta_star * U_H``; at the degradation instant it must
    equal the pool exactly and the triggering job must be incomplete.

    Returns a list of human-readable discrepancies (empty = clean).
    """
    beta = as_fraction(beta_star, "beta_star")
    _, u_h = utilizations(ts)
    pool = beta * u_h
    tasks = {t.id: t for t in ts.tasks}
    segs = trace.service_segments()
    demands = {(j.task, j.seq): j.demand for j in trace.jobs}
    problems: list[str] = []

    def maxima_utilization(start: Time, t: Time) -> Fraction:
        per_task: dict[int, Fraction] = {}
        for (task_id, _seq), job_segs in segs.items():
            if not tasks[task_id].is_hc:
                continue
            consumed = Fraction(0)
            for s, e in job_segs:
                if s < start or s >= t:
                    continue
                consumed += min(e, t) - s
            if consumed > per_task.get(task_id, Fraction(0)):
                per_task[task_id] = consumed
        return sum((v / tasks[tid].period for tid, v in per_task.items()), Fraction(0))

    interval_start = Fraction(0)
    switched = False
    for ev in trace.events:
        if ev.kind is EventKind.IDLE:
            interval_start = ev.time
            switched = False
            continue
        if switched:
            continue
        total = maxima_utilization(interval_start, ev.time)
        if ev.kind is EventKind.MODE_SWITCH:
            if total != pool:
                problems.append(
                    f"t*={ev.time}: maxima utilization {total} != pool {pool}")
            key = (ev.task, ev.job)
            if key in demands and trace.served_by(segs[key], ev.time) >= demands[key]:
                problems.append(f"t*={ev.time}: triggering job already complete")
            switched = True
        elif total > pool:
            problems.append(
                f"t={ev.time}: maxima utilization {total} > pool {pool}")
    return problems


def edf_dispatch_violations(ts: TaskSet, cfg: SimConfig, trace: ScheduleTrace
                            ) -> list[str]:
    """Check that every dispatch picked a minimal effective deadline.

    Effective deadlines are reconstructed from the trace alone (admission
    rules, deadline-change events and the degradation instant), so this is
    an independent audit of the scheduler's priority order.
    """
    tasks = {t.id: t for t in ts.tasks}
    static = isinstance(cfg.policy, EdfVdStatic)
    segs = trace.service_segments()
    timeline = _mode_timeline(trace)

    closed_at: dict[tuple[int, int], Time] = {}
    demote_at: dict[tuple[int, int], Time] = {}
    dropped_at: dict[tuple[int, int], Time] = {}
    for ev in trace.events:
        if ev.task is None:
            continue
        key = (ev.task, ev.job)
        if ev.kind in (EventKind.COMPLETE, EventKind.DROP):
            closed_at[key] = ev.time
            if ev.kind is EventKind.DROP:
                dropped_at[key] = ev.time
        elif ev.kind is EventKind.DEADLINE_CHANGE:
            demote_at[key] = ev.time

    def eff_at(job: Job, t: Time) -> Fraction:
        task = tasks[job.task]
        deadline = job.release + task.period
        release_mode = _mode_at(timeline, job.release)
        virtual = job.release + cfg.x * task.period
        if task.is_hc:
            base = virtual if release_mode is Mode.LC else deadline
        else:
            if static or task.alpha == 0:
                base = deadline
            elif release_mode is Mode.HC:
                base = deadline
            else:
                base = virtual
        key = (job.task, job.seq)
        if key in demote_at and t >= demote_at[key]:
            base = deadline
        if _mode_at(timeline, t) is Mode.HC:
            base = deadline
        return base

    problems = []
    for ev in trace.events:
        if ev.kind is not EventKind.DISPATCH:
            continue
        t = ev.time
        chosen = None
        candidates = []
        for job in trace.jobs:
            key = (job.task, job.seq)
            if job.release > t:
                continue
            if key in closed_at and closed_at[key] <= t and key != (ev.task, ev.job):
                continue
            candidates.append((eff_at(job, t), job.task, job.seq))
            if key == (ev.task, ev.job):
                chosen = (eff_at(job, t), job.task, job.seq)
        if chosen is None:
            problems.append(f"t={t}: dispatched job not in sequence")
            continue
        best = min(candidates)
        if chosen > best:
            problems.append(
                f"t={t}: dispatched {chosen} but {best} was ready")
    return problems


def check_lemma2_optimality(ts: TaskSet, beta_star, jobs: Sequence[Job],
                            budget_vectors: Sequence[Mapping[int, Time]], *,
                            x: Fraction = Fraction(1)) -> bool:
    """Compare the dynamic allocation against fixed feasible budget vectors.

    Every vector must reserve at most the pool: sum(B_i / T_i) <= beta_star
    * U_H.  For each one, the fixed-budget run must degrade no later than
    the dynamic run does (treating "never" as +infinity).

    Returns:
        True iff the dynamic policy's degradation instant is maximal.

    Raises:
        BudgetSumViolation: if a vector over-reserves the pool.
    """
    beta = as_fraction(beta_star, "beta_star")
    _, u_h = utilizations(ts)
    pool = beta * u_h
    hc_ids = {t.id for t in ts.hc_tasks}
    for vec in budget_vectors:
        total = Fraction(0)
        for tid, b in vec.items():
            if tid not in hc_ids:
                raise BudgetSumViolation(f"budget names non-HC task {tid}")
            total += as_fraction(b, "budget") / ts.task(tid).period
        if total > pool:
            raise BudgetSumViolation(f"vector utilization {total} > pool {pool}")

    cfg = SimConfig(EdfUvdMeba(beta), x)
    t_dyn = mode_switch_instant(simulate(ts, cfg, jobs, stop_after_switch=True))
    for vec in budget_vectors:
        fixed_cfg = SimConfig(FixedBudget(vec), x)
        t_fix = mode_switch_instant(simulate(ts, fixed_cfg, jobs, stop_after_switch=True))
        if t_dyn is None:
            continue  # +infinity dominates everything
        if t_fix is None or t_fix > t_dyn:
            return False
    return True


def _occupancy(trace: ScheduleTrace, origin_of: Mapping[int, int],
               until: Time | None) -> dict[int, tuple[tuple[Time, Time], ...]]:
    """Merged busy segments per original task, truncated at ``until``."""
    per_task: dict[int, list[tuple[Time, Time]]] = {}
    for (task_id, _seq), segments in trace.service_segments().items():
        origin = origin_of.get(task_id, task_id)
        for s, e in segments:
            if until is not None:
                if s >= until:
                    continue
                e = min(e, until)
            if e > s:
                per_task.setdefault(origin, []).append((s, e))
    merged: dict[int, tuple[tuple[Time, Time], ...]] = {}
    for origin, segments in per_task.items():
        segments.sort()
        out = [segments[0]]
        for s, e in segments[1:]:
            ls, le = out[-1]
            if s <= le:
                out[-1] = (ls, max(le, e))
            else:
                out.append((s, e))
        merged[origin] = tuple(out)
    return merged


def map_jobs_to_static(ts: TaskSet, jobs: Sequence[Job], t_star: Time | None
                       ) -> tuple[tuple[Job, ...], dict[tuple[int, int], tuple[int, int]]]:
    """Split a job sequence along the static task derivation.

    HC jobs keep their demand on the derived task ``2 * task``.  An LC job
    released while the system was still nominal splits into a guaranteed
    head ``min(demand, alpha * C)`` on ``2 * task`` and the remainder on
    ``2 * task + 1``; a job released at or after the degradation only keeps
    its capped head.  Zero-demand parts are omitted and sequence numbers are
    renumbered per derived task.

    Returns:
        (mapped jobs, back-reference from mapped (task, seq) to the original).
    """
    tasks = {t.id: t for t in ts.tasks}
    entries: list[tuple[int, Time, Time, int]] = []
    for job in jobs:
        task = tasks[job.task]
        if task.is_hc:
            entries.append((2 * job.task, job.release, job.demand, job.seq))
            continue
        cap = task.alpha * task.wcet
        head = min(job.demand, cap)
        if head > 0:
            entries.append((2 * job.task, job.release, head, job.seq))
        if t_star is None or job.release < t_star:
            tail = job.demand - head
            if tail > 0:
                entries.append((2 * job.task + 1, job.release, tail, job.seq))
    mapped: list[Job] = []
    back: dict[tuple[int, int], tuple[int, int]] = {}
    counters: dict[int, int] = {}
    for sid, release, demand, orig_seq in sorted(entries, key=lambda m: (m[1], m[0])):
        seq = counters.get(sid, 0)
        counters[sid] = seq + 1
        mapped.append(Job(sid, release, demand, seq))
        back[(sid, seq)] = (sid // 2, orig_seq)
    return tuple(mapped), back


def check_mapping_equivalence(ts: TaskSet, alphas, x, jobs: Sequence[Job], *,
                              beta_star) -> bool:
    """Validate the reduction of the dynamic system to a static one.

    Runs the dynamic policy, snapshots the execution maxima at its first
    degradation, derives the static task set via
    :func:`mcsched.analysis.map_to_static`, splits each job along the
    derivation and replays the identical scenario under the static policy.
    Equivalence requires the same degradation instant and identical
    per-original-task busy segments up to the end of the busy interval
    containing the switch (the static budgets are a snapshot of that
    interval, so later intervals are allowed to diverge).  Runs without a
    degradation are compared over the whole horizon using per-task global
    execution maxima.
    """
    x = as_fraction(x, "x")
    ts_dyn = ts.with_alphas(dict(alphas)) if alphas is not None else ts
    cfg_dyn = SimConfig(EdfUvdMeba(as_fraction(beta_star, "beta_star")), x)
    trace_dyn = simulate(ts_dyn, cfg_dyn, jobs)
    t_star = mode_switch_instant(trace_dyn)
    tasks = {t.id: t for t in ts_dyn.tasks}

    if t_star is not None:
        switch_ev = next(ev for ev in trace_dyn.events
                         if ev.kind is EventKind.MODE_SWITCH)
        e_m = {tid: val for tid, val in (switch_ev.snapshot or ())}
    else:
        # Every job ran to completion within its budget; the global per-task
        # maximum is a sound static budget for every busy interval.
        e_m = {t.id: Fraction(0) for t in ts_dyn.hc_tasks}
        for (task_id, _seq), segments in trace_dyn.service_segments().items():
            if tasks[task_id].is_hc:
                consumed = sum((e - s for s, e in segments), Fraction(0))
                e_m[task_id] = max(e_m[task_id], consumed)

    per_task_alpha = {t.id: t.alpha for t in ts_dyn.lc_tasks}
    derived = map_to_static(ts_dyn, per_task_alpha, e_m, x)
    origin_of = {st.id: st.origin for st in derived}
    ts_static = TaskSet(tuple(st.as_mc_task() for st in derived))
    mapped_jobs, _back = map_jobs_to_static(ts_dyn, trace_dyn.jobs, t_star)

    cfg_static = SimConfig(EdfVdStatic(), x)
    trace_static = simulate(ts_static, cfg_static, mapped_jobs)
    if mode_switch_instant(trace_static) != t_star:
        return False

    until = None
    if t_star is not None:
        until = next((ev.time for ev in trace_dyn.events
                      if ev.kind is EventKind.IDLE and ev.time >= t_star), None)
    occ_dyn = _occupancy(trace_dyn, {}, until)
    occ_static = _occupancy(trace_static, origin_of, until)
    return occ_dyn == occ_static


def load_jobs_csv(path) -> tuple[Job, ...]:
    """Read jobs from CSV columns ``task,release,demand``."""
    entries = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(row for row in fh if not row.startswith("#"))
        for row in reader:
            entries.append((int(row["task"]), Fraction(row["release"]),
                            Fraction(row["demand"])))
    return make_jobs(entries)


def save_jobs_csv(jobs: Sequence[Job], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["task", "release", "demand"])
        for job in jobs:
            writer.writerow([job.task, str(job.release), str(job.demand)])


def save_trace_csv(trace: ScheduleTrace, path) -> None:
    """Write events to CSV columns ``time,event,task,job,detail``."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "event", "task", "job", "detail"])
        for ev in trace.events:
            detail = ev.detail
            if ev.snapshot is not None:
                packed = ",".join(f"{tid}:{val}" for tid, val in ev.snapshot)
                detail = f"{detail};e_m={packed}" if detail else f"e_m={packed}"
            writer.writerow([
                str(ev.time), ev.kind.value,
                "" if ev.task is None else ev.task,
                "" if ev.job is None else ev.job,
                detail,
            ])
