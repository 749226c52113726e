"""Offline schedulability analysis and service-level optimization.

The dual-criticality system accepts a pair of service levels: ``alpha_star``
(the utilization-weighted LC service fraction honoured in the degraded mode)
and ``beta_star`` (the share of HC utilization bankrolled while the system is
still nominal).  A pair is admissible when

    (1 - alpha_star) * (1 - beta_star) >= M,   M = (U_H + U_L - 1) / (U_L * U_H)

and the virtual deadline factor ``x`` can be chosen inside a closed interval
derived from the two classic virtual-deadline feasibility conditions.  All
predicates are evaluated in exact rational arithmetic; only the weighted
system-utilization objective is a float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import BudgetExceedsWcet, Infeasible, InvalidFraction, NoLcTasks
from .taskmodel import (
    Criticality,
    McTask,
    TaskSet,
    as_fraction,
    unit_fraction,
    utilizations,
)

# Reported lower bound of the x window is floored at this value so that a
# schedulable verdict always carries a usable x > 0 even when the exact lower
# bound degenerates to zero.
X_EPSILON = Fraction(1, 10**9)

# Weighted-utilization comparisons tolerate this much float noise.
SU_SLACK = 1e-9


@dataclass(frozen=True)
class SchedVerdict:
    """Outcome of the service-level schedulability test.

    Attributes:
        schedulable: True when the pair of service levels is admissible.
        x_lo: Smallest admissible virtual deadline factor (already floored
            at ``X_EPSILON``); 0 marks an empty window.
        x_hi: Largest admissible factor, clamped to 1; 0 marks an empty window.
        M: The criticality trade-off threshold, or None when one criticality
            class is empty and the threshold is undefined.
    """

    schedulable: bool
    x_lo: Fraction
    x_hi: Fraction
    M: Fraction | None


@dataclass(frozen=True)
class StaticMcTask:
    """A task of the derived static dual-criticality system.

    ``lc_wcet`` is the optimistic nominal-mode budget (HC tasks only);
    ``origin`` records which source task this entry was carved from.
    """

    id: int
    period: Fraction
    lc_wcet: Fraction | None
    wcet: Fraction
    criticality: Criticality
    x: Fraction
    origin: int

    def as_mc_task(self) -> McTask:
        return McTask(self.id, self.period, self.wcet, self.criticality,
                      Fraction(0), self.lc_wcet)


def threshold_m(ts: TaskSet) -> Fraction | None:
    """Return M = (U_H + U_L - 1)/(U_L * U_H), or None if a class is empty."""
    u_l, u_h = utilizations(ts)
    if u_l == 0 or u_h == 0:
        return None
    return (u_h + u_l - 1) / (u_l * u_h)


def theorem1_test(ts: TaskSet, alpha_star, beta_star) -> SchedVerdict:
    """Decide whether a service-level pair is admissible and report the x window.

    Args:
        ts: The task set under analysis.
        alpha_star: System LC service level in [0, 1].
        beta_star: Nominal-mode HC bandwidth scale in [0, 1].

    Returns:
        A :class:`SchedVerdict`.  When ``schedulable`` the window satisfies
        0 < x_lo <= x_hi <= 1 and any x inside it gives zero deadline misses
        under the dynamic policy.

    Raises:
        InvalidFraction: if either level lies outside [0, 1].
    """
    a = unit_fraction(alpha_star, "alpha_star")
    b = unit_fraction(beta_star, "beta_star")
    u_l, u_h = utilizations(ts)
    m = threshold_m(ts)
    if m is None:
        # Single-class system: plain EDF feasibility, x unconstrained.
        ok = u_l + u_h <= 1
        if ok:
            return SchedVerdict(True, X_EPSILON, Fraction(1), None)
        return SchedVerdict(False, Fraction(0), Fraction(0), None)

    trade_ok = (1 - a) * (1 - b) >= m

    d_lo = 1 - u_l * (1 - a)
    if d_lo <= 0:
        # The full-service LC share alone saturates the nominal mode.
        return SchedVerdict(False, Fraction(0), Fraction(0), m)
    lower = (b * u_h + a * u_l) / d_lo

    d_hi = (1 - a) * u_l
    if d_hi == 0:
        # alpha_star = 1 leaves no LC work behind original deadlines in the
        # degraded mode; the upper bound is vacuous when that mode fits.
        upper = Fraction(1) if u_h + a * u_l <= 1 else Fraction(0)
    else:
        upper = (1 - u_h - a * u_l) / d_hi

    x_lo = max(lower, X_EPSILON)
    x_hi = min(upper, Fraction(1))
    ok = trade_ok and x_lo <= x_hi
    if not ok:
        return SchedVerdict(False, x_lo if x_lo <= x_hi else Fraction(0),
                            x_hi if x_lo <= x_hi else Fraction(0), m)
    return SchedVerdict(True, x_lo, x_hi, m)


def default_x(verdict: SchedVerdict) -> Fraction:
    """The canonical deadline factor for a schedulable verdict: its x_lo."""
    if not verdict.schedulable:
        raise Infeasible("no admissible x for an unschedulable verdict")
    return verdict.x_lo


def max_alpha_given_beta(ts: TaskSet, beta_star) -> Fraction:
    """Largest admissible alpha_star for a fixed beta_star.

    Returns 1 whenever M <= 0 (the trade-off is slack), otherwise
    clamp(1 - M / (1 - beta_star), 0, 1).

    Raises:
        Infeasible: when M > 0 and beta_star = 1 (no LC service possible).
    """
    b = unit_fraction(beta_star, "beta_star")
    m = threshold_m(ts)
    if m is None:
        u_l, u_h = utilizations(ts)
        return Fraction(1) if u_l + u_h <= 1 else Fraction(0)
    if m <= 0:
        return Fraction(1)
    if b == 1:
        raise Infeasible("beta_star = 1 leaves no slack when M > 0")
    return min(Fraction(1), max(Fraction(0), 1 - m / (1 - b)))


def max_beta_given_alpha(ts: TaskSet, alpha_star) -> Fraction:
    """Largest admissible beta_star for a fixed alpha_star (symmetric case)."""
    a = unit_fraction(alpha_star, "alpha_star")
    m = threshold_m(ts)
    if m is None:
        u_l, u_h = utilizations(ts)
        return Fraction(1) if u_l + u_h <= 1 else Fraction(0)
    if m <= 0:
        return Fraction(1)
    if a == 1:
        raise Infeasible("alpha_star = 1 leaves no slack when M > 0")
    return min(Fraction(1), max(Fraction(0), 1 - m / (1 - a)))


def su_levels(ts: TaskSet, alpha_star, beta_star) -> tuple[Fraction, Fraction]:
    """Per-mode system utilizations delivered by a service-level pair.

    Returns:
        (SU_L, SU_H) where SU_L = beta_star * U_H + U_L is the nominal-mode
        utilization and SU_H = alpha_star * U_L + U_H the degraded-mode one.
    """
    a = unit_fraction(alpha_star, "alpha_star")
    b = unit_fraction(beta_star, "beta_star")
    u_l, u_h = utilizations(ts)
    return b * u_h + u_l, a * u_l + u_h


def _su_weighted(u_l: Fraction, u_h: Fraction, w: float, beta: Fraction,
                 m: Fraction | None) -> float:
    """Weighted utilization w * SU_L + (1 - w) * SU_H at the best alpha_star."""
    if m is None or m <= 0:
        # alpha_star saturates at 1 regardless of beta.
        return w * float(beta * u_h + u_l) + (1.0 - w) * float(u_l + u_h)
    return (
        float(u_h) * (1.0 - w)
        + float(u_l)
        + float(u_h) * w * float(beta)
        - float(u_l) * (1.0 - w) * float(m) / (1.0 - float(beta))
    )


def total_system_utilization(ts: TaskSet, w: float, beta_star) -> float:
    """Weighted system utilization w * SU_L + (1 - w) * SU_H for a beta choice.

    The LC service level is set to the largest value admissible at
    ``beta_star``.  ``w`` expresses how much the nominal mode is worth
    relative to the degraded mode and may be any float in [0, 1].

    Raises:
        Infeasible: when M > 0 and beta_star exceeds 1 - M (no admissible
            alpha_star exists).
    """
    if not 0.0 <= w <= 1.0:
        raise InvalidFraction(f"w must lie in [0, 1], got {w}")
    b = unit_fraction(beta_star if not isinstance(beta_star, float) else Fraction(beta_star),
                      "beta_star")
    u_l, u_h = utilizations(ts)
    m = threshold_m(ts)
    if m is not None and m > 0 and float(b) > float(1 - m) + SU_SLACK:
        raise Infeasible(f"beta_star {b} exceeds 1 - M = {1 - m}")
    return _su_weighted(u_l, u_h, w, b, m)


def optimal_beta_for_su(ts: TaskSet, w: float) -> float:
    """The beta_star that maximizes the weighted system utilization.

    Closed form: for M > 0 and 0 < w < 1 the objective is concave in beta
    with the interior optimum 1 - sqrt(M * (1 - w) * U_L / (w * U_H)),
    clamped into [0, 1 - M].  For w = 0 any beta spends bandwidth the
    objective never rewards, so 0; for w = 1 the degraded mode has no weight
    and the cap 1 - M is optimal.  When M <= 0 the trade-off is slack and
    beta = 1 dominates.
    """
    if not 0.0 <= w <= 1.0:
        raise InvalidFraction(f"w must lie in [0, 1], got {w}")
    u_l, u_h = utilizations(ts)
    m = threshold_m(ts)
    if m is None or m <= 0:
        return 1.0
    cap = float(1 - m)
    if cap <= 0.0:
        return 0.0
    if w == 0.0:
        return 0.0
    if w == 1.0:
        return cap
    inner = 1.0 - math.sqrt(float(m) * (1.0 - w) * float(u_l) / (w * float(u_h)))
    return max(0.0, min(cap, inner))


def static_model_su(ts: TaskSet, w: float) -> float:
    """Weighted system utilization of the static baseline design.

    The baseline fixes nominal HC budgets offline at the largest uniform
    scale the classic virtual-deadline test still admits at full LC service,
    which evaluates to

        SU(w) = w * U_L + w * (1 - U_L) * (1 - U_H) / U_L + (1 - w) * U_H.

    Raises:
        NoLcTasks: if the set has no LC tasks (the baseline divides by U_L).
    """
    if not 0.0 <= w <= 1.0:
        raise InvalidFraction(f"w must lie in [0, 1], got {w}")
    u_l, u_h = utilizations(ts)
    if u_l == 0:
        raise NoLcTasks("static baseline utilization needs LC tasks")
    return (
        w * float(u_l)
        + w * float((1 - u_l) * (1 - u_h)) / float(u_l)
        + (1.0 - w) * float(u_h)
    )


def map_to_static(ts: TaskSet, alphas, e_m, x) -> list[StaticMcTask]:
    """Re-express the dynamic system as a static dual-criticality task set.

    Every LC task tau_i splits into an HC part carrying the guaranteed
    alpha_i * C_i (full and optimistic budgets coincide) and an LC part
    carrying the remainder (1 - alpha_i) * C_i.  Every HC task keeps its
    WCET and adopts its recorded execution maximum e_m[i] as the optimistic
    budget.  Parts with zero execution are omitted.  Derived ids are
    2 * origin for the primary part and 2 * origin + 1 for the remainder,
    which preserves the original tie-break order.

    Args:
        ts: Source task set.
        alphas: Mapping of LC task id to alpha_i; None falls back to each
            task's own ``alpha`` attribute.
        e_m: Mapping of HC task id to its execution maximum (missing = 0).
        x: Virtual deadline factor forwarded to every derived task.

    Raises:
        BudgetExceedsWcet: if some e_m[i] exceeds the task's WCET.
    """
    x = as_fraction(x, "x")
    out: list[StaticMcTask] = []
    for t in ts.tasks:
        if t.is_lc:
            a = unit_fraction(alphas[t.id] if alphas is not None else t.alpha, "alpha")
            guaranteed = a * t.wcet
            if guaranteed > 0:
                out.append(StaticMcTask(2 * t.id, t.period, guaranteed, guaranteed,
                                        Criticality.HC, x, t.id))
            rest = t.wcet - guaranteed
            if rest > 0:
                out.append(StaticMcTask(2 * t.id + 1, t.period, None, rest,
                                        Criticality.LC, x, t.id))
        else:
            est = as_fraction(e_m.get(t.id, Fraction(0)) if e_m is not None else Fraction(0),
                              "e_m")
            if est > t.wcet:
                raise BudgetExceedsWcet(
                    f"task {t.id}: execution maximum {est} exceeds wcet {t.wcet}")
            out.append(StaticMcTask(2 * t.id, t.period, est, t.wcet,
                                    Criticality.HC, x, t.id))
    return out
