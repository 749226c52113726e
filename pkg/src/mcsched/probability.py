"""Mode-switch probabilities under discretized execution-scale distributions.

Job execution demands are modelled as ``s * C_i`` with the scale ``s`` drawn
from a distribution supported on a finite grid (0.1, 0.2, ..., 1.0 for the
bundled example).  Two designs are compared:

* static per-task budgets ``beta_i * C_i``: the busy interval survives iff
  every task's scale lands at or below its budget scale, so with identical
  budgets ``P = cdf(floor(beta))**n``;
* one dynamic pool: the interval survives iff the utilization-weighted
  scales fit the pool, ``sum(s_i * u_i) <= beta_star * sum(u_i)``.

Both evaluations are exact over rationals; only the final probability is
returned as a float.  Two independent algorithms (half-enumeration with
prefix sums, and a pruned lattice convolution) must agree exactly and are
both exposed for cross-checking.
"""

from __future__ import annotations

import bisect
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import GridOverflow, InvalidFraction
from .taskmodel import as_fraction, unit_fraction


@dataclass(frozen=True)
class ExecDistribution:
    """A discrete execution-scale distribution given by its CDF on a grid.

    ``grid`` must be strictly increasing within (0, 1]; ``cdf`` must be
    non-decreasing, end at exactly 1, and assign positive mass overall.
    """

    grid: tuple[Fraction, ...]
    cdf: tuple[Fraction, ...]

    def __post_init__(self):
        grid = tuple(as_fraction(g, "grid point") for g in self.grid)
        cdf = tuple(unit_fraction(c, "cdf value") for c in self.cdf)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "cdf", cdf)
        if not grid or len(grid) != len(cdf):
            raise ValueError("grid and cdf must be equal-length and non-empty")
        if any(not 0 < g <= 1 for g in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("grid must be strictly increasing within (0, 1]")
        if any(b < a for a, b in zip(cdf, cdf[1:])):
            raise ValueError("cdf must be non-decreasing")
        if cdf[-1] != 1:
            raise ValueError("cdf must reach exactly 1")

    @property
    def pmf(self) -> tuple[Fraction, ...]:
        prev = Fraction(0)
        out = []
        for c in self.cdf:
            out.append(c - prev)
            prev = c
        return tuple(out)

    def cdf_at(self, scale) -> Fraction:
        """P(s <= scale): the CDF at the largest grid point not above ``scale``."""
        s = as_fraction(scale, "scale")
        best = Fraction(0)
        for g, c in zip(self.grid, self.cdf):
            if g <= s:
                best = c
            else:
                break
        return best

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple]) -> "ExecDistribution":
        pts = sorted((as_fraction(g, "grid point"), as_fraction(c, "cdf value"))
                     for g, c in pairs)
        return cls(tuple(g for g, _ in pts), tuple(c for _, c in pts))


def parse_distribution(text: str) -> ExecDistribution:
    """Parse a distribution file: one ``scale cdf`` pair per line.

    Blank lines and ``#`` comments are ignored; values are rationals.
    """
    pairs = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ValueError(f"line {no}: expected 'scale cdf', got {raw!r}")
        try:
            pairs.append((Fraction(fields[0]), Fraction(fields[1])))
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"line {no}: bad rational in {raw!r}") from None
    if not pairs:
        raise ValueError("distribution file holds no data lines")
    return ExecDistribution.from_pairs(pairs)


def load_distribution(path) -> ExecDistribution:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_distribution(fh.read())


def _tenths(n: int) -> Fraction:
    return Fraction(n, 10)


# Bundled example distribution on the 0.1 .. 1.0 grid.
BUILTIN_DISTRIBUTIONS = {
    "table4": ExecDistribution(
        grid=tuple(_tenths(k) for k in range(1, 11)),
        cdf=(Fraction(1, 100), Fraction(1, 20), Fraction(1, 5), Fraction(1, 2),
             Fraction(4, 5), Fraction(9, 10), Fraction(19, 20), Fraction(49, 50),
             Fraction(199, 200), Fraction(1)),
    ),
}


def p_noswitch_static(dist: ExecDistribution, n: int, beta_i) -> float:
    """Survival probability of one busy interval under static budgets.

    ``n`` identical tasks each carry the per-task budget scale ``beta_i``;
    the interval stays nominal iff no task draws a scale above it.  Budget
    scales between grid points floor to the grid.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    beta = as_fraction(beta_i, "beta_i")
    if beta < 0:
        raise InvalidFraction(f"beta_i must be non-negative, got {beta}")
    return float(dist.cdf_at(beta) ** n)


def _enumerate_mass(weights: Sequence[Sequence[tuple[Fraction, Fraction]]],
                    bound: Fraction) -> Fraction:
    """Exact mass of { sum_i v_i <= bound } by meet-in-the-middle enumeration.

    ``weights[i]`` lists (value, weight) pairs for coordinate i.  Both halves
    of the coordinate product are expanded, one is sorted with prefix sums,
    and each element of the other half binary-searches its complement.
    """

    def expand(cols):
        acc = [(Fraction(0), Fraction(1))]
        for col in cols:
            acc = [(v + cv, w * cw) for v, w in acc for cv, cw in col]
        return acc

    half = len(weights) // 2
    left = expand(weights[:half])
    right = expand(weights[half:])
    right.sort(key=lambda p: p[0])
    right_vals = [v for v, _ in right]
    prefix = [Fraction(0)]
    for _, w in right:
        prefix.append(prefix[-1] + w)
    total = Fraction(0)
    for v, w in left:
        idx = bisect.bisect_right(right_vals, bound - v)
        total += w * prefix[idx]
    return total


def _convolve_mass(weights: Sequence[Sequence[tuple[Fraction, Fraction]]],
                   bound: Fraction, max_states: int) -> Fraction:
    """Exact mass of { sum_i v_i <= bound } by lattice convolution.

    States above the bound are pruned (increments are non-negative, so they
    can never re-enter the feasible region).

    Raises:
        GridOverflow: if the running state count exceeds ``max_states``.
    """
    acc: dict[Fraction, Fraction] = {Fraction(0): Fraction(1)}
    for col in weights:
        nxt: dict[Fraction, Fraction] = defaultdict(Fraction)
        for value, weight in col:
            if weight == 0:
                continue
            for tot, p in acc.items():
                t2 = tot + value
                if t2 <= bound:
                    nxt[t2] += p * weight
        if len(nxt) > max_states:
            raise GridOverflow(
                f"convolution lattice grew to {len(nxt)} states (cap {max_states})")
        acc = dict(nxt)
    return sum(acc.values(), Fraction(0))


def p_noswitch_dynamic(dist: ExecDistribution, u_list: Sequence, beta_star, *,
                       method: str = "auto", max_states: int = 200_000,
                       summand: str = "pmf") -> float:
    """Survival probability of one busy interval under the dynamic pool.

    The interval stays nominal iff the drawn scales satisfy
    ``sum(s_i * u_i) <= beta_star * sum(u_i)``.  Scales are independent
    draws from ``dist``; utilizations must be positive rationals.

    Args:
        method: "auto" picks enumeration for up to 8 tasks and convolution
            beyond; "enumerate" / "convolve" force one algorithm.
        max_states: state cap for the convolution lattice.
        summand: "pmf" weighs each assignment by its probability.  The
            alternative "cdf" reading multiplies per-task CDF values instead;
            it is not a probability measure and exists only for comparison.

    Raises:
        GridOverflow: if convolution exceeds ``max_states`` states.
    """
    us = [as_fraction(u, "utilization") for u in u_list]
    if not us or any(u <= 0 for u in us):
        raise ValueError("u_list must be non-empty with positive entries")
    beta = unit_fraction(beta_star, "beta_star")
    if summand not in ("pmf", "cdf"):
        raise ValueError(f"unknown summand {summand!r}")
    per_scale = dist.pmf if summand == "pmf" else dist.cdf
    bound = beta * sum(us, Fraction(0))
    weights = [
        [(g * u, w) for g, w in zip(dist.grid, per_scale)]
        for u in us
    ]
    if method == "auto":
        method = "enumerate" if len(us) <= 8 else "convolve"
    if method == "enumerate":
        mass = _enumerate_mass(weights, bound)
    elif method == "convolve":
        mass = _convolve_mass(weights, bound, max_states)
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(mass)
