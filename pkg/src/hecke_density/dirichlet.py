"""Truncated Dirichlet series over primes and density estimates.

All sums run over the primes of an :class:`EigenvalueSequence` in ascending
order and are accumulated with ``math.fsum`` (correctly rounded), so the
result does not depend on how the terms were produced or partitioned.

The lim sup in the upper Dirichlet density is replaced by a maximum over a
finite grid of s values.  A grid point is only usable when
(s - 1) * ln(X) is at least a coupling constant, X being the largest prime
in the data; closer to 1 the truncated sum flattens out at sum_{p<=X} p^{-s}
while log(1/(s-1)) keeps growing.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .bounds import DEFAULT_BOUNDS, MomentBounds
from .sources import EigenvalueSequence

DEFAULT_COUPLING = 3.0
MOMENT_KS = (2, 3, 4, 6, 8)


class GridCouplingError(ValueError):
    pass


@dataclass(frozen=True)
class SGrid:
    points: tuple
    truncation_limit: int
    coupling_constant: float = DEFAULT_COUPLING

    def __post_init__(self):
        pts = tuple(float(s) for s in self.points)
        if not pts:
            raise GridCouplingError("empty s-grid")
        if any(not 1.0 < s < 2.0 for s in pts):
            raise GridCouplingError(f"grid points must lie in (1, 2): {pts}")
        if any(b >= a for a, b in zip(pts, pts[1:])):
            raise GridCouplingError("grid points must be strictly descending")
        if self.truncation_limit < 2:
            raise GridCouplingError("truncation limit must be at least 2")
        log_x = math.log(self.truncation_limit)
        for s in pts:
            if (s - 1.0) * log_x < self.coupling_constant:
                raise GridCouplingError(
                    f"s={s:g} too close to 1 for truncation {self.truncation_limit}: "
                    f"(s-1)*ln(X) = {(s - 1.0) * log_x:.3f} < {self.coupling_constant}"
                )
        object.__setattr__(self, "points", pts)


def default_grid(
    truncation_limit: int, j_max: int = 4, coupling: float = DEFAULT_COUPLING
) -> SGrid:
    """Usable points of s = 1 + 10^{-j/2}, j = 0..j_max.

    s = 2 (j = 0) is skipped because log(1/(s-1)) vanishes there.
    """
    if truncation_limit < 2:
        raise GridCouplingError("truncation limit must be at least 2")
    log_x = math.log(truncation_limit)
    pts = [1.0 + 10.0 ** (-j / 2) for j in range(j_max + 1)]
    pts = [s for s in pts if s < 2.0 and (s - 1.0) * log_x >= coupling]
    if not pts:
        raise GridCouplingError(
            f"no default grid point satisfies (s-1)*ln(X) >= {coupling} "
            f"for X = {truncation_limit}"
        )
    return SGrid(tuple(pts), truncation_limit, coupling)


def grid_for(seq: EigenvalueSequence, points=None, coupling: float = DEFAULT_COUPLING) -> SGrid:
    if points is None:
        return default_grid(seq.largest_prime, coupling=coupling)
    return SGrid(tuple(sorted(points, reverse=True)), seq.largest_prime, coupling)


def _check_grid(seq: EigenvalueSequence, grid: SGrid) -> None:
    x = seq.largest_prime
    if x < 2:
        raise GridCouplingError("sequence is empty")
    log_x = math.log(x)
    for s in grid.points:
        if (s - 1.0) * log_x < grid.coupling_constant:
            raise GridCouplingError(
                f"s={s:g} needs primes up to exp({grid.coupling_constant}/(s-1)) "
                f"= {math.exp(grid.coupling_constant / (s - 1.0)):.4g}; data stops at {x}"
            )


# -- threshold sets ----------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdSet:
    """A set of primes cut out by a condition on (p, a_p).

    kinds: ``all``, ``A`` (a > 0), ``B`` (a <= 0), ``S_beta`` (a > 0 and
    a^4 >= t), ``T_alpha`` (a > 0 and a^3 >= t), ``above`` (a > c) and
    ``custom``.  A custom predicate receives the prime and eigenvalue arrays
    and returns a boolean mask.
    """

    kind: str
    parameter: Optional[float] = None
    predicate: Optional[Callable] = field(default=None, compare=False)

    def mask(self, seq: EigenvalueSequence) -> np.ndarray:
        a = seq.values
        if self.kind == "all":
            return np.ones(len(a), dtype=bool)
        if self.kind == "A":
            return a > 0
        if self.kind == "B":
            return a <= 0
        if self.kind == "S_beta":
            return (a > 0) & (a**4 >= self.parameter)
        if self.kind == "T_alpha":
            return (a > 0) & (a**3 >= self.parameter)
        if self.kind == "above":
            return a > self.parameter
        if self.kind == "custom":
            return np.asarray(self.predicate(seq.primes, a), dtype=bool)
        raise ValueError(f"unknown set kind {self.kind!r}")

    def __str__(self):
        if self.parameter is None:
            return self.kind
        return f"{self.kind}({self.parameter:g})"


ALL = ThresholdSet("all")
POSITIVE = ThresholdSet("A")
NONPOSITIVE = ThresholdSet("B")


def above(c: float) -> ThresholdSet:
    return ThresholdSet("above", float(c))


def s_beta(t: float) -> ThresholdSet:
    return ThresholdSet("S_beta", float(t))


def t_alpha(t: float) -> ThresholdSet:
    return ThresholdSet("T_alpha", float(t))


def custom(predicate: Callable) -> ThresholdSet:
    return ThresholdSet("custom", None, predicate)


# -- sums --------------------------------------------------------------------------


def _terms(p: np.ndarray, a: np.ndarray, k: int, signed: bool, s: float) -> np.ndarray:
    w = np.power(p.astype(np.float64), -s)
    if k == 0:
        return w
    base = a if signed else np.abs(a)
    return base**k * w


def subset_power_sum(
    seq: EigenvalueSequence,
    tset: ThresholdSet,
    k: int,
    signed: bool = False,
    s: float = 2.0,
    workers: int = 1,
) -> float:
    """sum over p in the set of a_p^k p^{-s} (|a_p|^k unless ``signed``).

    With ``workers > 1`` the terms are produced in parallel chunks; the
    final correctly-rounded sum makes the result identical to the
    sequential one.
    """
    if not 0 <= k <= 8:
        raise ValueError(f"k must be in 0..8, got {k}")
    if not s > 1.0:
        raise ValueError(f"s must exceed 1, got {s}")
    m = tset.mask(seq)
    p = seq.primes[m]
    a = seq.values[m]
    if workers <= 1 or len(p) < 2 * workers:
        return math.fsum(_terms(p, a, k, signed, s))
    bounds = np.linspace(0, len(p), workers + 1).astype(int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(
            pool.map(
                lambda ij: _terms(p[ij[0] : ij[1]], a[ij[0] : ij[1]], k, signed, s),
                zip(bounds[:-1], bounds[1:]),
            )
        )
    return math.fsum(np.concatenate(parts))


def log_scale(s: float) -> float:
    return math.log(1.0 / (s - 1.0))


def ratio_profile(seq, tset, k, signed, grid: SGrid) -> list[tuple[float, float]]:
    """(s, sum / log(1/(s-1))) for each grid point."""
    _check_grid(seq, grid)
    return [
        (s, subset_power_sum(seq, tset, k, signed, s) / log_scale(s)) for s in grid.points
    ]


def effective_size(seq: EigenvalueSequence, s: float, tset: ThresholdSet = ALL) -> float:
    """(sum w)^2 / sum w^2 for weights w = p^{-s}.

    The self-normalized ratios are weighted means with these weights; this
    is the number of equally weighted samples they are worth.
    """
    w = np.power(seq.primes[tset.mask(seq)].astype(float), -s)
    if len(w) == 0:
        return 0.0
    return math.fsum(w) ** 2 / math.fsum(w * w)


# -- moments -------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentRow:
    k: int
    s: float
    ratio: float  # ratio_k / ratio_0
    raw_ratio: float  # sum / log(1/(s-1))
    expected: float
    target: str  # "equal" or "upper"
    ok: bool
    effective_size: float


@dataclass(frozen=True)
class MomentProfile:
    rows: tuple

    def at(self, s: float) -> dict:
        return {r.k: r for r in self.rows if r.s == s}

    def closest_to_one(self) -> dict:
        return self.at(min(r.s for r in self.rows))


def moment_profile(
    seq: EigenvalueSequence,
    grid: SGrid,
    bounds: MomentBounds = DEFAULT_BOUNDS,
    rel_tol: float = 0.05,
    upper_tol: float = 0.10,
    zero_tol: float = 0.02,
) -> MomentProfile:
    """Self-normalized moments sum a^k p^{-s} / sum p^{-s} against the bounds.

    k = 2, 3, 4 are compared for equality (relative ``rel_tol``, or absolute
    ``zero_tol`` when the target is 0); k = 6, 8 only need to stay below the
    bound times (1 + upper_tol).
    """
    _check_grid(seq, grid)
    rows = []
    for s in grid.points:
        base = subset_power_sum(seq, ALL, 0, False, s)
        n_eff = effective_size(seq, s)
        for k in MOMENT_KS:
            total = subset_power_sum(seq, ALL, k, True, s)
            ratio = total / base
            expected = bounds.expected(k)
            if bounds.is_upper_bound(k):
                target = "upper"
                ok = ratio <= expected * (1 + upper_tol)
            else:
                target = "equal"
                if expected == 0:
                    ok = abs(ratio) <= zero_tol
                else:
                    ok = abs(ratio - expected) <= rel_tol * abs(expected)
            rows.append(
                MomentRow(k, s, ratio, total / log_scale(s), expected, target, ok, n_eff)
            )
    return MomentProfile(tuple(rows))


# -- densities -----------------------------------------------------------------------


@dataclass(frozen=True)
class DensityPoint:
    s: float
    ratio: float
    subset_sum: float
    increased: bool  # ratio grew relative to the previous (larger) s


@dataclass(frozen=True)
class DensityEstimate:
    value: float
    per_point: tuple
    truncation_limit: int
    subset_size: int

    @property
    def monotone(self) -> bool:
        return all(pt.increased for pt in self.per_point[1:])


def upper_density_estimate(
    seq: EigenvalueSequence, tset: ThresholdSet, grid: SGrid
) -> DensityEstimate:
    """Finite-grid stand-in for lim sup_{s->1+} sum_{p in S} p^{-s} / log(1/(s-1))."""
    _check_grid(seq, grid)
    points = []
    prev = None
    for s in grid.points:
        total = subset_power_sum(seq, tset, 0, False, s)
        ratio = total / log_scale(s)
        points.append(DensityPoint(s, ratio, total, prev is not None and ratio > prev))
        prev = ratio
    value = max(pt.ratio for pt in points)
    return DensityEstimate(
        value, tuple(points), seq.largest_prime, int(tset.mask(seq).sum())
    )


@dataclass(frozen=True)
class TheoremCheck:
    passed: bool
    threshold: float
    delta: float
    estimate: DensityEstimate


def theorem_check(seq: EigenvalueSequence, c: float, delta: float, grid: SGrid) -> TheoremCheck:
    """Does {p : a_p > c} reach estimated upper density ``delta``?"""
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    est = upper_density_estimate(seq, above(c), grid)
    return TheoremCheck(est.value >= delta, c, delta, est)
