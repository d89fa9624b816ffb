"""Threshold constant solver and the inequality checks behind it.

Given moment bounds M and a density target delta, the unknowns (d, beta,
alpha) satisfy

    (M4 - d)(1 - beta)   = sqrt(M8 * delta)
    g(d)(1 - alpha)      = sqrt(M6 * delta)
    ((M4 - d) beta)^1/4  = (g(d) alpha)^1/3

with g(d) = d^{5/4} / (M8 - (M4 - d)^2)^{1/4}.  The common value of the
last equation is the eigenvalue threshold c.  The first two equations give
beta(d) and alpha(d) in closed form, which leaves a scalar root problem in d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .bounds import DEFAULT_BOUNDS, MomentBounds
from .dirichlet import (
    ALL,
    NONPOSITIVE,
    POSITIVE,
    SGrid,
    _check_grid,
    s_beta,
    subset_power_sum,
    t_alpha,
)
from .sources import EigenvalueSequence

SCAN_CELLS = 512
BISECT_TOL = 1e-12
DEFAULT_DELTA = 0.01

# Rounded reference values for the default instance (M = 1,0,2,5,14;
# delta = 1/100).  beta was also quoted once as 0.495 in a shorter form.
REFERENCE_VALUES = {
    "d": 1.2581,
    "beta": 0.4957,
    "beta_short": 0.495,
    "product": 0.36729,
    "threshold": 0.36729**0.25,
}


class DomainError(ValueError):
    pass


class InfeasibleError(ValueError):
    pass


def lemma_bound(d: float, M: MomentBounds = DEFAULT_BOUNDS) -> float:
    """g(d) = d^{5/4} / (M8 - (M4 - d)^2)^{1/4}: lower bound for the
    normalized cubic sum over {a_p > 0}."""
    if not 0 <= d <= M.M4:
        raise DomainError(f"d must lie in [0, M4={M.M4}], got {d}")
    denom = M.M8 - (M.M4 - d) ** 2
    if denom <= 0:
        raise DomainError(f"M8 - (M4 - d)^2 = {denom} is not positive")
    return d**1.25 / denom**0.25


@dataclass(frozen=True)
class ConstantSolution:
    d: float
    beta: float
    alpha: float
    threshold_c: float
    delta: float
    residual: float
    bounds: MomentBounds = DEFAULT_BOUNDS

    @property
    def product(self) -> float:
        """(M4 - d) * beta, i.e. c^4."""
        return (self.bounds.M4 - self.d) * self.beta

    def equation_residuals(self) -> dict:
        return equation_residuals(self.d, self.beta, self.alpha, self.delta, self.bounds)


def equation_residuals(d, beta, alpha, delta, M: MomentBounds = DEFAULT_BOUNDS) -> dict:
    g = lemma_bound(d, M)
    return {
        "eq1": (M.M4 - d) * (1 - beta) - math.sqrt(M.M8 * delta),
        "eq2": g * (1 - alpha) - math.sqrt(M.M6 * delta),
        "eq3": ((M.M4 - d) * beta) ** 0.25 - (g * alpha) ** (1 / 3),
    }


def _beta_of(d, M, delta):
    return 1 - math.sqrt(M.M8 * delta) / (M.M4 - d)


def _alpha_of(d, M, delta):
    return 1 - math.sqrt(M.M6 * delta) / lemma_bound(d, M)


def _feasible(d, M, delta) -> bool:
    if not 0 < d < M.M4:
        return False
    b = _beta_of(d, M, delta)
    a = _alpha_of(d, M, delta)
    return 0 < b < 1 and 0 < a < 1


def _residual(d, M, delta) -> float:
    b = max(_beta_of(d, M, delta), 0.0)
    a = max(_alpha_of(d, M, delta), 0.0)
    return ((M.M4 - d) * b) ** 0.25 - (lemma_bound(d, M) * a) ** (1 / 3)


def _bisect(f, lo, hi, tol=BISECT_TOL):
    flo = f(lo)
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def feasible_interval(M: MomentBounds, delta: float) -> Optional[tuple[float, float]]:
    """Sub-interval of (0, M4) where beta(d) and alpha(d) both lie in (0, 1).

    Returns the first maximal run found on a fine scan, with its ends
    sharpened by bisection, or None.
    """
    if not delta > 0:
        return None
    h = M.M4 / (8 * SCAN_CELLS)
    xs = [h * i for i in range(1, 8 * SCAN_CELLS)]
    flags = [_feasible(x, M, delta) for x in xs]
    if not any(flags):
        return None
    i0 = flags.index(True)
    i1 = i0
    while i1 + 1 < len(flags) and flags[i1 + 1]:
        i1 += 1
    feas = lambda x: 1.0 if _feasible(x, M, delta) else -1.0
    lo = _bisect(feas, xs[i0 - 1], xs[i0]) if i0 > 0 else xs[0]
    hi = _bisect(feas, xs[i1], xs[i1 + 1]) if i1 + 1 < len(xs) else xs[-1]
    # nudge inside so both end points are feasible
    while not _feasible(lo, M, delta):
        lo = math.nextafter(lo, hi)
    while not _feasible(hi, M, delta):
        hi = math.nextafter(hi, lo)
    return lo, hi


def solve_constants(M: MomentBounds = DEFAULT_BOUNDS, delta: float = DEFAULT_DELTA) -> ConstantSolution:
    """Root of the three-equation system by bracket scan and bisection."""
    interval = feasible_interval(M, delta)
    if interval is None:
        raise InfeasibleError(f"no d in (0, {M.M4}) keeps beta and alpha in (0, 1) at delta={delta}")
    lo, hi = interval
    f = lambda d: _residual(d, M, delta)
    xs = np.linspace(lo, hi, SCAN_CELLS + 1)
    vals = [f(float(x)) for x in xs]
    bracket = None
    for i in range(SCAN_CELLS):
        if vals[i] == 0:
            bracket = (float(xs[i]), float(xs[i]))
            break
        if (vals[i] > 0) != (vals[i + 1] > 0):
            bracket = (float(xs[i]), float(xs[i + 1]))
            break
    if bracket is None:
        raise InfeasibleError(f"threshold equation has no sign change at delta={delta}")
    d = bracket[0] if bracket[0] == bracket[1] else _bisect(f, *bracket)
    beta = _beta_of(d, M, delta)
    alpha = _alpha_of(d, M, delta)
    if not (0 < beta < 1 and 0 < alpha < 1):
        raise InfeasibleError(f"root d={d} gives beta={beta}, alpha={alpha} outside (0, 1)")
    c = ((M.M4 - d) * beta) ** 0.25
    res = max(abs(v) for v in equation_residuals(d, beta, alpha, delta, M).values())
    return ConstantSolution(d, beta, alpha, c, delta, res, M)


# -- dichotomy ---------------------------------------------------------------------


@dataclass(frozen=True)
class DichotomyReport:
    passed: bool
    d_star: float
    f1_crossing: Optional[float]
    f2_crossing: Optional[float]
    f1_decreasing: bool
    f2_increasing: bool
    first_violation: Optional[str]
    points: int


def _f1(d, sol):
    M = sol.bounds
    return (M.M4 - d) ** 2 * (1 - sol.beta) ** 2


def _f2(d, sol):
    return lemma_bound(d, sol.bounds) ** 2 * (1 - sol.alpha) ** 2


def _crossing(f, level, lo, hi):
    a, b = f(lo) - level, f(hi) - level
    if a == 0:
        return lo
    if (a > 0) == (b > 0):
        return None
    return _bisect(lambda x: f(x) - level, lo, hi)


def dichotomy_check(
    sol: ConstantSolution,
    M: Optional[MomentBounds] = None,
    lo: float = 0.01,
    hi: float = 1.99,
    points: int = 10_000,
    slack: float = 1e-12,
) -> DichotomyReport:
    """With beta, alpha frozen, check the case split on d.

    For d below d* the S_beta inequality f1(d) <= M8 delta must fail, and
    for d above d* the T_alpha inequality f2(d) <= M6 delta must fail.
    """
    if M is not None and M != sol.bounds:
        sol = replace(sol, bounds=M)
    M = sol.bounds
    lvl1 = M.M8 * sol.delta
    lvl2 = M.M6 * sol.delta
    grid = np.linspace(lo, min(hi, M.M4), points)
    f1 = (M.M4 - grid) ** 2 * (1 - sol.beta) ** 2
    f2 = np.array([_f2(float(x), sol) for x in grid])

    first = None
    for x, v1, v2 in zip(grid.tolist(), f1.tolist(), f2.tolist()):
        if x < sol.d - slack and not v1 > lvl1:
            first = f"d={x!r}: f1={v1!r} <= {lvl1!r} below d*"
            break
        if x > sol.d + slack and not v2 > lvl2:
            first = f"d={x!r}: f2={v2!r} <= {lvl2!r} above d*"
            break

    dec = bool(np.all(np.diff(f1) < 0))
    inc = bool(np.all(np.diff(f2) > 0))
    c1 = _crossing(lambda x: _f1(x, sol), lvl1, lo, min(hi, M.M4))
    c2 = _crossing(lambda x: _f2(x, sol), lvl2, lo, min(hi, M.M4))
    return DichotomyReport(
        first is None and dec and inc, sol.d, c1, c2, dec, inc, first, points
    )


# -- sweep -------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    delta: float
    solution: Optional[ConstantSolution]
    error: Optional[str] = None

    @property
    def feasible(self) -> bool:
        return self.solution is not None


def tradeoff_sweep(M: MomentBounds = DEFAULT_BOUNDS, deltas=(0.02, 0.01, 0.005)) -> list[SweepRow]:
    rows = []
    for delta in deltas:
        try:
            rows.append(SweepRow(delta, solve_constants(M, delta)))
        except (InfeasibleError, DomainError) as exc:
            rows.append(SweepRow(delta, None, str(exc)))
    return rows


# -- inequality audit --------------------------------------------------------------


@dataclass(frozen=True)
class AuditEntry:
    s: float
    name: str
    subset: str
    lhs: float
    rhs: float
    kind: str  # "le" for lhs <= rhs, "eq" for an identity

    @property
    def margin(self) -> float:
        if self.kind == "eq":
            return -abs(self.rhs - self.lhs)
        return self.rhs - self.lhs

    @property
    def relative_margin(self) -> float:
        return self.margin / max(abs(self.lhs), abs(self.rhs), 1.0)


@dataclass(frozen=True)
class AuditReport:
    entries: tuple
    tolerance: float = 1e-12

    @property
    def passed(self) -> bool:
        return all(e.relative_margin >= -self.tolerance for e in self.entries)

    @property
    def worst(self) -> Optional[AuditEntry]:
        if not self.entries:
            return None
        return min(self.entries, key=lambda e: e.relative_margin)


def inequality_audit(
    seq: EigenvalueSequence, grid: SGrid, sol: Optional[ConstantSolution] = None
) -> AuditReport:
    """Finite-sum versions of every Cauchy-Schwarz / Hölder step.

    Each entry compares partial sums at one grid point.  These inequalities
    hold for any finite sums, so a negative margin means the summation is
    wrong, not the mathematics.
    """
    if len(seq) == 0:
        raise ValueError("audit needs a nonempty sequence")
    _check_grid(seq, grid)
    if sol is None:
        sol = solve_constants()
    c = sol.threshold_c
    # S_beta and T_alpha at the solved constants both reduce to {a >= c}
    subsets = {
        "A": POSITIVE,
        "B": NONPOSITIVE,
        "all": ALL,
        "S_beta": s_beta(c**4),
        "T_alpha": t_alpha(c**3),
    }
    out = []
    for s in grid.points:
        sums = {}

        def S(name, k, signed=False):
            key = (name, k, signed)
            if key not in sums:
                sums[key] = subset_power_sum(seq, subsets[name], k, signed, s)
            return sums[key]

        for name in subsets:
            out.append(AuditEntry(s, "cauchy_schwarz_4_8_0", name,
                                  S(name, 4) ** 2, S(name, 8) * S(name, 0), "le"))
            out.append(AuditEntry(s, "cauchy_schwarz_3_6_0", name,
                                  S(name, 3) ** 2, S(name, 6) * S(name, 0), "le"))
        for name in ("A", "B"):
            out.append(AuditEntry(s, "holder_3_from_4_0", name,
                                  S(name, 3), S(name, 4) ** 0.75 * S(name, 0) ** 0.25, "le"))
            out.append(AuditEntry(s, "holder_4_from_8_3", name,
                                  S(name, 4), S(name, 8) ** 0.2 * S(name, 3) ** 0.8, "le"))
        out.append(AuditEntry(s, "cubic_split", "A,B",
                              S("A", 3) - S("all", 3, True), S("B", 3), "eq"))
        out.append(AuditEntry(s, "octic_split", "A,B",
                              S("A", 8) + S("B", 8), S("all", 8), "eq"))
        out.append(AuditEntry(s, "cubic_signed_bound", "A,B",
                              S("B", 3), S("A", 3) + abs(S("all", 3, True)), "le"))
    return AuditReport(tuple(out))
