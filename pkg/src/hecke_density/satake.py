"""Satake parameter algebra at a single unramified prime.

Everything here works with the diagonal entries of the local matrices:
tensor powers, symmetric powers, central-character twists and
Rankin-Selberg pairings all reduce to multisets of complex numbers, and
the Clebsch-Gordan identities for the k-fold product L-functions become
equalities of such multisets.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from math import comb
from typing import Union

import numpy as np

MULTISET_TOL = 1e-12
TRACE_TOL = 1e-10


@dataclass(frozen=True)
class SatakeParams:
    """Local parameters (alpha, beta) with central value omega = alpha * beta."""

    alpha: complex
    beta: complex
    omega: complex

    def __post_init__(self):
        prod = self.alpha * self.beta
        scale = max(abs(self.omega), 1.0)
        if abs(prod - self.omega) > 1e-12 * scale:
            raise ValueError(
                f"alpha*beta = {prod} does not match omega = {self.omega}"
            )

    @property
    def trace(self) -> complex:
        return self.alpha + self.beta

    @property
    def tempered(self) -> bool:
        return abs(abs(self.alpha) - 1) <= 1e-12 and abs(abs(self.beta) - 1) <= 1e-12

    @classmethod
    def from_angle(cls, theta: float) -> "SatakeParams":
        """Tempered parameters e^{+i theta}, e^{-i theta} with trivial omega."""
        z = cmath.exp(1j * theta)
        return cls(z, z.conjugate(), 1.0 + 0j)


def _root_key(z: complex):
    # nonnegative imaginary part first, ties broken by larger real part
    return (z.imag < 0, -z.real)


def satake_from_eigenvalue(a: float, omega: complex = 1.0) -> SatakeParams:
    """Roots of x^2 - a x + omega, in a fixed order."""
    omega = complex(omega)
    if omega == 0:
        raise ValueError("omega = 0 gives a degenerate local factor")
    disc = cmath.sqrt(a * a - 4 * omega)
    r1 = (a + disc) / 2
    r2 = (a - disc) / 2
    first, second = sorted((complex(r1), complex(r2)), key=_root_key)
    return SatakeParams(first, second, omega)


# -- representation labels ---------------------------------------------------


@dataclass(frozen=True)
class Sym:
    """Sym^m twisted by omega^twist.  Sym^1 is pi itself, Sym^0 the character."""

    m: int
    twist: int = 0

    @property
    def dim(self) -> int:
        return self.m + 1

    def __str__(self):
        if self.m == 0:
            base = "1"
        elif self.m == 1:
            base = "pi"
        else:
            base = f"Sym^{self.m}"
        if self.twist == 0:
            return base
        tw = "omega" if self.twist == 1 else f"omega^{self.twist}"
        return tw if self.m == 0 else f"{base}(x){tw}"


@dataclass(frozen=True)
class Pair:
    """Rankin-Selberg pairing of two pieces."""

    left: Sym
    right: Sym

    @property
    def dim(self) -> int:
        return self.left.dim * self.right.dim

    def __str__(self):
        return f"{self.left} x {self.right}"


@dataclass(frozen=True)
class TensorPower:
    k: int

    @property
    def dim(self) -> int:
        return 2**self.k

    def __str__(self):
        return f"pi^(x{self.k})"


Label = Union[Sym, Pair, TensorPower]


@dataclass(frozen=True)
class EigenvalueMultiset:
    values: np.ndarray = field(compare=False)
    label: Label

    def __post_init__(self):
        if len(self.values) != self.label.dim:
            raise ValueError(
                f"{self.label} has dimension {self.label.dim}, got {len(self.values)} values"
            )

    @property
    def trace(self) -> complex:
        return complex(self.values.sum())


@dataclass(frozen=True)
class CGDecomposition:
    k: int
    parts: tuple  # of (Label, multiplicity)

    @property
    def dimension(self) -> int:
        return sum(mult * lab.dim for lab, mult in self.parts)


_CG_TABLE = {
    3: ((Sym(3), 1), (Sym(1, 1), 2)),
    4: ((Sym(4), 1), (Sym(2, 1), 3), (Sym(0, 2), 2)),
    6: (
        (Pair(Sym(3), Sym(3)), 1),
        (Pair(Sym(3), Sym(1, 1)), 4),
        (Pair(Sym(1), Sym(1, 2)), 4),
    ),
    8: (
        (Pair(Sym(4), Sym(4)), 1),
        (Pair(Sym(4), Sym(2, 1)), 6),
        (Pair(Sym(2, 1), Sym(2, 1)), 9),
        (Sym(4, 2), 4),
        (Sym(2, 3), 12),
        (Sym(0, 4), 4),
    ),
}

SUPPORTED_K = tuple(sorted(_CG_TABLE))


def cg_decomposition(k: int) -> CGDecomposition:
    if k not in _CG_TABLE:
        raise ValueError(f"no Clebsch-Gordan decomposition stored for k={k}")
    return CGDecomposition(k, _CG_TABLE[k])


def tensor_power_eigenvalues(sp: SatakeParams, k: int) -> EigenvalueMultiset:
    """Diagonal of A^{(x)k}, built by repeated Kronecker products."""
    if not 1 <= k <= 8:
        raise ValueError(f"tensor power k must be in 1..8, got {k}")
    base = np.array([sp.alpha, sp.beta], dtype=complex)
    vals = base
    for _ in range(k - 1):
        vals = np.multiply.outer(vals, base).ravel()
    return EigenvalueMultiset(vals, TensorPower(k))


def _sym_values(sp: SatakeParams, lab: Sym) -> np.ndarray:
    if lab.m < 0 or lab.m > 8 or lab.twist < 0:
        raise ValueError(f"unsupported label {lab!r}")
    i = np.arange(lab.m + 1)
    vals = sp.alpha ** (lab.m - i) * sp.beta**i
    return vals * sp.omega**lab.twist


def component_eigenvalues(sp: SatakeParams, label: Label) -> EigenvalueMultiset:
    if isinstance(label, Sym):
        vals = _sym_values(sp, label)
    elif isinstance(label, Pair):
        vals = np.multiply.outer(
            _sym_values(sp, label.left), _sym_values(sp, label.right)
        ).ravel()
    elif isinstance(label, TensorPower):
        return tensor_power_eigenvalues(sp, label.k)
    else:
        raise ValueError(f"unsupported label {label!r}")
    return EigenvalueMultiset(vals.astype(complex), label)


def decomposition_eigenvalues(sp: SatakeParams, k: int) -> np.ndarray:
    """Multiplicity-weighted union of the pieces of the k-th decomposition."""
    chunks = []
    for lab, mult in cg_decomposition(k).parts:
        vals = component_eigenvalues(sp, lab).values
        chunks.extend([vals] * mult)
    return np.concatenate(chunks)


def canonical_sort(values: np.ndarray, tol: float = MULTISET_TOL) -> np.ndarray:
    """Sort by real part, then imaginary part, treating real parts within
    ``tol`` of their neighbour as tied."""
    values = np.asarray(values, dtype=complex)
    order = np.argsort(values.real, kind="stable")
    v = values[order]
    gaps = np.diff(v.real) > tol
    group = np.concatenate(([0], np.cumsum(gaps)))
    return v[np.lexsort((v.imag, group))]


def multiset_discrepancy(x: np.ndarray, y: np.ndarray) -> float:
    if len(x) != len(y):
        return float("inf")
    return float(np.max(np.abs(canonical_sort(x) - canonical_sort(y))))


def verify_cg_identity(sp: SatakeParams, k: int) -> float:
    lhs = tensor_power_eigenvalues(sp, k).values
    rhs = decomposition_eigenvalues(sp, k)
    return multiset_discrepancy(lhs, rhs)


def trace_moment_residual(sp: SatakeParams, k: int) -> float:
    """|a^k - sum of multiplicity * trace| for the k-th decomposition."""
    total = 0j
    for lab, mult in cg_decomposition(k).parts:
        total += mult * component_eigenvalues(sp, lab).trace
    return abs(sp.trace**k - total)


class LocalPoleError(ArithmeticError):
    """Raised when 1 - lambda p^{-s} vanishes for some eigenvalue."""


def local_factor(ev: EigenvalueMultiset | np.ndarray, p: int, s: float) -> complex:
    """prod over lambda of (1 - lambda p^{-s})^{-1}."""
    vals = ev.values if isinstance(ev, EigenvalueMultiset) else np.asarray(ev, complex)
    if p < 2:
        raise ValueError(f"p must be prime, got {p}")
    x = float(p) ** (-s)
    terms = 1 - vals * x
    hit = np.abs(terms) < 1e-15
    if hit.any():
        lam = vals[hit][0]
        raise LocalPoleError(f"local factor has a pole: lambda={lam}, p={p}, s={s}")
    return complex(1 / np.prod(terms))


def comb_multiset(sp: SatakeParams, k: int) -> list[tuple[complex, int]]:
    """The tensor-power multiset in closed form: alpha^i beta^(k-i) with multiplicity C(k, i)."""
    return [(sp.alpha**i * sp.beta ** (k - i), comb(k, i)) for i in range(k + 1)]


def random_unit_params(rng: np.random.Generator, self_dual: bool = False) -> SatakeParams:
    """Independent unit-circle alpha, beta (so omega is a random unit too)."""
    if self_dual:
        return SatakeParams.from_angle(float(rng.uniform(0.0, np.pi)))
    t1, t2 = rng.uniform(0.0, 2 * np.pi, size=2)
    a, b = cmath.exp(1j * t1), cmath.exp(1j * t2)
    return SatakeParams(a, b, a * b)


# -- batched checks ----------------------------------------------------------


def _sym_batch(alpha, beta, lab: Sym) -> np.ndarray:
    i = np.arange(lab.m + 1)
    omega = alpha * beta
    vals = alpha[:, None] ** (lab.m - i) * beta[:, None] ** i
    return vals * (omega**lab.twist)[:, None]


def _component_batch(alpha, beta, lab: Label) -> np.ndarray:
    if isinstance(lab, Sym):
        return _sym_batch(alpha, beta, lab)
    left = _sym_batch(alpha, beta, lab.left)
    right = _sym_batch(alpha, beta, lab.right)
    return (left[:, :, None] * right[:, None, :]).reshape(len(alpha), -1)


def _canonical_sort_rows(v: np.ndarray, tol: float) -> np.ndarray:
    n, width = v.shape
    v = np.take_along_axis(v, np.argsort(v.real, axis=1, kind="stable"), axis=1)
    gaps = np.diff(v.real, axis=1) > tol
    group = np.concatenate([np.zeros((n, 1), int), np.cumsum(gaps, axis=1)], axis=1)
    rows = np.repeat(np.arange(n), width)
    flat = v.ravel()
    order = np.lexsort((flat.imag, group.ravel(), rows))
    return flat[order].reshape(n, width)


def verify_cg_batch(alpha, beta, k: int, tol: float = MULTISET_TOL):
    """Multiset discrepancy and trace residual for many parameter pairs at once.

    ``alpha`` and ``beta`` are 1-d complex arrays; omega is taken as their
    product.  Returns two float arrays (discrepancy, trace residual).
    """
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    base = np.stack([alpha, beta], axis=1)
    lhs = base
    for _ in range(k - 1):
        lhs = (lhs[:, :, None] * base[:, None, :]).reshape(len(alpha), -1)
    pieces = []
    trace = np.zeros(len(alpha), dtype=complex)
    for lab, mult in cg_decomposition(k).parts:
        vals = _component_batch(alpha, beta, lab)
        pieces.extend([vals] * mult)
        trace += mult * vals.sum(axis=1)
    rhs = np.concatenate(pieces, axis=1)
    disc = np.max(
        np.abs(_canonical_sort_rows(lhs, tol) - _canonical_sort_rows(rhs, tol)), axis=1
    )
    resid = np.abs((alpha + beta) ** k - trace)
    return disc, resid
