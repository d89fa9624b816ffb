"""Eigenvalue sequences: Ramanujan tau data, synthetic samplers, CSV I/O."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from sympy import isprime

SIEVE_MAX = 10**8
TAU_MAX = 10**5

# Six primes just below 2^21.  Residue products stay under 2^42, so a dot
# product of up to 2^17 terms fits in int64; the moduli multiply to ~2^126,
# far above 2 * max|tau(n)| for n <= 10^5 (< 2^100).
_TAU_MODULI = (2097143, 2097133, 2097131, 2097097, 2097091, 2097083)

SOURCES = ("tau", "sato_tate", "dihedral", "csv")


class DataIntegrityError(RuntimeError):
    pass


class SequenceFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


@dataclass(frozen=True)
class PrimeTable:
    limit: int
    primes: np.ndarray

    def __len__(self):
        return len(self.primes)


@dataclass(frozen=True, eq=False)
class EigenvalueSequence:
    """Normalized eigenvalues a_p at increasing primes p.

    ``excluded`` lists the finite primes left out of every sum (the
    ramified places for a form of higher level).
    """

    primes: np.ndarray
    values: np.ndarray
    source: str
    normalization: str = "unitary"
    excluded: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        primes = np.asarray(self.primes, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if primes.shape != values.shape or primes.ndim != 1:
            raise ValueError("primes and values must be 1-d arrays of equal length")
        if len(primes) > 1 and not np.all(np.diff(primes) > 0):
            raise ValueError("primes must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("eigenvalues must be finite")
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        if self.source in ("tau", "sato_tate") and np.any(np.abs(values) > 2.0):
            raise DataIntegrityError(f"{self.source} data must satisfy |a_p| <= 2")
        overlap = set(self.excluded) & set(primes.tolist())
        if overlap:
            raise ValueError(f"primes both listed and excluded: {sorted(overlap)}")
        primes.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "primes", primes)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "excluded", tuple(sorted(int(p) for p in self.excluded)))

    def __len__(self):
        return len(self.primes)

    @property
    def largest_prime(self) -> int:
        return int(self.primes[-1]) if len(self.primes) else 0

    def entries(self):
        return list(zip(self.primes.tolist(), self.values.tolist()))


# -- primes -------------------------------------------------------------------


def sieve_primes(limit: int) -> PrimeTable:
    """All primes <= limit (Eratosthenes on a byte array)."""
    if not 2 <= limit <= SIEVE_MAX:
        raise ValueError(f"sieve limit must be in [2, {SIEVE_MAX}], got {limit}")
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for i in range(3, math.isqrt(limit) + 1, 2):
        if flags[i]:
            flags[i * i :: 2 * i] = False
    return PrimeTable(limit, np.flatnonzero(flags).astype(np.int64))


def first_primes(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("need at least one prime")
    if n < 6:
        bound = 13
    else:
        # Rosser: p_n < n (ln n + ln ln n) for n >= 6
        bound = int(n * (math.log(n) + math.log(math.log(n)))) + 1
    return sieve_primes(bound).primes[:n]


# -- Ramanujan tau ------------------------------------------------------------


def divisor_sigma(limit: int) -> np.ndarray:
    sigma = np.zeros(limit + 1, dtype=np.int64)
    for d in range(1, limit + 1):
        sigma[d::d] += d
    return sigma


def tau_table(limit: int) -> list[int]:
    """Exact tau(n) for 0 <= n <= limit (index 0 holds 0).

    Uses the log-derivative recurrence for prod (1 - q^n)^24,
        n c_n = -24 sum_{m=1}^{n} sigma(m) c_{n-m},
    run in parallel modulo several word-sized primes and recombined by CRT.
    """
    if not 1 <= limit <= TAU_MAX:
        raise ValueError(f"tau limit must be in [1, {TAU_MAX}], got {limit}")
    L = limit  # need c_0 .. c_{limit-1}, since tau(n) = c_{n-1}
    mods = np.array(_TAU_MODULI, dtype=np.int64)
    sigma = divisor_sigma(L)
    rs = sigma[::-1].copy()  # rs[i] = sigma(L - i)
    c = np.zeros((len(mods), L), dtype=np.int64)
    c[:, 0] = 1
    for n in range(1, L):
        acc = (c[:, :n] @ rs[L - n : L]) % mods
        inv = np.array([pow(n, -1, int(m)) for m in _TAU_MODULI], dtype=np.int64)
        c[:, n] = ((-24 * acc) % mods) * inv % mods

    big_n = math.prod(_TAU_MODULI)
    basis = []
    for m in _TAU_MODULI:
        rest = big_n // m
        basis.append(rest * pow(rest, -1, m))
    half = big_n // 2
    out = [0]
    residues = c.T.tolist()
    for row in residues:
        x = sum(r * b for r, b in zip(row, basis)) % big_n
        out.append(x - big_n if x > half else x)
    return out


def tau_sequence(limit: int, table: list[int] | None = None) -> EigenvalueSequence:
    """Normalized a_p = tau(p) / p^{11/2} for primes p <= limit.

    ``table`` may pass in a precomputed :func:`tau_table` covering ``limit``.
    """
    if not 2 <= limit <= TAU_MAX:
        raise ValueError(f"tau limit must be in [2, {TAU_MAX}], got {limit}")
    tau = table if table is not None and len(table) > limit else tau_table(limit)
    primes = sieve_primes(limit).primes
    vals = np.empty(len(primes))
    for i, p in enumerate(primes.tolist()):
        t = tau[p]
        # Deligne: |tau(p)| < 2 p^{11/2}  <=>  tau(p)^2 < 4 p^11
        if t * t >= 4 * p**11:
            raise DataIntegrityError(f"tau({p}) = {t} violates the Deligne bound")
        vals[i] = t / (p**5 * math.sqrt(p))
    return EigenvalueSequence(primes, vals, "tau", meta={"limit": limit})


# -- synthetic samplers ---------------------------------------------------------


def sato_tate_angles(n: int, rng: np.random.Generator) -> np.ndarray:
    """Angles with density (2/pi) sin^2 on [0, pi], by rejection from uniform."""
    out = []
    have = 0
    batch = 2 * n + 64
    while have < n:
        theta = rng.uniform(0.0, math.pi, batch)
        u = rng.uniform(0.0, 1.0, batch)
        keep = theta[u < np.sin(theta) ** 2]
        out.append(keep)
        have += len(keep)
    return np.concatenate(out)[:n]


def sample_sato_tate(n: int, seed: int) -> EigenvalueSequence:
    if n < 1:
        raise ValueError("sample size must be positive")
    rng = np.random.default_rng(seed)
    vals = 2.0 * np.cos(sato_tate_angles(n, rng))
    return EigenvalueSequence(
        first_primes(n), vals, "sato_tate", meta={"count": n, "seed": seed}
    )


def sample_dihedral(n: int, seed: int) -> EigenvalueSequence:
    """Half zeros, half 2cos(theta) with theta uniform on [0, pi]."""
    if n < 1:
        raise ValueError("sample size must be positive")
    rng = np.random.default_rng(seed)
    zero = rng.uniform(0.0, 1.0, n) < 0.5
    theta = rng.uniform(0.0, math.pi, n)
    vals = np.where(zero, 0.0, 2.0 * np.cos(theta))
    return EigenvalueSequence(
        first_primes(n), vals, "dihedral", meta={"count": n, "seed": seed}
    )


# -- CSV ------------------------------------------------------------------------

CSV_HEADER = "p,a_p"


def load_csv(path) -> EigenvalueSequence:
    """Read a ``p,a_p`` file.  See README for the exact format."""
    path = Path(path)
    try:
        text = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise SequenceFormatError(f"not valid UTF-8 ({exc})", path=path) from None
    lines = text.splitlines()
    excluded: list[int] = []
    seen_header = False
    rows: dict[int, tuple[float, int]] = {}

    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if not seen_header:
            if line.startswith("#"):
                body = line[1:].strip()
                if body.lower().startswith("excluded:"):
                    for tok in body.split(":", 1)[1].split():
                        try:
                            q = int(tok)
                        except ValueError:
                            raise SequenceFormatError(
                                f"bad excluded prime {tok!r}", lineno, path
                            ) from None
                        if not isprime(q):
                            raise SequenceFormatError(
                                f"excluded entry {q} is not prime", lineno, path
                            )
                        excluded.append(q)
                continue
            if line != CSV_HEADER:
                raise SequenceFormatError(
                    f"expected header {CSV_HEADER!r}, got {line!r}", lineno, path
                )
            seen_header = True
            continue
        if line.startswith("#"):
            raise SequenceFormatError("comments are only allowed before the header", lineno, path)
        parts = line.split(",")
        if len(parts) != 2:
            raise SequenceFormatError(f"expected 2 fields, got {len(parts)}", lineno, path)
        try:
            p = int(parts[0].strip(), 10)
        except ValueError:
            raise SequenceFormatError(f"bad prime {parts[0]!r}", lineno, path) from None
        try:
            a = float(parts[1].strip())
        except ValueError:
            raise SequenceFormatError(f"bad eigenvalue {parts[1]!r}", lineno, path) from None
        if not math.isfinite(a):
            raise SequenceFormatError(f"non-finite eigenvalue {parts[1]!r}", lineno, path)
        if not isprime(p):
            raise SequenceFormatError(f"index {p} is not prime", lineno, path)
        if p in rows:
            raise SequenceFormatError(
                f"duplicate prime {p} (first seen on line {rows[p][1]})", lineno, path
            )
        rows[p] = (a, lineno)

    if not seen_header:
        raise SequenceFormatError(f"missing header {CSV_HEADER!r}", path=path)
    if not rows:
        raise SequenceFormatError("no data rows", path=path)
    both = sorted(set(excluded) & set(rows))
    if both:
        raise SequenceFormatError(f"primes both listed and excluded: {both}", path=path)

    primes = sorted(rows)
    return EigenvalueSequence(
        np.array(primes, dtype=np.int64),
        np.array([rows[p][0] for p in primes]),
        "csv",
        excluded=tuple(excluded),
        meta={"path": str(path)},
    )


def write_csv(seq: EigenvalueSequence, path) -> None:
    lines = []
    if seq.excluded:
        lines.append("# excluded: " + " ".join(str(p) for p in seq.excluded))
    lines.append(CSV_HEADER)
    for p, a in seq.entries():
        lines.append(f"{p},{a!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- bound checks -----------------------------------------------------------------


class Violation(NamedTuple):
    p: int
    a: float
    bound: float


def kim_sarnak_bound(p) -> np.ndarray:
    return 2.0 * np.asarray(p, dtype=float) ** (7 / 64)


def validate_kim_sarnak(seq: EigenvalueSequence) -> list[Violation]:
    """Entries with |a_p| > 2 p^{7/64}."""
    bound = kim_sarnak_bound(seq.primes)
    bad = np.flatnonzero(np.abs(seq.values) > bound)
    return [
        Violation(int(seq.primes[i]), float(seq.values[i]), float(bound[i])) for i in bad
    ]
