"""Finite groups (Z/NZ)^d, signals on them, and the unitary DFT.

Flat indices are row-major: the last coordinate varies fastest.  The Fourier
transform uses the symmetric ``N**(-d/2)`` normalization in both directions so
that it is unitary on l^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

INF = math.inf


class GroupMismatchError(ValueError):
    """Raised when objects living on different groups are combined."""


@dataclass(frozen=True)
class GroupSpec:
    """The group (Z/NZ)^d with counting measure."""

    N: int
    d: int = 1
    cardinality: int = field(init=False)
    c: float = field(init=False)

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"modulus must be a positive integer, got {self.N!r}")
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.d!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "d", int(self.d))
        # python ints do not overflow; keep an explicit cap so numpy indexing stays int64
        card = self.N**self.d
        if card >= 2**62:
            raise OverflowError(f"|G| = {self.N}^{self.d} is too large")
        object.__setattr__(self, "cardinality", card)
        object.__setattr__(self, "c", 1.0 / math.sqrt(card))

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.d

    @classmethod
    def parse(cls, text: str) -> "GroupSpec":
        """Parse the ``NxD`` syntax, e.g. ``16x1`` or ``4x2``."""
        parts = text.lower().split("x")
        if len(parts) == 1:
            return cls(int(parts[0]), 1)
        if len(parts) != 2:
            raise ValueError(f"group must look like NxD, got {text!r}")
        return cls(int(parts[0]), int(parts[1]))

    def __str__(self):
        return f"{self.N}x{self.d}"

    def to_dict(self) -> dict:
        return {"N": self.N, "d": self.d}

    def coords(self) -> np.ndarray:
        """All group elements as a (|G|, d) integer array in flat-index order."""
        grids = np.indices(self.shape).reshape(self.d, -1)
        return grids.T.copy()

    def add(self, i, j) -> np.ndarray:
        """Group addition on flat indices (broadcasting)."""
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        out = np.zeros(np.broadcast(i, j).shape, dtype=np.int64)
        stride = 1
        for _ in range(self.d):
            a = (i // stride) % self.N
            b = (j // stride) % self.N
            out += ((a + b) % self.N) * stride
            stride *= self.N
        return out

    def neg(self, i) -> np.ndarray:
        i = np.asarray(i, dtype=np.int64)
        out = np.zeros_like(i)
        stride = 1
        for _ in range(self.d):
            a = (i // stride) % self.N
            out += ((-a) % self.N) * stride
            stride *= self.N
        return out


def _check_same_group(*specs: GroupSpec) -> GroupSpec:
    first = specs[0]
    for s in specs[1:]:
        if s != first:
            raise GroupMismatchError(f"group mismatch: {first} vs {s}")
    return first


def encode_index(coords: Sequence[int], spec: GroupSpec) -> int:
    if len(coords) != spec.d:
        raise ValueError(f"expected {spec.d} coordinates, got {len(coords)}")
    idx = 0
    for c in coords:
        idx = idx * spec.N + (int(c) % spec.N)
    return idx


def decode_index(index: int, spec: GroupSpec) -> tuple[int, ...]:
    if not 0 <= index < spec.cardinality:
        raise ValueError(f"index {index} outside [0, {spec.cardinality})")
    out = []
    for _ in range(spec.d):
        index, r = divmod(int(index), spec.N)
        out.append(r)
    return tuple(reversed(out))


@dataclass(frozen=True, eq=False)
class Signal:
    """A complex function on G (or on the dual group), stored flat."""

    spec: GroupSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128).reshape(-1)
        if v.shape[0] != self.spec.cardinality:
            raise ValueError(
                f"signal has {v.shape[0]} values, group {self.spec} needs {self.spec.cardinality}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("signal values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.spec.cardinality

    def __eq__(self, other):
        if not isinstance(other, Signal):
            return NotImplemented
        return self.spec == other.spec and np.array_equal(self.values, other.values)

    __hash__ = None

    def norm(self, p: float = 2.0, subset: "IndexSet | None" = None) -> float:
        return lp_norm(self, p, subset)

    @classmethod
    def zeros(cls, spec: GroupSpec) -> "Signal":
        return cls(spec, np.zeros(spec.cardinality, dtype=np.complex128))

    @classmethod
    def delta(cls, spec: GroupSpec, index: int = 0) -> "Signal":
        v = np.zeros(spec.cardinality, dtype=np.complex128)
        v[index] = 1.0
        return cls(spec, v)


@dataclass(frozen=True)
class IndexSet:
    """A sorted, deduplicated subset of G (or of the dual group)."""

    spec: GroupSpec
    members: tuple[int, ...] = ()

    def __post_init__(self):
        members = tuple(sorted({int(m) for m in self.members}))
        if members and (members[0] < 0 or members[-1] >= self.spec.cardinality):
            raise ValueError(f"indices must lie in [0, {self.spec.cardinality})")
        object.__setattr__(self, "members", members)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, item):
        return int(item) in set(self.members)

    @classmethod
    def full(cls, spec: GroupSpec) -> "IndexSet":
        return cls(spec, tuple(range(spec.cardinality)))

    @classmethod
    def empty(cls, spec: GroupSpec) -> "IndexSet":
        return cls(spec, ())

    @classmethod
    def from_mask(cls, spec: GroupSpec, mask) -> "IndexSet":
        return cls(spec, tuple(np.flatnonzero(np.asarray(mask)).tolist()))

    @property
    def indices(self) -> np.ndarray:
        return np.array(self.members, dtype=np.int64)

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.spec.cardinality, dtype=bool)
        m[list(self.members)] = True
        return m

    def complement(self) -> "IndexSet":
        return IndexSet.from_mask(self.spec, ~self.mask)

    def union(self, other: "IndexSet") -> "IndexSet":
        _check_same_group(self.spec, other.spec)
        return IndexSet(self.spec, self.members + other.members)

    def issubset(self, other: "IndexSet") -> bool:
        return set(self.members) <= set(other.members)


@dataclass(frozen=True)
class ExponentPair:
    """Exponents (p, q) in [1, inf]; ``math.inf`` is the infinite exponent."""

    p: float
    q: float

    def __post_init__(self):
        for name in ("p", "q"):
            v = float(getattr(self, name))
            if not v >= 1.0:
                raise ValueError(f"exponent {name} must lie in [1, inf], got {v}")
            object.__setattr__(self, name, v)

    @property
    def p_conj(self) -> float:
        return conjugate(self.p)

    @property
    def q_conj(self) -> float:
        return conjugate(self.q)


def conjugate(p: float) -> float:
    """Hölder conjugate with 1' = inf and inf' = 1."""
    if p == 1:
        return INF
    if p == INF:
        return 1.0
    return p / (p - 1.0)


def inv(p: float) -> float:
    """1/p with 1/inf = 0."""
    return 0.0 if p == INF else 1.0 / p


def parse_exponent(text) -> float:
    """Parse ``2``, ``4/3``, ``inf`` into an extended real."""
    if isinstance(text, (int, float)):
        return float(text)
    t = str(text).strip().lower()
    if t in ("inf", "infinity", "oo"):
        return INF
    if "/" in t:
        a, b = t.split("/")
        return float(a) / float(b)
    return float(t)


# -- transforms ---------------------------------------------------------------

def dft_array(x: np.ndarray, spec: GroupSpec) -> np.ndarray:
    """Unitary DFT over the last axis of ``x`` (flat layout); leading axes batch."""
    x = np.asarray(x, dtype=np.complex128)
    lead = x.shape[:-1]
    y = np.fft.fftn(x.reshape(lead + spec.shape), axes=tuple(range(-spec.d, 0)), norm="ortho")
    return y.reshape(lead + (spec.cardinality,))


def idft_array(x: np.ndarray, spec: GroupSpec) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    lead = x.shape[:-1]
    y = np.fft.ifftn(x.reshape(lead + spec.shape), axes=tuple(range(-spec.d, 0)), norm="ortho")
    return y.reshape(lead + (spec.cardinality,))


def dft(f: Signal) -> Signal:
    return Signal(f.spec, dft_array(f.values, f.spec))


def idft(F: Signal) -> Signal:
    return Signal(F.spec, idft_array(F.values, F.spec))


def dft_matrix(spec: GroupSpec, rows=None, cols=None) -> np.ndarray:
    """Entries ``c * exp(-2 pi i <m, n> / N)`` for m in ``rows`` and n in ``cols``."""
    coords = spec.coords()
    r = coords if rows is None else coords[np.asarray(rows, dtype=np.int64)]
    c = coords if cols is None else coords[np.asarray(cols, dtype=np.int64)]
    phase = (r @ c.T) % spec.N
    return spec.c * np.exp(-2j * np.pi * phase / spec.N)


# -- norms ----------------------------------------------------------------------

def lp_norm_array(x: np.ndarray, p: float, axis: int = -1) -> np.ndarray:
    a = np.abs(np.asarray(x))
    if p == INF:
        return a.max(axis=axis, initial=0.0)
    if p == 2:
        return np.sqrt(np.sum(a * a, axis=axis))
    if p == 1:
        return a.sum(axis=axis)
    # scale by the max modulus to avoid overflow/underflow in |x|^p
    m = a.max(axis=axis, keepdims=True, initial=0.0)
    safe = np.where(m > 0, m, 1.0)
    s = np.sum((a / safe) ** p, axis=axis) ** (1.0 / p)
    return s * np.squeeze(safe, axis=axis)


def lp_norm(f, p: float, subset: IndexSet | None = None) -> float:
    """Counting-measure L^p norm of ``f``, optionally over ``subset``."""
    p = parse_exponent(p)
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    values = f.values if isinstance(f, Signal) else np.asarray(f)
    if subset is not None:
        if isinstance(f, Signal):
            _check_same_group(f.spec, subset.spec)
        values = values[subset.indices]
    if values.size == 0:
        return 0.0
    return float(lp_norm_array(values, p))


# -- random signals --------------------------------------------------------------

def random_signal(
    spec: GroupSpec,
    seed: int,
    law: str = "complex-gaussian",
    k: int | None = None,
    support: Iterable[int] | IndexSet | None = None,
) -> Signal:
    """Seeded test signal.

    ``law`` is one of ``complex-gaussian``, ``unit-sphere`` or ``sparse``.  The
    sparse law draws a Gaussian spectrum on ``support`` (or on ``k`` random
    frequencies when no support is given) and returns its inverse DFT.
    """
    if seed is None or int(seed) != seed or seed < 0:
        raise ValueError(f"seed must be a nonnegative integer, got {seed!r}")
    rng = np.random.default_rng(int(seed))
    n = spec.cardinality
    if law in ("complex-gaussian", "unit-sphere"):
        v = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2)
        if law == "unit-sphere":
            v /= np.linalg.norm(v)
        return Signal(spec, v)
    if law == "sparse":
        if support is None:
            if k is None or not 0 <= k <= n:
                raise ValueError(f"sparse law needs 0 <= k <= {n}, got {k!r}")
            idx = rng.choice(n, size=k, replace=False)
        else:
            idx = support.indices if isinstance(support, IndexSet) else np.array(sorted(set(support)), dtype=np.int64)
            if k is not None and k != len(idx):
                raise ValueError(f"k={k} does not match support size {len(idx)}")
            if len(idx) > n or (len(idx) and (idx.min() < 0 or idx.max() >= n)):
                raise ValueError("support outside the group")
        spectrum = np.zeros(n, dtype=np.complex128)
        spectrum[idx] = (rng.standard_normal(len(idx)) + 1j * rng.standard_normal(len(idx))) / math.sqrt(2)
        return Signal(spec, idft_array(spectrum, spec))
    raise ValueError(f"unknown law {law!r}")
