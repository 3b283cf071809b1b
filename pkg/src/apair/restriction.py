"""(p, q)-restriction constants of spectral sets and additive energy.

A set Sigma of frequencies satisfies a (p, q)-restriction estimate with
constant rho when ``||f^|_Sigma||_q <= rho ||f||_p`` for every f on G.  This
module offers exact values where closed forms exist, ascent lower bounds,
interpolation and Hölder upper bounds, and the additive-energy constant for
the exponent pair (4/3, 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .group import (
    INF,
    ExponentPair,
    IndexSet,
    Signal,
    conjugate,
    dft_array,
    idft_array,
    inv,
    lp_norm_array,
)

KINDS = ("exact", "lower", "upper", "formula")
EXACT_ENERGY_CAP = 20


class UnsupportedExponents(ValueError):
    pass


@dataclass
class RestrictionBound:
    exponents: ExponentPair
    value: float
    kind: str
    witness: Signal | None = None
    normalized_C: float | None = None
    caveat: str | None = None

    def to_dict(self) -> dict:
        return {
            "p": self.exponents.p,
            "q": self.exponents.q,
            "value": self.value,
            "kind": self.kind,
            "normalized_C": self.normalized_C,
            "caveat": self.caveat,
        }


def _normalized_C(value: float, set_size: int, card: int, q: float) -> float | None:
    """Invert ``rho = C |Sigma|^{1/q} / |G|^{1/2}``."""
    if set_size == 0:
        return None
    return value * math.sqrt(card) / set_size ** inv(q)


def _bound(Sigma: IndexSet, e: ExponentPair, value: float, kind: str, **kw) -> RestrictionBound:
    C = _normalized_C(value, len(Sigma), Sigma.spec.cardinality, e.q)
    return RestrictionBound(e, float(value), kind, normalized_C=C, **kw)


# -- exact values --------------------------------------------------------------------

def restriction_norm_exact(Sigma: IndexSet, e: ExponentPair) -> RestrictionBound:
    """Exact restriction constant for (2,2), (1,q) and (p,inf).

    * (2,2): the rows of the unitary DFT indexed by Sigma are orthonormal, so
      the constant is 1 (0 for empty Sigma).
    * (1,q): extreme points of the l^1 ball are phased deltas and every DFT
      entry has modulus ``|G|^{-1/2}``, giving ``|G|^{-1/2} |Sigma|^{1/q}``.
    * (p,inf): duality against a single character gives ``|G|^{-1/2} |G|^{1/p'}``.
    """
    spec = Sigma.spec
    card = spec.cardinality
    if len(Sigma) == 0:
        return _bound(Sigma, e, 0.0, "exact")
    if e.p == 2 and e.q == 2:
        value = 1.0
    elif e.p == 1:
        value = spec.c * len(Sigma) ** inv(e.q)
    elif e.q == INF:
        value = spec.c * card ** inv(e.p_conj)
    else:
        raise UnsupportedExponents(
            f"no closed form for (p,q)=({e.p},{e.q}); use restriction_norm_lower / restriction_norm_upper_interp"
        )
    return _bound(Sigma, e, value, "exact")


# -- ascent ---------------------------------------------------------------------------

def duality_map(v: np.ndarray, r: float) -> np.ndarray:
    """Row-wise u with <u, v> = ||v||_r ||u||_{r'} (unnormalized)."""
    a = np.abs(v)
    with np.errstate(divide="ignore", invalid="ignore"):
        phase = np.where(a > 0, v / np.where(a > 0, a, 1.0), 0.0)
    if r == INF:
        out = np.zeros_like(v)
        idx = np.argmax(a, axis=-1)
        rows = np.arange(v.shape[0])
        out[rows, idx] = phase[rows, idx]
        return out
    if r == 1:
        return phase
    if r == 2:
        return v.copy()
    scale = a.max(axis=-1, keepdims=True)
    scale = np.where(scale > 0, scale, 1.0)
    return phase * (a / scale) ** (r - 1.0)


def nonlinear_power_ascent(apply, adjoint, X0: np.ndarray, p: float, q: float,
                           max_iter: int = 500, rtol: float = 1e-13):
    """Maximize ``||A x||_q / ||x||_p`` from each row of ``X0``.

    Uses the nonlinear power update ``x <- J_{p'}(A^* J_q(A x))`` where ``J_r``
    is the l^r duality map; for p = q = 2 this is ordinary power iteration.
    The best ratio seen per start is kept, so the result is always a valid
    lower bound.  Returns (best_ratio, best_x) arrays over starts.
    """
    X = np.array(X0, dtype=np.complex128)
    pc = conjugate(p)

    def ratio(X):
        num = lp_norm_array(apply(X), q)
        den = lp_norm_array(X, p)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)

    best = ratio(X)
    best_x = X.copy()
    prev = best.copy()
    active = np.ones(len(X), dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        Xa = X[active]
        Z = adjoint(duality_map(apply(Xa), q))
        Xn = duality_map(Z, pc)
        nrm = lp_norm_array(Xn, p)
        dead = nrm == 0
        nrm[dead] = 1.0
        Xn = Xn / nrm[:, None]
        Xn[dead] = Xa[dead]
        X[active] = Xn
        r = ratio(Xn)
        ia = np.flatnonzero(active)
        improved = r > best[ia]
        best[ia[improved]] = r[improved]
        best_x[ia[improved]] = Xn[improved]
        stalled = (np.abs(r - prev[ia]) <= rtol * np.maximum(r, 1e-300)) | dead
        prev[ia] = r
        active[ia[stalled]] = False
    return best, best_x


def _restriction_ops(Sigma: IndexSet):
    spec = Sigma.spec
    idx = Sigma.indices

    def apply(X):
        return dft_array(X, spec)[:, idx]

    def adjoint(W):
        full = np.zeros((W.shape[0], spec.cardinality), dtype=np.complex128)
        full[:, idx] = W
        return idft_array(full, spec)

    return apply, adjoint


def _random_starts(n: int, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return (rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))) / math.sqrt(2)


def restriction_norm_lower(
    Sigma: IndexSet,
    e: ExponentPair,
    restarts: int = 8,
    seed: int = 0,
    max_iter: int = 500,
    deltas: bool = True,
) -> RestrictionBound:
    """Empirical sup of ``||f^|_Sigma||_q / ||f||_p`` (a lower bound).

    Starts from ``restarts`` seeded Gaussian signals plus every delta.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    spec = Sigma.spec
    n = spec.cardinality
    if len(Sigma) == 0:
        return _bound(Sigma, e, 0.0, "lower", witness=Signal.delta(spec, 0))
    starts = [_random_starts(n, restarts, seed)]
    if deltas:
        starts.append(np.eye(n, dtype=np.complex128))
    X0 = np.vstack(starts)
    apply, adjoint = _restriction_ops(Sigma)
    best, best_x = nonlinear_power_ascent(apply, adjoint, X0, e.p, e.q, max_iter=max_iter)
    i = int(np.argmax(best))
    return _bound(Sigma, e, float(best[i]), "lower", witness=Signal(spec, best_x[i]))


def restriction_norm_upper_interp(Sigma: IndexSet, e: ExponentPair) -> RestrictionBound:
    """Riesz-Thorin between the exact (2,2) and (1,2) constants, for 1 <= p <= 2, q = 2."""
    if not (1.0 <= e.p <= 2.0 and e.q == 2.0):
        raise UnsupportedExponents("interpolation supports 1 <= p <= 2 with q = 2 only")
    r22 = restriction_norm_exact(Sigma, ExponentPair(2, 2)).value
    r12 = restriction_norm_exact(Sigma, ExponentPair(1, 2)).value
    theta = 2.0 / e.p - 1.0
    value = r22 ** (1.0 - theta) * r12**theta
    return _bound(Sigma, e, value, "upper")


def holder_convert(b: RestrictionBound, target: ExponentPair, sizes: tuple[int, int]) -> RestrictionBound:
    """Move a bound from (p,q) to (r,s) with r >= p, s <= q.

    ``rho_{r,s} = |Sigma|^{1/s - 1/q} |G|^{1/p - 1/r} rho_{p,q}``.  The result is
    only an inequality, so an exact input becomes an upper bound.
    """
    if b.kind == "lower":
        raise ValueError("a lower bound cannot be converted into a valid restriction constant")
    p, q = b.exponents.p, b.exponents.q
    r, s = target.p, target.q
    if r < p or s > q:
        raise ValueError(f"need r >= p and s <= q, got ({p},{q}) -> ({r},{s})")
    set_size, card = sizes
    value = set_size ** (inv(s) - inv(q)) * card ** (inv(p) - inv(r)) * b.value
    same = (r == p and s == q)
    kind = b.kind if same or b.kind == "formula" else "upper"
    C = _normalized_C(value, set_size, card, s)
    return RestrictionBound(target, float(value), kind, normalized_C=C, caveat=b.caveat)


# -- additive energy ------------------------------------------------------------------

def additive_energy(F: IndexSet) -> int:
    """Number of quadruples (x, y, x', y') in F^4 with x + y = x' + y'."""
    if len(F) == 0:
        return 0
    idx = F.indices
    sums = F.spec.add(idx[:, None], idx[None, :]).ravel()
    r = np.bincount(sums)
    return int(np.dot(r, r))


@dataclass
class EnergyReport:
    set: IndexSet
    energy: int
    max_ratio: float
    max_ratio_kind: str  # "exact" | "greedy-lower"
    witness_subset: IndexSet = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {
            "set": list(self.set.members),
            "energy": self.energy,
            "max_ratio": self.max_ratio,
            "max_ratio_kind": self.max_ratio_kind,
            "witness_subset": list(self.witness_subset.members),
        }


def _subset_bits(count: int, width: int) -> np.ndarray:
    m = np.arange(count, dtype=np.int64)[:, None]
    return ((m >> np.arange(width)) & 1).astype(np.float64)


def _exact_max_ratio(Sigma: IndexSet) -> tuple[float, int, int]:
    """Exhaustive max of energy/|F|^2 over nonempty F in Sigma.

    Returns (ratio, energy, mask) where bit i of ``mask`` selects the i-th
    member.  Ties keep the smallest mask.
    """
    spec = Sigma.spec
    m = Sigma.indices
    k = len(m)
    zid = np.unique(spec.add(m[:, None], m[None, :]), return_inverse=True)[1].reshape(k, k)
    nz = int(zid.max()) + 1
    onehot = np.zeros((k, k, nz))
    onehot[np.arange(k)[:, None], np.arange(k)[None, :], zid] = 1.0

    lo = min(k, 10)
    hi = k - lo
    ML = _subset_bits(1 << lo, lo)
    # representation counts inside the low block, for every low subset
    RL = np.einsum("ai,aj,ijz->az", ML, ML, onehot[:lo, :lo])
    popL = ML.sum(1)
    if hi:
        MH = _subset_bits(1 << hi, hi)
        RH = np.einsum("ai,aj,ijz->az", MH, MH, onehot[lo:, lo:])
        # CH[h] (lo x nz): for each low element, counts of sums with selected high elements
        CH = np.einsum("ah,hlz->alz", MH, onehot[lo:, :lo])
        popH = MH.sum(1)
    else:
        RH = np.zeros((1, nz))
        CH = np.zeros((1, lo, nz))
        popH = np.zeros(1)

    best, best_e, best_mask = -1.0, 0, 0
    for h in range(RH.shape[0]):
        R = RL + RH[h] + 2.0 * (ML @ CH[h])
        energy = np.einsum("az,az->a", R, R)
        size = popL + popH[h]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(size > 0, energy / np.where(size > 0, size, 1.0) ** 2, -1.0)
        a = int(np.argmax(ratio))
        if ratio[a] > best:
            best, best_e, best_mask = float(ratio[a]), int(round(energy[a])), (h << lo) | a
    return best, best_e, best_mask


def _greedy_max_ratio(Sigma: IndexSet) -> tuple[float, tuple[int, ...]]:
    spec = Sigma.spec
    members = Sigma.indices
    k = len(members)
    doubles = spec.add(members, members)
    best, best_set = -1.0, ()
    for start in range(k):
        r = np.zeros(spec.cardinality, dtype=np.int64)
        chosen = [start]
        in_F = np.zeros(k, dtype=bool)
        in_F[start] = True
        r[doubles[start]] += 1
        energy = 1
        if 1.0 > best:
            best, best_set = 1.0, (int(members[start]),)
        while len(chosen) < k:
            cands = np.flatnonzero(~in_F)
            F = members[chosen]
            sums = spec.add(members[cands][:, None], F[None, :])
            delta = 4 * r[sums].sum(1) + 4 * len(chosen) + 2 * r[doubles[cands]] + 1
            size = len(chosen) + 1
            ratios = (energy + delta) / size**2
            j = int(np.argmax(ratios))
            c = int(cands[j])
            np.add.at(r, sums[j], 2)
            r[doubles[c]] += 1
            energy += int(delta[j])
            chosen.append(c)
            in_F[c] = True
            if ratios[j] > best:
                best, best_set = float(ratios[j]), tuple(int(x) for x in members[chosen])
    return best, best_set


def max_energy_ratio(Sigma: IndexSet, mode: str = "exact") -> EnergyReport:
    """Max of energy(F)/|F|^2 over nonempty F inside Sigma.

    ``exact`` scans all subsets (|Sigma| <= 20).  ``greedy`` grows F from
    every singleton by the element with the best resulting ratio, lowest index
    on ties, and reports the best ratio met (a lower bound on the max).
    """
    if len(Sigma) == 0:
        raise ValueError("max_energy_ratio needs a nonempty set")
    energy = additive_energy(Sigma)
    if mode == "exact":
        if len(Sigma) > EXACT_ENERGY_CAP:
            raise ValueError(f"exact mode is limited to |Sigma| <= {EXACT_ENERGY_CAP}, got {len(Sigma)}")
        ratio, _, mask = _exact_max_ratio(Sigma)
        members = Sigma.indices
        witness = tuple(int(members[i]) for i in range(len(members)) if (mask >> i) & 1)
        kind = "exact"
    elif mode == "greedy":
        ratio, witness = _greedy_max_ratio(Sigma)
        kind = "greedy-lower"
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return EnergyReport(Sigma, energy, ratio, kind, IndexSet(Sigma.spec, witness))


def energy_restriction_constant(Sigma: IndexSet, ratio: EnergyReport) -> RestrictionBound:
    """Energy formula ``|G|^{-1/4} (max_F energy(F)/|F|^2)^{1/4}`` at (4/3, 2).

    The value is reported with kind ``"formula"``, not ``"upper"``. Weighted
    spectra can beat it: on ``{0, 1, 2}`` in Z_16 the spectrum ``(1, sqrt(1.5), 1)``
    gives ``(15/7 / 16)^{1/4} = 0.60495`` against the formula value
    ``(19/9 / 16)^{1/4} = 0.60270``.
    """
    if ratio.set != Sigma:
        raise ValueError("energy report was computed for a different set")
    value = Sigma.spec.cardinality ** -0.25 * ratio.max_ratio**0.25
    e = ExponentPair(4 / 3, 2)
    caveat = "subset energy ratios ignore spectral weights, so this value can undershoot the true constant"
    if ratio.max_ratio_kind != "exact":
        caveat += "; the greedy ratio is itself a lower bound on the max"
    return _bound(Sigma, e, value, "formula", caveat=caveat)

