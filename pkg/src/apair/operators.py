"""Time and frequency projections and the norm of their composition.

For S in G and Sigma in the dual group, ``P_S`` multiplies by the indicator
of S and ``Q_Sigma`` keeps the Fourier coefficients in Sigma.  The pair is
strongly annihilating exactly when ``||P_S Q_Sigma|| < 1``, and then the
sharp constant is ``1/sqrt(1 - ||P_S Q_Sigma||^2)``.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from .group import (
    INF,
    ExponentPair,
    IndexSet,
    Signal,
    _check_same_group,
    dft_array,
    dft_matrix,
    idft_array,
)

log = logging.getLogger(__name__)

POWER_SEED = 0xA99
DENSE_MANDATORY = 256
SIGMA_ONE_THRESHOLD = 1e-14
RANK_RTOL = 1e-10


def max_dense() -> int:
    """Largest cardinality for which dense SVD is allowed (``APAIR_MAX_DENSE``)."""
    return int(os.environ.get("APAIR_MAX_DENSE", "4096"))


@dataclass(frozen=True)
class NormEstimate:
    value: float
    method: str  # "lanczos" | "dense-svd"
    iterations: int = 0
    residual: float = 0.0
    converged: bool = True

    def __post_init__(self):
        # compositions of orthogonal projections have norm <= 1
        assert -1e-12 <= self.value <= 1 + 1e-9, f"operator norm {self.value} outside [0, 1]"

    def to_dict(self) -> dict:
        return asdict(self)


def apply_PQ(f: Signal, S: IndexSet, Sigma: IndexSet) -> Signal:
    """Return ``P_S Q_Sigma f``."""
    _check_same_group(f.spec, S.spec, Sigma.spec)
    spec = f.spec
    v = idft_array(dft_array(f.values, spec) * Sigma.mask, spec) * S.mask
    return Signal(spec, v)


def apply_QP(f: Signal, S: IndexSet, Sigma: IndexSet) -> Signal:
    """Return ``Q_Sigma P_S f``."""
    _check_same_group(f.spec, S.spec, Sigma.spec)
    spec = f.spec
    v = idft_array(dft_array(f.values * S.mask, spec) * Sigma.mask, spec)
    return Signal(spec, v)


def dense_norm(S: IndexSet, Sigma: IndexSet) -> float:
    """Largest singular value of the DFT submatrix with rows S and columns Sigma."""
    _check_same_group(S.spec, Sigma.spec)
    if len(S) == 0 or len(Sigma) == 0:
        return 0.0
    M = dft_matrix(S.spec, rows=S.indices, cols=Sigma.indices)
    return float(np.linalg.svd(M, compute_uv=False)[0])


def _lanczos_norm(S, Sigma, tol, max_iter, seed, side):
    spec = S.spec
    # work on P_S Q P_S over S-supported vectors, or on Q P_S Q over
    # Sigma-supported spectra; both have top eigenvalue ||P_S Q_Sigma||^2
    keep, other = (S, Sigma) if side == "time" else (Sigma, S)
    fwd, back = (dft_array, idft_array) if side == "time" else (idft_array, dft_array)
    m = len(keep)
    if m == 0 or len(other) == 0:
        return NormEstimate(0.0, "lanczos", 0, 0.0, True)
    idx = keep.indices
    count = 0

    def matvec(x):
        nonlocal count
        count += 1
        full = np.zeros(spec.cardinality, dtype=complex)
        full[idx] = np.ravel(x)
        return back(fwd(full, spec) * other.mask, spec)[idx]

    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    if m <= 2:
        M = np.column_stack([matvec(e) for e in np.eye(m, dtype=complex)])
        lam = float(np.linalg.eigvalsh(M)[-1])
        return NormEstimate(min(math.sqrt(max(lam, 0.0)), 1.0), "lanczos", count, 0.0, True)

    # complex operators go through the general ARPACK driver, which needs ncv >= 3
    ncv = max(3, min(20, m, max_iter))
    op = spla.LinearOperator((m, m), matvec=matvec, dtype=complex)
    try:
        lam, vec = spla.eigsh(op, k=1, which="LA", v0=v0, ncv=ncv, tol=tol, maxiter=max(1, max_iter // ncv))
        converged = True
    except spla.ArpackNoConvergence as err:
        lam, vec = err.eigenvalues, err.eigenvectors
        converged = False
        if len(lam) == 0:
            # fall back to the Rayleigh quotient of the start vector, a valid lower bound
            vec = (v0 / np.linalg.norm(v0))[:, None]
            lam = np.array([np.vdot(vec[:, 0], matvec(vec[:, 0])).real])
    applications = count
    u = vec[:, 0] / np.linalg.norm(vec[:, 0])
    theta = float(np.real(lam[0]))
    residual = float(np.linalg.norm(matvec(u) - theta * u))
    if not converged:
        log.warning("Lanczos did not converge in %d operator applications (residual %.3g)", applications, residual)
    return NormEstimate(min(math.sqrt(max(theta, 0.0)), 1.0), "lanczos", applications, residual, converged)


def operator_norm(
    S: IndexSet,
    Sigma: IndexSet,
    tol: float = 1e-12,
    max_iter: int = 10_000,
    method: str = "auto",
    seed: int = POWER_SEED,
    side: str = "time",
) -> NormEstimate:
    """Estimate ``||P_S Q_Sigma||``.

    ``method="auto"`` uses the dense SVD for groups of at most 256 elements and
    the matrix-free Lanczos route above.  ``"power"`` (the matrix-free route)
    and ``"dense"`` force one route; the dense route is refused above
    :func:`max_dense`.  ``max_iter`` bounds the number of operator
    applications and ``residual`` is ``||M u - theta u||`` for the returned
    Ritz pair, which bounds the error in ``sigma^2``.
    """
    _check_same_group(S.spec, Sigma.spec)
    if not tol > 0:
        raise ValueError("tol must be positive")
    card = S.spec.cardinality
    if method == "auto":
        method = "dense" if card <= DENSE_MANDATORY else "power"
    if method == "dense":
        if card > max_dense():
            raise ValueError(f"dense SVD refused for |G| = {card} > {max_dense()} (set APAIR_MAX_DENSE)")
        return NormEstimate(min(dense_norm(S, Sigma), 1.0), "dense-svd")
    if method == "power":
        if side not in ("time", "freq"):
            raise ValueError(f"side must be 'time' or 'freq', got {side!r}")
        return _lanczos_norm(S, Sigma, tol, max_iter, seed, side)
    raise ValueError(f"unknown method {method!r}")


def exact_annihilation_constant(sigma: float) -> float:
    """Sharp constant ``1/sqrt(1 - sigma^2)``; ``inf`` for a degenerate pair."""
    if not (0.0 <= sigma <= 1.0 + 1e-12):
        raise ValueError(f"sigma must lie in [0, 1], got {sigma}")
    gap = 1.0 - sigma * sigma
    if gap <= SIGMA_ONE_THRESHOLD:
        return INF
    return 1.0 / math.sqrt(gap)


@dataclass(frozen=True)
class WeakCheck:
    annihilating: bool
    min_singular: float


def _min_singular_values(spec, cols: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Smallest and largest singular values of stacked DFT minors.

    ``cols`` has shape (B, s) (time indices), ``rows`` shape (B, r) (frequency
    indices).  Returns arrays (smin, smax); smin is 0 when r < s.
    """
    coords = spec.coords()
    rc = coords[rows]  # (B, r, d)
    cc = coords[cols]  # (B, s, d)
    phase = np.einsum("brk,bsk->brs", rc, cc) % spec.N
    M = spec.c * np.exp(-2j * np.pi * phase / spec.N)
    sv = np.linalg.svd(M, compute_uv=False)
    smax = sv[:, 0]
    if rows.shape[1] < cols.shape[1]:
        smin = np.zeros(len(smax))
    else:
        smin = sv[:, -1]
    return smin, smax


def weak_annihilation_check(S: IndexSet, Sigma: IndexSet) -> WeakCheck:
    """Decide whether some nonzero f has support in S and spectrum in Sigma.

    Such an f exists iff the DFT minor with rows outside Sigma and columns S
    has a nontrivial kernel.  Rank is decided relative to the largest singular
    value (tolerance ``1e-10``).
    """
    _check_same_group(S.spec, Sigma.spec)
    if len(S) == 0:
        return WeakCheck(True, INF)
    rows = Sigma.complement().indices
    if len(rows) < len(S):
        return WeakCheck(False, 0.0)
    smin, smax = _min_singular_values(S.spec, S.indices[None, :], rows[None, :])
    smin, smax = float(smin[0]), float(smax[0])
    return WeakCheck(bool(smin > RANK_RTOL * smax), smin)


def weak_annihilation_batch(spec, S_list: np.ndarray, Sigma_list: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized weak check for many pairs of equal sizes.

    ``S_list`` is (B, s) and ``Sigma_list`` is (B, t) of flat indices.
    Returns (annihilating, min_singular) arrays.
    """
    S_list = np.atleast_2d(np.asarray(S_list, dtype=np.int64))
    Sigma_list = np.atleast_2d(np.asarray(Sigma_list, dtype=np.int64))
    B = S_list.shape[0]
    if S_list.shape[1] == 0:
        return np.ones(B, dtype=bool), np.full(B, INF)
    n = spec.cardinality
    mask = np.ones((B, n), dtype=bool)
    if Sigma_list.shape[1]:
        np.put_along_axis(mask, Sigma_list, False, axis=1)
    r = n - Sigma_list.shape[1]
    if r < S_list.shape[1]:
        return np.zeros(B, dtype=bool), np.zeros(B)
    rows = np.nonzero(mask)[1].reshape(B, r)
    smin, smax = _min_singular_values(spec, S_list, rows)
    return smin > RANK_RTOL * smax, smin


def kernel_witness(S: IndexSet, Sigma: IndexSet) -> Signal | None:
    """A unit signal supported in S with spectrum in Sigma, if one exists."""
    _check_same_group(S.spec, Sigma.spec)
    if len(S) == 0:
        return None
    spec = S.spec
    rows = Sigma.complement().indices
    M = dft_matrix(spec, rows=rows, cols=S.indices)
    if M.shape[0] == 0:
        v = np.zeros(len(S), dtype=np.complex128)
        v[0] = 1.0
    else:
        _, s, vh = np.linalg.svd(M)
        full = np.zeros(len(S))
        full[: len(s)] = s
        if full[-1] > RANK_RTOL * max(full[0], 1e-300):
            return None
        v = vh[-1].conj()
    out = np.zeros(spec.cardinality, dtype=np.complex128)
    out[S.indices] = v
    return Signal(spec, out)


def top_singular_witness(S: IndexSet, Sigma: IndexSet) -> Signal:
    """Unit signal on S maximizing ``||Q_Sigma f|| / ||f||`` (dense SVD)."""
    spec = S.spec
    M = dft_matrix(spec, rows=Sigma.indices, cols=S.indices)
    out = np.zeros(spec.cardinality, dtype=np.complex128)
    if M.size == 0:
        out[S.indices[:1] if len(S) else 0] = 1.0
        return Signal(spec, out)
    _, _, vh = np.linalg.svd(M)
    out[S.indices] = vh[0].conj()
    return Signal(spec, out)


@dataclass
class AnnihilationReport:
    sigma: NormEstimate
    exact_constant: float
    theorem_bounds: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "sigma": self.sigma.to_dict(),
            "exact_constant": self.exact_constant,
            "theorem_bounds": [b.to_dict() for b in self.theorem_bounds],
        }


def annihilation_report(S: IndexSet, Sigma: IndexSet, method: str = "auto", **kw) -> AnnihilationReport:
    """Exact constant for (S, Sigma) next to the closed-form theorem bounds."""
    from . import bounds
    from .restriction import max_energy_ratio

    sigma = operator_norm(S, Sigma, method=method, **kw)
    exact = exact_annihilation_constant(sigma.value)
    card = S.spec.cardinality
    s, t = len(S), len(Sigma)
    tb = []
    if s and t:
        tb.append(bounds.bound_general(S.spec.c, s, t, ExponentPair(1, INF), theorem_id="matolcsi-szucs"))
        tb.append(bounds.bound_ghobber_jaming(s, t, card))
        # (1,1) and (1,2) restriction constants are exact: |G|^{-1/2} |Sigma|^{1/q}
        tb.append(bounds.bound_finite(S.spec.c * t, s, t, card, ExponentPair(1, 1)))
        tb.append(bounds.bound_finite(S.spec.c * math.sqrt(t), s, t, card, ExponentPair(1, 2)))
        if t <= 20:
            ratio = max_energy_ratio(Sigma, mode="exact").max_ratio
            tb.append(bounds.bound_energy_pair(ratio, s, card))
    return AnnihilationReport(sigma, exact, tb)

