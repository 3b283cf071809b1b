"""Recovering a signal with known spectral support from partial samples.

The iteration alternates between keeping the measured values on T and
projecting onto signals whose spectrum lies in Upsilon.  The error map is
``P_{G\\T} Q_Upsilon``, so the iteration contracts geometrically at rate
``||P_{G\\T} Q_Upsilon||`` whenever that norm is below 1.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations, islice

import numpy as np

from .group import GroupSpec, IndexSet, Signal, _check_same_group, dft_array, idft_array
from .operators import kernel_witness, operator_norm, weak_annihilation_batch

log = logging.getLogger(__name__)

UNIQUENESS_MAX_CARD = 64
UNIQUENESS_MAX_SUPPORTS = 10**6


@dataclass
class RecoveryProblem:
    spec: GroupSpec
    measured: Signal
    T: IndexSet
    Upsilon: IndexSet
    tol: float = 1e-10
    max_iter: int = 10_000

    def __post_init__(self):
        _check_same_group(self.spec, self.measured.spec, self.T.spec, self.Upsilon.spec)
        if len(self.T) == 0:
            raise ValueError("T (sample locations) must be nonempty")
        if len(self.Upsilon) == 0:
            raise ValueError("Upsilon (spectral support) must be nonempty")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class RecoveryResult:
    estimate: Signal
    iterations: int
    residual_history: list = field(default_factory=list)
    contraction_rate: float = 0.0
    converged: bool = False
    measurement_mismatch: float = 0.0
    spectral_leakage: float = 0.0

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "residual_history": list(self.residual_history),
            "contraction_rate": self.contraction_rate,
            "converged": self.converged,
            "measurement_mismatch": self.measurement_mismatch,
            "spectral_leakage": self.spectral_leakage,
        }


def iterative_projection(prob: RecoveryProblem) -> RecoveryResult:
    """Alternate between the samples on T and spectral support in Upsilon.

    Starts from ``s_0 = mu 1_T``; each step computes
    ``nu = F^{-1}[F[s_j] 1_Upsilon]`` and sets ``s_{j+1} = mu 1_T + nu 1_{G\\T}``.
    Stops when ``||s_{j+1} - s_j||_2 <= tol`` or after ``max_iter`` steps.
    ``contraction_rate`` is the largest observed ratio of successive
    residuals after the first step.
    """
    spec = prob.spec
    t_mask = prob.T.mask
    u_mask = prob.Upsilon.mask
    mu_T = prob.measured.values * t_mask

    def project(s):
        return idft_array(dft_array(s, spec) * u_mask, spec)

    s = mu_T.copy()
    history = []
    converged = False
    for _ in range(prob.max_iter):
        nu = project(s)
        s_new = np.where(t_mask, mu_T, nu)
        res = float(np.linalg.norm(s_new - s))
        history.append(res)
        s = s_new
        if res <= prob.tol:
            converged = True
            break
    if not converged:
        log.warning("iterative projection stopped after %d iterations (residual %.3g)",
                    prob.max_iter, history[-1])
    estimate = project(s)

    rate = 0.0
    for a, b in zip(history[1:-1], history[2:]):
        if a > 0:
            rate = max(rate, b / a)
    mismatch = float(np.linalg.norm((estimate - mu_T)[t_mask]))
    leakage = float(np.linalg.norm(dft_array(estimate, spec)[~u_mask]))
    if mismatch > 10 * prob.tol and converged:
        log.info("converged with measurement mismatch %.3g (inconsistent or noisy data)", mismatch)
    return RecoveryResult(Signal(spec, estimate), len(history), history, rate, converged, mismatch, leakage)


def contraction_rate(T: IndexSet, Upsilon: IndexSet, **kw) -> float:
    """``||P_{G\\T} Q_Upsilon||``; below 1 means geometric convergence."""
    return operator_norm(T.complement(), Upsilon, **kw).value


@dataclass
class UniquenessResult:
    unique: bool
    witness: tuple[Signal, Signal] | None = None
    failing_support: IndexSet | None = None
    supports_checked: int = 0

    def to_dict(self) -> dict:
        return {
            "unique": self.unique,
            "failing_support": None if self.failing_support is None else list(self.failing_support.members),
            "supports_checked": self.supports_checked,
        }


def sparse_uniqueness_oracle(T: IndexSet, t: int, chunk: int = 20_000) -> UniquenessResult:
    """Is every t-sparse signal determined by its samples on T?

    Two t-sparse signals agreeing on T differ by a signal vanishing on T with
    at most 2t frequencies.  Uniqueness holds iff ``(G\\T, U)`` is a weak
    annihilating pair for every U of size 2t (larger supports contain the
    smaller ones, so size exactly 2t suffices).  Exhaustive; small groups only.
    """
    spec = T.spec
    n = spec.cardinality
    if t < 0:
        raise ValueError("t must be >= 0")
    S = T.complement()
    if t == 0 or len(S) == 0:
        return UniquenessResult(True)
    if n > UNIQUENESS_MAX_CARD:
        raise ValueError(f"exhaustive uniqueness check limited to |G| <= {UNIQUENESS_MAX_CARD}")
    k = min(2 * t, n)
    total = math.comb(n, k)
    if total > UNIQUENESS_MAX_SUPPORTS:
        raise ValueError(f"C({n},{k}) = {total} candidate supports exceeds {UNIQUENESS_MAX_SUPPORTS}")

    S_idx = S.indices
    it = combinations(range(n), k)
    checked = 0
    while True:
        block = list(islice(it, chunk))
        if not block:
            break
        U = np.array(block, dtype=np.int64).reshape(len(block), k)
        ok, _ = weak_annihilation_batch(spec, np.broadcast_to(S_idx, (len(block), len(S_idx))), U)
        if not ok.all():
            first = int(np.argmin(ok))
            bad = IndexSet(spec, block[first])
            return UniquenessResult(False, _aliasing_pair(S, bad, t), bad, checked + first + 1)
        checked += len(block)
    return UniquenessResult(True, None, None, checked)


def _aliasing_pair(S: IndexSet, U: IndexSet, t: int) -> tuple[Signal, Signal]:
    """Two distinct t-sparse signals that agree off S."""
    spec = S.spec
    s = kernel_witness(S, U)
    spectrum = dft_array(s.values, spec)
    members = U.indices
    first, second = members[:t], members[t:]
    a = np.zeros(spec.cardinality, dtype=np.complex128)
    b = np.zeros(spec.cardinality, dtype=np.complex128)
    a[first] = spectrum[first]
    b[second] = -spectrum[second]
    return Signal(spec, idft_array(a, spec)), Signal(spec, idft_array(b, spec))
