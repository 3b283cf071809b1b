"""Randomized experiments: concentration, inequality checks, Lambda(q) trials, sweeps."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bounds
from .group import (
    INF,
    ExponentPair,
    GroupSpec,
    IndexSet,
    Signal,
    _check_same_group,
    conjugate,
    dft_array,
    idft_array,
    lp_norm_array,
    random_signal,
)
from .operators import exact_annihilation_constant, operator_norm
from .recovery import RecoveryProblem, contraction_rate, iterative_projection
from .restriction import (
    _random_starts,
    max_energy_ratio,
    nonlinear_power_ascent,
    restriction_norm_lower,
)
from .serialize import dumps

SWEEP_KINDS = ("ms-vs-exact", "energy-vs-exact", "bourgain", "recovery-rate")
SUMMARY_COLUMNS = ("kind", "metric", "count", "median", "min", "max", "condition_pass_rate")


@dataclass
class ConcentrationReport:
    eps_T: float
    eps_Omega: float
    lower_bound: float
    satisfied: bool

    def to_dict(self) -> dict:
        return dict(vars(self))


def concentration_levels(f: Signal, S: IndexSet, Sigma: IndexSet, C: float) -> ConcentrationReport:
    """Relative mass of f outside S and of its transform outside Sigma.

    A pair with annihilation constant C forces ``eps_T + eps_Omega >= 1/C``.
    """
    _check_same_group(f.spec, S.spec, Sigma.spec)
    total = float(np.linalg.norm(f.values))
    if total == 0:
        raise ValueError("concentration is undefined for the zero signal")
    F = dft_array(f.values, f.spec)
    eps_T = float(np.linalg.norm(f.values[~S.mask])) / total
    eps_O = float(np.linalg.norm(F[~Sigma.mask])) / float(np.linalg.norm(F))
    lower = 0.0 if C == INF else 1.0 / C
    return ConcentrationReport(eps_T, eps_O, lower, eps_T + eps_O >= lower - 1e-9)


@dataclass
class InequalityCheck:
    lhs: float
    rhs: float
    slack: float

    def to_dict(self) -> dict:
        return dict(vars(self))


def verify_strong_inequality(f: Signal, S: IndexSet, Sigma: IndexSet, C: float) -> InequalityCheck:
    """``||f||_2`` against ``C (||f||_{L^2(S^c)} + ||f^||_{L^2(Sigma^c)})``."""
    _check_same_group(f.spec, S.spec, Sigma.spec)
    lhs = float(np.linalg.norm(f.values))
    tail = float(np.linalg.norm(f.values[~S.mask])) + float(
        np.linalg.norm(dft_array(f.values, f.spec)[~Sigma.mask]))
    rhs = 0.0 if tail == 0 else C * tail
    return InequalityCheck(lhs, rhs, rhs - lhs)


def verify_lp_inequality(f: Signal, E: IndexSet, S: IndexSet, p: float, C_pq: float = 1.0) -> InequalityCheck:
    """``||f||_{p'}`` against the two-term L^p bound of :func:`bounds.bound_lp`.

    E is the time set and S the frequency set.  Raises when the size
    condition fails.
    """
    _check_same_group(f.spec, E.spec, S.spec)
    b = bounds.bound_lp(len(E), len(S), C_pq, p, f.spec.cardinality)
    if not b.condition_satisfied:
        raise ValueError("size condition of the L^p bound fails")
    pc = conjugate(p)
    lhs = float(lp_norm_array(f.values, pc))
    F = dft_array(f.values, f.spec)
    rhs = (b.extras["coeff_freq"] * float(lp_norm_array(F[~S.mask], p))
           + b.extras["coeff_time"] * float(lp_norm_array(f.values[~E.mask], pc)))
    return InequalityCheck(lhs, rhs, rhs - lhs)


# -- Lambda(q) trials -----------------------------------------------------------------

@dataclass
class LambdaQTrial:
    Sigma: IndexSet
    synthesis_norm: float
    analysis_norm: float
    duality_gap: float
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "Sigma": list(self.Sigma.members),
            "synthesis_norm": self.synthesis_norm,
            "analysis_norm": self.analysis_norm,
            "duality_gap": self.duality_gap,
            **self.extras,
        }


def random_subset(n: int, size: int, rng: np.random.Generator) -> tuple[int, ...]:
    # numpy's permutation is a Fisher-Yates shuffle
    return tuple(sorted(rng.permutation(n)[:size].tolist()))


def synthesis_norm(Sigma: IndexSet, q: float, restarts: int = 8, seed: int = 0, max_iter: int = 500) -> float:
    """Ascent estimate of ``sup ||g||_q / ||g||_2`` over g with spectrum in Sigma.

    With the unitary DFT, ``g = |G|^{-1/2} sum_chi g^(chi) chi`` and
    ``||g||_2 = ||g^||_2``, so this is the Lambda(q) constant in the
    ``|G|^{-1/2}`` synthesis normalization.  Lower bound.
    """
    spec = Sigma.spec
    idx = Sigma.indices
    k = len(idx)

    def apply(A):
        full = np.zeros((A.shape[0], spec.cardinality), dtype=np.complex128)
        full[:, idx] = A
        return idft_array(full, spec)

    def adjoint(W):
        return dft_array(W, spec)[:, idx]

    X0 = np.vstack([_random_starts(k, restarts, seed), np.eye(k, dtype=np.complex128)])
    best, _ = nonlinear_power_ascent(apply, adjoint, X0, 2.0, q, max_iter=max_iter)
    return float(best.max())


def lambda_q_trial(spec: GroupSpec, q: float, seed: int, sigma_size: int | None = None,
                   restarts: int = 8, max_iter: int = 500) -> LambdaQTrial:
    """Draw a random Sigma and estimate its Lambda(q) constant two ways.

    The synthesis side maximizes ``||g||_q/||g||_2`` over spectrally supported
    g; the analysis side maximizes ``||f^|_Sigma||_2 / ||f||_{q'}`` over all f.
    These are adjoint operators, so both estimate the same norm and the
    relative gap measures ascent quality.
    """
    if not q > 2:
        raise ValueError("q must exceed 2")
    n = spec.cardinality
    size = bounds._sigma_size(n, q) if sigma_size is None else int(sigma_size)
    if not 1 <= size <= n:
        raise ValueError(f"sigma_size must lie in [1, {n}], got {size}")
    rng = np.random.default_rng(seed)
    Sigma = IndexSet(spec, random_subset(n, size, rng))
    syn = synthesis_norm(Sigma, q, restarts, seed, max_iter)
    ana = restriction_norm_lower(Sigma, ExponentPair(conjugate(q), 2), restarts, seed, max_iter).value
    gap = abs(syn - ana) / max(syn, ana)
    return LambdaQTrial(Sigma, syn, ana, gap, {
        "q": q,
        "sigma_size": size,
        "unnormalized_synthesis": syn * math.sqrt(n),
        "kind": "lower",
    })


# -- sweeps -----------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    spec: GroupSpec
    trials: int
    seed: int
    parameters: dict = field(default_factory=dict)
    output_path: str = "sweep"
    threads: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.seed is None:
            raise ValueError("a seed is required")


def _sizes(rng, n, params, key, default_max):
    lo, hi = params.get(key, (1, default_max))
    hi = min(hi, n)
    return int(rng.integers(lo, hi + 1))


def _trial_ms(config, seed):
    spec = config.spec
    n = spec.cardinality
    rng = np.random.default_rng(seed)
    s = _sizes(rng, n, config.parameters, "time_size", max(1, int(math.isqrt(n))))
    t = _sizes(rng, n, config.parameters, "freq_size", max(1, int(math.isqrt(n))))
    S = IndexSet(spec, random_subset(n, s, rng))
    Sigma = IndexSet(spec, random_subset(n, t, rng))
    sigma = operator_norm(S, Sigma)
    exact = exact_annihilation_constant(sigma.value)
    gj = bounds.bound_ghobber_jaming(s, t, n)
    ms_sigma_bound = math.sqrt(s * t / n)
    flags = {
        "condition": gj.condition_satisfied,
        "dominance_ok": (not gj.condition_satisfied) or exact <= gj.constant + 1e-9,
        "sigma_below_ms": (not gj.condition_satisfied) or sigma.value <= ms_sigma_bound + 1e-9,
    }
    values = {"sigma": sigma.value, "exact_constant": exact,
              "ghobber_jaming_constant": gj.constant, "ms_sigma_bound": ms_sigma_bound}
    return {"S": list(S.members), "Sigma": list(Sigma.members)}, values, flags


def _trial_energy(config, seed):
    spec = config.spec
    n = spec.cardinality
    rng = np.random.default_rng(seed)
    t = _sizes(rng, n, config.parameters, "freq_size", min(8, n))
    s = _sizes(rng, n, config.parameters, "time_size", max(1, n // 8))
    E = IndexSet(spec, random_subset(n, s, rng))
    Sigma = IndexSet(spec, random_subset(n, t, rng))
    rep = max_energy_ratio(Sigma, "exact" if t <= 20 else "greedy")
    eb = bounds.bound_energy_pair(rep.max_ratio, s, n)
    sigma = operator_norm(E, Sigma)
    exact = exact_annihilation_constant(sigma.value)
    flags = {
        "condition": eb.condition_satisfied,
        "ratio_exact": rep.max_ratio_kind == "exact",
        "dominance_ok": (not eb.condition_satisfied) or exact <= eb.constant + 1e-9,
    }
    values = {"max_ratio": rep.max_ratio, "energy": rep.energy, "sigma": sigma.value,
              "exact_constant": exact, "energy_pair_constant": eb.constant}
    return {"E": list(E.members), "Sigma": list(Sigma.members)}, values, flags


def _trial_bourgain(config, seed):
    q = float(config.parameters.get("q", 4.0))
    tr = lambda_q_trial(config.spec, q, seed, config.parameters.get("sigma_size"),
                        restarts=int(config.parameters.get("restarts", 8)))
    values = {"synthesis_norm": tr.synthesis_norm, "analysis_norm": tr.analysis_norm,
              "duality_gap": tr.duality_gap, "unnormalized_synthesis": tr.extras["unnormalized_synthesis"]}
    flags = {"condition": True, "lower_bounds": True}
    return {"Sigma": list(tr.Sigma.members)}, values, flags


def _trial_recovery(config, seed):
    spec = config.spec
    n = spec.cardinality
    rng = np.random.default_rng(seed)
    u = _sizes(rng, n, config.parameters, "support_size", max(1, n // 8))
    missing = _sizes(rng, n, config.parameters, "missing_size", max(1, n // 4))
    missing = min(missing, n - 1)
    Upsilon = IndexSet(spec, random_subset(n, u, rng))
    T = IndexSet(spec, random_subset(n, missing, rng)).complement()
    truth = random_signal(spec, seed, "sparse", support=Upsilon)
    rate = contraction_rate(T, Upsilon)
    res = iterative_projection(RecoveryProblem(spec, truth, T, Upsilon, tol=1e-12,
                                               max_iter=int(config.parameters.get("max_iter", 2000))))
    err = float(np.linalg.norm(res.estimate.values - truth.values))
    flags = {
        "condition": rate < 1.0,
        "converged": res.converged,
        "rate_ok": res.contraction_rate <= rate + 1e-6,
    }
    values = {"contraction_rate": rate, "empirical_rate": res.contraction_rate,
              "iterations": res.iterations, "error": err}
    return {"T": list(T.members), "Upsilon": list(Upsilon.members)}, values, flags


_TRIALS = {
    "ms-vs-exact": _trial_ms,
    "energy-vs-exact": _trial_energy,
    "bourgain": _trial_bourgain,
    "recovery-rate": _trial_recovery,
}


def run_trials(config: ExperimentConfig, kind: str) -> list[dict]:
    """Run the trials and return one record per trial, in trial order."""
    if kind not in _TRIALS:
        raise ValueError(f"unknown sweep kind {kind!r}; choose from {SWEEP_KINDS}")
    fn = _TRIALS[kind]

    def one(i):
        seed = config.seed + i
        sets, values, flags = fn(config, seed)
        return {"trial": i, "seed": seed, "group": config.spec.to_dict(),
                "sets": sets, "values": values, "flags": flags}

    if config.threads > 1:
        with ThreadPoolExecutor(config.threads) as pool:
            return list(pool.map(one, range(config.trials)))
    return [one(i) for i in range(config.trials)]


def summarize(records: list[dict], kind: str) -> list[dict]:
    rows = []
    metrics = list(records[0]["values"]) if records else []
    passed = [r["flags"].get("condition", True) for r in records]
    rate = sum(passed) / len(passed) if passed else 0.0
    for m in metrics:
        vals = [r["values"][m] for r in records if isinstance(r["values"][m], (int, float))]
        vals = [v for v in vals if math.isfinite(v)]
        rows.append({
            "kind": kind,
            "metric": m,
            "count": len(vals),
            "median": float(np.median(vals)) if vals else float("nan"),
            "min": min(vals) if vals else float("nan"),
            "max": max(vals) if vals else float("nan"),
            "condition_pass_rate": rate,
        })
    return rows


def run_sweep(config: ExperimentConfig, kind: str) -> tuple[Path, Path]:
    """Write ``<output_path>.jsonl`` (one record per trial) and ``<output_path>.csv``.

    CSV columns: kind, metric, count, median, min, max, condition_pass_rate.
    """
    records = run_trials(config, kind)
    base = Path(config.output_path)
    jsonl = base.with_suffix(".jsonl")
    csv_path = base.with_suffix(".csv")
    try:
        jsonl.parent.mkdir(parents=True, exist_ok=True)
        with open(jsonl, "w") as fh:
            for rec in records:
                fh.write(dumps(rec) + "\n")
        with open(csv_path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
            w.writeheader()
            for row in summarize(records, kind):
                w.writerow({k: ("%.17g" % v if isinstance(v, float) else v) for k, v in row.items()})
    except OSError as exc:
        raise OSError(f"cannot write sweep report under {base}: {exc}") from exc
    return jsonl, csv_path
