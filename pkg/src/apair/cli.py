"""Command-line interface.

Exit codes: 0 success, 2 theorem condition not satisfied, 3 invalid input,
4 non-convergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bounds
from .experiments import SWEEP_KINDS, ExperimentConfig, concentration_levels, run_sweep
from .group import (
    INF,
    ExponentPair,
    GroupSpec,
    IndexSet,
    Signal,
    dft,
    idft,
    parse_exponent,
    random_signal,
)
from .operators import (
    annihilation_report,
    exact_annihilation_constant,
    kernel_witness,
    operator_norm,
    top_singular_witness,
    weak_annihilation_check,
)
from .recovery import RecoveryProblem, iterative_projection, sparse_uniqueness_oracle
from .restriction import (
    energy_restriction_constant,
    max_energy_ratio,
    restriction_norm_exact,
    restriction_norm_lower,
    restriction_norm_upper_interp,
)
from .serialize import (
    dumps,
    indexset_from_dict,
    read_indexset,
    read_signal,
    signal_to_dict,
    write_signal,
)

EXIT_OK = 0
EXIT_CONDITION = 2
EXIT_INVALID = 3
EXIT_NOT_CONVERGED = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# -- argument helpers -----------------------------------------------------------------

def _parse_set(text: str, spec: GroupSpec) -> IndexSet:
    """Comma list of flat indices, or ``@file`` holding such a list or an index-set document."""
    if text.startswith("@"):
        body = Path(text[1:]).read_text().strip()
        if body.startswith("{"):
            s = indexset_from_dict(json.loads(body))
            if s.spec != spec:
                raise ValueError(f"{text[1:]}: set belongs to group {s.spec}, expected {spec}")
            return s
        text = body
    items = [t for t in text.replace("\n", ",").split(",") if t.strip()]
    return IndexSet(spec, [int(t) for t in items])


def _int_pair(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"expected two comma-separated integers, got {text!r}")
    return int(parts[0]), int(parts[1])


def _emit(args, payload, text_lines=None) -> None:
    if args.json:
        print(dumps(payload))
    else:
        d = payload.to_dict() if hasattr(payload, "to_dict") else payload
        for line in text_lines or [f"{k}: {dumps(v)}" for k, v in d.items()]:
            print(line)
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(dumps(payload) + "\n")


def _need_seed(args) -> int:
    if args.seed is None:
        raise UsageError(f"{args.command}: --seed is required for randomized runs")
    return args.seed


def _add_common(p, group=True, seed=False):
    if group:
        p.add_argument("--group", required=True, help="group as NxD, e.g. 16x1 or 4x2")
    p.add_argument("--json", action="store_true", help="emit the JSON report on stdout")
    p.add_argument("--out", help="also write the JSON report to this file")
    if seed:
        p.add_argument("--seed", type=int, help="random seed (required for randomized runs)")


def _pair_sets(args):
    spec = GroupSpec.parse(args.group)
    return spec, _parse_set(args.time, spec), _parse_set(args.freq, spec)


# -- subcommands ------------------------------------------------------------------------

def cmd_dft(args):
    spec = GroupSpec.parse(args.group)
    if args.signal:
        f = read_signal(args.signal)
        if f.spec != spec:
            raise ValueError(f"signal belongs to group {f.spec}, expected {spec}")
    else:
        f = random_signal(spec, _need_seed(args), args.law)
    g = idft(f) if args.inverse else dft(f)
    if args.save_signal:
        write_signal(args.save_signal, g)
    _emit(args, signal_to_dict(g), [f"group: {spec}", f"l2 norm: {dumps(g.norm())}"])
    return EXIT_OK


def cmd_norm(args):
    spec, S, Sigma = _pair_sets(args)
    kw = {"tol": args.tol, "max_iter": args.max_iter, "method": args.method}
    if args.seed is not None:
        kw["seed"] = args.seed
    est = operator_norm(S, Sigma, **kw)
    _emit(args, est)
    return EXIT_OK if est.converged else EXIT_NOT_CONVERGED


def cmd_constant(args):
    spec, S, Sigma = _pair_sets(args)
    rep = annihilation_report(S, Sigma, method=args.method)
    if args.save_witness and len(S) and len(Sigma):
        write_signal(args.save_witness, top_singular_witness(S, Sigma))
    lines = [f"sigma: {dumps(rep.sigma.value)} ({rep.sigma.method})",
             f"exact constant: {dumps(rep.exact_constant)}"]
    for b in rep.theorem_bounds:
        lines.append(f"{b.theorem_id}: condition {dumps(b.condition_value)} "
                     f"{'holds' if b.condition_satisfied else 'fails'}, constant {dumps(b.constant)}")
    _emit(args, rep, lines)
    return EXIT_OK if rep.sigma.converged else EXIT_NOT_CONVERGED


def cmd_weak(args):
    spec, S, Sigma = _pair_sets(args)
    chk = weak_annihilation_check(S, Sigma)
    if args.save_witness and not chk.annihilating:
        write_signal(args.save_witness, kernel_witness(S, Sigma))
    _emit(args, {"annihilating": chk.annihilating, "min_singular": chk.min_singular})
    return EXIT_OK


def cmd_restrict(args):
    spec = GroupSpec.parse(args.group)
    Sigma = _parse_set(args.freq, spec)
    e = ExponentPair(parse_exponent(args.p), parse_exponent(args.q))
    if args.mode == "exact":
        b = restriction_norm_exact(Sigma, e)
    elif args.mode == "interp":
        b = restriction_norm_upper_interp(Sigma, e)
    else:
        b = restriction_norm_lower(Sigma, e, restarts=args.restarts, seed=_need_seed(args))
    if args.save_witness and b.witness is not None:
        write_signal(args.save_witness, b.witness)
    _emit(args, b)
    return EXIT_OK


def cmd_energy(args):
    spec = GroupSpec.parse(args.group)
    Sigma = _parse_set(args.freq, spec)
    rep = max_energy_ratio(Sigma, args.mode)
    rb = energy_restriction_constant(Sigma, rep)
    _emit(args, {"energy": rep.to_dict(), "restriction_constant": rb.to_dict()})
    return EXIT_OK


def _bound_exit(b):
    return EXIT_OK if b.condition_satisfied else EXIT_CONDITION


def cmd_bound(args):
    which = args.calculator
    if which == "general":
        b = bounds.bound_general(args.rho, args.mS, args.mSigma,
                                 ExponentPair(parse_exponent(args.p), parse_exponent(args.q)))
    elif which == "ghobber-jaming":
        s, t = _int_pair(args.sizes)
        b = bounds.bound_ghobber_jaming(s, t, args.card)
    elif which == "finite":
        s, t = _int_pair(args.sizes)
        b = bounds.bound_finite(args.rho, s, t, args.card,
                                ExponentPair(parse_exponent(args.p), parse_exponent(args.q)))
    elif which == "energy-pair":
        b = bounds.bound_energy_pair(args.ratio, args.size, args.card)
    elif which == "lp":
        sE, sS = _int_pair(args.sizes)
        b = bounds.bound_lp(sE, sS, args.C_pq, parse_exponent(args.p), args.card)
    elif which == "bourgain":
        b = bounds.bound_bourgain_random(args.B_q, parse_exponent(args.q), args.card, args.size)
    else:
        return cmd_tao(args)
    _emit(args, b)
    return _bound_exit(b)


def cmd_tao(args):
    s, t = _int_pair(args.sizes)
    b = bounds.tao_bound(args.prime, s, t)
    _emit(args, b)
    return _bound_exit(b)


def cmd_annulus(args):
    a = bounds.AnnulusParams(args.d, args.R, args.delta, args.C_surface, args.kappa, args.measure_S)
    e = None
    if args.p is not None or args.q is not None:
        e = ExponentPair(parse_exponent(args.p or bounds.stein_tomas_p(args.d)), parse_exponent(args.q or 2))
    rep = bounds.annulus_calculator(a, e)
    _emit(args, rep)
    return EXIT_OK if rep.condition_satisfied else EXIT_CONDITION


def cmd_recover(args):
    mu = read_signal(args.measurement)
    T = read_indexset(args.mask)
    U = read_indexset(args.support)
    res = iterative_projection(RecoveryProblem(mu.spec, mu, T, U, args.tol, args.max_iter))
    if args.save_signal:
        write_signal(args.save_signal, res.estimate)
    _emit(args, res, [f"iterations: {res.iterations}", f"converged: {res.converged}",
                      f"final residual: {dumps(res.residual_history[-1])}",
                      f"contraction rate (observed): {dumps(res.contraction_rate)}",
                      f"measurement mismatch: {dumps(res.measurement_mismatch)}"])
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def cmd_unique(args):
    spec = GroupSpec.parse(args.group)
    T = _parse_set(args.mask, spec)
    res = sparse_uniqueness_oracle(T, args.t)
    if args.save_witness and res.witness is not None:
        base = Path(args.save_witness)
        write_signal(base.with_name(base.stem + "_a" + base.suffix), res.witness[0])
        write_signal(base.with_name(base.stem + "_b" + base.suffix), res.witness[1])
    _emit(args, res)
    return EXIT_OK


def cmd_concentrate(args):
    spec, S, Sigma = _pair_sets(args)
    if args.signal:
        f = read_signal(args.signal)
    else:
        f = random_signal(spec, _need_seed(args))
    C = args.constant
    if C is None:
        C = exact_annihilation_constant(operator_norm(S, Sigma).value)
    rep = concentration_levels(f, S, Sigma, C)
    _emit(args, {**rep.to_dict(), "constant": C})
    return EXIT_OK


def _param(text: str):
    key, _, value = text.partition("=")
    if not key or not value:
        raise ValueError(f"parameters look like key=value, got {text!r}")
    if "," in value:
        return key, tuple(int(v) for v in value.split(","))
    try:
        return key, int(value)
    except ValueError:
        return key, float(parse_exponent(value))


def cmd_sweep(args):
    spec = GroupSpec.parse(args.group)
    params = dict(_param(t) for t in args.param)
    cfg = ExperimentConfig(spec, args.trials, _need_seed(args), params, args.out or "sweep", args.threads)
    jsonl, csv_path = run_sweep(cfg, args.kind)
    payload = {"kind": args.kind, "records": str(jsonl), "summary": str(csv_path)}
    if args.json:
        print(dumps(payload))
    else:
        print(Path(csv_path).read_text(), end="")
    return EXIT_OK


# -- parser -------------------------------------------------------------------------------

def _add_pair(p):
    p.add_argument("--time", required=True, help="time set S: comma list of flat indices or @file")
    p.add_argument("--freq", required=True, help="frequency set Sigma: comma list or @file")


def _add_tao_args(p):
    p.add_argument("--prime", type=int, required=True, help="prime modulus p of Z/pZ")
    p.add_argument("--sizes", required=True, help="|S|,|Sigma|")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="apair", description="Annihilating-pair constants for (Z/NZ)^d.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dft", help="unitary DFT of a signal",
                       description="Unitary discrete Fourier transform (Plancherel-normalized).")
    _add_common(p, seed=True)
    p.add_argument("--signal", help="signal file; omit to draw a random signal with --seed")
    p.add_argument("--law", default="complex-gaussian", choices=["complex-gaussian", "unit-sphere"])
    p.add_argument("--inverse", action="store_true")
    p.add_argument("--save-signal", help="write the transformed signal to this file")
    p.set_defaults(func=cmd_dft)

    p = sub.add_parser("norm", help="norm of the time-frequency limiting operator",
                       description="Operator norm ||P_S Q_Sigma|| by dense SVD or matrix-free Lanczos; "
                                   "a value below 1 means (S, Sigma) is a strong annihilating pair.")
    _add_common(p, seed=True)
    _add_pair(p)
    p.add_argument("--method", default="auto", choices=["auto", "dense", "power"])
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("constant", help="exact annihilation constant with theorem bounds",
                       description="Sharp strong-annihilation constant 1/sqrt(1 - ||P_S Q_Sigma||^2), "
                                   "reported next to the Matolcsi-Szucs, Ghobber-Jaming, "
                                   "restriction and additive-energy bounds.")
    _add_common(p)
    _add_pair(p)
    p.add_argument("--method", default="auto", choices=["auto", "dense", "power"])
    p.add_argument("--save-witness", help="write the extremal (top singular) signal to this file")
    p.set_defaults(func=cmd_constant)

    p = sub.add_parser("weak-check", help="weak annihilation by a rank test",
                       description="Weak annihilating pair test: no nonzero signal supported in S "
                                   "has spectrum in Sigma (full column rank of a DFT minor).")
    _add_common(p)
    _add_pair(p)
    p.add_argument("--save-witness", help="write a kernel signal to this file when the test fails")
    p.set_defaults(func=cmd_weak)

    p = sub.add_parser("restrict", help="(p,q) restriction constant of a spectral set",
                       description="Restriction estimate ||f^|_Sigma||_q <= rho ||f||_p: exact closed "
                                   "forms, Riesz-Thorin interpolation, or a nonlinear power ascent lower bound.")
    _add_common(p, seed=True)
    p.add_argument("--freq", required=True, help="spectral set Sigma")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--mode", default="exact", choices=["exact", "interp", "lower"])
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--save-witness", help="write the ascent maximizer to this file")
    p.set_defaults(func=cmd_restrict)

    p = sub.add_parser("energy", help="additive energy and the (4/3,2) energy formula",
                       description="Additive energy of a spectral set and the (4/3,2) energy formula "
                                   "|G|^{-1/4} (max_F energy(F)/|F|^2)^{1/4}. The formula ignores spectral "
                                   "weights and can undershoot the true restriction constant.")
    _add_common(p)
    p.add_argument("--freq", required=True, help="spectral set Sigma")
    p.add_argument("--mode", default="exact", choices=["exact", "greedy"])
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("bound", help="closed-form theorem calculators",
                       description="Closed-form annihilation bounds; exit 2 when the condition fails.")
    bsub = p.add_subparsers(dest="calculator", required=True)
    b = bsub.add_parser("general", help="restriction-estimate route to strong annihilation",
                        description="Strong annihilation from a (p,q) restriction estimate: "
                                    "A = rho m(S)^{1/p-1/2} m(Sigma)^{1/2-1/q} < 1 gives constant 1/(1-A).")
    _add_common(b, group=False)
    for name in ("rho", "mS", "mSigma"):
        b.add_argument(f"--{name}", type=float, required=True)
    b.add_argument("--p", required=True)
    b.add_argument("--q", required=True)
    b = bsub.add_parser("ghobber-jaming", help="Ghobber-Jaming size condition |S||Sigma| < |G|",
                        description="Ghobber-Jaming bound: |S||Sigma| < |G| gives constant "
                                    "1 + 1/(1 - sqrt(|S||Sigma|/|G|)).")
    _add_common(b, group=False)
    b.add_argument("--sizes", required=True, help="|S|,|Sigma|")
    b.add_argument("--card", type=int, required=True, help="|G|")
    b = bsub.add_parser("finite", help="restriction route with the trivial Hausdorff-Young bound",
                        description="Finite-group restriction bound: rho |S|^{1/p} < |G|^{1/q-1/2}.")
    _add_common(b, group=False)
    b.add_argument("--rho", type=float, required=True)
    b.add_argument("--sizes", required=True, help="|S|,|Sigma|")
    b.add_argument("--card", type=int, required=True)
    b.add_argument("--p", required=True)
    b.add_argument("--q", required=True)
    b = bsub.add_parser("energy-pair", help="additive-energy annihilation bound",
                        description="Additive-energy annihilation bound from the (4/3,2) restriction "
                                    "constant of Sigma.")
    _add_common(b, group=False)
    b.add_argument("--ratio", type=float, required=True, help="max energy(F)/|F|^2 over F in Sigma")
    b.add_argument("--size", type=int, required=True, help="|E|")
    b.add_argument("--card", type=int, required=True)
    b = bsub.add_parser("lp", help="L^p annihilation from a (1,q) restriction estimate",
                        description="L^p uncertainty inequality from the always-valid (1,q) "
                                    "restriction estimate.")
    _add_common(b, group=False)
    b.add_argument("--sizes", required=True, help="|E|,|S|")
    b.add_argument("--C-pq", dest="C_pq", type=float, default=1.0)
    b.add_argument("--p", required=True)
    b.add_argument("--card", type=int, required=True)
    b = bsub.add_parser("bourgain", help="random Lambda(q) spectrum bound",
                        description="Bourgain random Lambda(q) set bound with user-supplied B(q).")
    _add_common(b, group=False)
    b.add_argument("--B-q", dest="B_q", type=float, required=True)
    b.add_argument("--q", required=True)
    b.add_argument("--card", type=int, required=True)
    b.add_argument("--size", type=int, required=True, help="|S|")
    b = bsub.add_parser("tao", help="Tao's prime-order uncertainty principle",
                        description="Tao / Chebotarev: on Z/pZ, p prime, |S| + |Sigma| < p + 1 "
                                    "forces weak annihilation.")
    _add_common(b, group=False)
    _add_tao_args(b)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("tao", help="Tao's prime-order uncertainty principle",
                       description="Tao / Chebotarev: on Z/pZ, p prime, |S| + |Sigma| < p + 1 "
                                   "forces weak annihilation.")
    _add_common(p, group=False)
    _add_tao_args(p)
    p.set_defaults(func=cmd_tao)

    p = sub.add_parser("annulus", help="Euclidean annulus scaling calculator",
                       description="Annulus annihilation via the Stein-Tomas restriction estimate "
                                   "for the sphere; constant 3 at the balanced width.")
    _add_common(p, group=False)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--C-surface", dest="C_surface", type=float, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--measure-S", dest="measure_S", type=float, required=True)
    p.add_argument("--p")
    p.add_argument("--q")
    p.set_defaults(func=cmd_annulus)

    p = sub.add_parser("recover", help="iterative projection recovery",
                       description="Recover a signal with spectrum in Upsilon from its samples on T "
                                   "by alternating projections (contracts at ||P_{G\\T} Q_Upsilon||).")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.add_argument("--measurement", required=True, help="signal file")
    p.add_argument("--mask", required=True, help="index-set file for T")
    p.add_argument("--support", required=True, help="index-set file for Upsilon")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.add_argument("--save-signal", help="write the recovered signal to this file")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("unique", help="exhaustive sparse-recovery uniqueness",
                       description="Are t-sparse spectra determined by samples on T?  Exhaustive weak "
                                   "annihilation checks of (G\\T, U) over all 2t-element U.")
    _add_common(p)
    p.add_argument("--mask", required=True, help="sample set T")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--save-witness", help="base file name for the two aliasing signals")
    p.set_defaults(func=cmd_unique)

    p = sub.add_parser("concentrate", help="time and frequency concentration levels",
                       description="Concentration levels eps_T, eps_Omega and the lower bound "
                                   "eps_T + eps_Omega >= 1/C for a strong annihilating pair.")
    _add_common(p, seed=True)
    _add_pair(p)
    p.add_argument("--signal", help="signal file; omit to draw a random signal with --seed")
    p.add_argument("--constant", type=float, help="annihilation constant (default: exact)")
    p.set_defaults(func=cmd_concentrate)

    p = sub.add_parser("sweep", help="randomized parameter sweeps",
                       description="Seeded sweeps comparing theorem bounds (Ghobber-Jaming, additive "
                                   "energy, Bourgain Lambda(q), recovery contraction) with exact values.")
    _add_common(p, seed=True)
    p.add_argument("--kind", required=True, choices=SWEEP_KINDS)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--param", action="append", default=[], help="key=value (e.g. q=4, time_size=1,4)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"apair: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, OSError, KeyError, TypeError, OverflowError) as exc:
        print(f"apair: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
