"""Closed-form annihilation bounds.

Every function returns the condition value of a theorem, whether the
(strict) condition holds, and the resulting annihilation constant.  Nothing
here touches signals; inputs are set sizes and restriction constants.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .group import INF, ExponentPair, conjugate, inv

THEOREM_IDS = (
    "restriction-general",
    "matolcsi-szucs",
    "ghobber-jaming",
    "restriction-finite",
    "energy-pair",
    "lp-pair",
    "bourgain-random",
    "tao",
    "annulus",
)


@dataclass
class TheoremBound:
    theorem_id: str
    condition_value: float
    condition_satisfied: bool
    constant: float | None
    inputs: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)
    qualitative: bool = False

    def __post_init__(self):
        if not self.qualitative:
            assert (self.constant is not None) == self.condition_satisfied
        if self.constant is not None:
            assert self.constant >= 1.0, f"annihilation constant {self.constant} < 1"

    def to_dict(self) -> dict:
        d = asdict(self)
        if not self.qualitative:
            d.pop("qualitative")
        return d


def _e(e: ExponentPair) -> dict:
    return {"p": e.p, "q": e.q}


def bound_general(rho: float, mS: float, mSigma: float, e: ExponentPair,
                  theorem_id: str = "restriction-general") -> TheoremBound:
    """Restriction route for 1 <= p <= 2 <= q.

    ``A = rho * m(S)^{1/p - 1/2} * m(Sigma)^{1/2 - 1/q}``; when ``A < 1`` the
    pair is strongly annihilating with constant ``1/(1 - A)``.
    """
    if not (1.0 <= e.p <= 2.0 <= e.q):
        raise ValueError(f"need 1 <= p <= 2 <= q, got ({e.p}, {e.q})")
    if not (rho > 0 and mS > 0 and mSigma > 0):
        raise ValueError("rho and both measures must be positive")
    A = rho * mS ** (inv(e.p) - 0.5) * mSigma ** (0.5 - inv(e.q))
    ok = A < 1.0
    return TheoremBound(
        theorem_id, A, ok, 1.0 / (1.0 - A) if ok else None,
        {"rho": rho, "mS": mS, "mSigma": mSigma, **_e(e)},
    )


def bound_ghobber_jaming(sS: int, sSigma: int, cardG: int) -> TheoremBound:
    """Size-only bound ``1 + 1/(1 - sqrt(|S||Sigma|/|G|))`` when ``|S||Sigma| < |G|``."""
    if sS <= 0 or sSigma <= 0 or cardG <= 0:
        raise ValueError("sizes must be positive")
    A = math.sqrt(sS * sSigma / cardG)
    ok = sS * sSigma < cardG
    return TheoremBound(
        "ghobber-jaming", A, ok, 1.0 + 1.0 / (1.0 - A) if ok else None,
        {"sS": sS, "sSigma": sSigma, "cardG": cardG},
    )


def bound_finite(rho: float, sS: int, sSigma: int, cardG: int, e: ExponentPair) -> TheoremBound:
    """Finite-group route for 1 <= p, q <= 2.

    Condition ``rho |S|^{1/p} < |G|^{1/q - 1/2}``; constant
    ``1 + |S|^{1/2} |G \\ Sigma|^{1/q - 1/2} / (|G|^{1/q - 1/2} - rho |S|^{1/p})``.
    """
    if e.q > 2:
        raise ValueError("q > 2 belongs to bound_general")
    if not (1.0 <= e.p <= 2.0):
        raise ValueError(f"need 1 <= p <= 2, got {e.p}")
    if not 0 <= sSigma <= cardG:
        raise ValueError("sSigma must lie in [0, |G|]")
    lhs = rho * sS ** inv(e.p)
    rhs = cardG ** (inv(e.q) - 0.5)
    ok = lhs < rhs
    const = None
    if ok:
        comp = cardG - sSigma
        const = 1.0 + math.sqrt(sS) * comp ** (inv(e.q) - 0.5) / (rhs - lhs)
    return TheoremBound(
        "restriction-finite", lhs / rhs, ok, const,
        {"rho": rho, "sS": sS, "sSigma": sSigma, "cardG": cardG, **_e(e)},
    )


def bound_energy_pair(max_ratio: float, sE: int, cardG: int) -> TheoremBound:
    """Additive-energy pair: ``max_ratio * |E| < N^d`` gives
    ``1 + 1/(1 - sqrt(max_ratio^{1/2} |E|^{1/2} / N^{d/2}))``.

    ``extras["A"]`` is ``(max_ratio |E| / N^d)^{1/4}``, the same quantity that
    :func:`bound_general` produces at (4/3, 2).  The (4/3, 2) constant it
    relies on ignores spectral weights (see
    :func:`apair.restriction.energy_restriction_constant`), so the result is a
    formula value rather than a certified bound.
    """
    if max_ratio < 1:
        raise ValueError("max_ratio is at least 1 for any nonempty set")
    ok = max_ratio * sE < cardG
    inner = math.sqrt(max_ratio) * math.sqrt(sE) / math.sqrt(cardG)
    const = 1.0 + 1.0 / (1.0 - math.sqrt(inner)) if ok else None
    return TheoremBound(
        "energy-pair", max_ratio * sE / cardG, ok, const,
        {"max_ratio": max_ratio, "sE": sE, "cardG": cardG},
        {"A": (max_ratio * sE / cardG) ** 0.25},
    )


def bound_lp(sE: int, sS: int, C_pq: float, p: float, cardG: int) -> TheoremBound:
    """Coefficients of the L^{p'} uncertainty inequality

    ``||f||_{p'} <= coeff_freq ||f^||_{L^p(S^c)} + coeff_time ||f||_{L^{p'}(E^c)}``

    valid when ``B = |E|^{2-p} |S| C^p / N^d < 1``.  ``constant`` holds
    ``coeff_time``; both coefficients sit in ``extras``.
    """
    if not 1.0 <= p <= 2.0:
        raise ValueError(f"need 1 <= p <= 2, got {p}")
    B = sE ** (2.0 - p) * sS * C_pq**p / cardG
    ok = B < 1.0
    extras = {}
    const = None
    if ok:
        d = 1.0 - B ** (1.0 / p)
        extras = {
            "coeff_freq": cardG ** -(0.5 - inv(conjugate(p))) / d,
            "coeff_time": 1.0 + 1.0 / d,
        }
        const = extras["coeff_time"]
    return TheoremBound("lp-pair", B, ok, const,
                        {"sE": sE, "sS": sS, "C_pq": C_pq, "p": p, "cardG": cardG}, extras)


def _sigma_size(cardG: int, q: float) -> int:
    x = cardG ** (2.0 / q)
    n = round(x)
    return int(n) if abs(x - n) <= 1e-9 * max(1.0, x) else math.ceil(x)


def bound_bourgain_random(B_q: float, q: float, cardG: int, sS: int) -> TheoremBound:
    """Random-spectrum bound for q > 2.

    With a uniformly random Sigma of size ``ceil(|G|^{2/q})`` and
    ``|S| < B_q^{-2q/(q-2)} |G|^{q/(q-2)}``, the constant is
    ``1/(1 - B_q |G|^{-1/2} |S|^{1/2 - 1/q})``.  ``B_q`` is user supplied.
    """
    if not q > 2:
        raise ValueError("q must exceed 2")
    if not B_q > 0:
        raise ValueError("B_q must be positive")
    A = B_q * cardG**-0.5 * sS ** (0.5 - inv(q))
    threshold = B_q ** (-2 * q / (q - 2)) * cardG ** (q / (q - 2)) if q != INF else B_q**-2 * cardG
    ok = A < 1.0
    extras = {"sigma_size": _sigma_size(cardG, q), "size_threshold": threshold}
    const = None
    if ok:
        const = 1.0 / (1.0 - A)
        extras["simplified_upper"] = (B_q + 1) * cardG / (cardG - B_q**2 * sS ** (1 - 2 * inv(q)))
    return TheoremBound("bourgain-random", A, ok, const,
                        {"B_q": B_q, "q": q, "cardG": cardG, "sS": sS}, extras)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    i = 3
    while i * i <= n:
        if n % i == 0:
            return False
        i += 2
    return True


def tao_condition(prime_p: int, sS: int, sSigma: int) -> bool:
    """For G = Z/pZ with p prime, any pair with ``|S| + |Sigma| < p + 1`` annihilates."""
    if not is_prime(prime_p):
        raise ValueError(f"{prime_p} is not prime")
    return sS + sSigma < prime_p + 1


def tao_bound(prime_p: int, sS: int, sSigma: int) -> TheoremBound:
    ok = tao_condition(prime_p, sS, sSigma)
    return TheoremBound("tao", sS + sSigma, ok, None,
                        {"prime": prime_p, "sS": sS, "sSigma": sSigma}, qualitative=True)


# -- Euclidean annulus --------------------------------------------------------------------

def stein_tomas_p(d: int) -> float:
    """Endpoint ``2(d+1)/(d+3)`` of the (p, 2) restriction range for the sphere."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    return 2.0 * (d + 1) / (d + 3)


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


@dataclass(frozen=True)
class AnnulusParams:
    """Annulus ``{R - delta/2 < |x| < R + delta/2}`` in R^d and a set S of measure ``measure_S``.

    ``C_surface`` (the sphere's restriction constant) and ``kappa`` are
    supplied by the caller; no defaults are invented.
    """

    d: int
    R: float
    delta: float
    C_surface: float
    kappa: float
    measure_S: float

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("d must be >= 2")
        for name in ("R", "delta", "C_surface", "kappa", "measure_S"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.delta >= 2 * self.R:
            raise ValueError("delta >= 2R: the annulus degenerates into a ball")


@dataclass
class AnnulusReport:
    rho: float
    volume: float
    volume_asymptotic: float
    stein_tomas_p: float
    condition_value: float
    condition_satisfied: bool
    constant: float | None
    delta_choice: float
    restriction_condition_value: float
    conjectured_range: dict
    flags: dict

    def to_dict(self) -> dict:
        return asdict(self)


def annulus_delta_choice(d: int, R: float, kappa: float, measure_S: float) -> float:
    """Width making ``kappa R^{(d-1)/2} delta^{(d+1)/2} |S|`` equal to 1/2."""
    return (2 * kappa * measure_S) ** (-2.0 / (d + 1)) * R ** (-(d - 1) / (d + 1))


def annulus_calculator(a: AnnulusParams, e: ExponentPair | None = None) -> AnnulusReport:
    d, R, delta = a.d, a.R, a.delta
    pts = stein_tomas_p(d)
    if e is None:
        e = ExponentPair(pts, 2)
    rho = a.C_surface * R ** (d * (inv(e.p) + inv(e.q) - 1)) * (delta / R) ** inv(e.q)
    omega = unit_ball_volume(d)
    volume = omega * ((R + delta / 2) ** d - (R - delta / 2) ** d)
    cv = a.kappa * R ** ((d - 1) / 2) * delta ** ((d + 1) / 2) * a.measure_S
    ok = cv < 1.0
    pc = conjugate(e.p)
    return AnnulusReport(
        rho=rho,
        volume=volume,
        volume_asymptotic=R ** (d - 1) * delta,
        stein_tomas_p=pts,
        condition_value=cv,
        condition_satisfied=ok,
        constant=1.0 + 1.0 / (1.0 - cv) if ok else None,
        delta_choice=annulus_delta_choice(d, R, a.kappa, a.measure_S),
        restriction_condition_value=rho * a.measure_S ** (inv(e.p) - 0.5) * volume ** (0.5 - inv(e.q)),
        conjectured_range={
            "p_below": 2.0 * d / (d + 1),
            "q_at_most": (d - 1) / (d + 1) * pc if pc != INF else INF,
            "informational": True,
        },
        flags={
            "size_condition_reads_delta": True,
            "nazarov_comparison": "C exp(C |S| |A(R,delta)|) with unspecified C; |S||A| = %.6g"
                                  % (a.measure_S * volume),
            "p": e.p,
            "q": e.q,
        },
    )
