"""Predicted limits of Var Y_n(f) and the regime classification.

Variances come in two dual forms, real space and Fourier side; both are
exposed so they can be checked against each other.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

from .errors import DomainError
from .semicircle import EDGE
from .testfn import (
    TestFunction,
    absolute_moment,
    derivative_l2_sq,
    fourier_sq_integral,
    l2_norm_sq,
    lowest_nonvanishing_moment,
    moment,
    poisson_l2_norm_sq,
    sobolev_double_integral,
    sobolev_half_seminorm_sq,
)

logger = logging.getLogger(__name__)

EQUALITY_TOL = 1e-12

DETERMINISTIC_SUB = "deterministic_sub"
DETERMINISTIC_CRITICAL = "deterministic_critical"
DETERMINISTIC_GUE = "deterministic_gue"
RANDOM_CLASSICAL = "random_classical"
RANDOM_CRITICAL = "random_critical"
RANDOM_INTERMEDIATE = "random_intermediate"
RANDOM_BOUNDARY = "random_boundary"
RANDOM_GUE = "random_gue"


@dataclass(frozen=True)
class RegimePrediction:
    regime: str
    variance_scale_exponent: float
    limit_variance_constant: Optional[float]
    notes: str

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _bulk_factor(x_star: float) -> float:
    if not -EDGE < x_star < EDGE:
        raise DomainError(f"x_star must lie in the bulk (-√2, √2), got {x_star}")
    return math.sqrt(2.0 - x_star * x_star)


def _check_tau(tau: float) -> None:
    if tau <= 0:
        raise DomainError(f"tau must be positive, got {tau}")


def deformation_time(n: int, gamma: float, tau: float, x_star: float = 0.0) -> float:
    return tau / (n**gamma * _bulk_factor(x_star))


def sigma_inf_sq(f: TestFunction) -> float:
    """σ_∞(f)² = (1/4π²) ∬ ((f(u)-f(v))/(u-v))² du dv."""
    return sobolev_half_seminorm_sq(f) / (4.0 * math.pi**2)


def sigma_inf_sq_fourier(f: TestFunction) -> float:
    """σ_∞(f)² = (1/2π) ∫ |f̂(ω)|² |ω| dω."""
    return fourier_sq_integral(f, lambda w: w) / (2.0 * math.pi)


def sigma_tau_sq(f: TestFunction, tau: float) -> float:
    """(τ/2π²) ∬ ((f(u)-f(v))/(u-v))² · 2τ/((u-v)²+4τ²) du dv."""
    _check_tau(tau)
    c = 2.0 * tau

    def kernel(d: float) -> float:
        return c / (d * d + c * c)

    def tail(d0: float) -> float:
        # ∫_{d0}^∞ c/(d²(d²+c²)) dd
        return (1.0 / d0 - (math.pi / 2 - math.atan(d0 / c)) / c) / c

    def outside(d_left: float, d_right: float) -> float:
        return 2.0 * (tail(d_left) + tail(d_right))

    value = sobolev_double_integral(f, kernel, outside)
    return tau * value / (2.0 * math.pi**2)


def _smoothing_weight(w: float, tau: float) -> float:
    x = 2.0 * tau * w
    if x < 1e-3:
        core = x * x / 2 - x**3 / 6 + x**4 / 24
    else:
        core = math.expm1(-x) + x
    return core / tau


def sigma_tau_sq_fourier(f: TestFunction, tau: float) -> float:
    """(1/4π) ∫ |f̂|² (e^{-2τ|ω|} - 1 + 2τ|ω|)/τ dω."""
    _check_tau(tau)
    return fourier_sq_integral(f, lambda w: _smoothing_weight(w, tau)) / (4.0 * math.pi)


def sigma_tau_small(f: TestFunction, tau: float) -> float:
    """Leading small-τ term (τ/2π) ∫ f'²."""
    _check_tau(tau)
    return tau * derivative_l2_sq(f) / (2.0 * math.pi)


def classical_variance(f: TestFunction, x_star: float) -> float:
    """π^{-1} √(2-x*²) ‖f‖₂²."""
    return _bulk_factor(x_star) * l2_norm_sq(f) / math.pi


def critical_random_variance(f: TestFunction, tau: float, x_star: float) -> float:
    """π^{-1} √(2-x*²) ‖𝒫_τ f‖₂²."""
    _check_tau(tau)
    return _bulk_factor(x_star) * poisson_l2_norm_sq(f, tau) / math.pi


def _moment_scale(f: TestFunction, k: int) -> float:
    return max(absolute_moment(f, k), 1e-300)


def s_p_variance(
    f: TestFunction, p: int, tau: float, x_star: float, convention: str = "published"
) -> float:
    """S_p(f) = √(2-x*²)(2p)! μ_p² / (2π² (p!)² 4^{2p} τ^{2p+1}).

    ``convention="large_tau"`` uses 4^p in place of 4^{2p}, the value the
    large-τ expansion of the critical variance continues into; the two agree
    for p = 0.
    """
    _check_tau(tau)
    if p < 0:
        raise DomainError(f"p must be nonnegative, got {p}")
    for k in range(p):
        if abs(moment(f, k)) > 1e-8 * _moment_scale(f, k):
            raise DomainError(f"{f.label}: moment {k} does not vanish, S_{p} undefined")
    mu_p = moment(f, p)
    if abs(mu_p) <= 1e-8 * _moment_scale(f, p):
        raise DomainError(f"{f.label}: moment {p} vanishes, S_{p} undefined")
    power = {"published": 2 * p, "large_tau": p}.get(convention)
    if power is None:
        raise DomainError(f"unknown S_p convention '{convention}'")
    return (
        _bulk_factor(x_star)
        * math.factorial(2 * p)
        * mu_p**2
        / (2.0 * math.pi**2 * math.factorial(p) ** 2 * 4.0**power * tau ** (2 * p + 1))
    )


def large_tau_constant(f: TestFunction, p: int, x_star: float) -> float:
    """lim τ^{2p+1} π^{-1}√(2-x*²)‖𝒫_τ f‖² = π^{-1}√(2-x*²)|f̂^{(p)}(0)|²(2p)!/(4^p(p!)²)."""
    fhat_p_sq = moment(f, p) ** 2 / (2.0 * math.pi)
    return (
        _bulk_factor(x_star)
        / math.pi
        * fhat_p_sq
        * math.factorial(2 * p)
        / (4.0**p * math.factorial(p) ** 2)
    )


def random_boundary_alpha(gamma: float, p: int) -> float:
    return ((2 * p + 1) * gamma + 1) / (2 * p + 2)


def _check_unit(name: str, v: float) -> None:
    if not 0.0 < v < 1.0:
        raise DomainError(f"{name} must lie strictly inside (0, 1), got {v}")


def classify_regime(
    alpha: float,
    gamma: float,
    p: int = 0,
    random_init: bool = False,
    f: Optional[TestFunction] = None,
    tau: float = 1.0,
    x_star: float = 0.0,
) -> RegimePrediction:
    """Regime of (α, γ) for deterministic or i.i.d. semicircle initial points.

    Constants are filled in when ``f`` is given; otherwise only the regime
    and exponent are meaningful.
    """
    _check_unit("alpha", alpha)
    _check_unit("gamma", gamma)
    if p < 0:
        raise DomainError(f"p must be nonnegative, got {p}")

    def const(fn):
        return fn() if f is not None else None

    if not random_init:
        if abs(alpha - gamma) <= EQUALITY_TOL:
            return RegimePrediction(
                DETERMINISTIC_CRITICAL, 0.0, const(lambda: sigma_tau_sq(f, tau)), "σ_τ(f)²"
            )
        if alpha > gamma:
            return RegimePrediction(
                DETERMINISTIC_GUE, 0.0, const(lambda: sigma_inf_sq(f)), "σ_∞(f)²"
            )
        return RegimePrediction(DETERMINISTIC_SUB, 0.0, None, "o(1), no constant predicted")

    if abs(alpha - gamma) <= EQUALITY_TOL:
        return RegimePrediction(
            RANDOM_CRITICAL,
            1.0 - alpha,
            const(lambda: critical_random_variance(f, tau, x_star)),
            "π^{-1}√(2-x*²)‖𝒫_τ f‖²",
        )
    if alpha < gamma:
        return RegimePrediction(
            RANDOM_CLASSICAL,
            1.0 - alpha,
            const(lambda: classical_variance(f, x_star)),
            "π^{-1}√(2-x*²)‖f‖²",
        )
    boundary = random_boundary_alpha(gamma, p)
    if abs(alpha - boundary) <= EQUALITY_TOL:
        return RegimePrediction(
            RANDOM_BOUNDARY,
            0.0,
            const(lambda: s_p_variance(f, p, tau, x_star) + sigma_inf_sq(f)),
            "S_p(f) + σ_∞(f)²",
        )
    if alpha < boundary:
        return RegimePrediction(
            RANDOM_INTERMEDIATE,
            1.0 - alpha + (2 * p + 1) * (gamma - alpha),
            const(lambda: s_p_variance(f, p, tau, x_star)),
            "S_p(f)",
        )
    return RegimePrediction(RANDOM_GUE, 0.0, const(lambda: sigma_inf_sq(f)), "σ_∞(f)²")


def var_im_xp_prediction(p: int, gamma: float, tau: float, n: int) -> float:
    """n^{(2p+1)γ-1} (2p)! / (√2 (p!)² 4^p τ^{2p+1})."""
    _check_tau(tau)
    return (
        n ** ((2 * p + 1) * gamma - 1)
        * math.factorial(2 * p)
        / (math.sqrt(2.0) * math.factorial(p) ** 2 * 4.0**p * tau ** (2 * p + 1))
    )


def poisson_identity_residual(u: float, v: float, tau: float) -> float:
    """|2 - (d/(d+2iτ))² - (d/(d-2iτ))² - 8τ²/(d²+4τ²)|, d = u - v."""
    d = u - v
    lhs = 2.0 - (d / (d + 2j * tau)) ** 2 - (d / (d - 2j * tau)) ** 2
    return abs(lhs - 8.0 * tau * tau / (d * d + 4.0 * tau * tau))


def predictions(
    f: TestFunction,
    tau: float,
    alpha: Optional[float] = None,
    gamma: Optional[float] = None,
    p: Optional[int] = None,
    x_star: float = 0.0,
    random_init: bool = False,
) -> Dict[str, Any]:
    """Every theory quantity for one parameter point, JSON-ready.

    The regime block is filled only when both α and γ are given; p defaults
    to the lowest nonvanishing moment of f.
    """
    if p is None:
        p = lowest_nonvanishing_moment(f)
    out: Dict[str, Any] = {
        "function": f.label,
        "tau": tau,
        "p": p,
        "x_star": x_star,
        "random_init": random_init,
        "sigma_inf_sq": sigma_inf_sq(f),
        "sigma_tau_sq": sigma_tau_sq(f, tau),
        "sigma_tau_small": sigma_tau_small(f, tau),
        "classical_variance": classical_variance(f, x_star),
        "critical_random_variance": critical_random_variance(f, tau, x_star),
        "large_tau_constant": large_tau_constant(f, p, x_star),
    }
    try:
        out["s_p_variance"] = s_p_variance(f, p, tau, x_star)
        out["s_p_variance_large_tau"] = s_p_variance(f, p, tau, x_star, "large_tau")
    except DomainError as e:
        out["s_p_variance"] = None
        out["s_p_note"] = str(e)
    if alpha is not None and gamma is not None:
        out["alpha"] = alpha
        out["gamma"] = gamma
        out["random_boundary_alpha"] = random_boundary_alpha(gamma, p)
        out["regime"] = classify_regime(alpha, gamma, p, random_init, f, tau, x_star).to_dict()
    return out
