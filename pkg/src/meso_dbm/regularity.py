"""Regularity of the initial points and the moment statistics X_p.

ξ belongs to 𝒞_n(U, a) when

    sup_{Im w ≥ 1/n, Re w ∈ U} √(Im w / n) |Σ_j 1/(w-ξ_j) - n U(w)| ≤ a,

U(w) being the semicircle Stieltjes transform.  The sup is taken over a finite
grid, so the reported value is a lower bound of the true one.  Points in the
far field L_n, where the bound holds automatically, are skipped.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .errors import DomainError
from .mcstat import block_jackknife
from .quadrature import QuadSpec, integrate_interval
from .rng import resolve_seed, rng_for
from .semicircle import EDGE, Configuration, sample_points, stieltjes_u, stieltjes_u_array

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RegularityGrid:
    levels: int = 12
    max_spacing: float = 0.02
    # re_span bounds Re w when U is the whole line
    re_span: float = 2.0
    refine: int = 4
    chunk: int = 2048


@dataclass(frozen=True)
class RegularityReport:
    sup_value: float
    threshold: float
    passed: bool
    argmax_w: complex
    grid_size: int

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d["argmax_w"] = [self.argmax_w.real, self.argmax_w.imag]
        return d


def tied_delta_max(gamma: float) -> float:
    """Largest admissible δ when δ is tied to γ: (1-γ)/(2(1+γ))."""
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}")
    return (1.0 - gamma) / (2.0 * (1.0 + gamma))


def _deviation(points: np.ndarray, w: np.ndarray, chunk: int) -> np.ndarray:
    n = points.size
    out = np.empty(w.size)
    for i in range(0, w.size, chunk):
        ww = w[i : i + chunk]
        s = (1.0 / (ww[:, None] - points[None, :])).sum(axis=1)
        out[i : i + chunk] = np.sqrt(ww.imag / n) * np.abs(s - n * stieltjes_u_array(ww))
    return out


def _re_spans(
    U: Optional[Tuple[float, float]], re_span: float, re_far: float
) -> List[Tuple[float, float]]:
    """U and [-re_span, re_span] as disjoint intervals, cut at the far field."""
    spans = [(-re_span, re_span)] + ([tuple(U)] if U is not None else [])
    spans = sorted((max(lo, -re_far), min(hi, re_far)) for lo, hi in spans)
    merged: List[Tuple[float, float]] = []
    for lo, hi in spans:
        if hi < lo:
            continue
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def _net(re_lo: float, re_hi: float, im_levels: np.ndarray, spacing_cap: float) -> np.ndarray:
    nodes = []
    for y in im_levels:
        h = min(spacing_cap, y / 4.0)
        count = max(2, int(math.ceil((re_hi - re_lo) / h)) + 1)
        nodes.append(np.linspace(re_lo, re_hi, count) + 1j * y)
    return np.concatenate(nodes)


def check_regularity(
    xi: Configuration,
    U: Optional[Tuple[float, float]] = None,
    A: float = 1.0,
    delta: float = 0.2,
    grid: Optional[RegularityGrid] = None,
    gamma: Optional[float] = None,
) -> RegularityReport:
    """Grid evaluation of the 𝒞_n(U, A n^δ) condition.

    Im w runs over a geometric ladder from 1/n to min(1, far-field bound);
    Re w over U together with [-re_span, re_span] (the latter alone for the
    whole line) with spacing min(max_spacing, Im w / 4), followed by a finer
    pass around the argmax.
    """
    grid = grid or RegularityGrid()
    if A <= 0:
        raise DomainError(f"A must be positive, got {A}")
    if delta <= 0:
        raise DomainError(f"delta must be positive, got {delta}")
    if gamma is not None and delta >= tied_delta_max(gamma):
        raise DomainError(f"delta={delta} not below (1-γ)/(2(1+γ)) = {tied_delta_max(gamma):.6g}")
    points = xi.points
    n = xi.n
    a = A * n**delta
    im_far = n / (4.0 * a * a)
    re_far = EDGE + n / (a * a)

    if U is not None and U[1] < U[0]:
        raise DomainError(f"U upper end {U[1]} below lower end {U[0]}")
    spans = _re_spans(U, grid.re_span, re_far)
    im_lo, im_hi = 1.0 / n, min(1.0, im_far)
    if not spans or im_hi <= im_lo:
        raise DomainError("empty regularity grid: the far-field region covers every w")

    levels = np.geomspace(im_lo, im_hi, grid.levels)
    w = np.concatenate([_net(lo, hi, levels, grid.max_spacing) for lo, hi in spans])
    dev = _deviation(points, w, grid.chunk)
    k = int(np.argmax(dev))
    best, w_best = float(dev[k]), complex(w[k])

    # finer pass around the coarse argmax
    y0 = w_best.imag
    h = min(grid.max_spacing, y0 / 4.0)
    ys = np.clip(y0 * np.geomspace(0.7, 1.4, grid.refine + 1), im_lo, im_hi)
    re_lo, re_hi = next((lo, hi) for lo, hi in spans if lo <= w_best.real <= hi)
    xs = np.clip(w_best.real + np.linspace(-h, h, 2 * grid.refine + 1), re_lo, re_hi)
    w_fine = (xs[None, :] + 1j * ys[:, None]).ravel()
    dev_fine = _deviation(points, w_fine, grid.chunk)
    j = int(np.argmax(dev_fine))
    if dev_fine[j] > best:
        best, w_best = float(dev_fine[j]), complex(w_fine[j])

    size = int(w.size + w_fine.size)
    logger.debug(f"regularity n={n}: sup {best:.6g} at {w_best:.4g} over {size} points, threshold {a:.6g}")
    return RegularityReport(best, a, best <= a, w_best, size)


def _resolvent_moment(w: complex, p: int, quad: Optional[QuadSpec] = None) -> complex:
    """(1/π) ∫ √(2-ξ²) (w-ξ)^{-(p+1)} dξ through ξ = √2 sin θ."""
    quad = quad or QuadSpec(epsabs=1e-13, epsrel=1e-11)

    def integrand(theta: float) -> complex:
        c = math.cos(theta)
        return 2.0 * c * c / (w - EDGE * math.sin(theta)) ** (p + 1) / math.pi

    re = integrate_interval(lambda th: integrand(th).real, -math.pi / 2, math.pi / 2, quad)
    im = integrate_interval(lambda th: integrand(th).imag, -math.pi / 2, math.pi / 2, quad)
    return complex(re, im)


def xp_integral_term(p: int, t: float, method: str = "auto") -> complex:
    """Semicircle part of X_p at w = i√2 sinh t; p = 0 is U(w) in closed form."""
    if p < 0:
        raise DomainError(f"p must be nonnegative, got {p}")
    if t <= 0:
        raise DomainError(f"t must be positive, got {t}")
    w = 1j * EDGE * math.sinh(t)
    if method == "closed" or (method == "auto" and p == 0):
        if p != 0:
            raise DomainError("closed form available only for p = 0")
        return stieltjes_u(w)
    return _resolvent_moment(w, p)


def xp_statistic(xi: Configuration, p: int, t: float, integral: Optional[complex] = None) -> complex:
    """X_p = (1/n) Σ (i c₂√2 - ξ_j)^{-(p+1)} minus its semicircle value, c₂ = sinh t."""
    if integral is None:
        integral = xp_integral_term(p, t)
    w = 1j * EDGE * math.sinh(t)
    return complex(np.mean((w - xi.points) ** -(p + 1))) - integral


def xp_variance_mc(
    n: int, p: int, gamma: float, tau: float, trials: int = 2000, seed: Optional[int] = None
) -> Tuple[float, float]:
    """Sample variance of Im X_p over i.i.d. semicircle ξ, with jackknife error.

    Uses t = τ/(n^γ √2), the x* = 0 time scale.
    """
    if n < 1 or trials < 20:
        raise DomainError("need n >= 1 and at least 20 trials")
    seed = resolve_seed(seed)
    t = tau / (n**gamma * EDGE)
    integral = xp_integral_term(p, t)
    w = 1j * EDGE * math.sinh(t)
    values = np.empty(trials)
    for k in range(trials):
        pts = sample_points(n, rng_for(seed, k))
        values[k] = (np.mean((w - pts) ** -(p + 1)) - integral).imag
    return block_jackknife(values, lambda v: float(np.var(v, ddof=1)))
