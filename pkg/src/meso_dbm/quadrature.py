"""Quadrature helpers wrapping QUADPACK and Gauss–Legendre panel rules."""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from .errors import QuadratureError

logger = logging.getLogger(__name__)

DEFAULT_EPSABS = 1e-10
DEFAULT_EPSREL = 1e-8


@dataclass(frozen=True)
class QuadSpec:
    """Tolerances for adaptive Gauss–Kronrod quadrature."""

    epsabs: float = DEFAULT_EPSABS
    epsrel: float = DEFAULT_EPSREL
    limit: int = 400
    # accepted error is this many times the requested one before raising
    slack: float = 1e3

    def tighter(self, factor: float = 100.0) -> "QuadSpec":
        return QuadSpec(self.epsabs / factor, self.epsrel / factor, self.limit, self.slack)


DEFAULT_QUAD = QuadSpec()


def _checked(result, spec: QuadSpec, what: str) -> float:
    value, abserr = float(result[0]), float(result[1])
    if not math.isfinite(value):
        raise QuadratureError(f"{what}: non-finite integral")
    if len(result) > 3:
        allowed = spec.slack * max(spec.epsabs, spec.epsrel * abs(value))
        if abserr > allowed:
            raise QuadratureError(f"{what}: {result[3]} (abserr={abserr:.3e})")
        logger.debug(f"{what}: accepted with warning '{result[3]}' abserr={abserr:.3e}")
    return value


def integrate_interval(
    func: Callable[[float], float],
    a: float,
    b: float,
    spec: Optional[QuadSpec] = None,
    points: Optional[Sequence[float]] = None,
) -> float:
    """Adaptive QUADPACK integral of ``func`` over a finite [a, b]."""
    spec = spec or DEFAULT_QUAD
    if b <= a:
        return 0.0
    pts = None
    if points:
        pts = sorted({float(p) for p in points if a < p < b}) or None
    result = integrate.quad(
        func,
        a,
        b,
        epsabs=spec.epsabs,
        epsrel=spec.epsrel,
        limit=spec.limit,
        points=pts,
        full_output=1,
    )
    return _checked(result, spec, f"quad[{a:.4g},{b:.4g}]")


def integrate_real_line(
    func: Callable[[float], float],
    spec: Optional[QuadSpec] = None,
    points: Optional[Sequence[float]] = None,
) -> float:
    """Integral over the whole line through u = tan(theta)."""

    def mapped(theta: float) -> float:
        c = math.cos(theta)
        if c == 0.0:
            return 0.0
        return func(math.tan(theta)) / (c * c)

    thetas = [math.atan(p) for p in points] if points else None
    return integrate_interval(mapped, -math.pi / 2, math.pi / 2, spec, thetas)


def integrate_oscillatory(
    func: Callable[[float], float],
    a: float,
    b: float,
    omega: float,
    kind: str,
    spec: Optional[QuadSpec] = None,
) -> float:
    """Integral of func(x)*cos(omega x) or func(x)*sin(omega x).

    ``b`` may be ``np.inf`` (QAWF, needs omega != 0); finite ranges use QAWO.
    """
    spec = spec or DEFAULT_QUAD
    if omega == 0.0:
        if kind == "sin":
            return 0.0
        if math.isinf(b):
            return integrate_interval(lambda s: func(a + s / (1.0 - s)) / (1.0 - s) ** 2, 0.0, 1.0, spec)
        return integrate_interval(func, a, b, spec)
    kwargs = dict(weight=kind, wvar=omega, full_output=1, epsabs=spec.epsabs)
    if math.isinf(b):
        result = integrate.quad(func, a, np.inf, limlst=200, **kwargs)
    else:
        result = integrate.quad(func, a, b, epsrel=spec.epsrel, limit=spec.limit, **kwargs)
    return _checked(result, spec, f"qawo[{kind},{omega:.4g}]")


@lru_cache(maxsize=16)
def _leggauss(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(nodes)


def panel_rule(breaks: Sequence[float], nodes: int = 32) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss–Legendre rule on consecutive breakpoints."""
    edges = np.unique(np.asarray(breaks, dtype=float))
    if edges.size < 2:
        return np.empty(0), np.empty(0)
    x0, w0 = _leggauss(nodes)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    x = (lo + hi) / 2 + half * x0[None, :]
    w = half * w0[None, :]
    return x.ravel(), w.ravel()


def graded_breaks(center: float, width: float, ratio: float = 0.2, levels: int = 10) -> np.ndarray:
    """Breakpoints accumulating geometrically at ``center`` from both sides."""
    d = width * ratio ** np.arange(levels + 1)
    return np.concatenate([center - d, [center], center + d])


def halve_panels(breaks: Sequence[float]) -> np.ndarray:
    edges = np.unique(np.asarray(breaks, dtype=float))
    mids = (edges[:-1] + edges[1:]) / 2
    return np.sort(np.concatenate([edges, mids]))
