"""Test functions f and the calculus the fluctuation formulas need.

A ``TestFunction`` is an immutable pair of vectorised callables (value and
derivative) with an optional declared support.  Norms, moments and Fourier
data are computed by adaptive quadrature; nothing is symbolic.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DivergenceError, DomainError
from .quadrature import (
    DEFAULT_QUAD,
    QuadSpec,
    integrate_interval,
    integrate_oscillatory,
    integrate_real_line,
)

logger = logging.getLogger(__name__)

SQRT_2PI = math.sqrt(2.0 * math.pi)
DIAGONAL_THRESHOLD = 1e-6

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class TestFunction:
    __test__ = False  # keep pytest from collecting this class

    evaluator: Callable[[ArrayLike], ArrayLike]
    derivative_evaluator: Callable[[ArrayLike], ArrayLike]
    support_hint: Optional[Tuple[float, float]] = None
    label: str = "f"

    def __call__(self, u: ArrayLike) -> ArrayLike:
        return self.evaluator(u)

    def derivative(self, u: ArrayLike) -> ArrayLike:
        return self.derivative_evaluator(u)

    @property
    def scale(self) -> float:
        if self.support_hint is None:
            return 1.0
        a, b = self.support_hint
        return b - a


@dataclass(frozen=True)
class UniformGrid:
    lo: float
    hi: float
    step: float

    def __post_init__(self):
        if self.step <= 0:
            raise DomainError(f"grid step must be positive, got {self.step}")
        if self.hi < self.lo:
            raise DomainError(f"grid upper end {self.hi} below lower end {self.lo}")

    @property
    def count(self) -> int:
        return int(round((self.hi - self.lo) / self.step)) + 1

    def points(self) -> np.ndarray:
        return self.lo + self.step * np.arange(self.count)


@dataclass(frozen=True)
class GridFunction:
    """Samples of a (possibly complex) function on a uniform grid."""

    grid: UniformGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.values) != self.grid.count:
            raise DomainError(
                f"{len(self.values)} values for a grid of {self.grid.count} points"
            )


@dataclass(frozen=True)
class PairGrid:
    """Grid for the weighted Lipschitz search: [-half_width, half_width]²."""

    half_width: float = 10.0
    points: int = 801
    refine_points: int = 41


# ---------------------------------------------------------------------------
# construction


def _bump(u):
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) <= 1.0, (1.0 - u * u) ** 2, 0.0)


def _bump_prime(u):
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) <= 1.0, -4.0 * u * (1.0 - u * u), 0.0)


def _odd_bump(u):
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) <= 1.0, u * (1.0 - u * u) ** 2, 0.0)


def _odd_bump_prime(u):
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) <= 1.0, (1.0 - u * u) * (1.0 - 5.0 * u * u), 0.0)


def _cauchy(u):
    u = np.asarray(u, dtype=float)
    return 1.0 / (1.0 + u * u)


def _cauchy_prime(u):
    u = np.asarray(u, dtype=float)
    return -2.0 * u / (1.0 + u * u) ** 2


BUMP = TestFunction(_bump, _bump_prime, (-1.0, 1.0), "bump")
ODD_BUMP = TestFunction(_odd_bump, _odd_bump_prime, (-1.0, 1.0), "odd-bump")
CAUCHY = TestFunction(_cauchy, _cauchy_prime, None, "cauchy")

BUILTINS: Dict[str, TestFunction] = {
    "bump": BUMP,
    "odd-bump": ODD_BUMP,
    "cauchy": CAUCHY,
    # short names
    "f_b": BUMP,
    "f_h": ODD_BUMP,
    "f_c": CAUCHY,
}


def builtin(name: str) -> TestFunction:
    try:
        return BUILTINS[name]
    except KeyError:
        raise DomainError(
            f"unknown test function '{name}', expected one of {sorted(BUILTINS)}"
        ) from None


def _identity_value(u):
    return np.asarray(u, dtype=float)


def _identity_slope(u):
    return np.ones_like(np.asarray(u, dtype=float))


def _constant_value(c, u):
    return np.full_like(np.asarray(u, dtype=float), c)


def _constant_slope(u):
    return np.zeros_like(np.asarray(u, dtype=float))


def _scaled_value(f, a, u):
    return f(a * np.asarray(u, dtype=float))


def _scaled_slope(f, a, u):
    return a * f.derivative(a * np.asarray(u, dtype=float))


def identity() -> TestFunction:
    """f(u) = u, used for the scalar Gaussian oracles."""
    return TestFunction(_identity_value, _identity_slope, None, "identity")


def constant(c: float = 1.0) -> TestFunction:
    return TestFunction(partial(_constant_value, c), _constant_slope, None, f"constant({c:g})")


def scaled(f: TestFunction, a: float) -> TestFunction:
    """u -> f(a*u)."""
    if a <= 0:
        raise DomainError(f"scale factor must be positive, got {a}")
    support = None
    if f.support_hint is not None:
        support = (f.support_hint[0] / a, f.support_hint[1] / a)
    return TestFunction(
        partial(_scaled_value, f, a), partial(_scaled_slope, f, a), support, f"{f.label}({a:g}*u)"
    )


def _table_value(spline, lo, hi, x):
    x = np.asarray(x, dtype=float)
    return np.where((x >= lo) & (x <= hi), spline(np.clip(x, lo, hi)), 0.0)


def from_csv(path: Union[str, Path]) -> TestFunction:
    """Tabulated (u, f(u)) CSV, cubic interpolation, zero outside the table."""
    table = np.genfromtxt(str(path), delimiter=",", comments="#")
    table = np.atleast_2d(table)
    table = table[~np.isnan(table).any(axis=1)]
    if table.shape[0] < 4 or table.shape[1] < 2:
        raise DomainError(f"{path}: need at least 4 rows of (u, f(u))")
    order = np.argsort(table[:, 0])
    u, v = table[order, 0], table[order, 1]
    spline = CubicSpline(u, v)
    lo, hi = float(u[0]), float(u[-1])
    return TestFunction(
        partial(_table_value, spline, lo, hi),
        partial(_table_value, spline.derivative(), lo, hi),
        (lo, hi),
        Path(path).stem,
    )


def resolve(spec: Union[str, TestFunction]) -> TestFunction:
    """Builtin name, CSV path or an already built TestFunction."""
    if isinstance(spec, TestFunction):
        return spec
    if spec in BUILTINS:
        return BUILTINS[spec]
    if str(spec).endswith(".csv"):
        return from_csv(spec)
    return builtin(spec)


def check_invariants(f: TestFunction, probes: int = 97) -> None:
    """Validate the support declaration and the derivative on a probe grid."""
    lo, hi = f.support_hint if f.support_hint is not None else (-5.0, 5.0)
    width = hi - lo
    if f.support_hint is not None:
        outside = np.concatenate(
            [np.linspace(lo - 2 * width, lo, probes)[:-1], np.linspace(hi, hi + 2 * width, probes)[1:]]
        )
        if np.max(np.abs(f(outside))) > 0.0:
            raise DomainError(f"{f.label}: nonzero outside declared support {f.support_hint}")
    u = np.linspace(lo, hi, probes + 2)[1:-1]
    h = 1e-5 * max(width, 1.0)
    fd = (f(u + h) - f(u - h)) / (2 * h)
    exact = f.derivative(u)
    scale = max(np.max(np.abs(exact)), 1e-300)
    err = np.abs(fd - exact) / scale
    if np.max(err) > 1e-6:
        raise DomainError(
            f"{f.label}: derivative disagrees with finite differences (max rel err {np.max(err):.2e})"
        )


# ---------------------------------------------------------------------------
# integrals


def _check_decay(g: Callable[[float], float], power: float, what: str) -> None:
    def weighted(u: float) -> float:
        return abs(u) ** power * abs(float(g(u)))

    near = max(weighted(1e3), weighted(-1e3))
    far = max(weighted(1e6), weighted(-1e6))
    if not math.isfinite(far) or far > 10.0 * near + 1e-12:
        raise DivergenceError(f"{what}: integrand does not decay fast enough")


def _integrate_line(f: TestFunction, g: Callable[[float], float], quad: QuadSpec, what: str) -> float:
    if f.support_hint is not None:
        a, b = f.support_hint
        return integrate_interval(g, a, b, quad)
    _check_decay(g, 2.0, what)
    return integrate_real_line(g, quad, points=[0.0])


def moment(f: TestFunction, k: int, quad: Optional[QuadSpec] = None) -> float:
    """μ_k(f) = ∫ u^k f(u) du."""
    if k < 0:
        raise DomainError(f"moment order must be nonnegative, got {k}")
    quad = quad or DEFAULT_QUAD
    return _integrate_line(f, lambda u: u**k * float(f(u)), quad, f"moment {k} of {f.label}")


def absolute_moment(f: TestFunction, k: int, quad: Optional[QuadSpec] = None) -> float:
    quad = quad or DEFAULT_QUAD
    return _integrate_line(f, lambda u: abs(u) ** k * abs(float(f(u))), quad, f"|moment| {k}")


def lowest_nonvanishing_moment(f: TestFunction, p_max: int = 6, rtol: float = 1e-8) -> int:
    """Index p of the first moment with |μ_p| above rtol times its scale."""
    for k in range(p_max + 1):
        scale = absolute_moment(f, k)
        if abs(moment(f, k)) > rtol * max(scale, 1e-300):
            return k
    raise DomainError(f"{f.label}: moments 0..{p_max} all vanish")


def l2_norm_sq(f: TestFunction, quad: Optional[QuadSpec] = None) -> float:
    """‖f‖₂² = ∫ f(u)² du."""
    quad = quad or DEFAULT_QUAD
    return _integrate_line(f, lambda u: float(f(u)) ** 2, quad, f"L2 norm of {f.label}")


def derivative_l2_sq(f: TestFunction, quad: Optional[QuadSpec] = None) -> float:
    quad = quad or DEFAULT_QUAD
    return _integrate_line(
        f, lambda u: float(f.derivative(u)) ** 2, quad, f"L2 norm of {f.label}'"
    )


def fourier_value(f: TestFunction, omega: float, quad: Optional[QuadSpec] = None) -> complex:
    """f̂(ω) = (2π)^{-1/2} ∫ f(x) e^{-ixω} dx."""
    quad = quad or QuadSpec(epsabs=1e-13, epsrel=1e-10)
    if f.support_hint is not None:
        a, b = f.support_hint
        g = lambda x: float(f(x))  # noqa: E731
        if omega == 0.0:
            return complex(integrate_interval(g, a, b, quad) / SQRT_2PI)
        re = integrate_oscillatory(g, a, b, omega, "cos", quad)
        im = integrate_oscillatory(g, a, b, omega, "sin", quad)
        return complex(re, -im) / SQRT_2PI
    even = lambda x: float(f(x)) + float(f(-x))  # noqa: E731
    odd = lambda x: float(f(x)) - float(f(-x))  # noqa: E731
    if omega == 0.0:
        return complex(integrate_real_line(lambda x: float(f(x)), quad, points=[0.0]) / SQRT_2PI)
    w = abs(omega)
    re = integrate_oscillatory(even, 0.0, np.inf, w, "cos", quad)
    im = integrate_oscillatory(odd, 0.0, np.inf, w, "sin", quad)
    if omega < 0:
        im = -im
    return complex(re, -im) / SQRT_2PI


def fourier_transform(f: TestFunction, grid: UniformGrid, quad: Optional[QuadSpec] = None) -> GridFunction:
    values = np.array([fourier_value(f, float(w), quad) for w in grid.points()], dtype=complex)
    return GridFunction(grid, values)


_FREQ_BREAKS = [0.0] + [2.0**k for k in range(-8, 9)]


def fourier_sq_integral(
    f: TestFunction,
    weight: Callable[[float], float],
    quad: Optional[QuadSpec] = None,
    cutoff: float = 256.0,
) -> float:
    """∫ |f̂(ω)|² weight(|ω|) dω over the whole line, f real."""
    quad = quad or QuadSpec(epsabs=1e-12, epsrel=1e-9)

    def integrand(w: float) -> float:
        return abs(fourier_value(f, w)) ** 2 * weight(w)

    breaks = [b for b in _FREQ_BREAKS if b < cutoff] + [cutoff]
    total = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        total += integrate_interval(integrand, lo, hi, quad)
    # ω = cutoff / s on the tail
    tail = integrate_interval(
        lambda s: integrand(cutoff / s) * cutoff / (s * s),
        0.0,
        1.0,
        QuadSpec(epsabs=quad.epsabs, epsrel=1e-6, limit=quad.limit, slack=1e6),
    )
    return 2.0 * (total + tail)


def poisson_kernel(x: ArrayLike, tau: float) -> ArrayLike:
    x = np.asarray(x, dtype=float)
    return tau / (math.pi * (x * x + tau * tau))


def poisson_smooth(f: TestFunction, tau: float, quad: Optional[QuadSpec] = None) -> TestFunction:
    """𝒫_τ f = f * P_τ as a new TestFunction (support dropped)."""
    if tau <= 0:
        raise DomainError(f"tau must be positive, got {tau}")
    quad = quad or QuadSpec(epsabs=1e-12, epsrel=1e-10)

    def convolve(kernel: Callable[[float], float], x: float) -> float:
        g = lambda y: float(f(y)) * kernel(x - y)  # noqa: E731
        if f.support_hint is not None:
            a, b = f.support_hint
            return integrate_interval(g, a, b, quad, points=[x])
        return integrate_real_line(g, quad, points=[x])

    def value_at(x: float) -> float:
        return convolve(lambda d: tau / (math.pi * (d * d + tau * tau)), x)

    def slope_at(x: float) -> float:
        return convolve(lambda d: -2.0 * tau * d / (math.pi * (d * d + tau * tau) ** 2), x)

    value = np.vectorize(value_at, otypes=[float])
    slope = np.vectorize(slope_at, otypes=[float])
    return TestFunction(value, slope, None, f"P[{tau:g}]{f.label}")


def poisson_l2_norm_sq(f: TestFunction, tau: float) -> float:
    """‖𝒫_τ f‖₂² = ∫ |f̂|² e^{-2τ|ω|} dω."""
    if tau <= 0:
        raise DomainError(f"tau must be positive, got {tau}")
    return fourier_sq_integral(f, lambda w: math.exp(-2.0 * tau * w))


def difference_quotient(f: TestFunction, u: float, v: float, scale: float) -> float:
    if abs(u - v) < DIAGONAL_THRESHOLD * scale:
        return float(f.derivative(0.5 * (u + v)))
    return (float(f(u)) - float(f(v))) / (u - v)


def sobolev_double_integral(
    f: TestFunction,
    kernel: Callable[[float], float],
    outside_weight: Callable[[float, float], float],
    quad: Optional[QuadSpec] = None,
) -> float:
    """∬ ((f(u)-f(v))/(u-v))² kernel(u-v) du dv.

    For compact support [a,b] the part with one variable outside the support
    reduces to ∫ f(u)² outside_weight(u-a, b-u) du; ``outside_weight`` must
    equal 2∫_{d>dL} kernel(d)/d² + 2∫_{d>dR} kernel(d)/d².
    Without compact support both variables go through u = tan(θ).
    """
    quad = quad or DEFAULT_QUAD
    inner_quad = quad.tighter(10.0)
    scale = f.scale
    if f.support_hint is not None:
        a, b = f.support_hint
        edge = max(abs(float(f(a))), abs(float(f(b))))
        if edge > 1e-12:
            raise DivergenceError(f"{f.label}: jump at the support edge, seminorm diverges")

        def inner(u: float) -> float:
            g = lambda v: difference_quotient(f, u, v, scale) ** 2 * kernel(u - v)  # noqa: E731
            return integrate_interval(g, a, b, inner_quad, points=[u])

        square = integrate_interval(inner, a, b, quad)
        edges = integrate_interval(
            lambda u: float(f(u)) ** 2 * outside_weight(u - a, b - u), a, b, quad
        )
        return square + edges

    def inner_theta(theta: float) -> float:
        u = math.tan(theta)
        cu = math.cos(theta)

        def g(phi: float) -> float:
            cv = math.cos(phi)
            if cv == 0.0:
                return 0.0
            v = math.tan(phi)
            return difference_quotient(f, u, v, 1.0) ** 2 * kernel(u - v) / (cv * cv)

        if cu == 0.0:
            return 0.0
        return integrate_interval(g, -math.pi / 2, math.pi / 2, inner_quad, points=[theta]) / (cu * cu)

    return integrate_interval(inner_theta, -math.pi / 2, math.pi / 2, quad)


def sobolev_half_seminorm_sq(f: TestFunction, quad: Optional[QuadSpec] = None) -> float:
    """∬ ((f(u)-f(v))/(u-v))² du dv."""

    def outside(d_left: float, d_right: float) -> float:
        return 2.0 * (1.0 / d_left + 1.0 / d_right)

    return sobolev_double_integral(f, lambda d: 1.0, outside, quad)


def weighted_lipschitz_norm(f: TestFunction, grid: Optional[PairGrid] = None) -> float:
    """Grid lower bound of sup √(1+x²)√(1+y²)|f(x)-f(y)|/|x-y|.

    Coarse search on the pair grid, then a local refinement around the
    argmax pair. The true sup is at least the returned value.
    """
    grid = grid or PairGrid()
    xs = np.linspace(-grid.half_width, grid.half_width, grid.points)

    def best(xa: np.ndarray, ya: np.ndarray) -> Tuple[float, float, float]:
        fx, fy = f(xa), f(ya)
        X, Y = np.meshgrid(xa, ya, indexing="ij")
        diff = X - Y
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.abs(fx[:, None] - fy[None, :]) / np.abs(diff)
        q = np.where(diff == 0.0, 0.0, q)
        w = np.sqrt(1.0 + X * X) * np.sqrt(1.0 + Y * Y) * q
        i, j = np.unravel_index(int(np.argmax(w)), w.shape)
        return float(w[i, j]), float(xa[i]), float(ya[j])

    value, x0, y0 = best(xs, xs)
    h = xs[1] - xs[0]
    xr = np.linspace(x0 - 2 * h, x0 + 2 * h, grid.refine_points)
    yr = np.linspace(y0 - 2 * h, y0 + 2 * h, grid.refine_points + 1)
    refined, _, _ = best(xr, yr)
    logger.debug(f"weighted Lipschitz search for {f.label}: coarse {value:.6g}, refined {refined:.6g}")
    return max(value, refined)
