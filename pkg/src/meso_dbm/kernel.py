"""Correlation kernel of the deformed GUE at small n.

The eigenvalues of e^{-t}diag(ξ) + √(1-e^{-2t})X form a determinantal point
process with

    K_n(x,y) = C/(2πi)² ∮_Σ dz ∫_Γ dw e^{N F_n(w;x) - N F_n(z;y)} / (w - z)

where N = n/(1-q²), C = 2qN and F_n(w;x) = (qw-x)² + (1/N) Σ log(w-ξ_j).

Γ is moved to the vertical line through the anchor Ω_n(x) (plus a small
offset) and Σ to the wedge Re Ω_n(y) ∓ t ± i√(t²/3 + (Im Ω_n(y))²).  The two
contours cross; the residue collected while moving Γ across Σ is an
elementary integral over the vertical segment between the crossings and is
added in closed form.  The remaining double integral has an integrable 1/r
singularity at the crossings, which graded Gauss–Legendre panels resolve.

All kernel values returned here are conjugated, K̃(x,y) = e^{-c(x)+c(y)} K(x,y)
with c(x) = N Re F_n(Ω_n(x); x); every determinantal quantity is invariant
under that conjugation.
"""

import cmath
import logging
import math
import os
from dataclasses import asdict, dataclass, replace
from typing import Any, Callable, Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import BranchCutError, ConvergenceError, DomainError, QuadratureError
from .quadrature import graded_breaks, halve_panels, panel_rule
from .semicircle import EDGE, Configuration, density, stieltjes_u, stieltjes_u_prime
from .testfn import TestFunction, constant

logger = logging.getLogger(__name__)

KERNEL_NMAX = int(os.getenv("MESO_DBM_KERNEL_NMAX", "12"))
SADDLE_TOL = 1e-12
MAX_NEWTON = 100
GAMMA_OFFSET = 1e-3
# integrand magnitudes below e^{-TAIL_DROP} relative to the apex are dropped
TAIL_DROP = 45.0


@dataclass(frozen=True)
class KernelContext:
    xi: Configuration
    t: float
    n_max: int = KERNEL_NMAX

    def __post_init__(self):
        if not self.t > 0.0:
            raise DomainError(f"t must be positive, got {self.t}")

    @property
    def n(self) -> int:
        return self.xi.n

    @property
    def q(self) -> float:
        return math.exp(-self.t)

    @property
    def s(self) -> float:
        """1 - q²."""
        return -math.expm1(-2.0 * self.t)

    @property
    def big_n(self) -> float:
        return self.n / self.s

    @property
    def points(self) -> np.ndarray:
        return self.xi.points


@dataclass(frozen=True)
class SaddleResult:
    omega: complex
    residual: float
    iterations: int
    f_second: complex


class Diagnostics(NamedTuple):
    e1: float
    e2: float
    e3: float


@dataclass(frozen=True)
class ContourQuad:
    """Panel layout of the contour rules."""

    nodes: int = 32
    panels: int = 12
    grading_levels: int = 8
    grading_ratio: float = 0.2
    line_nodes: int = 16
    refinement: int = 0
    self_tol: float = 1e-7
    max_refinements: int = 2

    def refined(self) -> "ContourQuad":
        return replace(self, refinement=self.refinement + 1)


DEFAULT_CONTOUR = ContourQuad()


def _require_small(ctx: KernelContext) -> None:
    if ctx.n > ctx.n_max:
        raise DomainError(
            f"kernel evaluation limited to n <= {ctx.n_max}, got n={ctx.n} "
            "(raise MESO_DBM_KERNEL_NMAX to override)"
        )


# ---------------------------------------------------------------------------
# F_n and its saddle points


def _log_prod(ctx: KernelContext, w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    with np.errstate(divide="ignore"):
        return np.log(w[..., None] - ctx.points).sum(axis=-1)


def _scalar(v):
    v = np.asarray(v)
    return complex(v) if v.ndim == 0 else v


def f_n(ctx: KernelContext, w, x: float):
    """(qw - x)² + ((1-q²)/n) Σ log(w - ξ_j), principal logarithms."""
    w = np.asarray(w, dtype=complex)
    on_cut = (w.imag == 0.0) & (w.real <= ctx.points[-1])
    if np.any(on_cut):
        raise BranchCutError(f"F_n needs w off (-∞, {ctx.points[-1]:.6g}], got a point on the cut")
    q = ctx.q
    return _scalar((q * w - x) ** 2 + _log_prod(ctx, w) / ctx.big_n)


def _poles_hit(ctx: KernelContext, w: np.ndarray) -> bool:
    return bool(np.any((w[..., None] == ctx.points)))


def f_n_prime(ctx: KernelContext, w, x: float):
    w = np.asarray(w, dtype=complex)
    if _poles_hit(ctx, w):
        raise BranchCutError("F_n' has a pole at each ξ_j")
    q = ctx.q
    return _scalar(2.0 * q * (q * w - x) + (1.0 / (w[..., None] - ctx.points)).sum(axis=-1) / ctx.big_n)


def f_n_second(ctx: KernelContext, w, x: float):
    w = np.asarray(w, dtype=complex)
    if _poles_hit(ctx, w):
        raise BranchCutError("F_n'' has a pole at each ξ_j")
    return _scalar(2.0 * ctx.q**2 - (1.0 / (w[..., None] - ctx.points) ** 2).sum(axis=-1) / ctx.big_n)


def _check_bulk(x: float) -> None:
    if not -EDGE < x < EDGE:
        raise DomainError(f"x must lie in the bulk (-√2, √2), got {x}")


def saddle_limit(x: float, t: float) -> complex:
    """Ω(x) = x cosh t + i√(2-x²) sinh t."""
    _check_bulk(x)
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t}")
    return complex(x * math.cosh(t), math.sqrt(2.0 - x * x) * math.sinh(t))


def saddle_limit_residual(x: float, t: float) -> float:
    """|F'(Ω(x))| for the semicircle limit F'(w) = 2q(qw-x) + (1-q²)U(w)."""
    w = saddle_limit(x, t)
    q = math.exp(-t)
    return abs(2.0 * q * (q * w - x) - math.expm1(-2.0 * t) * stieltjes_u(w))


def saddle_solve(
    ctx: KernelContext, x: float, tol: float = SADDLE_TOL, max_iter: int = MAX_NEWTON
) -> SaddleResult:
    """Damped Newton on F_n' started from Ω(x), kept in the upper half plane."""
    w = saddle_limit(x, ctx.t)
    for it in range(max_iter + 1):
        d1 = f_n_prime(ctx, w, x)
        d2 = f_n_second(ctx, w, x)
        if abs(d1) <= tol * (1.0 + abs(d2)):
            logger.debug(f"saddle at x={x:.6g}: {w:.12g} after {it} iterations")
            return SaddleResult(w, abs(d1), it, d2)
        if it == max_iter:
            break
        step = -d1 / d2
        if abs(step) <= 4.0 * np.finfo(float).eps * abs(w):
            return SaddleResult(w, abs(d1), it, d2)
        for _ in range(60):
            cand = w + step
            if cand.imag > 0.0 and abs(f_n_prime(ctx, cand, x)) < abs(d1):
                break
            step /= 2.0
        else:
            raise ConvergenceError(f"saddle at x={x}: Newton step left the upper half plane")
        w = cand
    raise ConvergenceError(f"saddle at x={x}: no convergence after {max_iter} iterations")


def saddle_lipschitz_ratio(ctx: KernelContext, x: float, y: float) -> complex:
    """(Ω_n(x) - Ω_n(y)) / (x - y)."""
    if x == y:
        raise DomainError("saddle Lipschitz ratio needs x != y")
    return (saddle_solve(ctx, x).omega - saddle_solve(ctx, y).omega) / (x - y)


def steep_descent_profile(ctx: KernelContext, x: float, ts: Sequence[float]) -> np.ndarray:
    """Re F_n(Re Ω_n(x) + is; x) for s in ``ts``."""
    omega = saddle_solve(ctx, x).omega
    w = omega.real + 1j * np.asarray(ts, dtype=float)
    return np.real(np.asarray(f_n(ctx, w, x)))


def regularity_diagnostics(ctx: KernelContext, x: float) -> Diagnostics:
    """ℰ₁, ℰ₂, ℰ₃ at Ω(x): empirical sums against their semicircle integrals."""
    omega = saddle_limit(x, ctx.t)
    n, s = ctx.n, ctx.s
    d = omega - ctx.points
    e1 = math.sqrt(s / n) * abs(np.sum(1.0 / d) - n * stieltjes_u(omega))
    e2 = (s / n) * abs(np.sum(1.0 / d**2) + n * complex(stieltjes_u_prime(omega)))
    e3 = (s / n) ** 1.5 * float(np.sum(np.abs(d) ** -3))
    return Diagnostics(float(e1), float(e2), e3)


# ---------------------------------------------------------------------------
# contour anchors


@dataclass(frozen=True)
class _Anchor:
    omega: complex
    log_scale: float


def _exponent(ctx: KernelContext, w, x: float) -> np.ndarray:
    """N F_n(w; x), computed without the 1/N round trip."""
    w = np.asarray(w, dtype=complex)
    return ctx.big_n * (ctx.q * w - x) ** 2 + _log_prod(ctx, w)


def _critical_points(ctx: KernelContext, x: float) -> np.ndarray:
    """Roots of the numerator of F_n'(w; x) over distinct poles."""
    vals, mult = np.unique(ctx.points, return_counts=True)
    q = ctx.q
    num = np.polymul([2.0 * q * q, -2.0 * q * x], np.poly(vals))
    for k, m in enumerate(mult):
        others = np.poly(np.delete(vals, k)) if vals.size > 1 else np.array([1.0])
        num = np.polyadd(num, (m / ctx.big_n) * np.atleast_1d(others))
    return np.roots(num)


def _anchor(ctx: KernelContext, x: float) -> _Anchor:
    omega = None
    if -EDGE < x < EDGE:
        try:
            omega = saddle_solve(ctx, x).omega
        except ConvergenceError as e:
            logger.debug(f"anchor at x={x}: {e}; falling back to polynomial roots")
    if omega is None:
        roots = _critical_points(ctx, x)
        upper = roots[roots.imag > 1e-9 * (1.0 + np.abs(roots))]
        if upper.size:
            omega = complex(upper[np.argmax(upper.imag)])
        else:
            real = roots.real
            centre = float(real[np.argmin(np.abs(real - x / ctx.q))])
            omega = complex(centre, 1.0 / math.sqrt(ctx.big_n))
    log_scale = float(np.real(_exponent(ctx, omega, x)))
    return _Anchor(omega, log_scale)


def _reach(profile: Callable[[float], float], start: float, step: float) -> float:
    """First point beyond ``start`` where ``profile`` has dropped by TAIL_DROP."""
    ref = max(profile(start), 0.0)
    for _ in range(80):
        if profile(start + step) < ref - TAIL_DROP:
            return start + step
        step *= 1.5
    raise QuadratureError("contour integrand does not decay along the tail")


def _local_breaks(centre: float, scale: float) -> np.ndarray:
    return centre + scale * np.array([-4.0, -2.0, -1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 2.0, 4.0])


def _rule(breaks: np.ndarray, lo: float, hi: float, nodes: int, refinement: int):
    b = np.clip(np.asarray(breaks, dtype=float), lo, hi)
    b = np.unique(np.concatenate([b, [lo, hi]]))
    for _ in range(refinement):
        b = halve_panels(b)
    return panel_rule(b, nodes)


@dataclass(frozen=True)
class _Contours:
    centre: float  # Re of Γ
    s_max: float
    sigma_apex: complex
    t_lo: float  # range of the Σ₊ parameter
    t_hi: float


def _sigma_height(apex: complex, t):
    return np.sqrt(np.asarray(t, dtype=float) ** 2 / 3.0 + apex.imag**2)


def _layout(ctx: KernelContext, ax: _Anchor, ay: _Anchor, x: float, y: float, offset: float) -> _Contours:
    b0 = ax.omega.imag
    centre = ax.omega.real + offset * b0
    width = 1.0 / math.sqrt(ctx.big_n)

    def gamma_profile(s: float) -> float:
        return float(np.real(_exponent(ctx, centre + 1j * s, x))) - ax.log_scale

    s_max = _reach(gamma_profile, b0, max(b0, width))

    apex = ay.omega

    def sigma_profile(t: float) -> float:
        z = apex.real - t + 1j * float(_sigma_height(apex, t))
        return -float(np.real(_exponent(ctx, z, y))) + ay.log_scale

    step = max(apex.imag, width)
    t_hi = _reach(sigma_profile, 0.0, step)
    t_lo = _reach(sigma_profile, 0.0, -step)
    return _Contours(centre, s_max, apex, t_lo, t_hi)


def _gamma_nodes(lay: _Contours, crossings: Sequence[float], quad: ContourQuad, nodes: int):
    h = 2.0 * lay.s_max / quad.panels
    breaks = [np.linspace(-lay.s_max, lay.s_max, quad.panels + 1)]
    for c in crossings:
        breaks.append(_local_breaks(c, max(abs(c), h / 8) / 2))
        breaks.append(graded_breaks(c, h / 2, quad.grading_ratio, quad.grading_levels))
    s, ws = _rule(np.concatenate(breaks), -lay.s_max, lay.s_max, nodes, quad.refinement)
    return lay.centre + 1j * s, 1j * ws


def _sigma_nodes(lay: _Contours, crossing: Optional[float], quad: ContourQuad, nodes: int):
    """Nodes and weights on Σ₊ ∪ Σ₋, counter-clockwise around the real axis."""
    apex = lay.sigma_apex
    h = (lay.t_hi - lay.t_lo) / quad.panels
    breaks = [np.linspace(lay.t_lo, lay.t_hi, quad.panels + 1), _local_breaks(0.0, apex.imag)]
    if crossing is not None:
        breaks.append(graded_breaks(crossing, h / 2, quad.grading_ratio, quad.grading_levels))
    t, wt = _rule(np.concatenate(breaks), lay.t_lo, lay.t_hi, nodes, quad.refinement)
    height = _sigma_height(apex, t)
    slope = (t / 3.0) / height
    # Σ₊ runs right to left above the axis, Σ₋ is its mirror image run left to right
    z_up = apex.real - t + 1j * height
    dz_up = (-1.0 + 1j * slope) * wt
    z_down = np.conj(z_up[::-1])
    dz_down = np.conj(-dz_up[::-1])
    return np.concatenate([z_up, z_down]), np.concatenate([dz_up, dz_down])


# ---------------------------------------------------------------------------
# double contour evaluation


def _double_sum(a: np.ndarray, w: np.ndarray, b: np.ndarray, z: np.ndarray, chunk: int = 256) -> complex:
    total = 0j
    for i in range(0, w.size, chunk):
        total += (a[i : i + chunk] @ (1.0 / (w[i : i + chunk, None] - z[None, :]))) @ b
    return complex(total)


def _segment_term(ctx: KernelContext, x: float, y: float, centre: float, half: float, ax: _Anchor, ay: _Anchor) -> complex:
    """∫ e^{N(F_n(w;x) - F_n(w;y)) - c(x) + c(y)} dw up the segment centre ± i·half."""
    big_n, q = ctx.big_n, ctx.q
    slope = 2.0 * q * big_n * (y - x)
    shift = -big_n * (y - x) * (x + y) - ax.log_scale + ay.log_scale
    lower = complex(centre, -half)
    if slope == 0.0:
        return cmath.exp(shift) * 2j * half
    return cmath.exp(shift + slope * lower) * complex(np.expm1(slope * 2j * half)) / slope


def _kernel_once(ctx: KernelContext, x: float, y: float, ax: _Anchor, ay: _Anchor, quad: ContourQuad) -> complex:
    lay = _layout(ctx, ax, ay, x, y, GAMMA_OFFSET)
    apex = lay.sigma_apex
    t_cross = apex.real - lay.centre
    half = float(_sigma_height(apex, t_cross))

    w, dw = _gamma_nodes(lay, (-half, half), quad, quad.nodes)
    z, dz = _sigma_nodes(lay, t_cross, quad, quad.nodes)
    with np.errstate(under="ignore"):
        a = np.exp(_exponent(ctx, w, x) - ax.log_scale) * dw
        b = np.exp(-_exponent(ctx, z, y) + ay.log_scale) * dz
    double = _double_sum(a, w, b, z)
    segment = _segment_term(ctx, x, y, lay.centre, half, ax, ay)
    c = 2.0 * ctx.q * ctx.big_n
    return c * (double / (2j * math.pi) ** 2 + segment / (2j * math.pi))


def kernel_eval(
    ctx: KernelContext,
    x: float,
    y: float,
    quad: Optional[ContourQuad] = None,
    conjugate: bool = True,
) -> float:
    """K̃_n(x, y) by the double contour integral, checked for self-convergence."""
    _require_small(ctx)
    quad = quad or DEFAULT_CONTOUR
    ax, ay = _anchor(ctx, x), _anchor(ctx, y)
    value = _kernel_once(ctx, x, y, ax, ay, quad)
    converged = quad.max_refinements == 0
    diff = 0.0
    for _ in range(quad.max_refinements):
        quad = quad.refined()
        finer = _kernel_once(ctx, x, y, ax, ay, quad)
        diff = abs(finer - value)
        value = finer
        if diff <= quad.self_tol * max(1.0, abs(finer)):
            converged = True
            break
        logger.debug(f"K({x:.6g},{y:.6g}): refinement {quad.refinement} moved by {diff:.3e}")
    if not converged:
        raise QuadratureError(f"K({x},{y}): contour quadrature not self-convergent (last change {diff:.3e})")
    if abs(value.imag) > 1e-6 * max(1.0, abs(value.real)):
        logger.debug(f"K({x:.6g},{y:.6g}) has imaginary residue {value.imag:.3e}")
    out = value.real
    if not conjugate:
        out *= math.exp(ax.log_scale - ay.log_scale)
    return out


# ---------------------------------------------------------------------------
# integrable form


@dataclass(frozen=True)
class IntegrableRow:
    """Conjugated φ_j(x), ∂_xφ_j(x), ψ_j(x) for j = 0..n at one point."""

    x: float
    phi: np.ndarray
    dphi: np.ndarray
    psi: np.ndarray


def integrable_row(ctx: KernelContext, x: float, quad: Optional[ContourQuad] = None) -> IntegrableRow:
    _require_small(ctx)
    quad = quad or DEFAULT_CONTOUR
    anchor = _anchor(ctx, x)
    lay = _layout(ctx, anchor, anchor, x, x, 0.0)
    b0 = anchor.omega.imag
    w, dw = _gamma_nodes(lay, (-b0, b0), replace(quad, grading_levels=0), quad.nodes)
    z, dz = _sigma_nodes(lay, None, quad, quad.nodes)
    with np.errstate(under="ignore"):
        a = np.exp(_exponent(ctx, w, x) - anchor.log_scale) * dw
        b = np.exp(-_exponent(ctx, z, x) + anchor.log_scale) * dz
    da = a * (-2.0 * ctx.big_n) * (ctx.q * w - x)
    norm = math.sqrt(2.0 * ctx.big_n) * ctx.q
    two_pi_i = 2j * math.pi
    inv_w = 1.0 / (w[:, None] - ctx.points)
    inv_z = 1.0 / (z[:, None] - ctx.points)

    phi = np.concatenate([[norm * a.sum()], a @ inv_w]) / two_pi_i
    dphi = np.concatenate([[norm * da.sum()], da @ inv_w]) / two_pi_i
    psi = np.concatenate([[norm * b.sum()], -(b @ inv_z)]) / two_pi_i
    return IntegrableRow(float(x), phi.real, dphi.real, psi.real)


def integrable_parts(
    ctx: KernelContext, x: float, j: int, quad: Optional[ContourQuad] = None
) -> Tuple[float, float]:
    """(φ̃_j(x), ψ̃_j(x)), j = 0..n, with Σ_j φ̃_j(x)ψ̃_j(y) = (x-y)K̃_n(x,y)."""
    if not 0 <= j <= ctx.n:
        raise DomainError(f"index j must lie in 0..{ctx.n}, got {j}")
    row = integrable_row(ctx, x, quad)
    return float(row.phi[j]), float(row.psi[j])


def kernel_diagonal(ctx: KernelContext, x: float, quad: Optional[ContourQuad] = None) -> float:
    """K_n(x,x) = Σ_j φ_j'(x)ψ_j(x)."""
    row = integrable_row(ctx, x, quad)
    return float(row.dphi @ row.psi)


def kernel_density(ctx: KernelContext, x: float, method: str = "integrable") -> float:
    """K_n(x,x)/n, to be set against the semicircle density."""
    if method == "integrable":
        return kernel_diagonal(ctx, x) / ctx.n
    if method == "double":
        return kernel_eval(ctx, x, x) / ctx.n
    raise DomainError(f"unknown kernel diagonal method '{method}'")


def support_window(ctx: KernelContext) -> Tuple[float, float]:
    """Interval outside which the one-point density is below double precision."""
    pad = math.sqrt(ctx.s) * (EDGE + 6.0)
    return ctx.q * float(ctx.points[0]) - pad, ctx.q * float(ctx.points[-1]) + pad


def _line_rule(ctx: KernelContext, lo: float, hi: float, extra: Sequence[float], quad: ContourQuad):
    panels = max(16, 4 * ctx.n + 8) * (2**quad.refinement)
    breaks = np.concatenate([np.linspace(lo, hi, panels + 1), np.asarray(extra, dtype=float)])
    breaks = breaks[(breaks >= lo) & (breaks <= hi)]
    return panel_rule(breaks, quad.line_nodes)


def _table(ctx: KernelContext, xs: np.ndarray, quad: ContourQuad):
    rows = [integrable_row(ctx, float(x), quad) for x in xs]
    phi = np.array([r.phi for r in rows])
    dphi = np.array([r.dphi for r in rows])
    psi = np.array([r.psi for r in rows])
    return phi, dphi, psi


def _support_breaks(g: TestFunction) -> list:
    return list(g.support_hint) if g.support_hint is not None else []


def determinantal_mean(ctx: KernelContext, g: TestFunction, quad: Optional[ContourQuad] = None) -> float:
    """E Σ g(x_i) = ∫ g(x) K_n(x,x) dx; g ≡ 1 gives n."""
    _require_small(ctx)
    quad = quad or DEFAULT_CONTOUR
    lo, hi = support_window(ctx)
    xs, ws = _line_rule(ctx, lo, hi, _support_breaks(g), quad)
    _, dphi, psi = _table(ctx, xs, quad)
    diag = np.einsum("ij,ij->i", dphi, psi)
    return float(np.sum(ws * np.asarray(g(xs), dtype=float) * diag))


def trace(ctx: KernelContext, quad: Optional[ContourQuad] = None) -> float:
    return determinantal_mean(ctx, constant(1.0), quad)


def determinantal_variance(ctx: KernelContext, g: TestFunction, quad: Optional[ContourQuad] = None) -> float:
    """(1/2) ∬ (g(x)-g(y))² K_n(x,y) K_n(y,x) dx dy through the integrable form."""
    _require_small(ctx)
    quad = quad or DEFAULT_CONTOUR
    lo, hi = support_window(ctx)
    xs, ws = _line_rule(ctx, lo, hi, _support_breaks(g), quad)
    phi, _, psi = _table(ctx, xs, quad)
    p = phi @ psi.T  # p[a, b] = (x_a - x_b) K̃(x_a, x_b)
    d = xs[:, None] - xs[None, :]
    np.fill_diagonal(d, 1.0)
    kk = p * p.T / (d * d)
    np.fill_diagonal(kk, 0.0)
    gv = np.asarray(g(xs), dtype=float)
    dg = (gv[:, None] - gv[None, :]) ** 2
    return float(0.5 * ws @ (dg * kk) @ ws)


def _restricted_integral(
    ctx: KernelContext, lo: float, hi: float, x: float, y: float, quad: ContourQuad, perturbation: float
) -> float:
    if hi <= lo:
        return 0.0
    zs, wz = _line_rule(ctx, lo, hi, [x, y], quad)
    phi_z, _, psi_z = _table(ctx, zs, quad)
    rx = integrable_row(ctx, x, quad)
    ry = integrable_row(ctx, y, quad)
    k_xz = (psi_z @ rx.phi) / (x - zs)
    k_zy = (phi_z @ ry.psi) / (zs - y)
    scale = (1.0 + perturbation) ** 2
    return float(scale * np.sum(wz * k_xz * k_zy))


def r_restricted(
    ctx: KernelContext,
    interval: Tuple[float, float],
    x: float,
    y: float,
    quad: Optional[ContourQuad] = None,
    perturbation: float = 0.0,
) -> float:
    """R_n^I(x,y) = ∫_I K_n(x,z)K_n(z,y) dz - K_n(x,y)."""
    _require_small(ctx)
    quad = quad or DEFAULT_CONTOUR
    e1, e2 = interval
    if e2 < e1:
        raise DomainError(f"interval end {e2} below start {e1}")
    if not (e1 <= x <= e2 and e1 <= y <= e2):
        raise DomainError(f"x={x}, y={y} must lie in [{e1}, {e2}]")
    inner = _restricted_integral(ctx, e1, e2, x, y, quad, perturbation)
    return inner - (1.0 + perturbation) * kernel_eval(ctx, x, y, quad)


def reproducing_residual(
    ctx: KernelContext,
    x: float,
    y: float,
    quad: Optional[ContourQuad] = None,
    perturbation: float = 0.0,
) -> float:
    """|∫ K_n(x,z)K_n(z,y) dz - K_n(x,y)| over the support window.

    ``perturbation`` replaces K by (1+ε)K, which moves the residual by ε|K|.
    """
    _require_small(ctx)
    quad = quad or DEFAULT_CONTOUR
    lo, hi = support_window(ctx)
    lo, hi = min(lo, x, y), max(hi, x, y)
    inner = _restricted_integral(ctx, lo, hi, x, y, quad, perturbation)
    return abs(inner - (1.0 + perturbation) * kernel_eval(ctx, x, y, quad))


def integrable_identity_residual(ctx: KernelContext, x: float, y: float, quad: Optional[ContourQuad] = None) -> float:
    """|Σ_j φ̃_j(x)ψ̃_j(y) - (x-y)K̃_n(x,y)|."""
    rx, ry = integrable_row(ctx, x, quad), integrable_row(ctx, y, quad)
    return abs(float(rx.phi @ ry.psi) - (x - y) * kernel_eval(ctx, x, y, quad))


def identity_report(
    ctx: KernelContext,
    x: float = 0.0,
    y: float = 0.1,
    g: Optional[TestFunction] = None,
    quad: Optional[ContourQuad] = None,
) -> Dict[str, Any]:
    """Residuals of every kernel identity at one parameter point."""
    _require_small(ctx)
    quad = quad or DEFAULT_CONTOUR
    k_xy = kernel_eval(ctx, x, y, quad)
    k_yx = kernel_eval(ctx, y, x, quad)
    raw_xy = kernel_eval(ctx, x, y, quad, conjugate=False)
    raw_yx = kernel_eval(ctx, y, x, quad, conjugate=False)
    diag_double = kernel_eval(ctx, x, x, quad)
    diag_integrable = kernel_diagonal(ctx, x, quad)
    total = trace(ctx, quad)
    report: Dict[str, Any] = {
        "n": ctx.n,
        "t": ctx.t,
        "x": x,
        "y": y,
        "kernel_xy": k_xy,
        "trace": total,
        "trace_residual": abs(total - ctx.n),
        "diagonal_double": diag_double,
        "diagonal_integrable": diag_integrable,
        "diagonal_residual": abs(diag_double - diag_integrable),
        "integrable_residual": integrable_identity_residual(ctx, x, y, quad),
        "reproducing_residual": reproducing_residual(ctx, x, y, quad),
        "conjugation_residual": abs(k_xy * k_yx - raw_xy * raw_yx),
    }
    if -EDGE < x < EDGE:
        report["saddle"] = saddle_result_dict(saddle_solve(ctx, x))
        report["diagnostics"] = regularity_diagnostics(ctx, x)._asdict()
        report["density_ratio"] = diag_integrable / ctx.n / density(x)
    if g is not None:
        report["variance"] = determinantal_variance(ctx, g, quad)
        report["mean"] = determinantal_mean(ctx, g, quad)
    logger.debug(f"kernel identity report: {report}")
    return report


def saddle_result_dict(res: SaddleResult) -> Dict[str, Any]:
    d = asdict(res)
    d["omega"] = [res.omega.real, res.omega.imag]
    d["f_second"] = [res.f_second.real, res.f_second.imag]
    return d
