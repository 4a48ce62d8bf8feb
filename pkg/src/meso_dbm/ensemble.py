"""GUE and deformed-GUE sampling, plus an Euler–Maruyama DBM integrator.

Normalisation follows the density ∝ exp(-n Tr X²): E|X_ij|² = 1/(2n) and the
spectrum fills [-√2, √2].  The matrix model

    M(t) = e^{-t} diag(ξ) + √(1 - e^{-2t}) X

has the law of the β=2 Dyson Brownian motion started at ξ; the SDE integrator
is kept as an independent cross-check of that statement.
"""

import logging
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator
from scipy import linalg

from .errors import DomainError, OrderingError
from .rng import ensure_rng, resolve_seed
from .semicircle import EDGE, Configuration

logger = logging.getLogger(__name__)

EIGEN_DRIVER = os.getenv("MESO_DBM_EIGEN_DRIVER", "ev")
MAX_HALVINGS = 20


class SimParams(BaseModel):
    """Run parameters; t and q are derived from (n, γ, τ, x*)."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(gt=0)
    alpha: float = Field(gt=0.0, lt=1.0)
    gamma: float = Field(gt=0.0, lt=1.0)
    tau: float = Field(gt=0.0)
    x_star: float = 0.0

    @field_validator("x_star")
    @classmethod
    def _in_bulk(cls, v: float) -> float:
        if not -EDGE < v < EDGE:
            raise ValueError(f"x_star must lie in the bulk (-√2, √2), got {v}")
        return v

    @computed_field
    @property
    def t(self) -> float:
        return self.tau / (self.n**self.gamma * math.sqrt(2.0 - self.x_star**2))

    @computed_field
    @property
    def q(self) -> float:
        return math.exp(-self.t)


@dataclass(frozen=True)
class HermitianMatrix:
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asfortranarray(np.asarray(self.entries, dtype=complex))
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError(f"expected a square matrix, got shape {a.shape}")
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])


def gue_matrix(n: int, rng: np.random.Generator) -> np.ndarray:
    sigma = 1.0 / math.sqrt(2.0 * n)
    h = np.empty((n, n), dtype=complex, order="F")
    h.real = rng.standard_normal((n, n))
    h.imag = rng.standard_normal((n, n))
    np.add(h, h.T.conj(), out=h)
    h *= sigma / 2
    return h


def sample_gue(n: int, seed: Optional[int] = None, trial: int = 0, rng=None) -> HermitianMatrix:
    """X with diagonal N(0, 1/(2n)) and off-diagonal real/imag parts N(0, 1/(4n))."""
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    return HermitianMatrix(gue_matrix(n, ensure_rng(rng, seed, trial)))


def hermitian_eigenvalues(m) -> Configuration:
    """Eigenvalues only, ascending (LAPACK heev: Householder + implicit QL/QR)."""
    a = m.entries if isinstance(m, HermitianMatrix) else np.asarray(m, dtype=complex)
    scale = max(float(np.max(np.abs(a))), 1e-300)
    if np.max(np.abs(a - a.conj().T)) > 1e-12 * scale:
        raise DomainError("matrix is not Hermitian")
    eig = linalg.eigvalsh(a, driver=EIGEN_DRIVER, check_finite=False)
    return Configuration(eig, kind="evolved")


def deformed_points(xi: np.ndarray, t: float, rng: np.random.Generator) -> np.ndarray:
    n = xi.size
    if t == 0.0:
        return np.array(xi, dtype=float)
    q = math.exp(-t)
    m = math.sqrt(-math.expm1(-2.0 * t)) * gue_matrix(n, rng)
    m[np.diag_indices(n)] += q * xi
    return linalg.eigvalsh(m, driver=EIGEN_DRIVER, check_finite=False, overwrite_a=True)


def deformed_gue_at_time(
    xi: Configuration, t: float, seed: Optional[int] = None, trial: int = 0, rng=None
) -> Configuration:
    if t < 0:
        raise DomainError(f"time must be nonnegative, got {t}")
    gen = ensure_rng(rng, seed, trial)
    pts = deformed_points(xi.points, t, gen)
    if t > 0 and xi.n > 1 and np.any(np.diff(pts) <= 0.0):
        logger.debug(f"trial {trial}: tied eigenvalues, resampling once")
        pts = deformed_points(xi.points, t, gen)
        if np.any(np.diff(pts) <= 0.0):
            raise OrderingError(f"trial {trial}: tied eigenvalues after resampling")
    return Configuration(pts, kind="evolved", seed=resolve_seed(seed))


def deformed_gue_eigenvalues(
    xi: Configuration, params: SimParams, seed: Optional[int] = None, trial: int = 0, rng=None
) -> Configuration:
    """Spectrum of e^{-t}diag(ξ) + √(1-e^{-2t})X at the run's time t."""
    if xi.n != params.n:
        raise DomainError(f"configuration has {xi.n} points but params.n = {params.n}")
    return deformed_gue_at_time(xi, params.t, seed, trial, rng)


def default_steps(n: int, t: float) -> int:
    return max(200, math.ceil(40 * n * t))


def _drift(x: np.ndarray, interaction: bool) -> np.ndarray:
    out = -x
    if interaction and x.size > 1:
        d = x[:, None] - x[None, :]
        np.fill_diagonal(d, np.inf)
        out = out + np.sum(1.0 / d, axis=1) / x.size
    return out


def simulate_dbm_sde(
    xi: Configuration,
    params: Optional[SimParams] = None,
    steps: Optional[int] = None,
    seed: Optional[int] = None,
    trial: int = 0,
    rng=None,
    t: Optional[float] = None,
    noise: bool = True,
    interaction: bool = True,
) -> Configuration:
    """Euler–Maruyama for dx_i = √(1/n)dB_i - x_i dt + (1/n)Σ_{j≠i} dt/(x_i - x_j).

    A step that would break the ordering is split in two along a Brownian
    bridge, recursively up to MAX_HALVINGS times.
    """
    if t is None:
        if params is None:
            raise DomainError("either params or t is required")
        t = params.t
    if params is not None and xi.n != params.n:
        raise DomainError(f"configuration has {xi.n} points but params.n = {params.n}")
    n = xi.n
    steps = steps or default_steps(n, t)
    if steps < 1:
        raise DomainError(f"steps must be positive, got {steps}")
    gen = ensure_rng(rng, seed, trial)

    x = np.array(xi.points, dtype=float)
    if n > 1 and np.any(np.diff(x) <= 0.0):
        x = x + 1e-12 * np.arange(n)
    dt = t / steps
    vol = math.sqrt(1.0 / n) if noise else 0.0

    def advance(x0: np.ndarray, h: float, dw: np.ndarray, depth: int) -> np.ndarray:
        prop = x0 + _drift(x0, interaction) * h + vol * dw
        if n == 1 or not interaction or np.all(np.diff(prop) > 0.0):
            return prop
        if depth >= MAX_HALVINGS:
            raise OrderingError(f"trial {trial}: ordering lost after {MAX_HALVINGS} halvings")
        first = dw / 2 + math.sqrt(h / 4) * gen.standard_normal(n)
        mid = advance(x0, h / 2, first, depth + 1)
        return advance(mid, h / 2, dw - first, depth + 1)

    for _ in range(steps):
        dw = math.sqrt(dt) * gen.standard_normal(n) if noise else np.zeros(n)
        x = advance(x, dt, dw, 0)
    return Configuration(x, kind="evolved", seed=resolve_seed(seed))
