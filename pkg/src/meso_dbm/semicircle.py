"""Semicircle law on [-√2, √2]: density, CDF, quantiles, sampling, U(z)."""

import cmath
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy.optimize import brentq

from .errors import BranchCutError, DomainError
from .rng import ensure_rng, resolve_seed

logger = logging.getLogger(__name__)

EDGE = math.sqrt(2.0)
PEAK = EDGE / math.pi
KINDS = ("initial", "evolved")


@dataclass(frozen=True)
class Configuration:
    """Ordered point set: initial points ξ or evolved eigenvalues."""

    points: np.ndarray = field(repr=False)
    kind: str = "initial"
    seed: Optional[int] = None

    def __post_init__(self):
        pts = np.sort(np.asarray(self.points, dtype=float).ravel())
        if pts.size == 0:
            raise DomainError("a configuration needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise DomainError("configuration points must be finite")
        if self.kind not in KINDS:
            raise DomainError(f"kind must be one of {KINDS}, got '{self.kind}'")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return int(self.points.size)

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            fh.write(f"# n={self.n} kind={self.kind} seed={self.seed}\r\n")
            fh.write("point\r\n")
            for x in self.points:
                fh.write(f"{x:.17g}\r\n")
        return path

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "Configuration":
        meta = {}
        values = []
        with Path(path).open() as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    for item in line[1:].split():
                        key, _, val = item.partition("=")
                        meta[key] = val
                    continue
                if line == "point":
                    continue
                values.append(float(line))
        seed = meta.get("seed")
        return cls(
            np.array(values),
            kind=meta.get("kind", "initial"),
            seed=None if seed in (None, "None") else int(seed),
        )


def density(x):
    """(1/π)√(2-x²) on [-√2, √2], zero elsewhere."""
    x = np.asarray(x, dtype=float)
    inside = np.clip(2.0 - x * x, 0.0, None)
    out = np.sqrt(inside) / math.pi
    return float(out) if out.ndim == 0 else out


def cdf(x):
    x = np.clip(np.asarray(x, dtype=float), -EDGE, EDGE)
    val = 0.5 + (x * np.sqrt(np.clip(2.0 - x * x, 0.0, None)) + 2.0 * np.arcsin(x / EDGE)) / (2.0 * math.pi)
    val = np.clip(val, 0.0, 1.0)
    return float(val) if val.ndim == 0 else val


def quantile(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {p}")
    if p == 0.5:
        return 0.0
    return brentq(lambda x: cdf(x) - p, -EDGE, EDGE, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def quantile_configuration(n: int) -> Configuration:
    """ξ_j = quantile((j - 1/2)/n)."""
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    levels = (np.arange(1, n + 1) - 0.5) / n
    pts = np.array([quantile(p) for p in levels])
    # exact symmetry of the quantile set
    pts = 0.5 * (pts - pts[::-1])
    return Configuration(pts, kind="initial")


def sample_points(n: int, rng: np.random.Generator) -> np.ndarray:
    """Rejection sampling from the uniform envelope [-√2,√2]×[0,√2/π]."""
    out = np.empty(0)
    while out.size < n:
        m = int(1.3 * (n - out.size)) + 16
        x = rng.uniform(-EDGE, EDGE, m)
        y = rng.uniform(0.0, PEAK, m)
        out = np.concatenate([out, x[y <= density(x)]])
    return out[:n]


def sample_iid(n: int, seed: Optional[int] = None, trial: int = 0, rng=None) -> Configuration:
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    gen = ensure_rng(rng, seed, trial)
    return Configuration(sample_points(n, gen), kind="initial", seed=resolve_seed(seed))


def kolmogorov_distance(points) -> float:
    """sup |F_emp - F_sc| evaluated on both sides of every jump."""
    x = np.sort(np.asarray(points, dtype=float).ravel())
    n = x.size
    F = cdf(x)
    upper = np.arange(1, n + 1) / n - F
    lower = F - np.arange(0, n) / n
    return float(max(np.max(upper), np.max(lower)))


def stieltjes_u(z: complex) -> complex:
    """U(z) = z - √(z-√2)√(z+√2) = (1/π)∫√(2-ξ²)/(z-ξ) dξ."""
    z = complex(z)
    if z.imag == 0.0 and abs(z.real) <= EDGE:
        raise BranchCutError(f"U(z) is not defined on the cut [-√2, √2], got z={z}")
    return z - cmath.sqrt(z - EDGE) * cmath.sqrt(z + EDGE)


def stieltjes_u_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return z - np.sqrt(z - EDGE) * np.sqrt(z + EDGE)


def stieltjes_u_prime(z):
    """U'(z) = 1 - z/√(z²-2), same branch as U."""
    z = np.asarray(z, dtype=complex)
    return 1.0 - z / (np.sqrt(z - EDGE) * np.sqrt(z + EDGE))
