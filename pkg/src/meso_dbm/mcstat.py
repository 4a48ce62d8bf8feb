"""Monte Carlo estimation of Var Y_n(f) and its distributional diagnostics."""

import concurrent.futures as cf
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, stats

from .ensemble import SimParams, deformed_gue_eigenvalues, simulate_dbm_sde
from .errors import DomainError, MesoDbmError, TrialFailureError
from .rng import resolve_seed, rng_for
from .semicircle import Configuration, quantile_configuration, sample_iid
from .testfn import PairGrid, TestFunction, weighted_lipschitz_norm

logger = logging.getLogger(__name__)

MAX_FAIL_FRACTION = float(os.getenv("MESO_DBM_MAX_FAIL_FRACTION", "0.01"))
JACKKNIFE_BLOCKS = 20
MIN_TRIALS = 100
MIN_GAUSSIANITY_SAMPLES = 500
INITS = ("deterministic", "random_iid")
ENGINES = ("matrix", "sde")


class GaussianityReport(NamedTuple):
    skewness: float
    excess_kurtosis: float
    ks_statistic: float
    ks_pvalue: float


@dataclass(frozen=True)
class McSummary:
    n_trials: int
    mean: float
    variance: float
    variance_ci: Tuple[float, float]
    skewness: float
    excess_kurtosis: float
    ks_statistic: float
    ks_pvalue: float
    seed: int
    failures: int = 0
    init: str = "deterministic"
    engine: str = "matrix"
    samples: np.ndarray = field(default=None, repr=False, compare=False)

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d.pop("samples")
        d["variance_ci"] = list(self.variance_ci)
        return d


def linear_statistic(x, f: TestFunction, alpha: float, x_star: float = 0.0) -> float:
    """Y_n(f) = Σ_j f(n^α (x_j - x*))."""
    pts = x.points if isinstance(x, Configuration) else np.asarray(x, dtype=float).ravel()
    n = pts.size
    return float(np.sum(f(n**alpha * (pts - x_star))))


def block_jackknife(
    samples: Sequence[float],
    estimator: Callable[[np.ndarray], float] = np.mean,
    blocks: int = JACKKNIFE_BLOCKS,
) -> Tuple[float, float]:
    """Delete-one-block jackknife: (estimate on all data, standard error)."""
    data = np.asarray(samples, dtype=float)
    if blocks < 2 or data.size < blocks:
        raise DomainError(f"need at least {blocks} samples for a {blocks}-block jackknife")
    parts = np.array_split(data, blocks)
    estimate = float(estimator(data))
    loo = np.array(
        [estimator(np.concatenate(parts[:k] + parts[k + 1 :])) for k in range(blocks)], dtype=float
    )
    var = (blocks - 1) / blocks * np.sum((loo - loo.mean()) ** 2)
    return estimate, float(np.sqrt(var))


def _sample_variance(x: np.ndarray) -> float:
    return float(np.var(x, ddof=1))


def variance_ci(samples: Sequence[float], blocks: int = JACKKNIFE_BLOCKS) -> Tuple[float, float]:
    """95% interval for the variance, never excluding the point estimate."""
    est, se = block_jackknife(samples, _sample_variance, blocks)
    lo, hi = est - 1.96 * se, est + 1.96 * se
    return max(0.0, min(lo, est)), max(hi, est)


def _shape(samples: np.ndarray) -> GaussianityReport:
    sd = float(np.std(samples, ddof=1))
    if not math.isfinite(sd) or sd == 0.0:
        raise DomainError("degenerate sample: zero variance")
    centred = samples - samples.mean()
    ks = stats.kstest(centred, "norm", args=(0.0, sd))
    return GaussianityReport(
        float(stats.skew(samples)),
        float(stats.kurtosis(samples)),
        float(ks.statistic),
        float(ks.pvalue),
    )


def gaussianity_report(samples: Sequence[float]) -> GaussianityReport:
    """Skewness, excess kurtosis and KS against N(0, sample variance)."""
    x = np.asarray(samples, dtype=float)
    if x.size < MIN_GAUSSIANITY_SAMPLES:
        raise DomainError(f"need at least {MIN_GAUSSIANITY_SAMPLES} samples, got {x.size}")
    return _shape(x)


def _one_trial(
    params: SimParams,
    f: TestFunction,
    init: str,
    xi: Optional[Configuration],
    seed: int,
    trial: int,
    engine: str,
    steps: Optional[int],
) -> float:
    gen = rng_for(seed, trial)
    start = sample_iid(params.n, seed, trial, rng=gen) if init == "random_iid" else xi
    if engine == "sde":
        x = simulate_dbm_sde(start, params, steps=steps, seed=seed, trial=trial, rng=gen)
    else:
        x = deformed_gue_eigenvalues(start, params, seed, trial, rng=gen)
    return linear_statistic(x, f, params.alpha, params.x_star)


def _run_chunk(
    params: SimParams,
    f: TestFunction,
    init: str,
    xi: Optional[Configuration],
    seed: int,
    trials: Sequence[int],
    engine: str,
    steps: Optional[int],
) -> List[Tuple[int, Optional[float], Optional[str]]]:
    out = []
    for k in trials:
        try:
            out.append((k, _one_trial(params, f, init, xi, seed, k, engine, steps), None))
        except (MesoDbmError, linalg.LinAlgError) as e:
            logger.debug(f"trial {k} failed: {e}")
            out.append((k, None, str(e)))
    return out


def _chunks(trials: int, jobs: int) -> List[range]:
    size = max(1, math.ceil(trials / (4 * jobs)))
    return [range(i, min(i + size, trials)) for i in range(0, trials, size)]


def run_mc(
    params: SimParams,
    f: TestFunction,
    init: str = "deterministic",
    trials: int = 2000,
    seed: Optional[int] = None,
    xi: Optional[Configuration] = None,
    jobs: int = 1,
    engine: str = "matrix",
    steps: Optional[int] = None,
    min_trials: int = MIN_TRIALS,
) -> McSummary:
    """Sample Y_n(f) over independent trials and summarise it.

    Deterministic runs reuse one ξ (quantiles unless given) for every trial;
    random runs draw ξ i.i.d. from the semicircle inside each trial's stream.
    """
    if init not in INITS:
        raise DomainError(f"init must be one of {INITS}, got '{init}'")
    if engine not in ENGINES:
        raise DomainError(f"engine must be one of {ENGINES}, got '{engine}'")
    if trials < min_trials:
        raise DomainError(f"need at least {min_trials} trials, got {trials}")
    seed = resolve_seed(seed)
    if init == "deterministic":
        xi = xi if xi is not None else quantile_configuration(params.n)
        if xi.n != params.n:
            raise DomainError(f"configuration has {xi.n} points but params.n = {params.n}")
    else:
        xi = None

    logger.debug(f"run_mc n={params.n} α={params.alpha} γ={params.gamma} init={init} trials={trials} jobs={jobs}")
    if jobs <= 1:
        results = _run_chunk(params, f, init, xi, seed, range(trials), engine, steps)
    else:
        results = []
        with cf.ProcessPoolExecutor(max_workers=jobs) as ex:
            futs = [
                ex.submit(_run_chunk, params, f, init, xi, seed, chunk, engine, steps)
                for chunk in _chunks(trials, jobs)
            ]
            for fut in futs:
                results.extend(fut.result())

    values = np.array([v for _, v, _ in sorted(results, key=lambda r: r[0]) if v is not None])
    failures = trials - values.size
    if failures > MAX_FAIL_FRACTION * trials:
        first = next(msg for _, v, msg in results if v is None)
        raise TrialFailureError(f"{failures}/{trials} trials failed (first: {first})")
    if failures:
        logger.warning(f"{failures}/{trials} trials failed and were dropped")

    shape = _shape(values)
    summary = McSummary(
        n_trials=int(values.size),
        mean=float(values.mean()),
        variance=_sample_variance(values),
        variance_ci=variance_ci(values),
        skewness=shape.skewness,
        excess_kurtosis=shape.excess_kurtosis,
        ks_statistic=shape.ks_statistic,
        ks_pvalue=shape.ks_pvalue,
        seed=seed,
        failures=failures,
        init=init,
        engine=engine,
        samples=values,
    )
    logger.debug(f"run_mc done: var={summary.variance:.6g} ci={summary.variance_ci}")
    return summary


def scaling_regression(points: Sequence[Tuple[float, float]]) -> Tuple[float, float]:
    """Least-squares slope of log Var against log n, with its standard error."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DomainError("expected (n, variance) pairs")
    if np.any(arr <= 0.0):
        raise DomainError("n and variance must be positive for a log-log fit")
    if np.unique(arr[:, 0]).size < 3:
        raise DomainError("need at least 3 distinct n")
    fit = stats.linregress(np.log(arr[:, 0]), np.log(arr[:, 1]))
    return float(fit.slope), float(fit.stderr)


def variance_bound_ratio(variance: float, f: TestFunction, grid: Optional[PairGrid] = None) -> float:
    """Var Y_n(f) / |f|²_w with |f|_w the weighted Lipschitz norm."""
    norm = weighted_lipschitz_norm(f, grid)
    if norm == 0.0:
        raise DomainError(f"{f.label}: weighted Lipschitz norm vanishes")
    return variance / norm**2
