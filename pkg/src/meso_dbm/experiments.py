"""Simulation cells: one Monte Carlo run set against its predicted regime."""

import concurrent.futures as cf
import logging
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence

from .ensemble import SimParams
from .errors import DomainError, MesoDbmError
from .mcstat import run_mc
from .rng import derive_seed, resolve_seed
from .semicircle import Configuration, quantile_configuration, sample_iid
from .testfn import lowest_nonvanishing_moment, resolve
from .theory import (
    DETERMINISTIC_CRITICAL,
    DETERMINISTIC_GUE,
    RANDOM_BOUNDARY,
    RANDOM_CLASSICAL,
    RANDOM_CRITICAL,
    RANDOM_GUE,
    RANDOM_INTERMEDIATE,
    classical_variance,
    classify_regime,
    critical_random_variance,
    s_p_variance,
    sigma_inf_sq,
    sigma_tau_sq,
)

logger = logging.getLogger(__name__)

INIT_ALIASES = {"deterministic": "deterministic", "random": "random_iid", "random_iid": "random_iid"}


@dataclass(frozen=True)
class CellSpec:
    n: int
    alpha: float
    gamma: float
    tau: float = 1.0
    x_star: float = 0.0
    function: str = "bump"
    init: str = "deterministic"
    trials: int = 2000
    seed: Optional[int] = None
    p: Optional[int] = None
    engine: str = "matrix"


@lru_cache(maxsize=64)
def theory_constants(function: str, tau: float, x_star: float, p: int) -> Dict[str, Optional[float]]:
    """Limit constants of every regime for one (f, τ, x*, p); cached across cells."""
    f = resolve(function)
    try:
        s_p = s_p_variance(f, p, tau, x_star)
    except DomainError:
        s_p = None
    sig_inf = sigma_inf_sq(f)
    return {
        DETERMINISTIC_GUE: sig_inf,
        DETERMINISTIC_CRITICAL: sigma_tau_sq(f, tau),
        RANDOM_CLASSICAL: classical_variance(f, x_star),
        RANDOM_CRITICAL: critical_random_variance(f, tau, x_star),
        RANDOM_INTERMEDIATE: s_p,
        RANDOM_BOUNDARY: None if s_p is None else s_p + sig_inf,
        RANDOM_GUE: sig_inf,
    }


def normalise_init(init: str) -> str:
    try:
        return INIT_ALIASES[init]
    except KeyError:
        raise DomainError(f"init must be one of {sorted(INIT_ALIASES)}, got '{init}'") from None


def initial_configuration(
    n: Optional[int], init: str = "deterministic", seed: Optional[int] = None, xi_path: Optional[str] = None
) -> Configuration:
    """ξ from a configuration CSV, the semicircle quantiles or an i.i.d. draw."""
    if xi_path:
        xi = Configuration.from_csv(xi_path)
        if n is not None and xi.n != n:
            raise DomainError(f"{xi_path} holds {xi.n} points, expected n={n}")
        return xi
    if n is None or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    if normalise_init(init) == "random_iid":
        return sample_iid(n, seed)
    return quantile_configuration(n)


def run_cell(
    cell: CellSpec, jobs: int = 1, xi: Optional[Configuration] = None, keep_samples: bool = False
) -> Dict[str, Any]:
    """Run one cell and return its row: measured statistics beside the prediction.

    ``xi`` replaces the quantile configuration of a deterministic cell;
    ``keep_samples`` adds the per-trial values under "samples".
    """
    f = resolve(cell.function)
    init = normalise_init(cell.init)
    p = cell.p if cell.p is not None else lowest_nonvanishing_moment(f)
    params = SimParams(n=cell.n, alpha=cell.alpha, gamma=cell.gamma, tau=cell.tau, x_star=cell.x_star)
    summary = run_mc(params, f, init, cell.trials, cell.seed, xi=xi, jobs=jobs, engine=cell.engine)

    regime = classify_regime(cell.alpha, cell.gamma, p, init == "random_iid")
    constant = theory_constants(cell.function, cell.tau, cell.x_star, p).get(regime.regime)
    predicted = None
    if constant is not None and constant > 0.0:
        predicted = constant * cell.n**regime.variance_scale_exponent
    row = asdict(cell)
    row.update(
        p=p,
        t=params.t,
        seed=summary.seed,
        measured_var=summary.variance,
        var_ci_lo=summary.variance_ci[0],
        var_ci_hi=summary.variance_ci[1],
        mean=summary.mean,
        skewness=summary.skewness,
        excess_kurtosis=summary.excess_kurtosis,
        ks_statistic=summary.ks_statistic,
        ks_pvalue=summary.ks_pvalue,
        failures=summary.failures,
        predicted_regime=regime.regime,
        exponent=regime.variance_scale_exponent,
        predicted_constant=constant,
        predicted_var=predicted,
        ratio=None if predicted is None else summary.variance / predicted,
    )
    logger.info(
        f"cell n={cell.n} α={cell.alpha} γ={cell.gamma} {init}: var={summary.variance:.5g} "
        f"regime={regime.regime} ratio={row['ratio']}"
    )
    if keep_samples:
        row["samples"] = summary.samples
    return row


def _guarded_cell(cell: CellSpec) -> Dict[str, Any]:
    try:
        return run_cell(cell)
    except (MesoDbmError, ValueError) as e:
        logger.error(f"❌ cell n={cell.n} α={cell.alpha} γ={cell.gamma} failed: {e}")
        row = asdict(cell)
        row["error"] = str(e)
        return row


def sweep_cells(
    ns: Sequence[int],
    alphas: Sequence[float],
    gammas: Sequence[float],
    jobs: int = 1,
    seed: Optional[int] = None,
    **common: Any,
) -> List[Dict[str, Any]]:
    """Every (α, γ, n) cell, each with its own derived seed, in grid order."""
    if not (ns and alphas and gammas):
        raise DomainError("sweep grids must be nonempty")
    master = resolve_seed(seed)
    cells = []
    for a in alphas:
        for g in gammas:
            for n in ns:
                cells.append(CellSpec(n=n, alpha=a, gamma=g, seed=derive_seed(master, len(cells)), **common))
    logger.info(f"sweep: {len(cells)} cells, jobs={jobs}")
    if jobs <= 1:
        return [_guarded_cell(c) for c in cells]
    with cf.ProcessPoolExecutor(max_workers=jobs) as ex:
        futs = [ex.submit(_guarded_cell, c) for c in cells]
        return [fut.result() for fut in futs]
