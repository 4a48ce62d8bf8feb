"""Single Monte Carlo run of Y_n(f) at one (n, α, γ, τ) point."""

import logging
from typing import Any, Dict, Optional

from meso_dbm.experiments import CellSpec, initial_configuration, run_cell

logger = logging.getLogger(__name__)

COLUMNS = ["trial", "y"]


def run(
    n: int,
    alpha: float,
    gamma: float,
    tau: float = 1.0,
    x_star: float = 0.0,
    function: str = "bump",
    init: str = "deterministic",
    trials: int = 2000,
    seed: Optional[int] = None,
    jobs: int = 1,
    engine: str = "matrix",
    p: Optional[int] = None,
    xi: Optional[str] = None,
) -> Dict[str, Any]:
    """Sample the linear statistic and compare its variance with the predicted regime."""
    try:
        cell = CellSpec(
            n=int(n),
            alpha=float(alpha),
            gamma=float(gamma),
            tau=float(tau),
            x_star=float(x_star),
            function=function,
            init=init,
            trials=int(trials),
            seed=seed,
            p=p,
            engine=engine,
        )
        start = initial_configuration(cell.n, init, seed, xi) if xi else None
        row = run_cell(cell, jobs=int(jobs), xi=start, keep_samples=True)
        samples = row.pop("samples")
        return {
            "summary": row,
            "columns": COLUMNS,
            "rows": [{"trial": k, "y": float(v)} for k, v in enumerate(samples)],
        }
    except Exception as e:
        logger.error(f"❌ simulate failed: {e}")
        return {"error": str(e)}


def spec():
    return {
        "type": "function",
        "function": {
            "name": "simulate",
            "description": "Monte Carlo variance and Gaussianity of Σf(n^α(x_j - x*)) for deformed-GUE / DBM eigenvalues.",
            "parameters": {
                "type": "object",
                "required": ["n", "alpha", "gamma"],
                "properties": {
                    "n": {"type": "integer", "description": "Number of particles"},
                    "alpha": {"type": "number", "description": "Test-function scale exponent in (0,1)"},
                    "gamma": {"type": "number", "description": "Time scale exponent in (0,1)"},
                    "tau": {"type": "number", "description": "Time constant, t = τ/(n^γ√(2-x*²))"},
                    "x_star": {"type": "number", "description": "Bulk centre x* in (-√2, √2)"},
                    "function": {"type": "string", "description": "bump, odd-bump, cauchy or a (u, f(u)) CSV path"},
                    "init": {"type": "string", "enum": ["deterministic", "random"], "description": "Initial points"},
                    "trials": {"type": "integer", "description": "Independent trials"},
                    "seed": {"type": "integer", "description": "Master seed"},
                    "jobs": {"type": "integer", "description": "Worker processes"},
                    "engine": {"type": "string", "enum": ["matrix", "sde"], "description": "Sampler"},
                    "p": {"type": "integer", "description": "Moment index override"},
                    "xi": {"type": "string", "description": "Initial configuration CSV"},
                },
                "additionalProperties": False,
            },
        },
    }
