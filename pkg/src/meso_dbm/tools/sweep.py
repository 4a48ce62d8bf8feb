"""(α, γ) phase-diagram sweep over a grid of cells."""

import logging
from typing import Any, Dict, List, Optional

from meso_dbm.experiments import normalise_init, sweep_cells

logger = logging.getLogger(__name__)


def run(
    n: List[int],
    alpha: List[float],
    gamma: List[float],
    tau: float = 1.0,
    x_star: float = 0.0,
    function: str = "bump",
    init: str = "deterministic",
    trials: int = 2000,
    seed: Optional[int] = None,
    jobs: int = 1,
    engine: str = "matrix",
    p: Optional[int] = None,
) -> Dict[str, Any]:
    try:
        cells = sweep_cells(
            [int(v) for v in n],
            [float(v) for v in alpha],
            [float(v) for v in gamma],
            jobs=int(jobs),
            seed=seed,
            tau=float(tau),
            x_star=float(x_star),
            function=function,
            init=normalise_init(init),
            trials=int(trials),
            p=p,
            engine=engine,
        )
    except Exception as e:
        logger.error(f"❌ sweep failed: {e}")
        return {"error": str(e)}
    failed = sum(1 for c in cells if "error" in c)
    return {"cells": cells, "count": len(cells), "failed": failed}


def spec():
    return {
        "type": "function",
        "function": {
            "name": "sweep",
            "description": "Run one Monte Carlo cell per (α, γ, n) and attach the predicted regime of each.",
            "parameters": {
                "type": "object",
                "required": ["n", "alpha", "gamma"],
                "properties": {
                    "n": {"type": "array", "items": {"type": "integer"}, "description": "n grid"},
                    "alpha": {"type": "array", "items": {"type": "number"}, "description": "α grid in (0,1)"},
                    "gamma": {"type": "array", "items": {"type": "number"}, "description": "γ grid in (0,1)"},
                    "tau": {"type": "number", "description": "Time constant"},
                    "x_star": {"type": "number", "description": "Bulk centre"},
                    "function": {"type": "string", "description": "Test function name or CSV path"},
                    "init": {"type": "string", "enum": ["deterministic", "random"], "description": "Initial points"},
                    "trials": {"type": "integer", "description": "Trials per cell"},
                    "seed": {"type": "integer", "description": "Master seed; cells get derived seeds"},
                    "jobs": {"type": "integer", "description": "Cells run concurrently"},
                    "engine": {"type": "string", "enum": ["matrix", "sde"], "description": "Sampler"},
                    "p": {"type": "integer", "description": "Moment index override"},
                },
                "additionalProperties": False,
            },
        },
    }
