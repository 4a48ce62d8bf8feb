"""Regularity test of an initial configuration."""

import logging
from typing import Any, Dict, List, Optional

from meso_dbm.experiments import initial_configuration
from meso_dbm.regularity import check_regularity
from meso_dbm.semicircle import kolmogorov_distance

logger = logging.getLogger(__name__)


def run(
    n: int = 1024,
    A: float = 1.0,
    delta: float = 0.2,
    U: Optional[List[float]] = None,
    gamma: Optional[float] = None,
    init: str = "deterministic",
    seed: Optional[int] = None,
    xi: Optional[str] = None,
) -> Dict[str, Any]:
    try:
        config = initial_configuration(int(n) if not xi else None, init, seed, xi)
        window = None
        if U is not None:
            if len(U) != 2:
                return {"error": f"U must be an interval [lo, hi], got {U}"}
            window = (float(U[0]), float(U[1]))
        report = check_regularity(config, window, float(A), float(delta), gamma=gamma).to_dict()
        report.update(n=config.n, A=A, delta=delta, U=U, kolmogorov_distance=kolmogorov_distance(config.points))
        return report
    except Exception as e:
        logger.error(f"❌ regularity failed: {e}")
        return {"error": str(e)}


def spec():
    return {
        "type": "function",
        "function": {
            "name": "regularity",
            "description": "Grid sup of √(Im w/n)|Σ1/(w-ξ_j) - nU(w)| against A·n^δ.",
            "parameters": {
                "type": "object",
                "required": [],
                "properties": {
                    "n": {"type": "integer", "description": "Number of points"},
                    "A": {"type": "number", "description": "Threshold constant"},
                    "delta": {"type": "number", "description": "Threshold exponent"},
                    "U": {"type": "array", "items": {"type": "number"}, "description": "Re w window [lo, hi]"},
                    "gamma": {"type": "number", "description": "Ties δ < (1-γ)/(2(1+γ))"},
                    "init": {"type": "string", "enum": ["deterministic", "random"], "description": "Initial points"},
                    "seed": {"type": "integer", "description": "Seed for random initial points"},
                    "xi": {"type": "string", "description": "Initial configuration CSV"},
                },
                "additionalProperties": False,
            },
        },
    }
