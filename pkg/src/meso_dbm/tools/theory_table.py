"""Limit variances and regime prediction for one parameter point."""

from typing import Any, Dict, Optional

from meso_dbm.testfn import resolve
from meso_dbm.theory import predictions


def run(
    function: str = "bump",
    tau: float = 1.0,
    alpha: Optional[float] = None,
    gamma: Optional[float] = None,
    p: Optional[int] = None,
    x_star: float = 0.0,
    init: str = "deterministic",
) -> Dict[str, Any]:
    try:
        return predictions(
            resolve(function),
            float(tau),
            alpha=None if alpha is None else float(alpha),
            gamma=None if gamma is None else float(gamma),
            p=p,
            x_star=float(x_star),
            random_init=init in ("random", "random_iid"),
        )
    except Exception as e:
        return {"error": str(e)}


def spec():
    return {
        "type": "function",
        "function": {
            "name": "theory",
            "description": "σ_∞², σ_τ², random-initial-point variances, S_p and the regime of (α, γ).",
            "parameters": {
                "type": "object",
                "required": ["function"],
                "properties": {
                    "function": {"type": "string", "description": "Test function name or CSV path"},
                    "tau": {"type": "number", "description": "Time constant"},
                    "alpha": {"type": "number", "description": "Scale exponent"},
                    "gamma": {"type": "number", "description": "Time exponent"},
                    "p": {"type": "integer", "description": "Moment index override"},
                    "x_star": {"type": "number", "description": "Bulk centre"},
                    "init": {"type": "string", "enum": ["deterministic", "random"], "description": "Initial points"},
                },
                "additionalProperties": False,
            },
        },
    }
