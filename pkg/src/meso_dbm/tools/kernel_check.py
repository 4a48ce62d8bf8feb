"""Identity residuals of the correlation kernel for small n."""

import logging
from typing import Any, Dict, Optional

from meso_dbm.experiments import initial_configuration
from meso_dbm.kernel import KernelContext, identity_report
from meso_dbm.testfn import resolve, scaled

logger = logging.getLogger(__name__)


def run(
    n: int = 4,
    t: float = 0.3,
    x: float = 0.0,
    y: float = 0.1,
    function: Optional[str] = None,
    scale: float = 1.0,
    init: str = "deterministic",
    seed: Optional[int] = None,
    xi: Optional[str] = None,
) -> Dict[str, Any]:
    """Trace, reproducing, diagonal and conjugation residuals at (x, y).

    With ``function`` the determinantal mean and variance of Σ g(x_j),
    g(u) = f(scale·u), are added.
    """
    try:
        config = initial_configuration(int(n) if not xi else None, init, seed, xi)
        ctx = KernelContext(config, float(t))
        g = scaled(resolve(function), float(scale)) if function else None
        report = identity_report(ctx, float(x), float(y), g)
        report["points"] = config.points
        return report
    except Exception as e:
        logger.error(f"❌ kernel-check failed: {e}")
        return {"error": str(e)}


def spec():
    return {
        "type": "function",
        "function": {
            "name": "kernel-check",
            "description": "Evaluate K_n(x, y) by contour quadrature and report its identity residuals (n ≤ 12).",
            "parameters": {
                "type": "object",
                "required": [],
                "properties": {
                    "n": {"type": "integer", "description": "Number of initial points"},
                    "t": {"type": "number", "description": "Time"},
                    "x": {"type": "number", "description": "First argument"},
                    "y": {"type": "number", "description": "Second argument"},
                    "function": {"type": "string", "description": "Optional g for mean/variance"},
                    "scale": {"type": "number", "description": "g(u) = f(scale·u)"},
                    "init": {"type": "string", "enum": ["deterministic", "random"], "description": "Initial points"},
                    "seed": {"type": "integer", "description": "Seed for random initial points"},
                    "xi": {"type": "string", "description": "Initial configuration CSV"},
                },
                "additionalProperties": False,
            },
        },
    }
