"""Acceptance suite: closed forms, kernel identities, Monte Carlo laws."""

import logging
from typing import Any, Dict, List, Optional

from meso_dbm.acceptance import CRITERIA, run_suite
from meso_dbm.rng import resolve_seed

logger = logging.getLogger(__name__)


def run(
    seed: Optional[int] = None,
    quick: bool = False,
    criteria: Optional[List[str]] = None,
    budget: float = 1.0,
    jobs: int = 1,
) -> Dict[str, Any]:
    try:
        results = run_suite(seed, bool(quick), criteria, float(budget), int(jobs))
    except Exception as e:
        logger.error(f"❌ acceptance failed: {e}")
        return {"error": str(e)}
    rows = [r.to_dict() for r in results]
    return {"criteria": rows, "passed": all(r["passed"] for r in rows), "seed": resolve_seed(seed)}


def spec():
    return {
        "type": "function",
        "function": {
            "name": "acceptance",
            "description": "Run the acceptance criteria and report measured against expected values.",
            "parameters": {
                "type": "object",
                "required": [],
                "properties": {
                    "seed": {"type": "integer", "description": "Master seed; criteria get derived seeds"},
                    "quick": {"type": "boolean", "description": "Analytic, small-kernel and regularity criteria only"},
                    "criteria": {"type": "array", "items": {"type": "string", "enum": list(CRITERIA)}, "description": "Subset to run"},
                    "budget": {"type": "number", "description": "Scale of every Monte Carlo trial count"},
                    "jobs": {"type": "integer", "description": "Worker processes"},
                },
                "additionalProperties": False,
            },
        },
    }
