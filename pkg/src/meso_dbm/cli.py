#!/usr/bin/env python3
"""meso-dbm command line: config-driven runs of the registry tools.

Every subcommand is a module of ``meso_dbm.tools`` exposing ``run`` and
``spec``; the CLI builds an ``ExperimentConfig`` from a JSON file, key=value
overrides and flags (in that order), runs the tool and writes the data file
next to a JSON manifest.
"""

import argparse
import importlib
import json
import logging
import os
import pkgutil
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from . import __version__
from .datafiles import dumps, write_csv, write_json
from .errors import ConfigError
from .rng import resolve_seed

logger = logging.getLogger(__name__)

# Configuration
DEFAULT_JOBS = int(os.getenv("MESO_DBM_JOBS", "1"))
DEFAULT_OUT = os.getenv("MESO_DBM_OUT", "results")

MODES = ("simulate", "sweep", "theory", "kernel-check", "regularity", "acceptance")
GREEN_BAND = (0.7, 1.4)
PHASE_COLUMNS = [
    "alpha",
    "gamma",
    "n",
    "measured_var",
    "predicted_regime",
    "predicted_var_or_exponent",
    "ratio",
    "ks_pvalue",
    "predicted_constant",
    "init",
    "flag",
]

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ACCEPTANCE_FAILED = 2

# Global registry
registry: Dict[str, Dict[str, Any]] = {}


def discover_tools() -> Dict[str, Dict[str, Any]]:
    """Discover and register every tool module of meso_dbm.tools."""
    import meso_dbm.tools as tools_package

    registry.clear()
    for _, name, ispkg in pkgutil.iter_modules(tools_package.__path__):
        if ispkg:
            continue
        try:
            logger.debug(f"🔍 Discovering tool module: {name}")
            module = importlib.import_module(f"meso_dbm.tools.{name}")
        except Exception as e:
            logger.error(f"❌ Failed to import tool module {name}: {e}")
            continue
        if not (hasattr(module, "run") and hasattr(module, "spec")):
            logger.warning(f"⚠️ Module {name} missing run() or spec() functions")
            continue
        spec = module.spec()
        tool_name = spec["function"]["name"]
        registry[tool_name] = {
            "name": tool_name,
            "description": spec["function"]["description"],
            "spec": spec,
            "func": module.run,
        }
        logger.debug(f"✅ Registered tool: {tool_name} (from {name}.py)")
    logger.info(f"🔧 Tool discovery complete. Registered {len(registry)} tools: {sorted(registry)}")
    return registry


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mode: Literal["simulate", "sweep", "theory", "kernel-check", "regularity", "acceptance"]
    n: List[int] = [512]
    alpha: List[float] = [0.5]
    gamma: List[float] = [0.3]
    tau: float = 1.0
    x_star: float = 0.0
    function: str = "bump"
    init: Literal["deterministic", "random", "random_iid"] = "deterministic"
    trials: int = 2000
    seed: Optional[int] = None
    jobs: int = DEFAULT_JOBS
    out: str = DEFAULT_OUT
    p: Optional[int] = None
    engine: Literal["matrix", "sde"] = "matrix"
    xi: Optional[str] = None
    # kernel-check
    t: float = 0.3
    x: float = 0.0
    y: float = 0.1
    scale: float = 1.0
    # regularity
    A: float = 1.0
    delta: float = 0.2
    U: Optional[Tuple[float, float]] = None
    # acceptance
    quick: bool = False
    budget: float = 1.0
    criteria: Optional[List[str]] = None

    @field_validator("n", "alpha", "gamma", "criteria", mode="before")
    @classmethod
    def _listify(cls, v):
        if v is None or isinstance(v, (list, tuple)):
            return v
        return [v]

    @field_validator("n")
    @classmethod
    def _positive_sizes(cls, v: List[int]) -> List[int]:
        if not v:
            raise ValueError("n grid must be nonempty")
        if any(k < 1 for k in v):
            raise ValueError(f"n must be positive, got {v}")
        return v

    @field_validator("alpha", "gamma")
    @classmethod
    def _unit_interval(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("grid must be nonempty")
        bad = [a for a in v if not 0.0 < a < 1.0]
        if bad:
            raise ValueError(f"values must lie in (0, 1), got {bad}")
        return v

    @field_validator("trials", "jobs")
    @classmethod
    def _at_least_one(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"must be at least 1, got {v}")
        return v

    @model_validator(mode="after")
    def _single_point(self):
        if self.mode == "simulate" and (len(self.n) > 1 or len(self.alpha) > 1 or len(self.gamma) > 1):
            raise ValueError("simulate takes a single (n, alpha, gamma); use sweep for grids")
        return self


def _parse_value(raw: str) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        pass
    if "," in raw:
        return [_parse_value(part.strip()) for part in raw.split(",")]
    return raw


def parse_overrides(items: Sequence[str]) -> Dict[str, Any]:
    """key=value pairs; values are JSON where they parse, comma lists split."""
    out: Dict[str, Any] = {}
    for item in items:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"override '{item}' is not of the form key=value")
        out[key.strip().replace("-", "_")] = _parse_value(raw.strip())
    return out


def _validation_message(e: ValidationError) -> str:
    parts = []
    for err in e.errors():
        loc = ".".join(str(x) for x in err["loc"]) or "config"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def load_config(
    path: Optional[str] = None,
    overrides: Sequence[str] = (),
    flags: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    """JSON file first, then key=value overrides, then explicit flags."""
    data: Dict[str, Any] = {}
    if path:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        if "config" in data and "version" in data:
            # a run manifest: replay its config
            data = dict(data["config"])
    data.update(parse_overrides(overrides))
    data.update({k: v for k, v in (flags or {}).items() if v is not None})
    try:
        return ExperimentConfig(**data)
    except ValidationError as e:
        raise ConfigError(_validation_message(e)) from e


def tool_params(config: ExperimentConfig) -> Dict[str, Any]:
    c = config
    if c.mode == "simulate":
        return dict(
            n=c.n[0], alpha=c.alpha[0], gamma=c.gamma[0], tau=c.tau, x_star=c.x_star,
            function=c.function, init=c.init, trials=c.trials, seed=c.seed, jobs=c.jobs,
            engine=c.engine, p=c.p, xi=c.xi,
        )
    if c.mode == "sweep":
        return dict(
            n=c.n, alpha=c.alpha, gamma=c.gamma, tau=c.tau, x_star=c.x_star, function=c.function,
            init=c.init, trials=c.trials, seed=c.seed, jobs=c.jobs, engine=c.engine, p=c.p,
        )
    if c.mode == "theory":
        single = len(c.alpha) == 1 and len(c.gamma) == 1
        return dict(
            function=c.function, tau=c.tau, x_star=c.x_star, p=c.p, init=c.init,
            alpha=c.alpha[0] if single else None, gamma=c.gamma[0] if single else None,
        )
    if c.mode == "kernel-check":
        return dict(
            n=c.n[0], t=c.t, x=c.x, y=c.y, function=None if c.function == "none" else c.function,
            scale=c.scale, init=c.init, seed=c.seed, xi=c.xi,
        )
    if c.mode == "regularity":
        return dict(
            n=c.n[0], A=c.A, delta=c.delta, U=None if c.U is None else list(c.U),
            init=c.init, seed=c.seed, xi=c.xi,
        )
    return dict(seed=c.seed, quick=c.quick, criteria=c.criteria, budget=c.budget, jobs=c.jobs)


def _flag(row: Dict[str, Any]) -> str:
    if "error" in row:
        return "failed"
    ratio = row.get("ratio")
    if ratio is None:
        return ""
    return "green" if GREEN_BAND[0] <= ratio <= GREEN_BAND[1] else "red"


def phase_rows(cells: Sequence[Dict[str, Any]]) -> List[Dict[str, Any]]:
    rows = []
    for c in cells:
        predicted = c.get("predicted_var")
        rows.append(
            {
                "alpha": c["alpha"],
                "gamma": c["gamma"],
                "n": c["n"],
                "measured_var": c.get("measured_var"),
                "predicted_regime": c.get("predicted_regime"),
                "predicted_var_or_exponent": predicted if predicted is not None else c.get("exponent"),
                "ratio": c.get("ratio"),
                "ks_pvalue": c.get("ks_pvalue"),
                "predicted_constant": c.get("predicted_constant"),
                "init": c.get("init"),
                "flag": _flag(c),
            }
        )
    return rows


def emit_phase_diagram_data(cells: Sequence[Dict[str, Any]], path) -> Path:
    """One CSV row per sweep cell, in grid order."""
    return write_csv(path, PHASE_COLUMNS, phase_rows(cells))


def _acceptance_table(rows: Sequence[Dict[str, Any]]) -> str:
    lines = [f"{'criterion':<34} {'result':<6} {'seed':>10}  measured / expected"]
    for r in rows:
        verdict = "PASS" if r["passed"] else "FAIL"
        lines.append(f"{r['name']:<34} {verdict:<6} {r['seed']:>10}  {r['measured']} / {r['expected']} ({r['tolerance']})")
    return "\n".join(lines)


def _write_data(config: ExperimentConfig, result: Dict[str, Any], out: Path) -> Path:
    stem = config.mode.replace("-", "_")
    if config.mode == "simulate":
        return write_csv(out / f"{stem}.csv", result["columns"], result["rows"])
    if config.mode == "sweep":
        write_json(out / f"{stem}_cells.json", result["cells"])
        return emit_phase_diagram_data(result["cells"], out / f"{stem}.csv")
    return write_json(out / f"{stem}.json", result)


def run(config: ExperimentConfig) -> int:
    """Run one experiment; always leaves a manifest behind."""
    if not registry:
        discover_tools()
    out = Path(config.out)
    manifest: Dict[str, Any] = {
        "config": dict(config.model_dump(), seed=resolve_seed(config.seed)),
        "version": __version__,
        "seed": resolve_seed(config.seed),
        "mode": config.mode,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    manifest_path = out / f"{config.mode.replace('-', '_')}_manifest.json"
    start = time.time()
    status, code = "ok", EXIT_OK
    try:
        out.mkdir(parents=True, exist_ok=True)
        if not os.access(out, os.W_OK):
            raise ConfigError(f"output directory {out} is not writable")
        tool = registry[config.mode]
        logger.info(f"🔧 Running {config.mode} -> {out}")
        result = tool["func"](**tool_params(config))
        if "error" in result:
            raise RuntimeError(result["error"])
        manifest["data"] = str(_write_data(config, result, out))
        if config.mode == "simulate":
            manifest["summary"] = result["summary"]
        elif config.mode == "sweep" and result["failed"]:
            status, code = "partial", EXIT_ERROR
            manifest["error"] = f"{result['failed']} of {result['count']} cells failed"
        elif config.mode == "acceptance":
            print(_acceptance_table(result["criteria"]))
            if not result["passed"]:
                status, code = "acceptance_failed", EXIT_ACCEPTANCE_FAILED
    except Exception as e:
        logger.error(f"❌ {config.mode} failed: {e}")
        status, code = "failed", EXIT_ERROR
        manifest["error"] = str(e)
    manifest["status"] = status
    manifest["wall_time"] = time.time() - start
    try:
        write_json(manifest_path, manifest)
    except OSError as e:
        logger.error(f"❌ could not write manifest {manifest_path}: {e}")
        return EXIT_ERROR
    logger.info(f"{'✅' if code == EXIT_OK else '❌'} {config.mode} finished with status {status}")
    return code


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("overrides", nargs="*", metavar="KEY=VALUE", help="config overrides")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--n", type=int, nargs="+")
    p.add_argument("--alpha", type=float, nargs="+")
    p.add_argument("--gamma", type=float, nargs="+")
    p.add_argument("--tau", type=float)
    p.add_argument("--xstar", dest="x_star", type=float)
    p.add_argument("--function")
    p.add_argument("--init", choices=["deterministic", "random"])
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")
    p.add_argument("--p", type=int)
    p.add_argument("--engine", choices=["matrix", "sde"])
    p.add_argument("--xi", help="initial configuration CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="meso-dbm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="mode", required=True)
    sub.add_parser("list", help="print the tool specs as JSON")
    for mode in MODES:
        p = sub.add_parser(mode, help=f"run the {mode} tool")
        _add_common(p)
        if mode == "acceptance":
            p.add_argument("--quick", action="store_true", default=None)
            p.add_argument("--budget", type=float)
            p.add_argument("--criteria", nargs="+")
        if mode == "kernel-check":
            p.add_argument("--t", type=float)
            p.add_argument("--x", type=float)
            p.add_argument("--y", type=float)
            p.add_argument("--scale", type=float)
        if mode == "regularity":
            p.add_argument("--A", dest="A", type=float)
            p.add_argument("--delta", type=float)
            p.add_argument("--U", dest="U", type=float, nargs=2)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        level=getattr(logging, os.getenv("LOG_LEVEL", "INFO")),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    args = build_parser().parse_args(argv)
    discover_tools()
    if args.mode == "list":
        print(dumps([registry[name]["spec"] for name in sorted(registry)]), end="")
        return EXIT_OK
    flags = {k: v for k, v in vars(args).items() if k not in ("overrides", "config")}
    try:
        config = load_config(args.config, args.overrides, flags)
    except ConfigError as e:
        logger.error(f"❌ Invalid configuration: {e}")
        return EXIT_ERROR
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
