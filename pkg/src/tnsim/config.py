"""Run and sweep configuration files (JSON) with strict validation.

A run config names one model and one solver and carries a parameter block
for each::

    {"model": "spinboson", "solver": "tdvp",
     "spinboson": {"alpha": 0.1, "s": 0.5, "n_modes": 4, "d_b": 6},
     "tdvp": {"dt": 0.05, "n_steps": 200, "max_bond": 16},
     "seed": 0, "output_dir": "out", "tag": "sb-check"}

Unknown keys anywhere are errors. Every error names the offending field as a
dotted path.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from .dmrg import DmrgSchedule, SweepSpec
from .models import IsingParams, RetinalParams, SpinBosonParams
from .tdvp import SCHEMES, TdvpConfig

MODELS = ("ising2d", "spinboson", "retinal")
SOLVERS = ("dmrg", "tdvp")
TOP_KEYS = {"model", "solver", "seed", "output_dir", "tag", *MODELS, *SOLVERS}


class ConfigError(ValueError):
    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


# field -> (accepted types, required)
_NUM = (int, float)
_OPT_NUM = (int, float, type(None))
_SCHEMAS: dict[str, dict[str, tuple[tuple, bool]]] = {
    "ising2d": {
        "nx": ((int,), True), "ny": ((int,), True), "J": (_NUM, False), "h": (_NUM, False),
        "bc": ((str,), False), "pin": (_OPT_NUM, False), "h_values": ((list,), False),
    },
    "spinboson": {
        "delta": (_NUM, False), "eps": (_NUM, False), "alpha": (_NUM, False), "s": (_NUM, False),
        "omega_c": (_NUM, False), "n_modes": ((int,), False), "d_b": ((int,), False),
    },
    "retinal": {
        "inertia": (_NUM, True), "W0": (_NUM, True), "W1": (_NUM, True), "E1": (_NUM, True),
        "omega_c": (_NUM, True), "kappa_c": (_NUM, True), "lam": (_NUM, True),
        "bath": ((list,), False), "n_theta": ((int,), False), "d_modes": ((int,), False),
        "input_units": ((str,), False), "full_model": ((bool,), False), "initial_bond": ((int,), False),
        "placeholder_values": ((bool,), False),
    },
    "dmrg": {
        "bonds": ((list,), False), "sweeps": ((list,), False), "cutoff": (_NUM, False),
        "noise": (_NUM, False), "energy_tol": (_NUM, False), "local_tol": (_NUM, False),
        "max_local_iters": ((int,), False), "max_sweeps": ((int, type(None)), False),
        "init_bond": ((int,), False),
    },
    "tdvp": {
        "dt": (_NUM, True), "n_steps": ((int,), True), "scheme": ((str,), False),
        "switch_step": ((int,), False), "max_bond": ((int,), False), "cutoff": (_NUM, False),
        "krylov_dim": ((int,), False), "krylov_tol": (_NUM, False), "pre_expand": ((int,), False),
    },
}
_SWEEP_SPEC_KEYS = {"max_bond": ((int,), True), "cutoff": (_NUM, False), "noise": (_NUM, False)}


def _check_block(block: Any, schema: dict, path: str) -> dict:
    if not isinstance(block, dict):
        raise ConfigError(path, "must be an object")
    for key in block:
        if key not in schema:
            raise ConfigError(f"{path}.{key}", "unknown key")
    for key, (types, required) in schema.items():
        if key not in block:
            if required:
                raise ConfigError(f"{path}.{key}", "required key missing")
            continue
        val = block[key]
        # bool is an int subclass; only accept it where bool is listed
        if isinstance(val, bool) and bool not in types:
            raise ConfigError(f"{path}.{key}", f"expected {_type_names(types)}, got bool")
        if not isinstance(val, types):
            raise ConfigError(f"{path}.{key}", f"expected {_type_names(types)}, got {type(val).__name__}")
    return dict(block)


def _type_names(types) -> str:
    return " or ".join("null" if t is type(None) else t.__name__ for t in types)


def _construct(cls, kwargs: dict, path: str):
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as err:
        msg = str(err)
        named = next((k for k in kwargs if k in msg), None)
        raise ConfigError(f"{path}.{named}" if named else path, msg) from err


@dataclass
class RunConfig:
    model: str
    solver: str
    model_params: dict
    solver_params: dict
    seed: int = 0
    output_dir: str = "out"
    tag: str = ""

    # -- typed views

    def ising(self) -> IsingParams:
        kw = {k: v for k, v in self.model_params.items() if k != "h_values"}
        return _construct(IsingParams, kw, "ising2d")

    def h_values(self) -> list[float]:
        hs = self.model_params.get("h_values")
        return [float(h) for h in hs] if hs is not None else [float(self.model_params.get("h", 1.0))]

    def spinboson(self) -> SpinBosonParams:
        return _construct(SpinBosonParams, dict(self.model_params), "spinboson")

    def retinal(self) -> RetinalParams:
        kw = {k: v for k, v in self.model_params.items() if k not in ("initial_bond", "placeholder_values")}
        return _construct(RetinalParams, kw, "retinal")

    def dmrg_schedule(self) -> DmrgSchedule:
        p = self.solver_params
        kw = {k: p[k] for k in ("energy_tol", "local_tol", "max_local_iters", "max_sweeps") if k in p}
        if "sweeps" in p:
            specs = [_construct(SweepSpec, s, f"dmrg.sweeps[{i}]") for i, s in enumerate(p["sweeps"])]
            return _construct(DmrgSchedule, {"sweeps": specs, **kw}, "dmrg")
        bonds = p.get("bonds", [16, 32, 64])
        try:
            return DmrgSchedule.ramp(bonds, p.get("cutoff", 1e-10), p.get("noise", 1e-4), **kw)
        except ValueError as err:
            raise ConfigError("dmrg", str(err)) from err

    def init_bond(self) -> int:
        return int(self.solver_params.get("init_bond", 8))

    def tdvp(self) -> TdvpConfig:
        return _construct(TdvpConfig, dict(self.solver_params), "tdvp")

    # -- serialization

    def to_dict(self) -> dict:
        return {
            "model": self.model, "solver": self.solver,
            self.model: copy.deepcopy(self.model_params),
            self.solver: copy.deepcopy(self.solver_params),
            "seed": self.seed, "output_dir": self.output_dir, "tag": self.tag,
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    def with_overrides(self, overrides: dict[str, Any]) -> "RunConfig":
        """New config with dotted-path overrides such as ``{"spinboson.alpha": 0.2}``."""
        d = self.to_dict()
        for key, val in overrides.items():
            parts = key.split(".")
            node = d
            for part in parts[:-1]:
                if not isinstance(node.get(part), dict):
                    raise ConfigError(key, f"override path: {part!r} is not a block of this config")
                node = node[part]
            node[parts[-1]] = copy.deepcopy(val)
        return parse_run_config(d)


def parse_run_config(data: Any) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    for key in data:
        if key not in TOP_KEYS:
            raise ConfigError(key, "unknown key")
    for key in ("model", "solver"):
        if key not in data:
            raise ConfigError(key, "required key missing")
    model, solver = data["model"], data["solver"]
    if model not in MODELS:
        raise ConfigError("model", f"must be one of {MODELS}, got {model!r}")
    if solver not in SOLVERS:
        raise ConfigError("solver", f"must be one of {SOLVERS}, got {solver!r}")
    for other in MODELS:
        if other != model and other in data:
            raise ConfigError(other, f"block present but model is {model!r}")
    for other in SOLVERS:
        if other != solver and other in data:
            raise ConfigError(other, f"block present but solver is {solver!r}")
    if model not in data:
        raise ConfigError(model, "model parameter block missing")
    if model == "retinal" and solver == "dmrg":
        raise ConfigError("solver", "the retinal model only supports the tdvp solver")
    mp = _check_block(data[model], _SCHEMAS[model], model)
    sp = _check_block(data.get(solver, {}), _SCHEMAS[solver], solver)
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("seed", "expected int")
    for key in ("output_dir", "tag"):
        if key in data and not isinstance(data[key], str):
            raise ConfigError(key, "expected str")
    if solver == "dmrg":
        if "bonds" in sp and "sweeps" in sp:
            raise ConfigError("dmrg", "give either bonds or sweeps, not both")
        for i, spec in enumerate(sp.get("sweeps", [])):
            _check_block(spec, _SWEEP_SPEC_KEYS, f"dmrg.sweeps[{i}]")
        for i, m in enumerate(sp.get("bonds", [])):
            if isinstance(m, bool) or not isinstance(m, int):
                raise ConfigError(f"dmrg.bonds[{i}]", "expected int")
    if solver == "tdvp" and sp.get("scheme", "hybrid") not in SCHEMES:
        raise ConfigError("tdvp.scheme", f"must be one of {SCHEMES}, got {sp['scheme']!r}")
    if model == "ising2d" and "h_values" in mp:
        if not mp["h_values"] or any(isinstance(h, bool) or not isinstance(h, _NUM) for h in mp["h_values"]):
            raise ConfigError("ising2d.h_values", "expected a non-empty list of numbers")
    cfg = RunConfig(model, solver, mp, sp, seed, data.get("output_dir", "out"), data.get("tag", ""))
    # build the typed views once so value errors surface at load time
    {"ising2d": cfg.ising, "spinboson": cfg.spinboson, "retinal": cfg.retinal}[model]()
    (cfg.dmrg_schedule if solver == "dmrg" else cfg.tdvp)()
    return cfg


@dataclass
class SweepConfig:
    base: RunConfig
    axes: dict[str, list] = field(default_factory=dict)
    max_parallel: int = 32

    def grid(self) -> list[dict[str, Any]]:
        """Overrides for every job, in lexicographic axis order (first axis slowest)."""
        import itertools

        names = list(self.axes)
        values = [sorted(self.axes[n]) for n in names]
        return [dict(zip(names, combo)) for combo in itertools.product(*values)]

    def to_dict(self) -> dict:
        return {"base": self.base.to_dict(), "axes": self.axes, "max_parallel": self.max_parallel}

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def parse_sweep_config(data: Any) -> SweepConfig:
    if not isinstance(data, dict):
        raise ConfigError("<root>", "sweep config must be a JSON object")
    for key in data:
        if key not in ("base", "axes", "max_parallel"):
            raise ConfigError(key, "unknown key")
    if "base" not in data:
        raise ConfigError("base", "required key missing")
    base = parse_run_config(data["base"])
    axes = data.get("axes", {})
    if not isinstance(axes, dict) or not axes:
        raise ConfigError("axes", "expected a non-empty object of dotted-path -> value list")
    for name, vals in axes.items():
        if not isinstance(vals, list) or not vals:
            raise ConfigError(f"axes.{name}", "expected a non-empty list")
        if len(set(map(json.dumps, vals))) != len(vals):
            raise ConfigError(f"axes.{name}", "duplicate values")
    mp = data.get("max_parallel", 32)
    if isinstance(mp, bool) or not isinstance(mp, int) or mp < 1:
        raise ConfigError("max_parallel", "expected an int >= 1")
    cfg = SweepConfig(base, {k: list(v) for k, v in axes.items()}, mp)
    for ov in cfg.grid():
        base.with_overrides(ov)
    return cfg


def load_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise ConfigError(str(path), f"invalid JSON: {err}") from err


def load_run_config(path) -> RunConfig:
    return parse_run_config(load_json(path))


def load_sweep_config(path) -> SweepConfig:
    return parse_sweep_config(load_json(path))


def dataclass_dict(obj) -> dict:
    return asdict(obj)
