"""Experiment configuration files.

Configs are TOML documents written with dotted keys::

    grid.boundary = "dirichlet"
    grid.lower = 0.0
    grid.upper = 1.0
    grid.points = 128
    model.omega = -10.0
    dgf.tau = 0.1

Unknown keys are rejected. Input paths are resolved relative to the config
file; ``output.dir`` is resolved relative to the working directory.
"""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .dgf import DgfConfig
from .errors import ConfigError, RnlsError
from .grid import Grid
from .model import ModelParams

REFERENCE_KINDS = ("none", "analytic1d", "file")
INITIAL_KINDS = ("sine", "vortex", "vortex_mix", "file")

_SCHEMA = {
    "grid": {"boundary", "lower", "upper", "points", "h"},
    "model": {"omega", "p", "beta", "rotation", "gamma"},
    "dgf": {f.name for f in dataclasses.fields(DgfConfig)},
    "initial": {"kind", "m", "path"},
    "reference": {"kind", "path"},
    "output": {"dir", "records", "field", "summary", "timestamp"},
    "admissibility": {"strict", "margin", "check"},
}
_TOP = {"seed"}


@dataclass
class OutputSpec:
    dir: Path = Path("rnls_out")
    records: bool = True
    field: bool = True
    summary: bool = True
    timestamp: bool = True


@dataclass
class ExperimentConfig:
    grid: Grid
    model: ModelParams
    dgf: DgfConfig
    initial_kind: str = "sine"
    initial_m: int = 1
    initial_path: Optional[Path] = None
    reference_kind: str = "none"
    reference_path: Optional[Path] = None
    output: OutputSpec = field(default_factory=OutputSpec)
    strict_admissibility: bool = False
    check_admissibility: bool = True
    admissibility_margin: float = 1e-8
    seed: Optional[int] = None
    source: Optional[Path] = None

    def with_overrides(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _pop(section, key, default, kind, where):
    if key not in section:
        return default
    value = section.pop(key)
    try:
        if kind is bool:
            if not isinstance(value, bool):
                raise TypeError
            return value
        if kind is tuple:
            return tuple(float(v) for v in (value if isinstance(value, list) else [value]))
        if kind is int:
            if isinstance(value, bool) or float(value) != int(value):
                raise TypeError
            return int(value)
        if kind is float:
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if kind is str:
            if not isinstance(value, str):
                raise TypeError
            return value
        return value
    except (TypeError, ValueError):
        raise ConfigError(f"{where}.{key}: expected {kind.__name__}, got {value!r}") from None


def _check_keys(doc):
    for name, value in doc.items():
        if name in _TOP:
            continue
        if name not in _SCHEMA or not isinstance(value, dict):
            raise ConfigError(f"unknown key {name!r}")
        for key in value:
            if key not in _SCHEMA[name]:
                raise ConfigError(f"unknown key '{name}.{key}'")


def parse_config(text: str, base_dir=".", source=None) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from TOML text."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source or '<config>'}: {exc}") from None
    _check_keys(doc)
    base = Path(base_dir)
    sec = {name: dict(doc.get(name, {})) for name in _SCHEMA}

    g = sec["grid"]
    try:
        boundary = _pop(g, "boundary", "periodic", str, "grid")
        lower = _pop(g, "lower", None, tuple, "grid")
        upper = _pop(g, "upper", None, tuple, "grid")
        if lower is None or upper is None:
            raise ConfigError("grid.lower and grid.upper are required")
        if "points" in g and "h" in g:
            raise ConfigError("give either grid.points or grid.h, not both")
        if "h" in g:
            grid = Grid.from_spacing(lower, upper, _pop(g, "h", None, float, "grid"), boundary)
        else:
            pts = g.pop("points", None)
            if pts is None:
                raise ConfigError("grid.points or grid.h is required")
            pts = pts if isinstance(pts, list) else [pts] * len(lower)
            grid = Grid(lower, upper, tuple(int(n) for n in pts), boundary)

        m = sec["model"]
        if "omega" not in m:
            raise ConfigError("model.omega is required")
        gamma = _pop(m, "gamma", None, tuple, "model")
        model = ModelParams(
            dim=grid.dim,
            omega=_pop(m, "omega", None, float, "model"),
            p=_pop(m, "p", 3.0, float, "model"),
            beta=_pop(m, "beta", 1.0, float, "model"),
            rotation=_pop(m, "rotation", 0.0, float, "model"),
            gamma=gamma,
        )

        d = sec["dgf"]
        kinds = {"tau": float, "residual_tol": float, "action_tol": float, "max_iters": int,
                 "record_stride": int, "stop_rule": str, "decay_check": str, "precision": str}
        opts = {k: _pop(d, k, None, kinds[k], "dgf") for k in kinds if k in d}
        if "alpha" in d:
            alpha = d.pop("alpha")
            if isinstance(alpha, bool) or not isinstance(alpha, (str, int, float)):
                raise ConfigError(f"dgf.alpha: expected 'adaptive' or a number, got {alpha!r}")
            opts["alpha"] = alpha if isinstance(alpha, str) else float(alpha)
        dgf = DgfConfig(**opts)
    except ConfigError:
        raise
    except RnlsError as exc:
        raise ConfigError(str(exc)) from exc

    i = sec["initial"]
    initial_kind = _pop(i, "kind", "sine" if grid.dim == 1 else "vortex", str, "initial")
    if initial_kind not in INITIAL_KINDS:
        raise ConfigError(f"initial.kind must be one of {INITIAL_KINDS}, got {initial_kind!r}")
    initial_m = _pop(i, "m", 1, int, "initial")
    initial_path = _pop(i, "path", None, str, "initial")
    if initial_kind == "file":
        if initial_path is None:
            raise ConfigError("initial.kind = 'file' needs initial.path")
        initial_path = _existing(base / initial_path, "initial.path")

    r = sec["reference"]
    reference_kind = _pop(r, "kind", "none", str, "reference")
    if reference_kind not in REFERENCE_KINDS:
        raise ConfigError(f"reference.kind must be one of {REFERENCE_KINDS}, got {reference_kind!r}")
    reference_path = _pop(r, "path", None, str, "reference")
    if reference_kind == "file":
        if reference_path is None:
            raise ConfigError("reference.kind = 'file' needs reference.path")
        reference_path = _existing(base / reference_path, "reference.path")

    o = sec["output"]
    output = OutputSpec(
        dir=Path(_pop(o, "dir", "rnls_out", str, "output")),
        records=_pop(o, "records", True, bool, "output"),
        field=_pop(o, "field", True, bool, "output"),
        summary=_pop(o, "summary", True, bool, "output"),
        timestamp=_pop(o, "timestamp", True, bool, "output"),
    )
    a = sec["admissibility"]
    seed = doc.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ConfigError(f"seed: expected int, got {seed!r}")
    return ExperimentConfig(
        grid=grid, model=model, dgf=dgf,
        initial_kind=initial_kind, initial_m=initial_m, initial_path=initial_path,
        reference_kind=reference_kind, reference_path=reference_path,
        output=output,
        strict_admissibility=_pop(a, "strict", False, bool, "admissibility"),
        check_admissibility=_pop(a, "check", True, bool, "admissibility"),
        admissibility_margin=_pop(a, "margin", 1e-8, float, "admissibility"),
        seed=seed,
        source=Path(source) if source else None,
    )


def _existing(path: Path, key: str) -> Path:
    if not path.is_file():
        raise ConfigError(f"{key}: file {str(path)!r} does not exist")
    return path


def load_config(path) -> ExperimentConfig:
    """Read and validate a config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {str(path)!r}: {exc.strerror}") from None
    return parse_config(text, base_dir=path.parent, source=os.fspath(path))
