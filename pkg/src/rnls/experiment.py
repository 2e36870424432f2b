"""Experiment orchestration: single runs, parameter sweeps and their artifacts."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from .config import ExperimentConfig
from .dgf import ACTION_INCREMENT_MET, RESIDUAL_MET, run_dgf
from .elliptic1d import analytic_gs_1d
from .errors import ConfigError, InsufficientData, InvalidParams
from .fieldio import read_field, write_field
from .model import check_admissibility, initial_data
from .ops import action
from . import metrics as M

log = logging.getLogger(__name__)

RECORD_COLUMNS = ("n", "S", "K", "alpha_n", "mu_l2", "mu_h1", "residual_max",
                  "residual_hminus1", "phi_h1", "dist_to_ref", "decay_slack")
SWEEP_AXES = {"tau": ("dgf", "tau"), "omega": ("model", "omega"), "Omega": ("model", "rotation")}
SWEEP_COLUMNS = ("axis", "value", "termination", "iterations", "final_S", "residual_max",
                 "residual_hminus1", "rate_series", "rate_a", "r_squared", "decay_violations", "error")


@dataclass
class Summary:
    """Outcome of one experiment; numbers are copied from the run, not recomputed."""

    termination: str
    iterations: int
    final_S: float
    final_K: float
    residual_max: float
    residual_hminus1: float
    decay_violations: int
    wall_time_seconds: float
    final_dist: Optional[float] = None
    reference_S: Optional[float] = None
    rate_series: Optional[str] = None
    rate_a: Optional[float] = None
    prefactor_logC: Optional[float] = None
    r_squared: Optional[float] = None
    rate_window: Optional[list] = None
    equivalence_band: Optional[list] = None
    lojasiewicz_band: Optional[list] = None
    lambda0: Optional[float] = None
    admissible: Optional[bool] = None
    output_dir: Optional[str] = None
    extra: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.termination in (RESIDUAL_MET, ACTION_INCREMENT_MET)

    def to_json(self) -> str:
        doc = {f.name: getattr(self, f.name) for f in dataclasses.fields(self) if f.name != "extra"}
        doc.update({k: v for k, v in self.extra.items() if k != "result"})
        return json.dumps(doc, indent=2)


def _cell(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(x) if isinstance(x, float) else str(x)


def records_csv(records, timestamp: bool = True) -> str:
    """Records as CSV text; absent and not-applicable values are empty cells."""
    buf = io.StringIO()
    if timestamp:
        buf.write(f"# generated {datetime.now(timezone.utc).isoformat(timespec='seconds')}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_COLUMNS)
    for r in records:
        w.writerow([_cell(getattr(r, c)) for c in RECORD_COLUMNS])
    return buf.getvalue()


def build_initial(config: ExperimentConfig, dtype):
    if config.initial_kind == "file":
        ff = read_field(config.initial_path)
        if ff.grid != config.grid:
            raise ConfigError(f"initial field grid {ff.grid} does not match the config grid")
        return ff.values.astype(np.result_type(dtype, np.complex64))
    return initial_data(config.initial_kind, config.grid, config.model, m=config.initial_m, dtype=dtype)


def build_reference(config: ExperimentConfig, dtype):
    if config.reference_kind == "analytic1d":
        try:
            return analytic_gs_1d(config.grid, config.model.omega, dtype)
        except InvalidParams as exc:
            raise ConfigError(str(exc)) from exc
    if config.reference_kind == "file":
        ff = read_field(config.reference_path)
        if ff.grid != config.grid:
            raise ConfigError(f"reference field grid {ff.grid} does not match the config grid")
        return ff.values.astype(np.result_type(dtype, np.complex64))
    return None


def _diagnostics(summary: Summary, records, S_ref):
    if S_ref is not None:
        series = [(r.n, r.S - S_ref) for r in records]
        summary.rate_series = "action_gap"
    else:
        series = [(r.n, r.residual_hminus1) for r in records]
        summary.rate_series = "residual_hminus1"
    try:
        fit = M.fit_exponential_rate(series)
        summary.rate_a, summary.prefactor_logC = fit.rate_a, fit.prefactor_logC
        summary.r_squared, summary.rate_window = fit.r_squared, list(fit.window)
    except InsufficientData as exc:
        log.info("no rate fit: %s", exc)
    if S_ref is None:
        return
    try:
        summary.equivalence_band = list(M.sgap_dist_equivalence(records, S_ref))
    except InsufficientData as exc:
        log.info("no equivalence band: %s", exc)
    ratios = M.lojasiewicz_report(records, S_ref, tail=True)
    if ratios:
        summary.lojasiewicz_band = [min(ratios), max(ratios)]


def run_experiment(config: ExperimentConfig, write: bool = True) -> Summary:
    """Run one configured experiment and write its artifacts.

    Returns the :class:`Summary`. Solver exceptions (``NumericalBlowup``,
    ``Inadmissible`` with strict admissibility) propagate.
    """
    t0 = time.perf_counter()
    dtype = config.dgf.dtype
    lam0 = admissible = None
    if config.check_admissibility:
        adm = check_admissibility(config.model, config.grid, margin=config.admissibility_margin,
                                  strict=config.strict_admissibility, seed=config.seed or 0)
        lam0, admissible = adm.lambda0, adm.ok
    u0 = build_initial(config, dtype)
    ref = build_reference(config, dtype)
    result = run_dgf(u0, config.dgf, config.grid, config.model, reference=ref)
    last = result.records[-1]
    S_ref = None if ref is None else float(action(ref, config.grid, config.model))
    summary = Summary(
        termination=result.termination,
        iterations=result.iterations_used,
        final_S=last.S,
        final_K=last.K,
        residual_max=last.residual_max,
        residual_hminus1=last.residual_hminus1,
        decay_violations=result.decay_violations,
        wall_time_seconds=0.0,
        final_dist=last.dist_to_ref,
        reference_S=S_ref,
        lambda0=lam0,
        admissible=admissible,
    )
    _diagnostics(summary, result.records, S_ref)
    summary.wall_time_seconds = time.perf_counter() - t0
    if write:
        out = Path(config.output.dir)
        out.mkdir(parents=True, exist_ok=True)
        summary.output_dir = os.fspath(out)
        if config.output.records:
            (out / "records.csv").write_text(records_csv(result.records, config.output.timestamp))
        if config.output.field:
            write_field(result.final_field, config.grid, out / "field.bin")
        if config.output.summary:
            (out / "summary.json").write_text(summary.to_json() + "\n")
    summary.extra["result"] = result
    return summary


def _sweep_config(base: ExperimentConfig, axis: str, value: float, root: Path) -> ExperimentConfig:
    section, name = SWEEP_AXES[axis]
    if section == "dgf":
        changes = {"dgf": dataclasses.replace(base.dgf, **{name: value})}
    else:
        changes = {"model": base.model.replace(**{name: value})}
    out = dataclasses.replace(base.output, dir=root / f"{axis}={value!r}")
    return dataclasses.replace(base, output=out, **changes)


def sweep_threads(n_jobs: int) -> int:
    env = os.environ.get("RNLS_THREADS")
    limit = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(limit, n_jobs))


def run_sweep(base: ExperimentConfig, axis: str, values, write: bool = True) -> list:
    """Run ``base`` once per value of ``axis`` on a bounded thread pool.

    Each entry gets its own output directory under ``base.output.dir``.
    Failures are recorded per entry (``termination = "error"``) and do not
    stop the sweep. A combined ``sweep_<axis>.csv`` is written.
    """
    if axis not in SWEEP_AXES:
        raise ConfigError(f"sweep axis must be one of {tuple(SWEEP_AXES)}, got {axis!r}")
    values = [float(v) for v in values]
    if not values:
        raise ConfigError("sweep needs at least one value")
    root = Path(base.output.dir)

    def one(value):
        try:
            cfg = _sweep_config(base, axis, value, root)
            return run_experiment(cfg, write=write)
        except Exception as exc:  # recorded per entry, the sweep goes on
            log.warning("sweep entry %s=%r failed: %s", axis, value, exc)
            return Summary("error", 0, math.nan, math.nan, math.nan, math.nan, 0, 0.0,
                           extra={"error": f"{type(exc).__name__}: {exc}"})

    with ThreadPoolExecutor(max_workers=sweep_threads(len(values))) as pool:
        summaries = list(pool.map(one, values))
    for s, v in zip(summaries, values):
        s.extra["value"] = v
    if write:
        root.mkdir(parents=True, exist_ok=True)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for s, v in zip(summaries, values):
            w.writerow([axis, repr(v), s.termination, s.iterations, _cell(s.final_S),
                        _cell(s.residual_max), _cell(s.residual_hminus1), s.rate_series or "",
                        _cell(s.rate_a), _cell(s.r_squared), s.decay_violations,
                        s.extra.get("error", "")])
        (root / f"sweep_{axis}.csv").write_text(buf.getvalue())
    return summaries
