"""Command-line runner: ``rnls solve|sweep|verify-1d|lambda0 <config>``.

Exit codes
----------
0 converged, 1 config or input error, 2 numerical blowup, 3 decay bound
violated under ``--decay-check strict``, 4 inadmissible omega under
``--strict-admissibility``, 5 iteration budget exhausted (or, for sweeps,
some entry did not converge), 6 lambda0 estimation failed.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from .config import load_config
from .dgf import DECAY_CHECKS, DECAY_VIOLATION
from .elliptic1d import solve_modulus
from .errors import Inadmissible, Lambda0Failed, NumericalBlowup, RnlsError
from .experiment import SWEEP_AXES, run_experiment, run_sweep
from .grid import DIRICHLET
from .metrics import estimate_lambda0, phase_align
from .ops import action

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_BLOWUP = 2
EXIT_DECAY = 3
EXIT_INADMISSIBLE = 4
EXIT_NOT_CONVERGED = 5
EXIT_LAMBDA0 = 6


def _parser():
    p = argparse.ArgumentParser(prog="rnls", description="Action ground states of the rotating NLS.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("config", type=Path)
        sp.add_argument("--out", type=Path, help="output directory (overrides output.dir)")
        sp.add_argument("--strict-admissibility", action="store_true")
        sp.add_argument("--decay-check", choices=DECAY_CHECKS)
        sp.add_argument("--no-timestamp", action="store_true",
                        help="omit the timestamp line from records CSV")

    common(sub.add_parser("solve", help="run one experiment"))
    sw = sub.add_parser("sweep", help="run one experiment per value of a parameter")
    common(sw)
    sw.add_argument("--axis", required=True, choices=tuple(SWEEP_AXES))
    sw.add_argument("--values", required=True, help="comma-separated list")
    common(sub.add_parser("verify-1d", help="solve against the exact 1D ground state"))
    lp = sub.add_parser("lambda0", help="estimate lambda0 and check admissibility")
    lp.add_argument("config", type=Path)
    lp.add_argument("--strict-admissibility", action="store_true")
    return p


def _configure(args):
    cfg = load_config(args.config)
    out = cfg.output
    if getattr(args, "out", None) is not None:
        out = dataclasses.replace(out, dir=args.out)
    if getattr(args, "no_timestamp", False):
        out = dataclasses.replace(out, timestamp=False)
    changes = {"output": out}
    if getattr(args, "decay_check", None):
        changes["dgf"] = dataclasses.replace(cfg.dgf, decay_check=args.decay_check)
    if args.strict_admissibility:
        changes["strict_admissibility"] = True
    return dataclasses.replace(cfg, **changes)


def _exit_for(summary) -> int:
    if summary.converged:
        return EXIT_OK
    if summary.termination == DECAY_VIOLATION:
        return EXIT_DECAY
    return EXIT_NOT_CONVERGED


def _solve(cfg):
    summary = run_experiment(cfg)
    print(summary.to_json())
    return _exit_for(summary)


def _sweep(cfg, args):
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise RnlsError(f"--values must be a comma-separated list of numbers, got {args.values!r}")
    if not values:
        print("rnls: error: --values is empty", file=sys.stderr)
        return EXIT_CONFIG
    summaries = run_sweep(cfg, args.axis, values)
    for v, s in zip(values, summaries):
        rate = "" if s.rate_a is None else f" rate={s.rate_a:.6g} r2={s.r_squared:.6f}"
        err = f" ({s.extra['error']})" if "error" in s.extra else ""
        print(f"{args.axis}={v!r}: {s.termination} after {s.iterations} steps{rate}{err}")
    return EXIT_OK if all(s.converged for s in summaries) else EXIT_NOT_CONVERGED


def _verify_1d(cfg):
    if cfg.grid.dim != 1 or cfg.grid.boundary != DIRICHLET:
        raise RnlsError("verify-1d needs a 1D dirichlet grid")
    cfg = dataclasses.replace(cfg, reference_kind="analytic1d")
    summary = run_experiment(cfg)
    result = summary.extra["result"]
    dtype = cfg.dgf.dtype
    gs = solve_modulus(cfg.model.omega, cfg.grid.lengths[0], dtype=dtype)
    from .elliptic1d import analytic_gs_1d

    ref = analytic_gs_1d(cfg.grid, cfg.model.omega, dtype)
    al = phase_align(result.final_field, ref, cfg.grid)
    rows = [
        ("modulus k", float(gs.k)),
        ("K(k)", float(gs.K_of_k)),
        ("iterations", summary.iterations),
        ("termination", summary.termination),
        ("H1 distance", float(al.dist_h1)),
        ("max pointwise error", float(np.max(np.abs(result.final_field - al.aligned_ref)))),
        ("action error", abs(summary.final_S - float(action(ref, cfg.grid, cfg.model)))),
        ("residual max", summary.residual_max),
        ("residual H^-1", summary.residual_hminus1),
    ]
    width = max(len(r[0]) for r in rows)
    for name, value in rows:
        text = f"{value:.6e}" if isinstance(value, float) else str(value)
        print(f"{name:<{width}}  {text}")
    return _exit_for(summary)


def _lambda0(args):
    cfg = load_config(args.config)
    lam0 = estimate_lambda0(cfg.grid, cfg.model, seed=cfg.seed or 0)
    ok = cfg.model.omega < -lam0 - cfg.admissibility_margin
    print(f"lambda0 = {lam0:.12g}")
    print(f"omega = {cfg.model.omega:g}: {'admissible' if ok else 'inadmissible'}")
    if not ok and args.strict_admissibility:
        raise Inadmissible(cfg.model.omega, lam0, cfg.admissibility_margin)
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "lambda0":
            return _lambda0(args)
        cfg = _configure(args)
        if args.command == "solve":
            return _solve(cfg)
        if args.command == "sweep":
            return _sweep(cfg, args)
        return _verify_1d(cfg)
    except Inadmissible as exc:
        print(f"rnls: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except NumericalBlowup as exc:
        print(f"rnls: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except Lambda0Failed as exc:
        print(f"rnls: lambda0 estimation failed: {exc}", file=sys.stderr)
        return EXIT_LAMBDA0
    except (RnlsError, OSError) as exc:
        print(f"rnls: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
