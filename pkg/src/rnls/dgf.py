"""
Stabilized backward-forward Euler gradient flow for the action ground state.

One step solves, in the spectral basis,

    ((1 + tau alpha) - tau/2 Lap) u_next = (1 + tau alpha) u - tau g(u),
    g(u) = (V + omega + beta |u|^(p-1) - rotation Lz) u,

and the flow velocity is mu = (u - u_next) / tau. Each step is checked
against the action decay bound

    S(u) - S(u_next) >= 2 tau |mu|_L2^2 + tau^2/4 |mu|_H1^2.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import grid as G
from .errors import InvalidInput, InvalidParams, NumericalBlowup
from .grid import Grid, complex_dtype, real_dtype
from .model import ModelParams, evaluate_potential
from .ops import _local_coeff, _lz_from_modes, abs_pow, apply_hamiltonian

log = logging.getLogger(__name__)

RESIDUAL_MET = "residual_met"
ACTION_INCREMENT_MET = "action_increment_met"
MAX_ITERS = "max_iters"
DECAY_VIOLATION = "decay_violation"

STOP_RULES = ("residual", "action", "both")
DECAY_CHECKS = ("off", "warn", "strict")
PRECISIONS = {"double": np.float64, "extended": np.longdouble}

DECAY_SLACK_REL = 1e-10


@dataclass
class DgfConfig:
    """Controls for :func:`run_dgf`.

    ``alpha`` is either ``"adaptive"`` (recomputed every step from the
    current iterate) or a fixed nonnegative number. ``precision="extended"``
    runs the whole iteration in ``np.longdouble``.
    """

    tau: float = 0.1
    alpha: Union[str, float] = "adaptive"
    stop_rule: str = "residual"
    residual_tol: float = 1e-13
    action_tol: float = 1e-12
    max_iters: int = 1_000_000
    record_stride: Optional[int] = None
    decay_check: str = "warn"
    precision: str = "double"

    def __post_init__(self):
        if not self.tau > 0:
            raise InvalidParams(f"tau must be positive, got {self.tau}")
        if isinstance(self.alpha, str):
            if self.alpha != "adaptive":
                raise InvalidParams(f"alpha must be 'adaptive' or a number, got {self.alpha!r}")
        elif not self.alpha >= 0:
            raise InvalidParams(f"fixed alpha must be nonnegative, got {self.alpha}")
        if self.stop_rule not in STOP_RULES:
            raise InvalidParams(f"stop_rule must be one of {STOP_RULES}")
        if self.decay_check not in DECAY_CHECKS:
            raise InvalidParams(f"decay_check must be one of {DECAY_CHECKS}")
        if self.precision not in PRECISIONS:
            raise InvalidParams(f"precision must be one of {tuple(PRECISIONS)}")
        if not (self.residual_tol > 0 and self.action_tol > 0):
            raise InvalidParams("tolerances must be positive")
        if self.max_iters < 1 or (self.record_stride is not None and self.record_stride < 1):
            raise InvalidParams("max_iters and record_stride must be >= 1")

    @property
    def dtype(self):
        return np.dtype(PRECISIONS[self.precision])

    def stride_for(self, grid: Grid) -> int:
        """Record stride; by default 1 for grids with N <= 256 per axis, 10 otherwise."""
        if self.record_stride is not None:
            return self.record_stride
        return 1 if max(grid.points) <= 256 else 10


@dataclass
class IterationRecord:
    """Diagnostics of iterate ``n`` and of the step that produced it.

    ``S``, ``K``, the residuals, ``phi_h1`` and ``dist_to_ref`` describe
    phi^n. ``alpha_n``, ``mu_l2``, ``mu_h1`` and ``decay_slack`` describe the
    step phi^(n-1) -> phi^n and are NaN for the initial record.
    """

    n: int
    S: float
    K: float
    alpha_n: float
    mu_l2: float
    mu_h1: float
    residual_max: float
    residual_hminus1: float
    phi_h1: float
    dist_to_ref: Optional[float]
    decay_slack: float


@dataclass
class RunResult:
    final_field: np.ndarray
    records: list
    termination: str
    iterations_used: int
    decay_violations: int = 0
    final_action: float = field(default=float("nan"))

    @property
    def converged(self) -> bool:
        return self.termination in (RESIDUAL_MET, ACTION_INCREMENT_MET)


def adaptive_alpha(u, grid: Grid, params: ModelParams):
    """Stabilization 1/2 max{0, max_x (V + omega + rotation^2/2 |x|^2 + beta (p+2) |u|^(p-1))}."""
    rdt = real_dtype(u)
    q = evaluate_potential(params, grid, rdt) + params.omega
    if grid.dim == 2 and params.rotation:
        x1, x2 = grid.coords(rdt)
        q = q + params.rotation ** 2 / 2 * (x1 ** 2 + x2 ** 2)
    q = q + params.beta * (params.p + 2) * abs_pow(u, params.p - 1)
    return max(rdt.type(0), np.max(q)) / 2


def _step_modes(c, u, tau, alpha, grid, params):
    # returns coefficients of u_next and of H_u u
    rdt = real_dtype(c)
    lam = grid.eigenvalues(rdt)
    g = _local_coeff(u, grid, params) * u
    if params.rotation:
        g = g - params.rotation * _lz_from_modes(c, grid)
    gc = G.to_modes(g, grid)
    tau = rdt.type(tau)
    shift = 1 + tau * alpha
    c_next = (shift * c - tau * gc) / (shift + tau * lam / 2)
    return c_next, lam / 2 * c + gc


def dgf_step(u, tau, alpha, grid: Grid, params: ModelParams):
    """One stabilized step. Returns ``(u_next, mu)`` with ``mu = (u - u_next)/tau``."""
    u = grid.check(u)
    if not tau > 0:
        raise InvalidParams("tau must be positive")
    if not alpha >= 0:
        raise InvalidParams("alpha must be nonnegative")
    c = G.to_modes(u, grid)
    c_next, _ = _step_modes(c, u, tau, alpha, grid, params)
    u_next = G.from_modes(c_next, grid)
    return u_next, (u - u_next) / real_dtype(u).type(tau)


def residual_max(u, grid: Grid, params: ModelParams):
    """max_j |H_u u (x_j)|, the pointwise collocation residual."""
    return np.max(np.abs(apply_hamiltonian(u, grid, params)))


class _State:
    """All per-iterate quantities computed from one forward transform."""

    __slots__ = ("u", "c", "S", "K", "res_max", "res_hm1", "h1", "step_c", "H_c")

    def __init__(self, u, grid, params):
        rdt = real_dtype(u)
        self.u = u
        self.c = c = G.to_modes(u, grid)
        lam = grid.eigenvalues(rdt)
        w = grid.parseval_weight(rdt)
        h = grid.cell_volume(rdt)
        p, beta = params.p, params.beta
        dens = abs_pow(u, 2)
        kin = w * np.sum(lam * np.abs(c) ** 2) / 2
        V = evaluate_potential(params, grid, rdt)
        mass = h * np.sum(dens)
        pot = h * np.sum(V * dens)
        nl = h * np.sum(abs_pow(u, p + 1))
        g = (V + params.omega + beta * abs_pow(u, p - 1)) * u
        rot = rdt.type(0)
        if params.rotation and grid.dim == 2:
            lz = _lz_from_modes(c, grid)
            rot = -params.rotation * h * np.vdot(u, lz).real
            g = g - params.rotation * lz
        self.S = kin + pot + 2 * beta / (p + 1) * nl + rot + params.omega * mass
        self.K = kin + pot + beta * nl + rot + params.omega * mass
        self.h1 = np.sqrt(mass + 2 * kin)
        gc = G.to_modes(g, grid)
        self.H_c = lam / 2 * c + gc
        H = G.from_modes(self.H_c, grid)
        self.res_max = np.max(np.abs(H))
        self.res_hm1 = np.sqrt(w * np.sum(np.abs(self.H_c) ** 2 / (1 + lam)))
        self.step_c = gc


def _mu_norms(mu_c, grid):
    rdt = real_dtype(mu_c)
    lam = grid.eigenvalues(rdt)
    w = grid.parseval_weight(rdt)
    a2 = np.abs(mu_c) ** 2
    l2sq = w * np.sum(a2)
    return l2sq, l2sq + w * np.sum(lam * a2)


def run_dgf(u0, config: DgfConfig, grid: Grid, params: ModelParams,
            reference=None) -> RunResult:
    """Iterate the stabilized gradient flow from ``u0`` until a stop rule fires.

    Parameters
    ----------
    u0 : array_like
        Nonzero initial field on ``grid``.
    reference : array_like, optional
        Ground state used to record the phase-invariant H1 distance.

    Raises
    ------
    InvalidInput
        If ``u0`` vanishes identically.
    NumericalBlowup
        If non-finite values appear.
    """
    from .metrics import dist_h1

    dtype = config.dtype
    if config.precision == "extended" and np.finfo(np.longdouble).eps >= np.finfo(np.float64).eps:
        warnings.warn("long double is no wider than double on this platform", RuntimeWarning)
    u = grid.check(u0, "u0").astype(complex_dtype(dtype))
    if not np.any(u != 0):
        raise InvalidInput("initial field is identically zero")
    ref = None
    if reference is not None:
        ref = grid.check(reference, "reference").astype(complex_dtype(dtype))
    rdt = np.dtype(dtype)
    tau = rdt.type(config.tau)
    lam = grid.eigenvalues(rdt)
    stride = config.stride_for(grid)

    def make_record(n, st, alpha, mu_l2, mu_h1, slack):
        dist = None if ref is None else float(dist_h1(st.u, ref, grid))
        return IterationRecord(
            n=n, S=float(st.S), K=float(st.K), alpha_n=float(alpha),
            mu_l2=float(mu_l2), mu_h1=float(mu_h1),
            residual_max=float(st.res_max), residual_hminus1=float(st.res_hm1),
            phi_h1=float(st.h1), dist_to_ref=dist, decay_slack=float(slack),
        )

    nan = float("nan")
    state = _State(u, grid, params)
    records = [make_record(0, state, nan, nan, nan, nan)]
    violations = 0
    termination = MAX_ITERS
    n = 0
    for n in range(1, config.max_iters + 1):
        if config.alpha == "adaptive":
            alpha = adaptive_alpha(state.u, grid, params)
        else:
            alpha = rdt.type(config.alpha)
        shift = 1 + tau * alpha
        c_next = (shift * state.c - tau * state.step_c) / (shift + tau * lam / 2)
        u_next = G.from_modes(c_next, grid)
        if not np.all(np.isfinite(u_next)):
            raise NumericalBlowup(n)
        with np.errstate(over="ignore", invalid="ignore"):
            new = _State(u_next, grid, params)
        if not (np.isfinite(new.S) and np.isfinite(new.res_max)):
            raise NumericalBlowup(n)
        mu_l2sq, mu_h1sq = _mu_norms((state.c - c_next) / tau, grid)
        slack = state.S - new.S - 2 * tau * mu_l2sq - tau ** 2 / 4 * mu_h1sq
        violated = config.decay_check != "off" and slack < -DECAY_SLACK_REL * max(1, abs(state.S))
        if violated:
            violations += 1
            log.warning("action decay bound violated at step %d (slack %.3e)", n, float(slack))

        res_ok = new.res_max < config.residual_tol
        act_ok = abs(state.S - new.S) < config.action_tol
        if violated and config.decay_check == "strict":
            termination = DECAY_VIOLATION
        elif config.stop_rule == "residual" and res_ok:
            termination = RESIDUAL_MET
        elif config.stop_rule == "action" and act_ok:
            termination = ACTION_INCREMENT_MET
        elif config.stop_rule == "both" and res_ok and act_ok:
            termination = RESIDUAL_MET
        done = termination != MAX_ITERS or n == config.max_iters
        if done or n % stride == 0:
            records.append(make_record(n, new, alpha, math.sqrt(mu_l2sq), math.sqrt(mu_h1sq), slack))
        state = new
        if done:
            break
        if n % 1000 == 0:
            log.debug("step %d: S=%.15g residual=%.3e", n, float(state.S), float(state.res_max))
    return RunResult(
        final_field=state.u,
        records=records,
        termination=termination,
        iterations_used=n,
        decay_violations=violations,
        final_action=state.S,
    )
