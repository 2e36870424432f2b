"""Phase-invariant distances, lambda0 estimation and convergence diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import grid as G
from .errors import DegenerateAlignment, InsufficientData, Lambda0Failed
from .grid import Grid, real_dtype
from .model import ModelParams, evaluate_potential
from .ops import _lz_from_modes, second_variation

TAIL_DROP = 1e-2
TAIL_FLOOR = 1e-11
RATIO_FLOOR = 1e-12


# -- phase alignment ----------------------------------------------------------

@dataclass(frozen=True)
class PhaseAlignment:
    theta: float
    aligned_ref: np.ndarray
    dist_h1: float
    inner_magnitude: float
    degenerate: bool = False


def phase_align(phi, ref, grid: Grid) -> PhaseAlignment:
    """Align ``ref`` to ``phi`` along its phase orbit.

    The optimal phase is the principal argument of the complex H1 pairing
    <phi, ref> + <grad phi, grad ref>. Raises :class:`DegenerateAlignment`
    when that pairing vanishes.
    """
    phi = grid.check(phi, "phi")
    ref = grid.check(ref, "ref")
    pairing = G.complex_h1_pairing(phi, ref, grid)
    r = abs(pairing)
    scale = G.h1_norm(phi, grid) * G.h1_norm(ref, grid)
    if not r > 1e-14 * scale:
        raise DegenerateAlignment(f"H1 pairing {r:.3e} is negligible against {scale:.3e}")
    theta = float(np.angle(pairing))
    aligned = (pairing / r) * ref  # e^{i theta} in working precision
    return PhaseAlignment(theta, aligned, G.h1_norm(phi - aligned, grid), r)


def dist_h1(phi, ref, grid: Grid):
    """inf over theta of |phi - e^{i theta} ref|_H1."""
    try:
        return phase_align(phi, ref, grid).dist_h1
    except DegenerateAlignment:
        phi = grid.check(phi, "phi")
        ref = grid.check(ref, "ref")
        return np.sqrt(G.h1_norm(phi, grid) ** 2 + G.h1_norm(ref, grid) ** 2)


# -- lambda0 ---------------------------------------------------------------------

def linear_operator(grid: Grid, params: ModelParams, dtype=np.float64):
    """Matrix-free -1/2 Lap + V - rotation Lz."""
    rdt = np.dtype(dtype)
    V = evaluate_potential(params, grid, rdt)
    lam = grid.eigenvalues(rdt)

    def apply(u):
        c = G.to_modes(u, grid)
        out = G.from_modes(lam / 2 * c, grid) + V * u
        if params.rotation and grid.dim == 2:
            out = out - params.rotation * _lz_from_modes(c, grid)
        return out

    return apply


def _pcg(apply, b, precond, tol, maxiter):
    x = np.zeros_like(b)
    r = b.copy()
    z = precond(r)
    p = z.copy()
    rz = np.vdot(r, z).real
    bnorm = np.linalg.norm(b)
    for it in range(maxiter):
        if np.linalg.norm(r) <= tol * bnorm:
            return x, it
        Ap = apply(p)
        step = rz / np.vdot(p, Ap).real
        x = x + step * p
        r = r - step * Ap
        z = precond(r)
        rz_new = np.vdot(r, z).real
        p = z + (rz_new / rz) * p
        rz = rz_new
    if np.linalg.norm(r) <= tol * bnorm:
        return x, maxiter
    raise Lambda0Failed(f"inner conjugate-gradient solve did not converge in {maxiter} steps")


def estimate_lambda0(grid: Grid, params: ModelParams, shift: Optional[float] = None,
                     tol: float = 1e-9, max_outer: int = 10_000, inner_tol: float = 1e-13,
                     seed: int = 0) -> float:
    """Smallest eigenvalue of -1/2 Lap + V - rotation Lz by shifted inverse iteration.

    Each inverse step is a preconditioned conjugate-gradient solve of
    (A - shift) x = u, preconditioned by the diagonal spectral symbol
    lam/2 + mean(V) - shift. Converged when |A u - rho u| < tol |u| with rho
    the Rayleigh quotient. ``beta`` and ``omega`` play no role.
    """
    A = linear_operator(grid, params)
    V = evaluate_potential(params, grid)
    sigma = float(V.min()) - 1 if shift is None else float(shift)
    lam = grid.eigenvalues()
    symbol = lam / 2 + (float(V.mean()) - sigma)

    def shifted(u):
        return A(u) - sigma * u

    def precond(r):
        return G.from_modes(G.to_modes(r, grid) / symbol, grid)

    rng = np.random.default_rng(seed)
    u = np.exp(-(V - V.min()) / 2) + 1e-3 * (rng.standard_normal(grid.shape)
                                             + 1j * rng.standard_normal(grid.shape))
    u = u / np.linalg.norm(u)
    for _ in range(max_outer):
        Au = A(u)
        rho = np.vdot(u, Au).real
        if np.linalg.norm(Au - rho * u) < tol:
            return float(rho)
        u, _ = _pcg(shifted, u, precond, inner_tol, 10 * grid.size + 100)
        u = u / np.linalg.norm(u)
    raise Lambda0Failed(f"inverse iteration did not converge in {max_outer} steps")


# -- rate fits and ratio diagnostics ---------------------------------------------

@dataclass(frozen=True)
class RateFit:
    rate_a: float
    prefactor_logC: float
    r_squared: float
    window: tuple


def tail_window(values: Sequence[float], drop: float = TAIL_DROP,
                floor: float = TAIL_FLOOR) -> tuple:
    """Half-open index range of the asymptotic tail of a decaying series.

    The tail starts at the first entry below ``drop`` times the initial
    value and stops before the first entry below the round-off ``floor``.
    A series that never drops that far is used from its start.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return (0, 0)
    below = np.nonzero(v < drop * v[0])[0]
    start = int(below[0]) if below.size else 0
    under = np.nonzero(~(v[start:] >= floor))[0]
    end = start + int(under[0]) if under.size else v.size
    return (start, end)


def fit_exponential_rate(series, window: Optional[tuple] = None) -> RateFit:
    """Least-squares fit of ln(value) = logC - a n over a window of the series.

    Parameters
    ----------
    series : sequence of (n, value) pairs
    window : (start, end), optional
        Index range into ``series``; defaults to :func:`tail_window`.
    """
    pts = [(float(n), float(v)) for n, v in series]
    if window is None:
        window = tail_window([v for _, v in pts])
    start, end = window
    sel = [(n, v) for n, v in pts[start:end] if v > 0 and math.isfinite(v)]
    if len(sel) < 3:
        raise InsufficientData(f"need at least 3 positive points in the window, got {len(sel)}")
    n = np.array([s[0] for s in sel])
    y = np.log([s[1] for s in sel])
    slope, icept = np.polyfit(n, y, 1)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum((y - (slope * n + icept)) ** 2))
    if ss_tot <= 1e-30 * max(1.0, float(np.sum(y ** 2))):
        r2 = 0.0
        slope = 0.0 if abs(slope) < 1e-14 else slope
    else:
        r2 = max(0.0, 1 - ss_res / ss_tot)
    return RateFit(float(-slope), float(icept), r2, (start, end))


def _tail_indices(records, S_ref):
    gaps = [r.S - S_ref for r in records]
    start, end = tail_window(gaps)
    return range(start, end)


def lojasiewicz_report(records, S_ref: float, tail: bool = False) -> list:
    """Ratios (S - S_ref) / |H phi|_{H^-1}^2 along the records.

    Records whose H^-1 residual is below 1e-12 are skipped. With ``tail``
    only the asymptotic tail of the action gap is used.
    """
    idx = _tail_indices(records, S_ref) if tail else range(len(records))
    out = []
    for i in idx:
        r = records[i]
        if r.residual_hminus1 > RATIO_FLOOR:
            out.append((r.S - S_ref) / r.residual_hminus1 ** 2)
    return out


class EquivalenceBand(NamedTuple):
    lower: float
    upper: float


def sgap_dist_equivalence(records, S_ref: float) -> EquivalenceBand:
    """Min and max of (S - S_ref) / dist^2 over the tail of the action gap."""
    ratios = []
    for i in _tail_indices(records, S_ref):
        r = records[i]
        if r.dist_to_ref is None:
            raise InsufficientData("records carry no distance to a reference")
        if r.dist_to_ref > RATIO_FLOOR:
            ratios.append((r.S - S_ref) / r.dist_to_ref ** 2)
    if not ratios:
        raise InsufficientData("no records in the tail window")
    return EquivalenceBand(min(ratios), max(ratios))


# -- coercivity and vortices -------------------------------------------------------

def coercivity_sample(phi_g, grid: Grid, params: ModelParams, n_samples: int = 32,
                      rng=None, smooth: float = 2.0) -> float:
    """Smallest sampled D^2 S(phi_g)[eta, eta] / |eta|_H1^2 over random smooth eta
    orthogonal (in H1) to the phase direction i phi_g. Diagnostic only."""
    rng = np.random.default_rng(rng)
    phi_g = grid.check(phi_g)
    tangent = 1j * phi_g
    tnorm2 = G.h1_norm(tangent, grid) ** 2
    lam = grid.eigenvalues()
    best = np.inf
    for _ in range(n_samples):
        c = (rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)) * np.exp(-smooth * np.sqrt(lam))
        eta = G.from_modes(c, grid)
        eta = eta - G.complex_h1_pairing(eta, tangent, grid).real / tnorm2 * tangent
        q = second_variation(phi_g, eta, grid, params) / G.h1_norm(eta, grid) ** 2
        best = min(best, float(q))
    return best


def winding_number(u, grid: Grid, center=(0.0, 0.0), radius=1.0, n: int = 256) -> int:
    """Phase winding of the spectral interpolant along a circle."""
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    pts = np.stack([center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)], axis=1)
    vals, _ = G.interpolate(u, grid, pts)
    ph = np.angle(vals)
    dph = np.angle(np.exp(1j * (np.roll(ph, -1) - ph)))
    return int(np.rint(dph.sum() / (2 * np.pi)))


class Vortex(NamedTuple):
    position: tuple
    winding: int
    core_modulus: float


def find_vortices(u, grid: Grid, min_density: float = 0.05, newton_steps: int = 30) -> list:
    """Locate phase singularities of a 2D field.

    Plaquettes with nonzero phase circulation whose corners carry at least
    ``min_density`` times max|u| seed a Newton solve for the zero of the
    spectral interpolant. ``core_modulus`` is |u| at the refined core.
    """
    if grid.dim != 2:
        raise ValueError("vortices are defined for 2D fields")
    u = np.asarray(u, dtype=complex)
    amax = float(np.abs(u).max())
    ph = np.angle(u)

    def dphase(a, b):
        return np.angle(np.exp(1j * (b - a)))

    circ = (dphase(ph[:-1, :-1], ph[1:, :-1]) + dphase(ph[1:, :-1], ph[1:, 1:])
            + dphase(ph[1:, 1:], ph[:-1, 1:]) + dphase(ph[:-1, 1:], ph[:-1, :-1]))
    wind = np.rint(circ / (2 * np.pi)).astype(int)
    corner_max = np.maximum.reduce([np.abs(u[:-1, :-1]), np.abs(u[1:, :-1]),
                                    np.abs(u[1:, 1:]), np.abs(u[:-1, 1:])])
    h1, h2 = grid.spacing
    x1, x2 = (np.ravel(x) for x in grid.coords())
    out = []
    for i, j in zip(*np.nonzero((wind != 0) & (corner_max >= min_density * amax))):
        x = np.array([x1[i] + h1 / 2, x2[j] + h2 / 2])
        x0 = x.copy()
        for _ in range(newton_steps):
            val, grad = G.interpolate(u, grid, x[None, :])
            J = np.array([[grad[0, 0].real, grad[0, 1].real],
                          [grad[0, 0].imag, grad[0, 1].imag]])
            try:
                dx = np.linalg.solve(J, -np.array([val[0].real, val[0].imag]))
            except np.linalg.LinAlgError:
                break
            x = x + dx
            if np.linalg.norm(dx) < 1e-14 * max(1.0, np.linalg.norm(x)):
                break
        if np.linalg.norm(x - x0) > max(h1, h2):
            x = x0  # Newton wandered off; report the plaquette centre
        val, _ = G.interpolate(u, grid, x[None, :])
        out.append(Vortex((float(x[0]), float(x[1])), int(wind[i, j]), float(abs(val[0]))))
    return out
