"""Operators and functionals of the rotating NLS action.

All integrals use rectangle-rule quadrature at the collocation points;
gradient terms are evaluated in the spectral basis so that
``<grad f, grad g> = <-Laplacian f, g>`` holds exactly on the grid.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from . import grid as G
from .grid import Grid, real_dtype
from .model import ModelParams, evaluate_potential


def abs_pow(u, q):
    """|u|^q with the convention 0^q = 0 (q may be non-integer)."""
    if q == 0:
        return np.ones(np.shape(u), dtype=real_dtype(u))
    if float(q).is_integer() and q > 0:
        q = int(q)
        out = (u.real ** 2 + u.imag ** 2) ** (q // 2)
        return out * np.abs(u) if q % 2 else out
    a = np.abs(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(q * np.log(a))
    return np.where(a > 0, out, 0)


def _lz_from_modes(c, grid: Grid):
    if grid.dim == 1:
        return np.zeros_like(c)
    ds1, ds2 = G._tables(grid, real_dtype(c).str)["dsym"]
    x1, x2 = grid.coords(real_dtype(c))
    d1 = sfft.ifftn(1j * ds1 * c, norm="forward")
    d2 = sfft.ifftn(1j * ds2 * c, norm="forward")
    return 1j * (x2 * d1 - x1 * d2)


def apply_lz(u, grid: Grid) -> np.ndarray:
    """Angular momentum operator i (x2 d/dx1 - x1 d/dx2); zero in 1D."""
    u = grid.check(u)
    return _lz_from_modes(G.to_modes(u, grid), grid)


def _local_coeff(u, grid, params):
    # V + omega + beta |u|^(p-1), the multiplicative part of H_u
    rdt = real_dtype(u)
    V = evaluate_potential(params, grid, rdt)
    return V + params.omega + params.beta * abs_pow(u, params.p - 1)


def apply_hamiltonian(u, grid: Grid, params: ModelParams) -> np.ndarray:
    """H_u u = (-1/2 Lap + V + beta |u|^(p-1) - rotation Lz + omega) u."""
    u = grid.check(u)
    c = G.to_modes(u, grid)
    lam = grid.eigenvalues(real_dtype(c))
    out = G.from_modes(lam / 2 * c, grid) + _local_coeff(u, grid, params) * u
    if params.rotation:
        out = out - params.rotation * _lz_from_modes(c, grid)
    return out


@dataclass(frozen=True)
class FunctionalReport:
    S: float
    K: float
    E: float
    L_Omega: float
    norm_l2: float
    norm_h1: float
    norm_lp1: float


def functionals(u, grid: Grid, params: ModelParams, coeffs=None) -> FunctionalReport:
    """Action S, Nehari functional K, energy E and rotation term of ``u``.

    Values keep the working precision of ``u``.
    """
    u = grid.check(u)
    c = G.to_modes(u, grid) if coeffs is None else coeffs
    rdt = real_dtype(u)
    h = grid.cell_volume(rdt)
    p = params.p
    dens = abs_pow(u, 2)
    kin = G.grad_norm_sq(u, grid, c) / 2
    V = evaluate_potential(params, grid, rdt)
    pot = h * np.sum(V * dens)
    mass = h * np.sum(dens)
    nl = h * np.sum(abs_pow(u, p + 1))
    if params.rotation and grid.dim == 2:
        rot = -params.rotation * h * np.vdot(u, _lz_from_modes(c, grid)).real
    else:
        rot = rdt.type(0)
    E = kin + pot + 2 * params.beta / (p + 1) * nl + rot
    S = E + params.omega * mass
    K = kin + pot + params.beta * nl + rot + params.omega * mass
    return FunctionalReport(
        S=S, K=K, E=E, L_Omega=rot,
        norm_l2=np.sqrt(mass),
        norm_h1=np.sqrt(mass + 2 * kin),
        norm_lp1=nl ** (1 / (p + 1)),
    )


def action(u, grid: Grid, params: ModelParams):
    return functionals(u, grid, params).S


def h_minus1_norm(f, grid: Grid):
    """Discrete dual norm sup <f, psi> / |psi|_H1 in the diagonal spectral basis."""
    f = grid.check(f)
    c = G.to_modes(f, grid)
    lam = grid.eigenvalues(real_dtype(c))
    return np.sqrt(grid.parseval_weight(real_dtype(c)) * np.sum(np.abs(c) ** 2 / (1 + lam)))


def _real_l2(f, g, grid):
    return grid.cell_volume(real_dtype(f)) * np.vdot(g, f).real


def first_variation(u, eta, grid: Grid, params: ModelParams):
    """Directional derivative DS(u)[eta] = 2 <H_u u, eta> (real L2 pairing)."""
    u = grid.check(u, "u")
    eta = grid.check(eta, "eta")
    return 2 * _real_l2(apply_hamiltonian(u, grid, params), eta, grid)


def linear_form(eta, grid: Grid, params: ModelParams):
    """<L1 eta, eta> with L1 = -1/2 Lap + V - rotation Lz + omega."""
    rdt = real_dtype(eta)
    c = G.to_modes(eta, grid)
    h = grid.cell_volume(rdt)
    V = evaluate_potential(params, grid, rdt)
    val = G.grad_norm_sq(eta, grid, c) / 2 + h * np.sum((V + params.omega) * abs_pow(eta, 2))
    if params.rotation and grid.dim == 2:
        val = val - params.rotation * h * np.vdot(eta, _lz_from_modes(c, grid)).real
    return val


def second_variation(u, eta, grid: Grid, params: ModelParams):
    """Quadratic form D^2 S(u)[eta, eta] = 2 <L_u eta, eta>.

    The coefficient |u|^(p-3) u^2 is taken as 0 where u = 0.
    """
    u = grid.check(u, "u")
    eta = grid.check(eta, "eta")
    p, beta = params.p, params.beta
    a = np.abs(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        conj_coeff = np.where(a > 0, u ** 2 * abs_pow(u, p - 3), 0)
    nonlin = ((p - 1) / 2 * beta * conj_coeff * np.conj(eta)
              + (p + 1) / 2 * beta * abs_pow(u, p - 1) * eta)
    return 2 * linear_form(eta, grid, params) + 2 * _real_l2(nonlin, eta, grid)
