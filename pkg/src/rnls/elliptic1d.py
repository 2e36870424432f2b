"""
Exact 1D ground state of -1/2 u'' + u^3 + omega u = 0 on (0, L), u(0) = u(L) = 0.

The positive solution is

    u(x) = (2 k K(k) / L) sn(2 K(k) x / L, k),

where the modulus k solves 2 (1 + k^2) K(k)^2 + omega L^2 = 0.

``k`` is the elliptic *modulus* throughout (not the parameter m = k^2):
K(k) = int_0^{pi/2} (1 - k^2 sin^2 t)^{-1/2} dt.

Every routine accepts a ``dtype`` so the oracle can be evaluated in
extended precision alongside extended-precision solver runs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidGrid, ModulusNearOne, NoSolution
from .grid import DIRICHLET, Grid, complex_dtype, pi_as

MODULUS_CEILING = 1 - 1e-12
MAX_BISECTIONS = 200


def _check_modulus(k):
    if not (0 <= k < 1):
        raise DomainError(f"modulus must satisfy 0 <= k < 1, got {k!r}")


def agm(a, b, dtype=np.float64):
    """Arithmetic-geometric mean of two positive numbers."""
    a = np.asarray(a, dtype=dtype)
    b = np.asarray(b, dtype=dtype)
    eps = np.finfo(dtype).eps
    for _ in range(64):
        if abs(a - b) <= eps * a:
            break
        a, b = (a + b) / 2, np.sqrt(a * b)
    return (a + b) / 2


def agm_K(k, dtype=np.float64):
    """Complete elliptic integral of the first kind, K(k) = pi / (2 agm(1, k'))."""
    _check_modulus(k)
    k = np.asarray(k, dtype=dtype)
    kp = np.sqrt((1 - k) * (1 + k))
    return pi_as(dtype) / (2 * agm(1, kp, dtype))


def _landen_chain(k, dtype):
    # AGM sequence a_n, c_n for the descending Landen scheme
    k = np.asarray(k, dtype=dtype)
    eps = np.finfo(dtype).eps
    a, b, c = np.asarray(1, dtype=dtype), np.sqrt((1 - k) * (1 + k)), k
    a_seq, c_seq = [a], [c]
    while abs(c) > eps * a and len(a_seq) < 64:
        a, b, c = (a + b) / 2, np.sqrt(a * b), (a - b) / 2
        a_seq.append(a)
        c_seq.append(c)
    return a_seq, c_seq


def jacobi_sncn(u, k, dtype=np.float64):
    """Jacobi sn and cn by the descending Landen (AGM) recursion.

    Works elementwise on array ``u``.
    """
    _check_modulus(k)
    u = np.asarray(u, dtype=dtype)
    if k == 0:
        return np.sin(u), np.cos(u)
    a_seq, c_seq = _landen_chain(k, dtype)
    n = len(a_seq) - 1
    phi = (2 ** n) * a_seq[n] * u
    for i in range(n, 0, -1):
        phi = (phi + np.arcsin(c_seq[i] / a_seq[i] * np.sin(phi))) / 2
    return np.sin(phi), np.cos(phi)


def jacobi_sn(u, k, dtype=np.float64):
    """Jacobi elliptic sine sn(u, k) for modulus 0 <= k < 1."""
    return jacobi_sncn(u, k, dtype)[0]


def modulus_residual(k, omega, L, dtype=np.float64):
    """F(k) = 2 (1 + k^2) K(k)^2 + omega L^2, strictly increasing in k."""
    K = agm_K(k, dtype)
    kk = np.asarray(k, dtype=dtype)
    return 2 * (1 + kk * kk) * K * K + np.asarray(omega, dtype=dtype) * np.asarray(L, dtype=dtype) ** 2


@dataclass(frozen=True)
class EllipticGS1D:
    omega: float
    L: float
    k: float
    K_of_k: float

    @property
    def amplitude(self):
        """Value at the midpoint, 2 k K(k) / L."""
        return 2 * self.k * self.K_of_k / self.L

    def __call__(self, x, dtype=None):
        dtype = dtype or np.result_type(np.asarray(self.k).dtype, np.float64)
        x = np.asarray(x, dtype=dtype)
        K = np.asarray(self.K_of_k, dtype=dtype)
        L = np.asarray(self.L, dtype=dtype)
        return 2 * np.asarray(self.k, dtype=dtype) * K / L * jacobi_sn(2 * K * x / L, self.k, dtype)


def solve_modulus(omega, L, tol=1e-12, dtype=np.float64) -> EllipticGS1D:
    """Solve 2 (1 + k^2) K(k)^2 + omega L^2 = 0 for the modulus by bisection.

    Bisection runs until the bracket collapses at working precision, which is
    tighter than ``tol``; ``|F(k)| < tol`` is then verified.
    """
    if not L > 0:
        raise DomainError(f"interval length must be positive, got {L}")
    f0 = modulus_residual(0, omega, L, dtype)
    if abs(f0) < tol:
        return EllipticGS1D(omega, L, np.asarray(0, dtype=dtype)[()], agm_K(0, dtype)[()])
    if f0 > 0:
        raise NoSolution(
            f"omega={omega} >= -pi^2/(2 L^2); the zero state is the only ground state"
        )
    lo, hi = np.asarray(0, dtype=dtype), np.asarray(MODULUS_CEILING, dtype=dtype)
    if modulus_residual(hi, omega, L, dtype) < 0:
        raise ModulusNearOne((float(lo), float(hi)))
    f_lo = f0
    for _ in range(MAX_BISECTIONS):
        mid = (lo + hi) / 2
        if mid <= lo or mid >= hi:
            break
        f_mid = modulus_residual(mid, omega, L, dtype)
        if f_mid < 0:
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        assert f_lo < 0 <= modulus_residual(hi, omega, L, dtype)
        if f_mid == 0:
            lo = hi = mid
            break
    k = lo if abs(modulus_residual(lo, omega, L, dtype)) <= abs(modulus_residual(hi, omega, L, dtype)) else hi
    if abs(modulus_residual(k, omega, L, dtype)) >= tol:
        raise NoSolution(f"bisection did not reach |F| < {tol}")
    if k > MODULUS_CEILING:
        raise ModulusNearOne((float(lo), float(hi)))
    return EllipticGS1D(omega, L, k[()], agm_K(k, dtype)[()])


def analytic_gs_1d(grid: Grid, omega, dtype=np.float64) -> np.ndarray:
    """Exact ground state sampled at the interior points of a sine grid."""
    if grid.boundary != DIRICHLET or grid.dim != 1:
        raise InvalidGrid("the analytic ground state needs a 1D dirichlet grid")
    L = grid.lengths[0]
    gs = solve_modulus(omega, L, dtype=dtype)
    (x,) = grid.coords(dtype)
    x = x - np.asarray(grid.lower[0], dtype=dtype)
    return gs(x, dtype).astype(complex_dtype(dtype))
