"""
Collocation grids and spectral operators.

Two discretizations are supported:

``dirichlet``
    Sine pseudospectral method on [a, b] with homogeneous Dirichlet
    boundary values. Only the N - 1 interior points x_j = a + j L / N,
    j = 1..N-1, are stored; the boundary zeros are implicit. Modes are
    sin(k pi (x - a) / L), k = 1..N-1, with -Laplacian eigenvalue (k pi / L)^2.

``periodic``
    Fourier pseudospectral method on a box with points x_j = a + j L / N,
    j = 0..N-1 per axis. Modes are exp(i kappa (x - a)) with
    kappa = 2 pi k / L, k = -N/2..N/2-1.

Fields are plain numpy arrays of shape ``grid.shape`` (complex). Their
precision follows the array dtype, so the same operators run in double or
extended (``np.clongdouble``) precision.

Coefficient conventions (internal, only round trip and Parseval are
contractual):

* dirichlet: f(x) = sum_k c_k sin(k pi (x - a) / L)
* periodic:  f(x) = sum_k c_k exp(i 2 pi k (x - a) / L)
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np
import scipy.fft as sfft

from .errors import InvalidField, InvalidGrid

DIRICHLET = "dirichlet"
PERIODIC = "periodic"
BOUNDARIES = (DIRICHLET, PERIODIC)


def real_dtype(values) -> np.dtype:
    """Real floating dtype matching the precision of ``values``."""
    dt = np.asarray(values).dtype
    if dt.kind in "fc":
        return np.finfo(dt).dtype
    return np.dtype(np.float64)


def complex_dtype(dtype) -> np.dtype:
    return np.result_type(np.dtype(dtype), np.complex64)


def pi_as(dtype):
    # np.pi is a double; extended runs need pi to full working precision
    return np.arctan(np.asarray(1, dtype=dtype)) * 4


@dataclass(frozen=True)
class Grid:
    """Uniform tensor-product collocation grid.

    Parameters
    ----------
    lower, upper : sequence of float
        Interval end points per axis.
    points : sequence of int
        Number of subintervals N per axis (even, at least 4).
    boundary : {"dirichlet", "periodic"}
    """

    lower: tuple
    upper: tuple
    points: tuple
    boundary: str = PERIODIC

    def __post_init__(self):
        lower = tuple(float(a) for a in np.atleast_1d(self.lower))
        upper = tuple(float(b) for b in np.atleast_1d(self.upper))
        points = tuple(int(n) for n in np.atleast_1d(self.points))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "points", points)
        if not (len(lower) == len(upper) == len(points)):
            raise InvalidGrid("lower, upper and points must have the same length")
        if len(points) not in (1, 2):
            raise InvalidGrid(f"only 1D and 2D grids are supported, got d={len(points)}")
        if self.boundary not in BOUNDARIES:
            raise InvalidGrid(f"unknown boundary {self.boundary!r}")
        if self.boundary == DIRICHLET and len(points) != 1:
            raise InvalidGrid("the sine (dirichlet) discretization is one-dimensional")
        for a, b, n in zip(lower, upper, points):
            if not (np.isfinite(a) and np.isfinite(b) and b > a):
                raise InvalidGrid(f"invalid interval [{a}, {b}]")
            if n < 4 or n % 2:
                raise InvalidGrid(f"point count must be even and >= 4, got {n}")

    @classmethod
    def from_spacing(cls, lower, upper, h, boundary=PERIODIC) -> "Grid":
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        n = np.rint((upper - lower) / h).astype(int)
        if not np.allclose(n * h, upper - lower, rtol=1e-12, atol=0):
            raise InvalidGrid(f"mesh size {h} does not divide the domain")
        return cls(tuple(lower), tuple(upper), tuple(n), boundary)

    @property
    def dim(self) -> int:
        return len(self.points)

    @property
    def lengths(self) -> tuple:
        return tuple(b - a for a, b in zip(self.lower, self.upper))

    @property
    def spacing(self) -> tuple:
        return tuple(L / n for L, n in zip(self.lengths, self.points))

    @property
    def shape(self) -> tuple:
        if self.boundary == DIRICHLET:
            return tuple(n - 1 for n in self.points)
        return self.points

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def cell_volume(self, dtype=np.float64):
        """Rectangle-rule quadrature weight h^d."""
        return _tables(self, np.dtype(dtype).str)["cell"]

    def parseval_weight(self, dtype=np.float64):
        """Constant w with h^d sum |f|^2 = w sum |c_k|^2."""
        return _tables(self, np.dtype(dtype).str)["weight"]

    def coords(self, dtype=np.float64) -> tuple:
        """Broadcastable coordinate arrays, one per axis (ij indexing)."""
        return _tables(self, np.dtype(dtype).str)["coords"]

    def mesh(self, dtype=np.float64) -> tuple:
        """Dense coordinate arrays of shape ``self.shape``."""
        return tuple(np.broadcast_to(x, self.shape) for x in self.coords(dtype))

    def eigenvalues(self, dtype=np.float64) -> np.ndarray:
        """Eigenvalues of -Laplacian per mode, shaped like the coefficients."""
        return _tables(self, np.dtype(dtype).str)["lam"]

    def modes(self) -> tuple:
        """Integer mode indices per axis, broadcastable to the coefficients."""
        return _tables(self, np.dtype(np.float64).str)["modes"]

    def zeros(self, dtype=np.complex128) -> np.ndarray:
        return np.zeros(self.shape, dtype=dtype)

    def check(self, values, name="field") -> np.ndarray:
        """Validate a field array against this grid and return it as an array."""
        values = np.asarray(values)
        if values.shape != self.shape:
            if values.ndim == 1 and values.size == self.size:
                values = values.reshape(self.shape)
            else:
                raise InvalidField(
                    f"{name} has shape {values.shape}, grid expects {self.shape}"
                )
        if not np.all(np.isfinite(values)):
            raise InvalidField(f"{name} contains non-finite values")
        if values.dtype.kind != "c":
            values = values.astype(complex_dtype(real_dtype(values)))
        return values


@lru_cache(maxsize=64)
def _tables(grid: Grid, dtype_str: str) -> dict:
    dtype = np.dtype(dtype_str)
    pi = pi_as(dtype)
    d = grid.dim
    coords, lam_axes, modes, dsym = [], [], [], []
    for axis, (a, L, n) in enumerate(zip(grid.lower, grid.lengths, grid.points)):
        a_, L_ = np.asarray(a, dtype=dtype), np.asarray(L, dtype=dtype)
        if grid.boundary == DIRICHLET:
            j = np.arange(1, n, dtype=dtype)
            k = np.arange(1, n)
            kappa = k.astype(dtype) * pi / L_
            ds = kappa
        else:
            j = np.arange(n, dtype=dtype)
            k = np.rint(sfft.fftfreq(n, d=1.0 / n)).astype(int)
            kappa = 2 * pi * k.astype(dtype) / L_
            ds = kappa.copy()
            ds[n // 2] = 0  # Nyquist mode has no real derivative
        x = a_ + j * L_ / n
        shape = [1] * d
        shape[axis] = -1
        coords.append(x.reshape(shape))
        lam_axes.append((kappa ** 2).reshape(shape))
        modes.append(k.reshape(shape))
        dsym.append(ds.reshape(shape))
    lam = sum(lam_axes)
    lam = np.broadcast_to(lam, grid.shape).copy()
    lengths = np.asarray(grid.lengths, dtype=dtype)
    npts = np.asarray(grid.points, dtype=dtype)
    cell = np.prod(lengths / npts)
    if grid.boundary == DIRICHLET:
        weight = np.prod(lengths / 2)
    else:
        weight = np.prod(lengths)
    for arr in coords + [lam] + dsym:
        arr.setflags(write=False)
    return {
        "coords": tuple(coords),
        "lam": lam,
        "modes": tuple(modes),
        "dsym": tuple(dsym),
        "cell": cell,
        "weight": weight,
    }


# -- transforms -------------------------------------------------------------

def to_modes(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Coefficients of ``values`` (no validation; hot path)."""
    if grid.boundary == DIRICHLET:
        return sfft.dstn(values, type=1) / np.prod(grid.points)
    return sfft.fftn(values, norm="forward")


def from_modes(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    if grid.boundary == DIRICHLET:
        return sfft.dstn(coeffs, type=1) / 2 ** grid.dim
    return sfft.ifftn(coeffs, norm="forward")


@dataclass(frozen=True)
class SpectralField:
    grid: Grid
    coefficients: np.ndarray
    eigenvalues: np.ndarray


def forward_transform(values, grid: Grid) -> SpectralField:
    values = grid.check(values)
    c = to_modes(values, grid)
    return SpectralField(grid, c, grid.eigenvalues(real_dtype(c)))


def inverse_transform(s: SpectralField) -> np.ndarray:
    c = np.asarray(s.coefficients)
    if c.shape != s.grid.shape:
        if c.ndim == 1 and c.size == s.grid.size:
            c = c.reshape(s.grid.shape)
        else:
            raise InvalidField(f"coefficient array has shape {c.shape}, grid expects {s.grid.shape}")
    return from_modes(c, s.grid)


# -- differential operators -------------------------------------------------

def neg_laplacian(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Spectral -Laplacian."""
    c = to_modes(values, grid)
    return from_modes(grid.eigenvalues(real_dtype(c)) * c, grid)


def gradient(values, grid: Grid) -> list:
    """Spectral partial derivatives, one array per axis.

    For the sine basis the derivative is the cosine series evaluated at the
    interior points. For the Fourier basis the Nyquist mode is dropped so
    that real fields have real derivatives.
    """
    values = grid.check(values)
    c = to_modes(values, grid)
    dsym = _tables(grid, real_dtype(c).str)["dsym"]
    if grid.boundary == DIRICHLET:
        b = np.zeros(c.shape[0] + 2, dtype=c.dtype)
        b[1:-1] = dsym[0] * c
        # DCT-I: y_j = b_0 + (-1)^j b_N + 2 sum_k b_k cos(pi k j / N)
        y = sfft.dct(b, type=1) / 2
        return [y[1:-1]]
    return [sfft.ifftn(1j * ds * c, norm="forward") for ds in dsym]


# -- inner products -----------------------------------------------------------

class InnerProducts(NamedTuple):
    l2: float
    h1: float
    complex_l2: complex
    complex_h1: complex


def _pair_l2(f, g, grid):
    return grid.cell_volume(real_dtype(f)) * np.vdot(g, f)


def _pair_grad(fc, gc, grid):
    # <grad f, grad g> = w sum lam f_k conj(g_k); exact for both bases and
    # consistent with the spectral -Laplacian
    lam = grid.eigenvalues(real_dtype(fc))
    return grid.parseval_weight(real_dtype(fc)) * np.vdot(gc, lam * fc)


def inner_products(f, g, grid: Grid) -> InnerProducts:
    """Rectangle-rule L2 and H1 pairings of ``f`` and ``g``.

    ``complex_l2 = h^d sum f conj(g)``; the real variants are the real parts.
    """
    f = grid.check(f, "f")
    g = grid.check(g, "g")
    cl2 = _pair_l2(f, g, grid)
    ch1 = cl2 + _pair_grad(to_modes(f, grid), to_modes(g, grid), grid)
    return InnerProducts(float(cl2.real), float(ch1.real), complex(cl2), complex(ch1))


def l2_norm_sq(f, grid: Grid):
    return grid.cell_volume(real_dtype(f)) * np.sum(np.abs(f) ** 2)


def grad_norm_sq(f, grid: Grid, coeffs=None):
    c = to_modes(f, grid) if coeffs is None else coeffs
    lam = grid.eigenvalues(real_dtype(c))
    return grid.parseval_weight(real_dtype(c)) * np.sum(lam * np.abs(c) ** 2)


def h1_norm(f, grid: Grid):
    return np.sqrt(l2_norm_sq(f, grid) + grad_norm_sq(f, grid))


def l2_norm(f, grid: Grid):
    return np.sqrt(l2_norm_sq(f, grid))


def complex_h1_pairing(f, g, grid: Grid):
    """<f, g> + <grad f, grad g> as a complex number (no validation)."""
    return _pair_l2(f, g, grid) + _pair_grad(to_modes(f, grid), to_modes(g, grid), grid)


# -- interpolation ------------------------------------------------------------

def interpolate(values, grid: Grid, points: Sequence) -> tuple:
    """Evaluate the spectral interpolant and its gradient at arbitrary points.

    Parameters
    ----------
    points : array_like, shape (m, d)

    Returns
    -------
    vals : ndarray, shape (m,)
    grads : ndarray, shape (m, d)
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    c = to_modes(np.asarray(values), grid)
    vals = np.empty(len(pts), dtype=complex)
    grads = np.empty((len(pts), grid.dim), dtype=complex)
    for i, x in enumerate(pts):
        basis, dbasis = [], []
        for axis in range(grid.dim):
            b, db = _axis_basis(grid, axis, x[axis])
            basis.append(b)
            dbasis.append(db)
        vals[i] = _contract(c, basis)
        for axis in range(grid.dim):
            bs = list(basis)
            bs[axis] = dbasis[axis]
            grads[i, axis] = _contract(c, bs)
    return vals, grads


def _axis_basis(grid, axis, x):
    a, L, n = grid.lower[axis], grid.lengths[axis], grid.points[axis]
    s = x - a
    if grid.boundary == DIRICHLET:
        kap = np.arange(1, n) * np.pi / L
        return np.sin(kap * s), kap * np.cos(kap * s)
    k = np.rint(sfft.fftfreq(n, d=1.0 / n))
    kap = 2 * np.pi * k / L
    b = np.exp(1j * kap * s)
    db = 1j * kap * b
    # Nyquist mode as a cosine keeps real data real between nodes
    b[n // 2] = np.cos(kap[n // 2] * s)
    db[n // 2] = -kap[n // 2] * np.sin(kap[n // 2] * s)
    return b, db


def _contract(c, basis):
    out = c
    for b in reversed(basis):
        out = out @ b
    return out
