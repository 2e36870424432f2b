"""Model parameters, trapping potentials and initial data."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace as _replace
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np

from .errors import Inadmissible, InvalidParams
from .grid import Grid, complex_dtype

@dataclass(frozen=True)
class ModelParams:
    """Parameters of the stationary rotating NLS.

    The action is
    ``S(u) = 1/2 |grad u|^2 + int V|u|^2 + 2 beta/(p+1) |u|_{p+1}^{p+1}
    - rotation Re int conj(u) Lz u + omega |u|^2``.

    ``gamma=None`` means zero potential; otherwise
    ``V = 1/2 sum gamma_i^2 x_i^2``.
    """

    dim: int
    omega: float
    p: float = 3.0
    beta: float = 1.0
    rotation: float = 0.0
    gamma: Optional[tuple] = None

    def __post_init__(self):
        if self.gamma is not None:
            object.__setattr__(self, "gamma", tuple(float(g) for g in self.gamma))
        if self.dim not in (1, 2):
            raise InvalidParams(f"dimension must be 1 or 2, got {self.dim}")
        if not self.p > 1:
            raise InvalidParams(f"exponent p must exceed 1, got {self.p}")
        if not self.beta > 0:
            raise InvalidParams(f"only the defocusing case beta > 0 is supported, got {self.beta}")
        if not np.isfinite(self.omega):
            raise InvalidParams("omega must be finite")
        if self.rotation < 0:
            raise InvalidParams("rotation speed must be nonnegative")
        if self.gamma is not None:
            if len(self.gamma) != self.dim:
                raise InvalidParams(f"need {self.dim} trap frequencies, got {len(self.gamma)}")
            if min(self.gamma) <= 0:
                raise InvalidParams("trap frequencies must be positive")
        if self.dim == 1 and self.rotation != 0:
            raise InvalidParams("rotation is meaningless in 1D (Lz = 0)")
        if self.dim == 2 and self.rotation > 0:
            if self.gamma is None:
                raise InvalidParams("rotating problems need a harmonic trap")
            if self.rotation >= min(self.gamma):
                raise InvalidParams(
                    f"rotation {self.rotation} must be below min(gamma) = {min(self.gamma)}"
                )

    def replace(self, **changes) -> "ModelParams":
        return _replace(self, **changes)


def evaluate_potential(params: ModelParams, grid: Grid, dtype=np.float64) -> np.ndarray:
    """Trapping potential at the collocation points (real, nonnegative)."""
    if params.dim != grid.dim:
        raise InvalidParams(f"params are {params.dim}D but grid is {grid.dim}D")
    return _potential(params, grid, np.dtype(dtype).str)


@lru_cache(maxsize=32)
def _potential(params, grid, dtype_str):
    dtype = np.dtype(dtype_str)
    V = np.zeros(grid.shape, dtype=dtype)
    if params.gamma is not None:
        for g, x in zip(params.gamma, grid.coords(dtype)):
            V = V + np.asarray(g, dtype=dtype) ** 2 * x ** 2 / 2
    V.setflags(write=False)
    return V


def _gaussian(grid, gamma, dtype):
    x1, x2 = grid.coords(dtype)
    g1, g2 = (np.asarray(g, dtype=dtype) for g in gamma)
    pi = np.arctan(np.asarray(1, dtype=dtype)) * 4
    return np.sqrt(g1 * g2 / pi) * np.exp(-(g1 * x1 ** 2 + g2 * x2 ** 2) / 2)


def initial_data(kind: str, grid: Grid, params: ModelParams, m: int = 1, dtype=np.float64) -> np.ndarray:
    """Initial guesses used in the numerical examples.

    Parameters
    ----------
    kind : {"sine", "vortex", "vortex_mix"}
        ``sine``: sin(pi (x - a)/L) on a 1D grid.
        ``vortex``: (x1 + i x2)^m times the trap Gaussian.
        ``vortex_mix``: ((x1 + i x2) + (x1 + i x2)^4)/2 times the trap Gaussian.
    m : int
        Winding number for ``vortex``.
    """
    cdt = complex_dtype(dtype)
    if kind == "sine":
        if grid.dim != 1:
            raise InvalidParams("sine initial data is one-dimensional")
        (x,) = grid.coords(dtype)
        a, L = grid.lower[0], grid.lengths[0]
        pi = np.arctan(np.asarray(1, dtype=dtype)) * 4
        return np.sin(pi * (x - np.asarray(a, dtype=dtype)) / np.asarray(L, dtype=dtype)).astype(cdt)
    if kind in ("vortex", "vortex_mix"):
        if grid.dim != 2:
            raise InvalidParams(f"{kind} initial data is two-dimensional")
        gamma = params.gamma if params.gamma is not None else (1.0, 1.0)
        x1, x2 = grid.coords(dtype)
        z = (x1 + 1j * x2).astype(cdt)
        if kind == "vortex":
            if m < 0:
                raise InvalidParams("winding number must be nonnegative")
            poly = z ** m
        else:
            poly = (z + z ** 4) / 2
        return np.broadcast_to(poly * _gaussian(grid, gamma, dtype), grid.shape).copy()
    raise InvalidParams(f"unknown initial data kind {kind!r}")


class Admissibility(NamedTuple):
    ok: bool
    lambda0: float


def check_admissibility(params: ModelParams, grid: Grid, margin: float = 1e-8,
                        strict: bool = False, **lambda0_kwargs) -> Admissibility:
    """Check omega < -lambda0 - margin.

    Returns an :class:`Admissibility`; when the check fails a warning is
    issued, or :class:`Inadmissible` is raised if ``strict``.
    """
    from .metrics import estimate_lambda0

    lam0 = estimate_lambda0(grid, params, **lambda0_kwargs)
    ok = params.omega < -lam0 - margin
    if not ok:
        if strict:
            raise Inadmissible(params.omega, lam0, margin)
        warnings.warn(str(Inadmissible(params.omega, lam0, margin)), RuntimeWarning, stacklevel=2)
    return Admissibility(bool(ok), float(lam0))
