"""Radial grids and norms for rotationally symmetric fields on R^N, N = 4, 5.

A field f(r) is sampled at cell-centered nodes r_j = (j + 1/2) h with
h = r_max / m.  The cell-centered layout keeps the (N-1)/r term of the
radial Laplacian finite without special-casing the origin, and makes the
flux through r = 0 vanish identically in the divergence-form stencil.

Integrals use the measure omega_{N-1} r^{N-1} dr with
omega_{N-1} = 2 pi^{N/2} / Gamma(N/2) (2 pi^2 for N = 4, 8 pi^2 / 3 for N = 5).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatchError, InvalidExponentError, NumericsError

SUPPORTED_DIMS = (4, 5)


def angular_factor(dim: int) -> float:
    """Surface measure of the unit sphere in R^dim."""
    return 2.0 * math.pi ** (dim / 2.0) / math.gamma(dim / 2.0)


class GridSpec:
    """Cell-centered radial grid on [0, r_max] in dimension dim."""

    def __init__(self, dim: int, r_max: float, m: int):
        if dim not in SUPPORTED_DIMS:
            raise ValueError(f"dim must be one of {SUPPORTED_DIMS}, got {dim}")
        if m < 2:
            raise ValueError("need at least 2 grid points")
        if not r_max > 0:
            raise ValueError("r_max must be positive")
        self.dim = int(dim)
        self.r_max = float(r_max)
        self.m = int(m)
        self.h = self.r_max / self.m
        self.r = (np.arange(self.m) + 0.5) * self.h
        self.omega = angular_factor(self.dim)
        # rho = r^{N-1}: radial density; w: quadrature weights; s = sqrt(rho):
        # symmetrization factor mapping the weighted L^2 to a plain l^2.
        self.rho = self.r ** (self.dim - 1)
        self.weights = self.omega * self.rho * self.h
        self.sym = np.sqrt(self.rho)
        # interface radii r_{j+1/2} = (j+1) h, used by the flux stencil
        self.r_half = (np.arange(self.m) + 1.0) * self.h

    def __eq__(self, other):
        return (isinstance(other, GridSpec)
                and self.dim == other.dim
                and self.m == other.m
                and self.r_max == other.r_max)

    def __hash__(self):
        return hash((self.dim, self.r_max, self.m))

    def __repr__(self):
        return f"GridSpec(dim={self.dim}, r_max={self.r_max}, m={self.m})"

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.dim, self.r_max, self.m * factor)

    def bracket(self, sigma: float) -> np.ndarray:
        """<r>^sigma = (1 + r^2)^{sigma/2} on the nodes."""
        return (1.0 + self.r ** 2) ** (sigma / 2.0)


@dataclass
class RadialField:
    """Samples of a radially symmetric function on a GridSpec."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != (self.grid.m,):
            raise ValueError(
                f"values shape {vals.shape} does not match grid m={self.grid.m}")
        if not np.all(np.isfinite(vals.view(np.float64))):
            raise NumericsError("field contains non-finite entries")
        self.values = vals

    def copy(self) -> "RadialField":
        return RadialField(self.grid, self.values.copy())

    @classmethod
    def zeros(cls, grid: GridSpec) -> "RadialField":
        return cls(grid, np.zeros(grid.m, dtype=np.complex128))

    @classmethod
    def from_function(cls, grid: GridSpec, fn) -> "RadialField":
        return cls(grid, np.asarray(fn(grid.r), dtype=np.complex128))

    def is_real(self, tol: float = 0.0) -> bool:
        return np.all(np.abs(self.values.imag) <= tol)


def _window(grid: GridSpec, r_cut):
    if r_cut is None:
        return slice(None)
    return grid.r <= r_cut


def lp_norm(f: RadialField, p: float, r_cut: float | None = None) -> float:
    """L^p norm over R^dim; p = inf gives the sup norm.

    With r_cut set, the quadrature is restricted to r <= r_cut (the
    reliable window inside an absorbing layer).
    """
    if p != np.inf and p < 1:
        raise InvalidExponentError(f"p must satisfy p >= 1, got {p}")
    sel = _window(f.grid, r_cut)
    a = np.abs(f.values[sel])
    if p == np.inf:
        return float(a.max(initial=0.0))
    w = f.grid.weights[sel]
    return float((w @ a ** p) ** (1.0 / p))


def weighted_l2_norm(f: RadialField, sigma: float, r_cut: float | None = None) -> float:
    """|| <r>^sigma f ||_2."""
    sel = _window(f.grid, r_cut)
    a = np.abs(f.values[sel]) * f.grid.bracket(sigma)[sel]
    return float(np.sqrt(f.grid.weights[sel] @ a ** 2))


def inner_product(f: RadialField, g: RadialField) -> complex:
    """<f, g> = integral of conj(f) g, conjugate-linear in the first slot."""
    if f.grid != g.grid:
        raise GridMismatchError("inner product of fields on different grids")
    return complex(np.sum(f.grid.weights * np.conj(f.values) * g.values))


def flux_coefficients(grid: GridSpec) -> np.ndarray:
    """c_j = r_{j+1/2}^{N-1} / h^2, the face fluxes of the divergence stencil."""
    return grid.r_half ** (grid.dim - 1) / grid.h ** 2


def sym_laplacian_tridiag(grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Symmetrized -Laplacian as a real symmetric tridiagonal (diag, offdiag).

    Acting on phi = s f with s = r^{(N-1)/2}, so that self-adjointness in the
    weighted inner product becomes exact symmetry of the matrix.  Zero flux
    through r = 0 (automatic: r_{ -1/2 } = 0) and Dirichlet at r_max.
    """
    c = flux_coefficients(grid)
    cm1 = np.concatenate(([0.0], c[:-1]))          # c_{j-1}
    diag = (c + cm1) / grid.rho
    off = -c[:-1] / (grid.sym[:-1] * grid.sym[1:])
    return diag, off


def apply_laplacian(f: RadialField) -> RadialField:
    """Divergence-form radial Laplacian with Dirichlet boundary at r_max."""
    if f.grid.m < 3:
        raise ValueError("apply_laplacian needs at least 3 points")
    g = f.grid
    diag, off = sym_laplacian_tridiag(g)
    phi = g.sym * f.values
    out = diag * phi
    out[:-1] += off * phi[1:]
    out[1:] += off * phi[:-1]
    return RadialField(g, -out / g.sym)


def apply_sym_tridiag(diag: np.ndarray, off: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Matrix-vector product for a real symmetric tridiagonal."""
    out = diag * phi
    out[:-1] += off * phi[1:]
    out[1:] += off * phi[:-1]
    return out
