"""The linear operator H = -Laplacian + V and its spectral data.

The potential is an attractive radial well (Gaussian or exponential), smooth
and decaying faster than any polynomial, tuned so that H carries exactly one
negative eigenvalue E0 with a strictly positive eigenvector psi0.  The
projection onto the continuous spectrum is then the rank-one deflation
P_c f = f - <psi0, f> psi0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal, solve_banded

from . import kernels
from .errors import GridMismatchError, SpectralConditionError
from .grid import (GridSpec, RadialField, apply_sym_tridiag, inner_product,
                   sym_laplacian_tridiag)

POTENTIAL_FORMS = ("gaussian_well", "exponential_well")


@dataclass(frozen=True)
class PotentialSpec:
    """Attractive radial well V(r) = -depth * profile(r / width)."""

    form: str
    depth: float
    width: float

    def __post_init__(self):
        if self.form not in POTENTIAL_FORMS:
            raise ValueError(f"unknown potential form {self.form!r}")
        if not (self.depth > 0 and self.width > 0):
            raise ValueError("potential depth and width must be positive")

    def on_grid(self, grid: GridSpec) -> np.ndarray:
        x = grid.r / self.width
        if self.form == "gaussian_well":
            return -self.depth * np.exp(-x * x)
        return -self.depth * np.exp(-x)

    def to_config(self):
        return {"form": self.form, "depth": self.depth, "width": self.width}

    @classmethod
    def from_config(cls, cfg):
        return cls(cfg["form"], cfg["depth"], cfg["width"])


def hamiltonian_tridiag(grid: GridSpec, v: np.ndarray):
    """Symmetrized H as (diag, offdiag); acts on phi = r^{(N-1)/2} f."""
    d, e = sym_laplacian_tridiag(grid)
    return d + v, e


class SpectralData:
    """Ground eigenpair of H plus the matrices needed to apply and evolve it."""

    def __init__(self, grid: GridSpec, potential: PotentialSpec,
                 e0: float, psi0: RadialField, residual: float,
                 second_eigenvalue: float):
        self.grid = grid
        self.potential = potential
        self.e0 = e0
        self.psi0 = psi0
        self.residual = residual
        self.second_eigenvalue = second_eigenvalue
        self.v = potential.on_grid(grid)
        self.ham_diag, self.ham_off = hamiltonian_tridiag(grid, self.v)
        self._cn_cache: dict[float, object] = {}

    def apply_h(self, f: RadialField) -> RadialField:
        phi = self.grid.sym * f.values
        return RadialField(self.grid, apply_sym_tridiag(self.ham_diag, self.ham_off, phi) / self.grid.sym)

    def cn_factor(self, dt: float):
        fac = self._cn_cache.get(dt)
        if fac is None:
            fac = kernels.make_cn_factor(self.ham_diag, self.ham_off, dt)
            self._cn_cache[dt] = fac
        return fac


def _inverse_iteration(diag, off, shift, start, iters=6):
    """Inverse power iteration on the shifted tridiagonal.

    With the shift strictly below the spectrum the shifted matrix is a
    Stieltjes matrix, so the iterates stay strictly positive and the
    eigenvector tail decays cleanly through the LU back-substitution.
    """
    m = diag.size
    ab = np.zeros((3, m))
    ab[0, 1:] = off
    ab[1, :] = diag - shift
    ab[2, :-1] = off
    x = start / np.linalg.norm(start)
    for _ in range(iters):
        x = solve_banded((1, 1), ab, x, check_finite=False)
        x /= np.linalg.norm(x)
    return x


def solve_ground_eigenpair(potential: PotentialSpec, grid: GridSpec,
                           residual_tol: float = 1e-8,
                           uniqueness_margin: float = 1e-6) -> SpectralData:
    """Ground state of H with a certificate that it is the only bound state.

    The two lowest eigenvalues come from bisection on the symmetrized
    tridiagonal; the eigenvector from shifted inverse iteration, normalized
    in the weighted L^2 and made positive.  Errors if there is no negative
    eigenvalue or more than one.
    """
    v = potential.on_grid(grid)
    diag, off = hamiltonian_tridiag(grid, v)
    evals = eigh_tridiagonal(diag, off, select="i", select_range=(0, 1),
                             eigvals_only=True)
    lam0, lam1 = float(evals[0]), float(evals[1])
    if lam0 >= 0:
        raise SpectralConditionError(
            f"potential supports no negative-energy bound state (lowest "
            f"eigenvalue {lam0:.3e}); deepen the well")
    if lam1 < -uniqueness_margin * abs(lam0):
        raise SpectralConditionError(
            f"potential supports more than one bound state "
            f"(second eigenvalue {lam1:.3e}); shallow the well")

    shift = lam0 - 1e-3 * abs(lam0)
    phi = _inverse_iteration(diag, off, shift, np.exp(-grid.r))
    # Rayleigh refinement of the eigenvalue on the converged vector
    hphi = apply_sym_tridiag(diag, off, phi)
    e0 = float(phi @ hphi)
    if phi[np.argmax(np.abs(phi))] < 0:
        phi = -phi
    # normalize in the weighted L^2: ||f||_2^2 = omega h |phi|^2
    phi /= np.sqrt(grid.omega * grid.h) * np.linalg.norm(phi)
    psi0 = RadialField(grid, phi / grid.sym)

    res_vec = apply_sym_tridiag(diag, off, phi) - e0 * phi
    residual = float(np.sqrt(grid.omega * grid.h) * np.linalg.norm(res_vec))
    if residual > residual_tol:
        raise SpectralConditionError(
            f"eigenpair residual {residual:.3e} above tolerance {residual_tol:.1e}")
    return SpectralData(grid, potential, e0, psi0, residual, lam1)


def project_continuous(spec: SpectralData, f: RadialField) -> RadialField:
    """P_c f = f - <psi0, f> psi0 (valid: exactly one bound state)."""
    if f.grid != spec.grid:
        raise GridMismatchError("field and spectral data on different grids")
    c = inner_product(spec.psi0, f)
    return RadialField(f.grid, f.values - c * spec.psi0.values)


def propagate_linear(spec: SpectralData, f: RadialField, dt: float,
                     steps: int) -> RadialField:
    """steps Crank-Nicolson steps of e^{-iHt}; unitary up to solver rounding."""
    if dt == 0:
        raise ValueError("dt must be nonzero")
    phi = spec.grid.sym * f.values
    phi = kernels.cn_steps(spec.cn_factor(dt), phi, steps)
    return RadialField(spec.grid, phi / spec.grid.sym)


def probe_linear_decay(spec: SpectralData, sigma: float, p: float,
                       samples: int, t_final: float, absorber,
                       dt: float = 0.02, sample_dt: float = 0.25,
                       seed: int = 0):
    """Dispersive decay of e^{-iHt}P_c on randomized localized data.

    Evolves `samples` localized fields (projected by P_c) inside the
    absorbing-layer window and records the weighted norm ||.||_{L^2_{-sigma}}
    and the L^p norm on r <= r_start.  Returns a dict of DecayTraces holding
    the sample-max of each norm, normalized by its initial source norm.
    """
    from .decay import DecayTrace
    from .evolution import sample_localized_fields
    from .grid import lp_norm, weighted_l2_norm

    if sigma <= spec.grid.dim / 2:
        raise ValueError("weighted probe needs sigma > N/2")
    absorber.check_window(spec.grid, t_final)

    stride = max(1, round(sample_dt / dt))
    nsamp = int(round(t_final / (stride * dt)))
    times = np.arange(1, nsamp + 1) * stride * dt
    mask = absorber.mask(spec.grid, dt)
    fac = spec.cn_factor(dt)
    r_cut = absorber.r_start

    ratios_w = np.zeros((samples, nsamp))
    ratios_p = np.zeros((samples, nsamp))
    fields = sample_localized_fields(spec.grid, samples, r_support=absorber.r_start / 4,
                                     seed=seed)
    for i, f in enumerate(fields):
        f = project_continuous(spec, f)
        src_w = weighted_l2_norm(f, sigma)
        src_pp = lp_norm(f, p / (p - 1.0))
        phi = spec.grid.sym * f.values
        for k in range(nsamp):
            phi, _ = kernels.strang_steps(fac, phi, spec.grid.sym,
                                          np.empty(0), np.empty(0), mask, stride)
            g = RadialField(spec.grid, phi / spec.grid.sym)
            ratios_w[i, k] = weighted_l2_norm(g, -sigma, r_cut=r_cut) / src_w
            ratios_p[i, k] = lp_norm(g, p, r_cut=r_cut) / src_pp
    return {
        "weighted": DecayTrace(f"linear weighted sigma={sigma}", times,
                               ratios_w.max(axis=0)),
        "lp": DecayTrace(f"linear L^{p}", times, ratios_p.max(axis=0)),
    }
