"""The bound-state branch bifurcating from the linear ground state.

For each amplitude a >= 0 the profile psi and energy E solve

    (-Laplacian + V) psi + g(psi) = E psi,    <psi0, psi> = a,

found by Newton on the bordered system with the previous node as predictor
(secant extrapolation once two nodes exist).  The branch point at a = 0 is
the exact trivial solution (0, E0).  Complex amplitudes are recovered by the
gauge action: the stored branch is the real section, and

    psi(a) = e^{i theta} psi(|a|),  E = E(|a|),  h(e^{i theta} a) = e^{i theta} h(a)

hold by construction.  h(a) = psi(a) - a psi0 is orthogonal to psi0 at every
node (the bordered constraint enforces it).
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded

from .errors import (BranchRangeError, ContinuationError, InvalidExponentError,
                     PositivityError)
from .grid import GridSpec, RadialField, apply_sym_tridiag
from .hamiltonian import SpectralData, hamiltonian_tridiag
from .nonlinearity import NonlinearitySpec

__all__ = ["BranchPoint", "BoundStateBranch", "continue_branch", "DhResult"]


@dataclass
class BranchPoint:
    a: float
    e: float
    psi: RadialField
    h: RadialField
    newton_residual: float


@dataclass
class DhResult:
    """Value of the branch derivative Dh|_a[delta], with degeneracy flags."""

    field: RadialField
    degenerate: bool = False   # a = 0: the map is the zero limit
    one_sided: bool = False    # a at the branch endpoint


class BoundStateBranch:
    """Continuation table a -> (E, psi) with cubic interpolation between nodes."""

    def __init__(self, spectral: SpectralData, g: NonlinearitySpec,
                 a_nodes: np.ndarray, e_nodes: np.ndarray,
                 psi_nodes: np.ndarray, residuals: np.ndarray,
                 newton_tol: float = 1e-11):
        self.spectral = spectral
        self.g = g
        self.newton_tol = newton_tol
        self.grid = spectral.grid
        self.a_nodes = np.asarray(a_nodes, dtype=np.float64)
        self.e_nodes = np.asarray(e_nodes, dtype=np.float64)
        self.psi_nodes = np.asarray(psi_nodes, dtype=np.float64)  # (nodes, m)
        self.residuals = np.asarray(residuals, dtype=np.float64)
        self._e_spline = CubicSpline(self.a_nodes, self.e_nodes)
        self._psi_spline = CubicSpline(self.a_nodes, self.psi_nodes, axis=0)
        self._psi_deriv = self._psi_spline.derivative()

    @property
    def extent(self) -> float:
        return float(self.a_nodes[-1])

    def __len__(self):
        return self.a_nodes.size

    def point(self, i: int) -> BranchPoint:
        psi = RadialField(self.grid, self.psi_nodes[i])
        h = RadialField(self.grid, self.psi_nodes[i]
                        - self.a_nodes[i] * self.spectral.psi0.values.real)
        return BranchPoint(float(self.a_nodes[i]), float(self.e_nodes[i]),
                           psi, h, float(self.residuals[i]))

    def _check_range(self, x: float):
        if x > self.extent * (1 + 1e-12) or x < 0:
            raise BranchRangeError(
                f"|a| = {x:.6g} outside the branch extent [0, {self.extent:.6g}]")

    def eval(self, a: complex) -> tuple[RadialField, float]:
        """(psi, E) at complex amplitude a; gauge-equivariant by construction."""
        x = abs(a)
        self._check_range(x)
        theta = np.angle(a) if x > 0 else 0.0
        psi_real = self._psi_spline(min(x, self.extent))
        e_val = float(self._e_spline(min(x, self.extent)))
        vals = psi_real.astype(np.complex128)
        if theta != 0.0:
            vals = np.exp(1j * theta) * vals
        return RadialField(self.grid, vals), e_val

    def h_values(self, x: float) -> np.ndarray:
        """h(x) = psi(x) - x psi0 on the real section."""
        return self._psi_spline(x) - x * self.spectral.psi0.values.real

    def dh_apply(self, a: complex, delta: complex) -> DhResult:
        """Real-linear derivative of a -> h(a) at a, applied to delta.

        Radial direction from the branch interpolant's derivative; rotational
        direction exactly i h(a) / |a| per the gauge equivariance; combined
        after factoring out the phase of a.
        """
        x = abs(a)
        self._check_range(x)
        if x == 0.0:
            return DhResult(RadialField.zeros(self.grid), degenerate=True)
        theta = np.angle(a)
        d_loc = np.exp(-1j * theta) * complex(delta)
        psi0 = self.spectral.psi0.values.real
        hprime = self._psi_deriv(x) - psi0            # d/da of h on the real section
        hval = self._psi_spline(x) - x * psi0
        vals = d_loc.real * hprime + 1j * d_loc.imag * (hval / x)
        if theta != 0.0:
            vals = np.exp(1j * theta) * vals
        one_sided = x >= self.a_nodes[-1] or x <= self.a_nodes[0]
        return DhResult(RadialField(self.grid, vals), one_sided=bool(one_sided))

    def pde_residual(self, psi: RadialField, e_val: float) -> float:
        """|| (-Lap + V) psi + g(psi) - E psi ||_2 for any (psi, E)."""
        grid = self.grid
        phi = grid.sym * psi.values
        out = apply_sym_tridiag(self.spectral.ham_diag, self.spectral.ham_off, phi)
        out = out + grid.sym * self.g.apply(psi.values) - e_val * phi
        return float(np.sqrt(grid.omega * grid.h) * np.linalg.norm(out))

    def check_exponential_decay(self, i: int, rate: float,
                                window_fraction: float = 0.5) -> dict:
        """Decay constants of node i at envelope rate: sup e^{sqrt(rate) r}|psi|.

        rate must lie in (0, -E).  Also reports the gradient analogue and the
        lower-bound constant at the steeper rate 2|E| (profiles on the branch
        are pinched between two exponentials).
        """
        pt = self.point(i)
        if not (0 < rate < -pt.e):
            raise InvalidExponentError(
                f"decay rate must lie in (0, {-pt.e:.6g}), got {rate}")
        grid = self.grid
        sel = grid.r <= window_fraction * grid.r_max
        r = grid.r[sel]
        psi = np.abs(pt.psi.values.real[sel])
        peak = psi.max()
        c_upper = float((np.exp(np.sqrt(rate) * r) * psi).max() / peak)
        dpsi = np.abs(np.gradient(pt.psi.values.real, grid.h)[sel])
        c_grad = float((np.exp(np.sqrt(rate) * r) * dpsi).max() / max(dpsi.max(), 1e-300))
        rate_low = 2.0 * (-pt.e)
        c_lower = float((np.exp(np.sqrt(rate_low) * r) * psi).min())
        ok = bool(np.isfinite(c_upper) and np.isfinite(c_grad) and c_lower > 0)
        return {"c_upper": c_upper, "c_grad": c_grad, "c_lower": c_lower,
                "rate": rate, "rate_lower": rate_low, "ok": ok}

    def check_smallness(self, i: int, sigma: float) -> float:
        """sup <r>^{4 sigma} psi at node i (the localized-smallness budget)."""
        pt = self.point(i)
        w = self.grid.bracket(4.0 * sigma)
        return float(np.max(w * np.abs(pt.psi.values.real)))

    def save(self, path):
        meta = {
            "version": 1,
            "grid": {"dim": self.grid.dim, "r_max": self.grid.r_max, "m": self.grid.m},
            "potential": self.spectral.potential.to_config(),
            "nonlinearity": self.g.to_config(),
            "e0": self.spectral.e0,
            "newton_tol": self.newton_tol,
        }
        np.savez(path, meta=json.dumps(meta, sort_keys=True),
                 a=self.a_nodes, e=self.e_nodes, psi=self.psi_nodes,
                 residuals=self.residuals,
                 psi0=self.spectral.psi0.values.real,
                 spectral_e0=self.spectral.e0,
                 spectral_residual=self.spectral.residual,
                 spectral_second=self.spectral.second_eigenvalue)

    @classmethod
    def load(cls, path, orth_tol: float = 1e-8):
        from .hamiltonian import PotentialSpec

        with np.load(path) as z:
            meta = json.loads(str(z["meta"]))
            gmeta = meta["grid"]
            grid = GridSpec(int(gmeta["dim"]), float(gmeta["r_max"]), int(gmeta["m"]))
            pot = PotentialSpec.from_config(meta["potential"])
            g = NonlinearitySpec.from_config(meta["nonlinearity"], grid.dim)
            psi0 = RadialField(grid, z["psi0"])
            spectral = SpectralData(grid, pot, float(z["spectral_e0"]), psi0,
                                    float(z["spectral_residual"]),
                                    float(z["spectral_second"]))
            branch = cls(spectral, g, z["a"], z["e"], z["psi"], z["residuals"],
                         newton_tol=float(meta.get("newton_tol", 1e-11)))
        branch.validate(orth_tol)
        return branch

    def validate(self, orth_tol: float = 1e-8):
        """Recheck the stored-node invariants (run on load)."""
        w = self.grid.weights
        psi0 = self.spectral.psi0.values.real
        for i in range(len(self)):
            proj = float(w @ (psi0 * self.psi_nodes[i]))
            if abs(proj - self.a_nodes[i]) > orth_tol:
                raise ContinuationError(
                    f"node {i}: <psi0, psi> = {proj!r} != a = {self.a_nodes[i]!r}")
            if self.a_nodes[i] > 0 and self.psi_nodes[i].min() <= 0:
                raise PositivityError(f"node {i}: stored profile not positive")


def _newton_node(spectral: SpectralData, g: NonlinearitySpec, a: float,
                 phi0_start: np.ndarray, e_start: float, tol: float,
                 max_iter: int):
    """Solve the bordered system for one node, in the symmetrized variable."""
    grid = spectral.grid
    scale = np.sqrt(grid.omega * grid.h)
    diag, off = spectral.ham_diag, spectral.ham_off
    c0 = grid.omega * grid.h * (grid.sym * spectral.psi0.values.real)  # constraint row
    phi, e_val = phi0_start.copy(), e_start

    for _ in range(max_iter):
        f = phi / grid.sym
        resid = apply_sym_tridiag(diag, off, phi) + grid.sym * g.apply(f) - e_val * phi
        rc = float(c0 @ phi) - a
        rnorm = scale * np.linalg.norm(resid)
        if rnorm < tol and abs(rc) < tol:
            return phi, e_val, rnorm
        jac_diag = diag + g.derivative(f) - e_val
        ab = np.zeros((3, grid.m))
        ab[0, 1:] = off
        ab[1, :] = jac_diag
        ab[2, :-1] = off
        y = solve_banded((1, 1), ab, np.column_stack([-resid, phi]),
                         check_finite=False)
        y1, y2 = y[:, 0], y[:, 1]
        denom = float(c0 @ y2)
        de = (-rc - float(c0 @ y1)) / denom
        phi = phi + y1 + de * y2
        e_val = e_val + de
    f = phi / grid.sym
    resid = apply_sym_tridiag(diag, off, phi) + grid.sym * g.apply(f) - e_val * phi
    rnorm = scale * np.linalg.norm(resid)
    if rnorm < tol and abs(float(c0 @ phi) - a) < tol:
        return phi, e_val, rnorm
    return None


def continue_branch(spectral: SpectralData, g: NonlinearitySpec, a_max: float,
                    steps: int, tol: float = 1e-11,
                    max_iter: int = 40) -> BoundStateBranch:
    """March the branch over the uniform amplitude grid [0, a_max].

    Predictor: previous node (secant extrapolation once two nodes exist).
    Raises ContinuationError (with the last converged amplitude) if Newton
    stalls, and PositivityError if a profile changes sign.
    """
    if steps < 2:
        raise ValueError("need at least 2 continuation steps")
    if not a_max > 0:
        raise ValueError("a_max must be positive")
    grid = spectral.grid
    phi0 = grid.sym * spectral.psi0.values.real
    a_nodes = np.linspace(0.0, a_max, steps + 1)
    e_nodes = np.empty(steps + 1)
    psi_nodes = np.zeros((steps + 1, grid.m))
    residuals = np.zeros(steps + 1)
    e_nodes[0] = spectral.e0

    prev_phi = np.zeros(grid.m)
    prev_e = spectral.e0
    prev2 = None
    for i in range(1, steps + 1):
        a = a_nodes[i]
        if prev2 is None:
            start_phi = prev_phi + (a - a_nodes[i - 1]) * phi0
            start_e = prev_e
        else:
            start_phi = 2 * prev_phi - prev2[0]
            start_e = 2 * prev_e - prev2[1]
        sol = _newton_node(spectral, g, a, start_phi, start_e, tol, max_iter)
        if sol is None:
            raise ContinuationError(
                f"Newton stalled at a = {a:.6g}", last_good_a=a_nodes[i - 1])
        phi, e_val, rnorm = sol
        f = phi / grid.sym
        if np.any(f <= 0):
            raise PositivityError(f"profile changed sign at a = {a:.6g}")
        psi_nodes[i] = f
        e_nodes[i] = e_val
        residuals[i] = rnorm
        prev2 = (prev_phi, prev_e)
        prev_phi, prev_e = phi, e_val
    return BoundStateBranch(spectral, g, a_nodes, e_nodes, psi_nodes, residuals,
                            newton_tol=tol)
