"""Gauge-invariant power nonlinearities and their linearization.

g(z) = sum_k lam_k |z|^{alpha_k} z, extended from the odd real profile by
the phase symmetry g(e^{i theta} z) = e^{i theta} g(z).  Each power must lie
in the open admissibility interval (alpha_floor(N), 4/(N-2)); the lower
endpoint is alpha_floor(N) = (2 - N + sqrt(N^2 + 12 N + 4)) / (2 N).

The real-linearization along a strictly positive radial profile psi acts as

    Dg|_psi[u + iv] = g'(psi) u + i (g(psi)/psi) v

and the quadratic remainder is F2(psi, r) = g(psi + r) - g(psi) - Dg|_psi[r].
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidBoundStateError, InvalidExponentError
from .grid import GridSpec, RadialField, lp_norm

__all__ = [
    "alpha_bounds", "NonlinearitySpec", "dg_apply", "f2_apply",
    "f2_difference_envelope", "calibrate_f2_constant", "check_h2_prime",
    "SobolevReport",
]


def alpha_bounds(dim: int) -> tuple[float, float]:
    """Admissible open interval (alpha_floor, 4/(N-2)) for the powers."""
    if dim not in (4, 5):
        raise InvalidExponentError(f"unsupported dimension {dim}")
    floor = (2.0 - dim + math.sqrt(dim * dim + 12.0 * dim + 4.0)) / (2.0 * dim)
    return floor, 4.0 / (dim - 2)


@dataclass(frozen=True)
class NonlinearitySpec:
    """Finite sum of gauge-invariant powers; immutable after construction."""

    terms: tuple[tuple[float, float], ...]   # (lam_k, alpha_k)
    dim: int
    check_bounds: bool = True

    def __post_init__(self):
        terms = tuple((float(l), float(a)) for l, a in self.terms)
        object.__setattr__(self, "terms", terms)
        if self.check_bounds:
            lo, hi = alpha_bounds(self.dim)
            for _, a in terms:
                if not (lo < a < hi):
                    raise InvalidExponentError(
                        f"power {a} outside the admissible interval "
                        f"({lo:.6f}, {hi:.6f}) in dimension {self.dim}")

    @property
    def alpha1(self) -> float:
        return min(a for _, a in self.terms)

    @property
    def alpha2(self) -> float:
        return max(a for _, a in self.terms)

    @property
    def lams(self) -> np.ndarray:
        return np.array([l for l, _ in self.terms])

    @property
    def alphas(self) -> np.ndarray:
        return np.array([a for _, a in self.terms])

    def __call__(self, z):
        return self.apply(z)

    def apply(self, z):
        """g(z) = sum lam |z|^alpha z, elementwise on scalars or arrays."""
        z = np.asarray(z)
        mag = np.abs(z)
        out = np.zeros_like(z, dtype=np.complex128 if np.iscomplexobj(z) else np.float64)
        for lam, alpha in self.terms:
            out = out + lam * mag ** alpha * z
        return out if out.ndim else out[()]

    def slope(self, s):
        """g(s)/s = sum lam s^alpha for s >= 0 (the gauge-direction coefficient)."""
        s = np.asarray(s, dtype=np.float64)
        out = np.zeros_like(s)
        for lam, alpha in self.terms:
            out = out + lam * s ** alpha
        return out if out.ndim else out[()]

    def derivative(self, s):
        """g'(s) = sum lam (alpha + 1) |s|^alpha on the real line."""
        s = np.asarray(s, dtype=np.float64)
        out = np.zeros_like(s)
        for lam, alpha in self.terms:
            out = out + lam * (alpha + 1.0) * np.abs(s) ** alpha
        return out if out.ndim else out[()]

    def antiderivative(self, s):
        """G(s) = sum lam s^{alpha+2} / (alpha+2), the energy density of g."""
        s = np.asarray(s, dtype=np.float64)
        out = np.zeros_like(s)
        for lam, alpha in self.terms:
            out = out + lam * s ** (alpha + 2.0) / (alpha + 2.0)
        return out if out.ndim else out[()]

    def to_config(self):
        return [{"lambda": l, "alpha": a} for l, a in self.terms]

    @classmethod
    def from_config(cls, items, dim):
        def coef(it):
            if "lambda" in it:
                return it["lambda"]
            return it["lam"]
        return cls(tuple((coef(it), it["alpha"]) for it in items), dim)


def _require_positive_real(psi: RadialField):
    vals = psi.values
    if np.any(vals.imag != 0.0) or np.any(vals.real <= 0.0):
        raise InvalidBoundStateError(
            "linearization profile must be real and strictly positive")
    return vals.real


def dg_apply(spec: NonlinearitySpec, psi: RadialField, beta: RadialField,
             theta: float = 0.0) -> RadialField:
    """Real-linearization of g at the bound state e^{i theta} psi, psi > 0.

    For theta = 0: Dg|_psi[beta] = g'(psi) Re beta + i (g(psi)/psi) Im beta.
    A rotated state conjugates with the phase: e^{i theta} Dg|_psi[e^{-i theta} beta].
    """
    p = _require_positive_real(psi)
    b = beta.values if theta == 0.0 else np.exp(-1j * theta) * beta.values
    out = spec.derivative(p) * b.real + 1j * spec.slope(p) * b.imag
    if theta != 0.0:
        out = np.exp(1j * theta) * out
    return RadialField(psi.grid, out)


def f2_apply(spec: NonlinearitySpec, psi: RadialField, r: RadialField) -> RadialField:
    """Quadratic-and-higher remainder g(psi + r) - g(psi) - Dg|_psi[r]."""
    p = _require_positive_real(psi)
    rv = r.values
    full = spec.apply(p + rv) - spec.apply(p)
    lin = spec.derivative(p) * rv.real + 1j * spec.slope(p) * rv.imag
    return RadialField(psi.grid, full - lin)


def f2_difference_envelope(spec: NonlinearitySpec, psi: RadialField,
                           u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """Pointwise majorant A1 + A2 + A3 + A4 for |F2(psi,u1) - F2(psi,u2)|.

    A1 = (|u1|^a1 + |u2|^a1)|u1-u2|, A2 likewise with a2; A3/A4 carry the
    |psi|^{a-1}(|u1|+|u2|)|u1-u2| cross terms and enter only for a > 1.
    """
    p = np.abs(psi.values.real)
    d = np.abs(u1 - u2)
    m1, m2 = np.abs(u1), np.abs(u2)
    a1, a2 = spec.alpha1, spec.alpha2
    env = (m1 ** a1 + m2 ** a1) * d + (m1 ** a2 + m2 ** a2) * d
    if a2 > 1.0:
        env = env + p ** (a2 - 1.0) * (m1 + m2) * d
    if a1 > 1.0:
        env = env + p ** (a1 - 1.0) * (m1 + m2) * d
    return env


def calibrate_f2_constant(spec: NonlinearitySpec, psi: RadialField,
                          samples: int = 32, scale: float = 1.0,
                          seed: int = 7, margin: float = 1.05) -> float:
    """Empirical constant C for the F2 difference bound on a fixed sample.

    Returns margin times the max over random (u1, u2) of
    |F2(psi,u1) - F2(psi,u2)| / (A1 + ... + A4); the bound holds with some
    finite C, so C is measured once at the coarsest grid and then must keep
    holding on refinements.
    """
    rng = np.random.default_rng(seed)
    m = psi.grid.m
    worst = 0.0
    for _ in range(samples):
        u1 = scale * (rng.standard_normal(m) + 1j * rng.standard_normal(m))
        u2 = scale * (rng.standard_normal(m) + 1j * rng.standard_normal(m))
        f1 = f2_apply(spec, psi, RadialField(psi.grid, u1)).values
        f2 = f2_apply(spec, psi, RadialField(psi.grid, u2)).values
        env = f2_difference_envelope(spec, psi, u1, u2)
        ok = env > 1e-300
        ratio = np.abs(f1 - f2)[ok] / env[ok]
        if ratio.size:
            worst = max(worst, float(ratio.max()))
    return margin * worst


def _radial_derivative(grid: GridSpec, q: np.ndarray) -> np.ndarray:
    """Centered first difference; one-sided at the ends."""
    out = np.empty_like(q)
    out[1:-1] = (q[2:] - q[:-2]) / (2.0 * grid.h)
    out[0] = (q[1] - q[0]) / grid.h
    out[-1] = (q[-1] - q[-2]) / grid.h
    return out


@dataclass
class SobolevReport:
    """Discrete derivative norms of the two linearization coefficients."""

    norms_gprime: dict
    norms_slope: dict
    finite: bool

    def as_dict(self):
        return {"gprime": self.norms_gprime, "slope": self.norms_slope,
                "finite": self.finite}


def check_h2_prime(spec: NonlinearitySpec, psi_e: RadialField) -> SobolevReport:
    """L^2 norms of q, dq, Laplacian q, d^3 q for q = g'(psi_E) and g(psi_E)/psi_E.

    Finiteness (and stability under grid refinement, checked by callers) is
    the smoothness surrogate for the linearization coefficients of an
    exponentially decaying positive bound state.  All derivatives come from
    centered radial differences (the Laplacian as q'' + (N-1)/r q'), so no
    boundary condition is imposed on the coefficient profile.
    """
    p = _require_positive_real(psi_e)
    grid = psi_e.grid
    out = []
    for q in (spec.derivative(p), spec.slope(p)):
        d1 = _radial_derivative(grid, q)
        d2 = _radial_derivative(grid, d1)
        lap = d2 + (grid.dim - 1) / grid.r * d1
        d3 = _radial_derivative(grid, d2)
        norms = {
            "l2": lp_norm(RadialField(grid, q), 2),
            "grad_l2": lp_norm(RadialField(grid, d1), 2),
            "lap_l2": lp_norm(RadialField(grid, lap), 2),
            "d3_l2": lp_norm(RadialField(grid, d3), 2),
        }
        out.append(norms)
    finite = all(np.isfinite(v) for n in out for v in n.values())
    return SobolevReport(out[0], out[1], finite)
