# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled stepping kernels: Thomas-factorized Crank-Nicolson and the fused
Strang split step.  Mirrors the API of _stepkern_np; selected at import by
radnls.kernels when available."""
import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, log, sin, sqrt

cnp.import_array()

BACKEND = "compiled"

ctypedef double complex dcomplex


cdef class CnFactor:
    """Thomas factorization of A = 1 + i dt/2 H, H real symmetric tridiagonal."""
    cdef public double dt
    cdef double complex lam
    cdef double[::1] diag
    cdef double[::1] off
    cdef dcomplex[::1] cp      # eliminated upper-diagonal coefficients
    cdef dcomplex[::1] inv     # reciprocals of the pivots
    cdef dcomplex[::1] work

    def __init__(self, diag, off, double dt):
        self.dt = dt
        self.lam = 0.5j * dt
        self.diag = np.ascontiguousarray(diag, dtype=np.float64)
        self.off = np.ascontiguousarray(off, dtype=np.float64)
        cdef Py_ssize_t m = self.diag.shape[0]
        cdef cnp.ndarray[dcomplex, ndim=1] cp = np.empty(m - 1, dtype=np.complex128)
        cdef cnp.ndarray[dcomplex, ndim=1] inv = np.empty(m, dtype=np.complex128)
        cdef dcomplex denom, e
        cdef Py_ssize_t j
        denom = 1.0 + self.lam * self.diag[0]
        inv[0] = 1.0 / denom
        for j in range(m - 1):
            e = self.lam * self.off[j]
            cp[j] = e * inv[j]
            denom = 1.0 + self.lam * self.diag[j + 1] - e * cp[j]
            inv[j + 1] = 1.0 / denom
        self.cp = cp
        self.inv = inv
        self.work = np.empty(m, dtype=np.complex128)

    cdef void _step_inplace(self, dcomplex *phi) nogil:
        cdef Py_ssize_t m = self.diag.shape[0]
        cdef Py_ssize_t j
        cdef dcomplex lam = self.lam
        cdef dcomplex *b = &self.work[0]
        # b = (1 - i dt/2 H) phi
        b[0] = (1.0 - lam * self.diag[0]) * phi[0] - lam * self.off[0] * phi[1]
        for j in range(1, m - 1):
            b[j] = ((1.0 - lam * self.diag[j]) * phi[j]
                    - lam * self.off[j - 1] * phi[j - 1]
                    - lam * self.off[j] * phi[j + 1])
        b[m - 1] = ((1.0 - lam * self.diag[m - 1]) * phi[m - 1]
                    - lam * self.off[m - 2] * phi[m - 2])
        # forward elimination, back substitution
        phi[0] = b[0] * self.inv[0]
        for j in range(1, m):
            phi[j] = (b[j] - lam * self.off[j - 1] * phi[j - 1]) * self.inv[j]
        for j in range(m - 2, -1, -1):
            phi[j] = phi[j] - self.cp[j] * phi[j + 1]

    def step(self, phi):
        cdef cnp.ndarray[dcomplex, ndim=1] out = np.array(phi, dtype=np.complex128)
        self._step_inplace(<dcomplex *> out.data)
        return out


def make_cn_factor(diag, off, double dt):
    return CnFactor(diag, off, dt)


def cn_steps(CnFactor fac, phi, Py_ssize_t nsteps):
    cdef cnp.ndarray[dcomplex, ndim=1] out = np.array(phi, dtype=np.complex128)
    cdef dcomplex *p = <dcomplex *> out.data
    cdef Py_ssize_t k
    with nogil:
        for k in range(nsteps):
            fac._step_inplace(p)
    return out


cdef inline void _phase_rotate(dcomplex *phi, double *sym, double *lams,
                               double *alphas, Py_ssize_t nterms,
                               Py_ssize_t m, double dtheta) nogil:
    cdef Py_ssize_t j, k
    cdef double amp, rate, c, s, th
    cdef dcomplex z
    for j in range(m):
        z = phi[j]
        amp = sqrt(z.real * z.real + z.imag * z.imag) / sym[j]
        if amp == 0.0:
            continue
        rate = 0.0
        for k in range(nterms):
            rate += lams[k] * exp(alphas[k] * log(amp))
        th = -dtheta * rate
        # exp(i th) * z
        c = cos(th)
        s = sin(th)
        phi[j] = (c * z.real - s * z.imag) + 1j * (s * z.real + c * z.imag)


def omega_chunk(CnFactor fac, phi, lin, g_u, g_ub_base, theta,
                phi0, hp_sym, ho_sym, double wq, mask,
                double dt, int order, bint couple):
    """Advance a batch of linearized-flow samples together with their free
    comparisons.

    phi, lin: (m, n) column batches of the coupled and free flows, updated in
    place.  One step per entry of theta (the coefficient phase 2*theta_k is
    applied to g_ub_base; the Dh fields hp_sym/ho_sym are already
    symmetrized).  The coupling substep exponentiates the bounded operator by
    an `order`-term Taylor series, machine-exact at these step sizes.
    """
    cdef cnp.ndarray[dcomplex, ndim=2] phi_ = np.ascontiguousarray(phi)
    cdef cnp.ndarray[dcomplex, ndim=2] lin_ = np.ascontiguousarray(lin)
    cdef cnp.ndarray[double, ndim=1] gu_ = np.ascontiguousarray(g_u, dtype=np.float64)
    cdef cnp.ndarray[dcomplex, ndim=1] gub_ = np.ascontiguousarray(g_ub_base, dtype=np.complex128)
    cdef cnp.ndarray[double, ndim=1] th_ = np.ascontiguousarray(theta, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] p0_ = np.ascontiguousarray(phi0, dtype=np.float64)
    cdef cnp.ndarray[dcomplex, ndim=1] hp_ = np.ascontiguousarray(hp_sym, dtype=np.complex128)
    cdef cnp.ndarray[dcomplex, ndim=1] ho_ = np.ascontiguousarray(ho_sym, dtype=np.complex128)
    cdef bint have_mask = mask is not None
    cdef cnp.ndarray[double, ndim=1] mk
    if have_mask:
        mk = np.ascontiguousarray(mask, dtype=np.float64)
    else:
        mk = np.empty(0, dtype=np.float64)
    cdef Py_ssize_t n = phi_.shape[0]      # samples are contiguous rows
    cdef Py_ssize_t m = phi_.shape[1]
    cdef Py_ssize_t nsteps = th_.shape[0]
    cdef cnp.ndarray[dcomplex, ndim=1] acc_ = np.empty(m, dtype=np.complex128)
    cdef cnp.ndarray[dcomplex, ndim=1] term_ = np.empty(m, dtype=np.complex128)
    cdef cnp.ndarray[dcomplex, ndim=1] dg_ = np.empty(m, dtype=np.complex128)
    cdef cnp.ndarray[dcomplex, ndim=1] gubk_ = np.empty(m, dtype=np.complex128)
    cdef dcomplex *acc = <dcomplex *> acc_.data
    cdef dcomplex *term = <dcomplex *> term_.data
    cdef dcomplex *dg = <dcomplex *> dg_.data
    cdef dcomplex *gubk = <dcomplex *> gubk_.data
    cdef dcomplex *row
    cdef dcomplex *pp = <dcomplex *> phi_.data
    cdef dcomplex *pl = <dcomplex *> lin_.data
    cdef double *gu = <double *> gu_.data
    cdef dcomplex *gub0 = <dcomplex *> gub_.data
    cdef double *p0 = <double *> p0_.data
    cdef dcomplex *hp = <dcomplex *> hp_.data
    cdef dcomplex *ho = <dcomplex *> ho_.data
    cdef double *pm = <double *> mk.data
    cdef double *th = <double *> th_.data
    cdef Py_ssize_t k, j, c
    cdef dcomplex tau = -0.5j * dt
    cdef dcomplex eitheta, e2i
    cdef double thk
    cdef bint fresh_phase

    with nogil:
        for k in range(nsteps):
            thk = th[k]
            fresh_phase = k == 0 or thk != th[k - 1]
            if couple and fresh_phase:
                eitheta = cos(thk) + 1j * sin(thk)
                e2i = cos(2 * thk) + 1j * sin(2 * thk)
                for j in range(m):
                    gubk[j] = gub0[j] * e2i
            for c in range(n):
                row = pp + c * m
                if couple:
                    _expb_col(row, acc, term, dg, gu, gubk, p0, hp, ho, wq,
                              m, tau, order, eitheta)
                fac._step_inplace(row)
                if couple:
                    _expb_col(row, acc, term, dg, gu, gubk, p0, hp, ho, wq,
                              m, tau, order, eitheta)
                if have_mask:
                    for j in range(m):
                        row[j] = row[j] * pm[j]
                row = pl + c * m
                fac._step_inplace(row)
                if have_mask:
                    for j in range(m):
                        row[j] = row[j] * pm[j]
    return phi_, lin_


cdef inline void _expb_col(dcomplex *col, dcomplex *acc, dcomplex *term,
                           dcomplex *dg, double *gu, dcomplex *gub,
                           double *p0, dcomplex *hp, dcomplex *ho, double wq,
                           Py_ssize_t m, dcomplex tau, int order,
                           dcomplex eitheta) nogil:
    """col <- exp(tau B) col with B z = P_c Dg[z] + i Dh[i <psi0, Dg z>]."""
    cdef Py_ssize_t j
    cdef int it
    cdef dcomplex br, dloc, c1, c2, scale
    for j in range(m):
        acc[j] = col[j]
        term[j] = col[j]
    for it in range(1, order + 1):
        scale = tau / it
        # dg = Dg term; bracket = wq <phi0, dg>
        br = 0
        for j in range(m):
            dg[j] = gu[j] * term[j] + gub[j] * (term[j].real - 1j * term[j].imag)
            br = br + p0[j] * dg[j]
        br = br * wq
        # Dh contribution scalars: i * e^{i theta} * Re(e^{-i theta} i br)
        # and -e^{i theta} * Im(e^{-i theta} i br)
        dloc = (eitheta.real - 1j * eitheta.imag) * (1j * br)
        c1 = 1j * eitheta * dloc.real
        c2 = -eitheta * dloc.imag
        for j in range(m):
            term[j] = scale * (dg[j] - br * p0[j] + c1 * hp[j] + c2 * ho[j])
            acc[j] = acc[j] + term[j]
    for j in range(m):
        col[j] = acc[j]


def strang_steps(CnFactor fac, phi, sym, lams, alphas, mask, Py_ssize_t nsteps):
    cdef cnp.ndarray[dcomplex, ndim=1] out = np.array(phi, dtype=np.complex128)
    cdef cnp.ndarray[double, ndim=1] sy = np.ascontiguousarray(sym, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] la = np.ascontiguousarray(lams, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] al = np.ascontiguousarray(alphas, dtype=np.float64)
    cdef bint have_mask = mask is not None
    cdef cnp.ndarray[double, ndim=1] mk
    if have_mask:
        mk = np.ascontiguousarray(mask, dtype=np.float64)
    else:
        mk = np.empty(0, dtype=np.float64)
    cdef Py_ssize_t m = out.shape[0]
    cdef Py_ssize_t nterms = la.shape[0]
    cdef double half = 0.5 * fac.dt
    cdef dcomplex *p = <dcomplex *> out.data
    cdef double *ps = <double *> sy.data
    cdef double *pl = <double *> la.data
    cdef double *pa = <double *> al.data
    cdef double *pm = <double *> mk.data
    cdef Py_ssize_t k, j
    cdef double amp, mx = 0.0
    with nogil:
        for k in range(nsteps):
            if nterms > 0:
                _phase_rotate(p, ps, pl, pa, nterms, m, half)
            fac._step_inplace(p)
            if nterms > 0:
                _phase_rotate(p, ps, pl, pa, nterms, m, half)
            if have_mask:
                for j in range(m):
                    p[j] = p[j] * pm[j]
        for j in range(m):
            amp = sqrt(p[j].real * p[j].real + p[j].imag * p[j].imag) / ps[j]
            if amp > mx:
                mx = amp
    return out, mx
