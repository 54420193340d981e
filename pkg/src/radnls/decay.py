"""Power-law exponent fitting and classification of radiation decay.

A decay trace is fit by value ~ amplitude (1+t)^{-n} [log(2+t)]^m in log
coordinates (m in {0,1}, selected by residual improvement).  The predicted
radiation rates split into three regimes set by

    s(N, a1, a2) = N ((a1 - 1)/2 + 1/(2 + a2))   vs 1:

above one the L^{p2} norm decays at the free rate N(1/2 - 1/p2); exactly one
adds a logarithm; below one the rate saturates at N a1/2 - 1.  Equivalently
(within the admissible power range): the free rate holds iff a1 >= 4/N or
p2 < 2N/(2 + N - N a1), with p_i = 2 + a_i.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FitWindowError, InvalidExponentError
from .nonlinearity import alpha_bounds

__all__ = [
    "DecayTrace", "ExponentFit", "CaseClassification", "classify",
    "fit_exponent", "verify_decay_bounds", "verify_exponent_curve",
]

EQUALITY_TOL = 1e-12


@dataclass
class DecayTrace:
    """A positive time series with an optional preferred fit window."""

    label: str
    times: np.ndarray
    values: np.ndarray
    fit_window: tuple | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.times.size != self.values.size:
            raise ValueError("times and values must have equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def windowed(self, lo=None, hi=None):
        if lo is None or hi is None:
            win = self.fit_window or (self.times[0], self.times[-1])
            lo = win[0] if lo is None else lo
            hi = win[1] if hi is None else hi
        sel = (self.times >= lo) & (self.times <= hi) & (self.values > 0)
        return self.times[sel], self.values[sel]


@dataclass
class ExponentFit:
    exponent: float            # n in (1+t)^{-n}
    log_power: int             # m in {0, 1}
    amplitude: float
    residual_rms: float
    window: tuple
    exponent_ci: float = 0.0   # ~95% half-width from the regression residuals
    model: str = "amp*(1+t)^-n*log(2+t)^m"

    def as_dict(self):
        return {"exponent": self.exponent, "log_power": self.log_power,
                "amplitude": self.amplitude, "residual_rms": self.residual_rms,
                "exponent_ci": self.exponent_ci, "window": list(self.window)}


def fit_exponent(trace: DecayTrace, allow_log: bool = False,
                 window: tuple | None = None,
                 min_points: int = 12, min_decades: float = 1.0,
                 log_improvement: float = 0.15) -> ExponentFit:
    """Least squares in log coordinates; the log(2+t) regressor is kept only
    when it improves the residual RMS by more than log_improvement."""
    lo, hi = window if window is not None else (None, None)
    t, v = trace.windowed(lo, hi)
    if t.size < min_points:
        raise FitWindowError(
            f"{trace.label}: {t.size} usable points < {min_points}")
    span = np.log10((1.0 + t[-1]) / (1.0 + t[0]))
    if span < min_decades:
        raise FitWindowError(
            f"{trace.label}: window spans {span:.2f} decades < {min_decades}")
    x = np.log1p(t)
    y = np.log(v)
    win = (float(t[0]), float(t[-1]))

    def solve(with_log):
        cols = [np.ones_like(x), -x]
        if with_log:
            cols.append(np.log(np.log(2.0 + t)))
        a_mat = np.vstack(cols).T
        coef, *_ = np.linalg.lstsq(a_mat, y, rcond=None)
        res = a_mat @ coef - y
        rms = float(np.sqrt(np.mean(res ** 2)))
        dof = max(x.size - a_mat.shape[1], 1)
        cov = np.linalg.inv(a_mat.T @ a_mat) * (res @ res / dof)
        ci = 2.0 * float(np.sqrt(cov[1, 1]))
        return coef, rms, ci

    coef0, rms0, ci0 = solve(False)
    fit = ExponentFit(float(coef0[1]), 0, float(np.exp(coef0[0])), rms0, win, ci0)
    if allow_log:
        coef1, rms1, ci1 = solve(True)
        if rms1 < (1.0 - log_improvement) * rms0 and coef1[2] > 0:
            fit = ExponentFit(float(coef1[1]), 1, float(np.exp(coef1[0])),
                              rms1, win, ci1)
    return fit


@dataclass
class CaseClassification:
    case_id: int
    dim: int
    alpha1: float
    alpha2: float
    p1: float
    p2: float
    p_threshold: float
    exponent_p1: float
    exponent_p2: float
    log_flag_p2: bool
    exponent_l2: float = 0.0

    def as_dict(self):
        return {k: getattr(self, k) for k in (
            "case_id", "dim", "alpha1", "alpha2", "p1", "p2", "p_threshold",
            "exponent_p1", "exponent_p2", "log_flag_p2", "exponent_l2")}


def classify(dim: int, alpha1: float, alpha2: float) -> CaseClassification:
    """Regime and predicted decay exponents for the pair (alpha1, alpha2)."""
    lo, hi = alpha_bounds(dim)
    if not (lo < alpha1 <= alpha2 < hi):
        raise InvalidExponentError(
            f"need {lo:.6f} < alpha1 <= alpha2 < {hi:.6f}, got "
            f"({alpha1}, {alpha2}) for N={dim}")
    p1, p2 = 2.0 + alpha1, 2.0 + alpha2
    p_thr = 2.0 * dim / (2.0 + dim - dim * alpha1)
    s_val = dim * ((alpha1 - 1.0) / 2.0 + 1.0 / p2)
    if s_val > 1.0 + EQUALITY_TOL:
        case = 1
    elif s_val >= 1.0 - EQUALITY_TOL:
        case = 2
    else:
        case = 3
    free_rate = dim * (0.5 - 1.0 / p2)
    if case == 1:
        exp_p2, logf = free_rate, False
    elif case == 2:
        exp_p2, logf = free_rate, True
    else:
        exp_p2, logf = dim * alpha1 / 2.0 - 1.0, False
    return CaseClassification(case, dim, alpha1, alpha2, p1, p2, p_thr,
                              dim * (0.5 - 1.0 / p1), exp_p2, logf)


def predicted_exponent_at(cls: CaseClassification, p: float) -> tuple[float, bool]:
    """Predicted ||r||_p rate at any 2 <= p < 2N/(N-2): free below the
    threshold, log-corrected at it, saturated above (when alpha1 < 4/N)."""
    dim = cls.dim
    if not (2.0 <= p < 2.0 * dim / (dim - 2)):
        raise InvalidExponentError(f"p={p} outside [2, {2*dim/(dim-2):.4g})")
    free = dim * (0.5 - 1.0 / p)
    if cls.alpha1 >= 4.0 / dim:
        return free, False
    if p < cls.p_threshold - EQUALITY_TOL:
        return free, False
    if p <= cls.p_threshold + EQUALITY_TOL:
        return free, True
    return dim * cls.alpha1 / 2.0 - 1.0, False


@dataclass
class ClauseReport:
    clause: str
    predicted: float
    measured: float
    tolerance: float
    passed: bool
    extra: dict = field(default_factory=dict)

    def as_dict(self):
        return {"clause": self.clause, "predicted": self.predicted,
                "measured": self.measured, "tolerance": self.tolerance,
                "pass": self.passed, **self.extra}


def verify_decay_bounds(trace, cls: CaseClassification,
                          window: tuple, tol_exponent: float = 0.3,
                          l2_growth_factor: float = 1.2) -> list[ClauseReport]:
    """The three decay clauses for one run's ModulationTrace.

    (a) ||r||_2 stays bounded; (b) the p1 rate matches N(1/2 - 1/p1);
    (c) the p2 rate matches the classified regime (the log flag at the
    threshold is reported informatively, not gated).
    """
    out = []
    l2 = trace.r_norms[2.0]
    base = max(float(np.max(l2[: max(1, l2.size // 10)])), 1e-300)
    growth = float(np.max(l2)) / base
    out.append(ClauseReport("l2_bounded", 1.0, growth, l2_growth_factor,
                            growth < l2_growth_factor))
    f1 = fit_exponent(DecayTrace("r_p1", trace.times, trace.r_norms[cls.p1]),
                      window=window)
    out.append(ClauseReport("p1_exponent", cls.exponent_p1, f1.exponent,
                            tol_exponent,
                            abs(f1.exponent - cls.exponent_p1) <= tol_exponent))
    f2 = fit_exponent(DecayTrace("r_p2", trace.times, trace.r_norms[cls.p2]),
                      allow_log=cls.log_flag_p2, window=window)
    out.append(ClauseReport(
        "p2_exponent", cls.exponent_p2, f2.exponent, tol_exponent,
        abs(f2.exponent - cls.exponent_p2) <= tol_exponent,
        extra={"log_flag_expected": cls.log_flag_p2,
               "log_flag_measured": bool(f2.log_power),
               "case_id": cls.case_id}))
    return out


def verify_exponent_curve(trace, cls: CaseClassification, p_list,
                          window: tuple, tol_exponent: float = 0.3,
                          flat_spread: float = 0.2) -> dict:
    """Exponent-vs-p curve against the predicted piecewise shape.

    Sub-threshold p must match the free rate within tol_exponent; the fitted
    exponents above the threshold must be flat (spread < flat_spread).
    """
    rows = []
    for p in p_list:
        fit = fit_exponent(DecayTrace(f"r_p{p:g}", trace.times,
                                      trace.r_norms[p]), window=window)
        pred, logf = predicted_exponent_at(cls, p)
        rows.append({"p": p, "measured": fit.exponent, "predicted": pred,
                     "log_flag": logf})
    below = [r for r in rows if r["p"] < cls.p_threshold - 1e-9]
    above = [r for r in rows if r["p"] > cls.p_threshold + 1e-9]
    ok_below = all(abs(r["measured"] - r["predicted"]) <= tol_exponent
                   for r in below)
    spread = (max(r["measured"] for r in above)
              - min(r["measured"] for r in above)) if len(above) >= 2 else 0.0
    return {"rows": rows, "below_ok": ok_below, "above_spread": spread,
            "above_flat": spread < flat_spread,
            "passed": ok_below and spread < flat_spread}
