"""Mollified window integrals and their mean squares.

For one L-function with mollifier eta the window statistics over [t, t+H] are

    I(t,H) = int Lambda(1/2+iu) |eta(1/2+iu)|^2 exp((pi/2 - 1/T) u) du
    M(t,H) = int L(1/2+iu) eta^2(1/2+iu) du - H
    J(t,H) = int |Lambda(1/2+iu)| |eta(1/2+iu)|^2 exp((pi/2 - 1/T) u) du,

computed with the exact weight exp((pi/2 - 1/T)u) = e^{pi u/2} e^{-u/T}, which
folds into the scaled evaluator as G(u) e^{-u/T}.  Mean squares over t in
[T, 2T] are stratified Monte Carlo estimates reported as dimensionless ratios
(rho5, rho6, rho7) against the H/log T scale; the strip moments
J_sigma = (1/T) int |L eta^2 - 1|^2 at fixed sigma probe the mollified decay
away from the critical line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .coefficients import MollifierTable
from .lfunc_eval import EvalContext, mollifier_eval_batch


@dataclass
class MomentConfig:
    """Knobs for the moment suite; H defaults to A*m/log T and X to T^exponent.

    The mollifier cutoff default is floored at 3 (the smoothing needs
    sqrt(X) > 1); X = 1 may be forced explicitly for the eta == 1 check.
    """

    T: float
    a_const: float = 8.0
    m: int = 1
    H: float | None = None
    x_cutoff: float | None = None
    x_exponent: float = 0.125
    samples: int = 64
    seed: int = 0
    gl_order: int = 8

    def __post_init__(self):
        if self.T <= math.e:
            raise ValueError("T too small")
        if self.samples < 16:
            raise ValueError("need samples >= 16")
        if self.resolved_h() <= 0:
            raise ValueError("window H must be positive")
        x = self.resolved_x()
        if x != 1.0 and x < 3.0:
            raise ValueError(f"mollifier cutoff X={x} must be 1 (degenerate) or >= 3")

    def resolved_h(self) -> float:
        return self.H if self.H is not None else self.a_const * self.m / math.log(self.T)

    def resolved_x(self) -> float:
        if self.x_cutoff is not None:
            return float(self.x_cutoff)
        return max(3.0, self.T ** self.x_exponent)


def _gl_grid(a: float, b: float, n_panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _panel_count(H: float, T: float) -> int:
    # panel width <= 1/(4 log T); integrands oscillate on the 1/log T scale
    return max(2, int(math.ceil(H * 4.0 * math.log(T))))


@dataclass
class WindowIntegrals:
    i_value: float
    i_err: float
    m_value: float
    m_err: float
    m_imag_residual: float
    j_value: float
    j_err: float


def window_integrals(ctx: EvalContext, mtable: MollifierTable, t: float,
                     H: float, T: float, gl_order: int = 8) -> WindowIntegrals:
    """I, M, J over [t, t+H] with Richardson-style error estimates.

    Error estimates are |fine - coarse| between the target panel count and
    half as many panels; the three integrals share evaluation nodes.
    """
    if H < 0:
        raise ValueError("H must be >= 0")
    if H == 0.0:
        return WindowIntegrals(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    n_fine = _panel_count(H, T)
    n_coarse = max(1, n_fine // 2)
    fine = _window_raw(ctx, mtable, t, H, T, n_fine, gl_order)
    coarse = _window_raw(ctx, mtable, t, H, T, n_coarse, gl_order)
    return WindowIntegrals(
        i_value=fine[0], i_err=abs(fine[0] - coarse[0]),
        m_value=fine[1] - H, m_err=abs(fine[1] - coarse[1]),
        m_imag_residual=abs(fine[3]),
        j_value=fine[2], j_err=abs(fine[2] - coarse[2]))


def _window_raw(ctx: EvalContext, mtable: MollifierTable, t: float, H: float,
                T: float, n_panels: int, gl_order: int) -> tuple:
    u, w = _gl_grid(t, t + H, n_panels, gl_order)
    g = np.atleast_1d(ctx.lambda_scaled(u))
    eta = mollifier_eval_batch(mtable, 0.5 + 1j * u)
    eta_sq_abs = np.abs(eta) ** 2
    damp = np.exp(-u / T)
    lvals = ctx.l_critical_batch(u)
    i_val = float(np.sum(w * g * eta_sq_abs * damp))
    m_cplx = np.sum(w * lvals * eta ** 2)
    j_val = float(np.sum(w * np.abs(g) * eta_sq_abs * damp))
    return i_val, float(m_cplx.real), j_val, float(m_cplx.imag)


def integral_i(ctx: EvalContext, mtable: MollifierTable, t: float, H: float,
               T: float) -> tuple[float, float]:
    """Mollified window integral I(t, H) and its error estimate."""
    res = window_integrals(ctx, mtable, t, H, T)
    return res.i_value, res.i_err


def integral_m(ctx: EvalContext, mtable: MollifierTable, t: float, H: float,
               T: float | None = None) -> tuple[float, float]:
    """M(t, H) = int L eta^2 - H (real part; quadrature error estimate)."""
    res = window_integrals(ctx, mtable, t, H, T if T is not None else max(t, 10.0))
    return res.m_value, res.m_err


def integral_j(ctx: EvalContext, mtable: MollifierTable, t: float, H: float,
               T: float) -> tuple[float, float]:
    """J(t, H): same window with |Lambda| |eta|^2 integrand."""
    res = window_integrals(ctx, mtable, t, H, T)
    return res.j_value, res.j_err


def _stratified_samples(T: float, span: float, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    u = rng.random(n)
    return T + (np.arange(n) + u) * (span / n)


@dataclass
class MomentReport:
    T: float
    H: float
    X: float
    samples: int
    flagged: int
    rho5: float
    rho5_stderr: float
    rho6: float
    rho6_stderr: float
    rho7: float
    rho7_stderr: float
    j_ge_floor_fraction: float       # J >= e^-3 (H - |M|)
    j_ge_abs_i_fraction: float       # J >= |I|
    mean_m_imag_residual: float
    rows: list = dc_field(default_factory=list, repr=False)


def moment_suite(ctx: EvalContext, mtable: MollifierTable, cfg: MomentConfig,
                 workers: int = 0) -> MomentReport:
    """Stratified mean squares of I, L eta^2 at 1/2+it, and M over [T, 2T].

    Normalized ratios: rho5 = mean(I^2)/(H/log T), rho6 = mean(|L eta^2|^2),
    rho7 = mean(M^2)/(H/log T).  Samples whose quadrature error estimate
    exceeds the flag threshold are excluded and counted.
    """
    T, H = cfg.T, cfg.resolved_h()
    ts = _stratified_samples(T, T, cfg.samples, cfg.seed)
    from .parallel import det_map

    def work(t):
        win = window_integrals(ctx, mtable, t, H, T, cfg.gl_order)
        lv = ctx.l_critical(t)
        eta = mollifier_eval_batch(mtable, np.array([0.5 + 1j * t]))[0]
        return win, abs(lv * eta * eta) ** 2

    results = det_map(work, list(ts), workers)
    i_sq, m_sq, leta_sq, rows = [], [], [], []
    flagged = 0
    j_floor_ok = 0
    j_absi_ok = 0
    imag_res = []
    e3 = math.exp(-3.0)
    for t, (win, leta2) in zip(ts, results):
        flag = (win.i_err > max(1e-8, 1e-3 * abs(win.i_value))
                or win.m_err > max(1e-8, 1e-3 * abs(win.m_value) + 1e-3 * H))
        rows.append({"t": float(t), "I": win.i_value, "M": win.m_value,
                     "J": win.j_value, "leta2_sq": leta2, "flagged": bool(flag)})
        if flag:
            flagged += 1
            continue
        i_sq.append(win.i_value ** 2)
        m_sq.append(win.m_value ** 2)
        leta_sq.append(leta2)
        imag_res.append(win.m_imag_residual)
        if win.j_value >= e3 * (H - abs(win.m_value)) - 1e-12:
            j_floor_ok += 1
        if win.j_value >= abs(win.i_value) - 1e-12:
            j_absi_ok += 1

    kept = len(i_sq)
    if kept == 0:
        raise RuntimeError("all moment samples were flagged")
    scale = H / math.log(T)

    def mean_se(v):
        v = np.asarray(v)
        return float(np.mean(v)), float(np.std(v, ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0

    m5, s5 = mean_se(i_sq)
    m6, s6 = mean_se(leta_sq)
    m7, s7 = mean_se(m_sq)
    return MomentReport(
        T=T, H=H, X=mtable.X, samples=cfg.samples, flagged=flagged,
        rho5=m5 / scale, rho5_stderr=s5 / scale,
        rho6=m6, rho6_stderr=s6,
        rho7=m7 / scale, rho7_stderr=s7 / scale,
        j_ge_floor_fraction=j_floor_ok / kept,
        j_ge_abs_i_fraction=j_absi_ok / kept,
        mean_m_imag_residual=float(np.mean(imag_res)),
        rows=rows)


def j_sigma(ctx: EvalContext, mtable: MollifierTable, sigma: float, T: float,
            samples: int = 64, seed: int = 0) -> tuple[float, float]:
    """(1/T) int_T^{2T} |L(sigma+it) eta^2(sigma+it) - 1|^2 dt, MC estimate.

    Returns (estimate, standard error).  Valid for 1/2 <= sigma <= 3/2.
    """
    if not (0.5 <= sigma <= 1.5):
        raise ValueError("sigma must lie in [1/2, 3/2]")
    ts = _stratified_samples(T, T, samples, seed)
    ss = sigma + 1j * ts
    lv = ctx.l_value_batch(ss)
    eta = mollifier_eval_batch(mtable, ss)
    vals = np.abs(lv * eta**2 - 1.0) ** 2
    return float(np.mean(vals)), float(np.std(vals, ddof=1) / math.sqrt(samples))
