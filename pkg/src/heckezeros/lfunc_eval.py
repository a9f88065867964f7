"""Numerical evaluation of completed Hecke L-functions in the critical strip.

Two evaluation paths are provided.

* ``lambda_afe`` is the literal incomplete-gamma splitting of the Mellin
  integral,

      Lambda(s) = sum_n r(n) [x_n^{-s} Gamma(s, x_n) + x_n^{s-1} Gamma(1-s, x_n)],
      x_n = 2 pi n / sqrt(D),

  (plus explicit pole terms for the principal character).  In double
  precision its error is *absolute*, around 1e-16 of the term mass: on the
  critical line, where Lambda decays like exp(-pi t/2), the formula is only
  relatively accurate for |t| below roughly 25.  It is kept as the reference
  path and as the tie to the defining formula.

* ``ContourEvaluator`` is the production path.  Writing
  Lambda(1/2 + it) = integral of g(w) e^{itw} over the real line with
  g(w) = ftilde(e^w) e^{w/2} (g analytic in |Im w| < pi/2 and even by the
  theta transformation), the contour is shifted to Im w = pi/2 - delta, which
  extracts the exp(-pi t/2) decay analytically:

      e^{pi t/2} Lambda(1/2+it) = e^{t delta} * Int_R g(x + i y0) e^{itx} dx.

  The trapezoid rule on the shifted line converges geometrically, every
  intermediate quantity is O(1), and coefficient-table noise is *not*
  amplified by e^{pi t/2} (which kills the incomplete-gamma form at height).
  One grid of theta values serves all characters of a field and all sigma in
  the strip via Lambda(sigma+it) = e^{-t y0} (P_sigma(t) + conj P_{1-sigma}(t)).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import loggamma

from .coefficients import CoefficientTable, MollifierTable
from .class_field import FieldData


class EnvelopeError(ValueError):
    """Requested evaluation lies outside the validated parameter envelope."""


# ---------------------------------------------------------------------------
# upper incomplete gamma
# ---------------------------------------------------------------------------

_GAMMA_X_MAX = 1.0e5
_GAMMA_IM_MAX = 4.0e4


def upper_incomplete_gamma(s: complex, x: float, tol: float = 1e-12) -> complex:
    """Gamma(s, x) = int_x^inf e^{-u} u^{s-1} du for real x > 0.

    Power series on the gamma* form for x < 0.7 (|s| + 1), continued fraction
    otherwise; both avoid subtracting nearly equal big terms for the
    parameter ranges used here.  Absolute accuracy is tol relative to the
    natural scale e^{-x} max(1, x^{Re s - 1}).
    """
    s = complex(s)
    if not (0.0 < x <= _GAMMA_X_MAX):
        raise EnvelopeError(f"x={x} outside (0, {_GAMMA_X_MAX:.0e}]")
    if abs(s.imag) > _GAMMA_IM_MAX:
        raise EnvelopeError(f"|Im s|={abs(s.imag):.3g} exceeds {_GAMMA_IM_MAX:.0e}")
    if x < 0.7 * (abs(s) + 1.0):
        return _gamma_series(s, x, tol)
    return _gamma_cf(s, x, tol)


def _gamma_series(s: complex, x: float, tol: float) -> complex:
    # Gamma(s,x) = Gamma(s) - x^s e^{-x} * sum_k x^k / (s (s+1) ... (s+k))
    if abs(s.imag) < 0.25 and s.real < 0.25:
        near = round(s.real)
        if near <= 0 and abs(s - near) < 1e-8:
            raise EnvelopeError(f"s={s} too close to a pole of Gamma(s)")
    term = 1.0 / s
    acc = term
    k = 0
    while True:
        k += 1
        term *= x / (s + k)
        acc += term
        if abs(term) <= tol * max(abs(acc), 1e-300) and k >= 2:
            break
        if k > 10_000:
            raise EnvelopeError(f"series for Gamma({s}, {x}) did not converge")
    lg = loggamma(s)
    gamma_s = cmath.exp(lg) if lg.real > -745.0 else 0.0
    prefix = cmath.exp(s * math.log(x) - x)
    return gamma_s - prefix * acc


def _gamma_cf(s: complex, x: float, tol: float) -> complex:
    # Lentz continued fraction for x >= 0.7(|s|+1)
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b if b != 0 else 1.0 / tiny
    f = d
    for i in range(1, 20_000):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        f *= delta
        if abs(delta - 1.0) < tol:
            break
    else:
        raise EnvelopeError(f"continued fraction for Gamma({s}, {x}) did not converge")
    return cmath.exp(s * math.log(x) - x) * f


# ---------------------------------------------------------------------------
# incomplete-gamma AFE reference path
# ---------------------------------------------------------------------------

def afe_n_max(t: float, tol: float, d: int) -> int:
    """Term count policy: n_max = ceil((sqrt(D)/2pi) (|t| + 12 ln10 * digits))."""
    digits = max(1.0, -math.log10(tol))
    return int(math.ceil(math.sqrt(d) / (2 * math.pi) * (abs(t) + 12.0 * math.log(10.0) * digits)))


def lambda_afe(table: CoefficientTable, fld: FieldData, s: complex,
               tol: float = 1e-9) -> complex:
    """Reference completed-L value by the split Mellin / incomplete-gamma sum.

    Exact formula at every strip point (pole terms included for the principal
    character); double-precision error is absolute (~1e-16 of term mass), so
    relative accuracy on the critical line requires |Im s| <~ 25.
    """
    s = complex(s)
    n_max = afe_n_max(s.imag, tol, fld.D)
    if n_max > table.N:
        raise EnvelopeError(
            f"insufficient table: need n_max={n_max} > N={table.N} at Im s={s.imag}")
    sqd = math.sqrt(fld.D)
    gtol = min(tol * 1e-3, 1e-12)
    acc = 0.0 + 0.0j
    r = table.r
    for n in range(1, n_max + 1):
        rn = r[n]
        if rn == 0.0:
            continue
        x = 2.0 * math.pi * n / sqd
        t1 = x ** (-s) * upper_incomplete_gamma(s, x, gtol)
        t2 = x ** (s - 1.0) * upper_incomplete_gamma(1.0 - s, x, gtol)
        acc += rn * (t1 + t2)
    if table.is_principal:
        hw = fld.h / fld.w
        acc += hw * (1.0 / (s - 1.0) - 1.0 / s)
    return acc


# ---------------------------------------------------------------------------
# contour-shifted theta-integral production path
# ---------------------------------------------------------------------------

DEFAULT_A_TILT = 11.0
DEFAULT_LAM_CUT = 41.5


def contour_delta(t_max: float, a_tilt: float = DEFAULT_A_TILT) -> float:
    return min(a_tilt / max(t_max, 20.0), math.pi / 5.0)


def required_table_length(d: int, t_max: float, a_tilt: float = DEFAULT_A_TILT,
                          lam_cut: float = DEFAULT_LAM_CUT) -> int:
    """Coefficient-table length the contour grid needs at a given height cap."""
    delta = contour_delta(t_max, a_tilt)
    return int(math.ceil(lam_cut * math.sqrt(d) / (2 * math.pi * math.sin(delta)))) + 2


class ContourEvaluator:
    """Shared evaluation grid for all characters of one field.

    Holds theta values Theta_c(x_i) = sum_n r_c(n) exp(-x_n e^{x_i + i y0})
    on a trapezoid grid of the shifted line Im w = y0 = pi/2 - delta, chosen
    so that e^{t delta} <= e^{a_tilt} for t <= t_max (bounding both the noise
    amplification and the term count).
    """

    def __init__(self, fld: FieldData, tables: dict[int, CoefficientTable],
                 t_max: float, tol: float = 1e-9, a_tilt: float = DEFAULT_A_TILT,
                 lam_cut: float = DEFAULT_LAM_CUT, steps_per_delta: float = 7.0):
        for tab in tables.values():
            if tab.is_principal:
                raise EnvelopeError(
                    "contour evaluation supports non-principal characters only "
                    "(principal L has a pole; use the AFE path at low heights)")
        self.fld = fld
        self.t_max = float(t_max)
        self.tol = tol
        self.a_tilt = a_tilt
        sqd = math.sqrt(fld.D)
        self.x1 = 2.0 * math.pi / sqd
        delta = contour_delta(self.t_max, a_tilt)
        self.delta = delta
        self.y0 = math.pi / 2.0 - delta
        self.h = delta / steps_per_delta
        sin_d, cos_d = math.sin(delta), math.cos(delta)
        x_extent = math.log(lam_cut / (self.x1 * sin_d))
        m = int(math.ceil(x_extent / self.h)) + 1
        self.x = self.h * np.arange(m)
        n_needed = int(math.ceil(lam_cut / (self.x1 * sin_d))) + 2
        for ci, tab in tables.items():
            if tab.N < n_needed:
                raise EnvelopeError(
                    f"coefficient table for character {ci} has N={tab.N} < "
                    f"required {n_needed} at t_max={t_max}")
        self.n_needed = n_needed
        base = -self.x1 * np.exp(self.x) * complex(sin_d, cos_d)   # -x_1 e^{x+iy0}
        self.theta = self._theta_grid(base, tables, lam_cut)
        # cached sigma = 1/2 weight vectors per character
        e_half = np.exp(0.5 * (self.x + 1j * self.y0))
        self._w_half = {}
        for ci, th in self.theta.items():
            v = self.h * th * e_half
            v[0] *= 0.5
            self._w_half[ci] = v

    def _theta_grid(self, base: np.ndarray, tables: dict[int, CoefficientTable],
                    lam_cut: float) -> dict[int, np.ndarray]:
        m = len(base)
        out = {ci: np.zeros(m, dtype=complex) for ci in tables}
        rvecs = {ci: tab.r for ci, tab in tables.items()}
        block = 2048
        node_chunk = 256
        # per-node term cutoff: n_i = lam_cut / (x1 e^{x_i} sin delta)
        n_cut = np.minimum(self.n_needed,
                           np.maximum(1, np.ceil(lam_cut / (-base.real)))).astype(np.int64)
        for i0 in range(0, m, node_chunk):
            i1 = min(i0 + node_chunk, m)
            b = base[i0:i1]
            nc = int(n_cut[i0:i1].max())
            q = np.exp(b)
            for n0 in range(1, nc + 1, block):
                n1 = min(n0 + block - 1, nc)
                width = n1 - n0 + 1
                pw = np.empty((i1 - i0, width), dtype=complex)
                pw[:, 0] = np.exp(n0 * b)
                if width > 1:
                    pw[:, 1:] = q[:, None]
                    np.cumprod(pw, axis=1, out=pw)
                for ci, r in rvecs.items():
                    out[ci][i0:i1] += pw @ r[n0: n1 + 1]
        return out

    # -- core sums ---------------------------------------------------------

    def _check_t(self, t: float) -> None:
        if abs(t) > self.t_max * (1.0 + 1e-12):
            raise EnvelopeError(
                f"|t|={abs(t):.6g} exceeds the prepared envelope t_max={self.t_max:.6g}; "
                f"rebuild the context with t_max >= {abs(t):.6g}")

    def lambda_scaled_half(self, char_index: int, t) -> np.ndarray | float:
        """G(t) = e^{pi |t|/2} Lambda(1/2 + it); real, even in t."""
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        self._check_t(float(np.max(np.abs(ts))) if ts.size else 0.0)
        w = self._w_half[char_index]
        out = np.empty(ts.shape)
        chunk = 64
        at = np.abs(ts)
        for i0 in range(0, ts.size, chunk):
            tt = at[i0:i0 + chunk]
            ph = np.exp(1j * np.outer(tt, self.x))
            out[i0:i0 + chunk] = 2.0 * np.real(ph @ w)
        out *= np.exp(self.delta * at)
        if np.isscalar(t) or np.asarray(t).ndim == 0:
            return float(out[0])
        return out

    def lambda_scaled_sigma(self, char_index: int, sigma: float, t: float) -> complex:
        """e^{pi |t|/2} Lambda(sigma + it) anywhere in -1 <= sigma <= 2.5 range."""
        return complex(self.lambda_scaled_sigma_batch(
            char_index, np.array([sigma]), np.array([t]))[0])

    def lambda_scaled_sigma_batch(self, char_index: int, sigmas: np.ndarray,
                                  ts: np.ndarray) -> np.ndarray:
        """Vectorized e^{pi |t|/2} Lambda(sigma + it) over paired arrays."""
        sigmas = np.asarray(sigmas, dtype=float)
        ts = np.asarray(ts, dtype=float)
        if sigmas.shape != ts.shape:
            raise ValueError("sigma and t arrays must be congruent")
        if ts.size == 0:
            return np.zeros(0, dtype=complex)
        self._check_t(float(np.max(np.abs(ts))))
        th = self.theta[char_index]
        out = np.empty(ts.shape, dtype=complex)
        flat_s, flat_t = sigmas.ravel(), ts.ravel()
        res = out.ravel()
        w0 = self.x + 1j * self.y0
        chunk = 32
        for i0 in range(0, flat_t.size, chunk):
            sg = flat_s[i0:i0 + chunk]
            tt = np.abs(flat_t[i0:i0 + chunk])
            # P_sigma(t) and P_{1-sigma}(t) share the phase matrix
            ph = np.exp(1j * np.outer(tt, self.x)) * th[None, :]
            ea = np.exp(np.outer(sg, w0))
            eb = np.exp(np.outer(1.0 - sg, w0))
            ea[:, 0] *= 0.5
            eb[:, 0] *= 0.5
            p_sig = np.sum(ph * ea, axis=1) * self.h
            p_ref = np.sum(ph * eb, axis=1) * self.h
            res[i0:i0 + chunk] = (p_sig + np.conj(p_ref)) * np.exp(self.delta * tt)
        neg = flat_t < 0
        if np.any(neg):
            res[neg] = np.conj(res[neg])
        return out


@dataclass
class EvalContext:
    """Evaluation handle for one (field, character) pair.

    All critical-line statistics go through the scaled completed function
    G(t) = e^{pi|t|/2} Lambda(1/2+it) to avoid underflow; raw Lambda values
    follow by the explicit exponential factor.
    """

    fld: FieldData
    char_index: int
    table: CoefficientTable
    contour: ContourEvaluator | None
    tol: float = 1e-9
    afe_t_cap: float = 30.0

    @property
    def t_max(self) -> float:
        return self.contour.t_max if self.contour is not None else self.afe_t_cap

    # -- completed function -------------------------------------------------

    def lambda_scaled(self, t) -> float | np.ndarray:
        """e^{pi|t|/2} Lambda(1/2 + it), real."""
        if self.contour is None:
            raise EnvelopeError("no contour grid prepared for this context")
        return self.contour.lambda_scaled_half(self.char_index, t)

    def lambda_completed(self, s: complex) -> complex:
        """Raw Lambda(s), |error| <= tol (underflows to 0 at large heights)."""
        s = complex(s)
        t = s.imag
        if self.contour is not None and not self.table.is_principal:
            g = self.contour.lambda_scaled_sigma(self.char_index, s.real, t)
            scale = math.exp(-math.pi * abs(t) / 2.0) if abs(t) < 1400 else 0.0
            return g * scale
        return lambda_afe(self.table, self.fld, s, self.tol)

    def lambda_afe(self, s: complex) -> complex:
        """Reference incomplete-gamma path (absolute-accuracy contract)."""
        return lambda_afe(self.table, self.fld, s, self.tol)

    # -- L on and off the critical line --------------------------------------

    def _gamma_scaled(self, s: complex) -> complex:
        """e^{pi |Im s|/2} Gamma(s), stable at all heights."""
        return cmath.exp(complex(loggamma(s)) + math.pi * abs(s.imag) / 2.0)

    def l_value(self, s: complex) -> complex:
        """L(s) = Lambda(s) (2 pi / sqrt D)^s / Gamma(s)."""
        s = complex(s)
        if self.contour is None or self.table.is_principal:
            lam = lambda_afe(self.table, self.fld, s, self.tol)
            return lam * (2 * math.pi / self.fld.sqrt_disc()) ** s / cmath.exp(complex(loggamma(s)))
        g = self.contour.lambda_scaled_sigma(self.char_index, s.real, s.imag)
        return g * (2 * math.pi / self.fld.sqrt_disc()) ** s / self._gamma_scaled(s)

    def l_value_batch(self, ss: np.ndarray) -> np.ndarray:
        """L at an array of strip points (contour path, non-principal)."""
        ss = np.asarray(ss, dtype=complex)
        g = self.contour.lambda_scaled_sigma_batch(self.char_index, ss.real, ss.imag)
        denom = np.exp(loggamma(ss) + math.pi * np.abs(ss.imag) / 2.0)
        return g * (2 * math.pi / self.fld.sqrt_disc()) ** ss / denom

    def l_critical(self, t: float) -> complex:
        return self.l_value(0.5 + 1j * t)

    def l_critical_batch(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        g = np.atleast_1d(self.lambda_scaled(ts))
        s = 0.5 + 1j * ts
        denom = np.exp(loggamma(s) + math.pi * np.abs(ts) / 2.0)
        return g * (2 * math.pi / self.fld.sqrt_disc()) ** s / denom

    def log_abs_l(self, t: float, floor: float = -50.0) -> tuple[float, bool]:
        """log|L(1/2+it)| clipped below at floor; flag marks clipping."""
        val = self.log_abs_l_batch(np.array([t]), floor)
        return float(val[0][0]), bool(val[1][0])

    def log_abs_l_batch(self, ts: np.ndarray, floor: float = -50.0
                        ) -> tuple[np.ndarray, np.ndarray]:
        ts = np.asarray(ts, dtype=float)
        g = np.abs(np.atleast_1d(self.lambda_scaled(ts)))
        lg = np.real(loggamma(0.5 + 1j * ts)) + math.pi * np.abs(ts) / 2.0
        with np.errstate(divide="ignore"):
            vals = np.log(g) + 0.5 * math.log(2 * math.pi / self.fld.sqrt_disc()) - lg
        clipped = vals < floor
        return np.where(clipped, floor, vals), clipped


def mollifier_eval(mtable: MollifierTable, s: complex) -> complex:
    """eta(s) = sum_{nu <= X} beta(nu) nu^{-s} by direct summation."""
    nu = np.arange(1, mtable.nu_max + 1)
    return complex(np.sum(mtable.beta[1:] * nu ** (-complex(s))))


def mollifier_eval_batch(mtable: MollifierTable, ss: np.ndarray) -> np.ndarray:
    """eta at an array of complex points (columns: nu, rows: points)."""
    ss = np.asarray(ss, dtype=complex)
    nu = np.arange(1, mtable.nu_max + 1, dtype=float)
    lognu = np.log(nu)
    return (np.exp(-np.outer(ss, lognu)) @ mtable.beta[1:])


def build_eval_contexts(fld: FieldData, tables: dict[int, CoefficientTable],
                        t_max: float, tol: float = 1e-9,
                        a_tilt: float = 11.0) -> dict[int, EvalContext]:
    """One EvalContext per character, sharing a single contour grid."""
    non_principal = {ci: tab for ci, tab in tables.items() if not tab.is_principal}
    contour = ContourEvaluator(fld, non_principal, t_max, tol, a_tilt) if non_principal else None
    out = {}
    for ci, tab in tables.items():
        ctx_contour = contour if not tab.is_principal else None
        out[ci] = EvalContext(fld=fld, char_index=ci, table=tab,
                              contour=ctx_contour, tol=tol)
    return out
