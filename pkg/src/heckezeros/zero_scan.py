"""Critical-line zero detection and argument-principle zero accounting.

The real-valued detector is the scaled completed combination

    frakF(t) = sum_j c_j e^{pi|t|/2} Lambda_j(1/2 + it),

whose sign changes are odd-order zeros of F(s) = sum_j c_j L_j(s) on the
critical line.  Rectangle counts come from the winding number of the same
scaled combination along the boundary (the e^{pi t/2} factor is positive, so
the winding is that of sum_j c_j Lambda_j; Gamma(s) has no zeros and its
poles sit on the real axis, outside any box with t0 > 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .class_field import FieldData, characters
from .lfunc_eval import EvalContext


class ContourUnstableError(RuntimeError):
    """Argument tracking failed to stabilize on a contour segment."""


@dataclass
class CombinationSpec:
    """A real linear combination sum_j c_j L_j over one field.

    Characters must be distinct as L-functions: no index repeated and no
    character together with its conjugate (they share an L-function).
    """

    fld: FieldData
    terms: list          # [(char_index, c_j), ...]
    contexts: dict       # char_index -> EvalContext

    def __post_init__(self):
        if not self.terms:
            raise ValueError("combination needs at least one term")
        chars = characters(self.fld)
        seen = set()
        for ci, c in self.terms:
            if c == 0 or not np.isreal(c):
                raise ValueError(f"coefficient for character {ci} must be real and nonzero")
            if ci in seen or chars[ci].conjugate_index in seen:
                raise ValueError(
                    f"character {ci} duplicates an L-function already in the combination")
            seen.add(ci)
            if ci not in self.contexts:
                raise ValueError(f"no evaluation context for character {ci}")

    @property
    def m(self) -> int:
        return len(self.terms)


def frak_f(spec: CombinationSpec, t) -> float | np.ndarray:
    """frakF(t) = sum_j c_j e^{pi|t|/2} Lambda_j(1/2+it) (real)."""
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    acc = np.zeros(ts.shape)
    for ci, c in spec.terms:
        acc += c * np.atleast_1d(spec.contexts[ci].lambda_scaled(ts))
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return float(acc[0])
    return acc


def frak_f_imag_residue(spec: CombinationSpec, t: float) -> float:
    """Imaginary residue of the unfolded combination at 1/2+it (diagnostic)."""
    acc = 0.0 + 0.0j
    for ci, c in spec.terms:
        ctx = spec.contexts[ci]
        acc += c * ctx.contour.lambda_scaled_sigma(ci, 0.5, t)
    return abs(acc.imag)


def frak_f_sigma(spec: CombinationSpec, sigmas: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """Scaled completed combination at sigma + it (complex), vectorized."""
    acc = np.zeros(np.asarray(ts).shape, dtype=complex)
    for ci, c in spec.terms:
        ctx = spec.contexts[ci]
        acc += c * ctx.contour.lambda_scaled_sigma_batch(ci, np.asarray(sigmas, float),
                                                         np.asarray(ts, float))
    return acc


def default_step(t1: float, d: int) -> float:
    """Grid step 1/(4 log((t1+3) sqrt(D))): a fixed fraction of the mean zero gap."""
    return 1.0 / (4.0 * math.log((t1 + 3.0) * math.sqrt(d)))


@dataclass
class ZeroScanReport:
    t0: float
    t1: float
    step: float
    refine_tol: float
    zeros: list                      # [(ordinate, bracket_width), ...]
    n0: int
    n_box: int | None = None
    box: tuple | None = None         # (sigma_lo, sigma_hi, t0, t1)
    density_rows: list = dc_field(default_factory=list)   # [(sigma, count), ...]
    warnings: list = dc_field(default_factory=list)

    @property
    def gap(self) -> int | None:
        return None if self.n_box is None else self.n_box - self.n0


def scan_sign_changes(spec: CombinationSpec, t0: float, t1: float,
                      step: float | None = None, refine_tol: float | None = None,
                      noise_floor: float | None = None) -> ZeroScanReport:
    """Locate odd-order zeros of frakF on [t0, t1] by grid sign changes.

    Grid points whose magnitude falls below the noise floor (5 m tol by
    default) are treated as sign-indeterminate and bridged, so every reported
    bracket has endpoints of strictly opposite sign above the floor.  Each
    bracket is bisected to width refine_tol.  Deterministic for a fixed grid.
    """
    if t1 <= t0:
        raise ValueError("need t1 > t0")
    if step is None:
        step = default_step(t1, spec.fld.D)
    if refine_tol is None:
        refine_tol = step / 1024.0
    if refine_tol >= step:
        raise ValueError("refine_tol must be smaller than step")
    tol = max(ctx.tol for ctx in spec.contexts.values())
    if noise_floor is None:
        noise_floor = 5.0 * spec.m * tol

    n_pts = int(math.ceil((t1 - t0) / step)) + 1
    ts = np.linspace(t0, t1, n_pts)
    vals = np.atleast_1d(frak_f(spec, ts))
    sign = np.where(np.abs(vals) > noise_floor, np.sign(vals), 0.0)

    warnings = []
    lo_idx, hi_idx = [], []
    last = None      # index of last decisively signed point
    for i in range(n_pts):
        if sign[i] == 0.0:
            continue
        if last is not None and sign[i] != sign[last]:
            lo_idx.append(last)
            hi_idx.append(i)
            if i - last > 1:
                warnings.append(
                    f"bracket [{ts[last]:.6f}, {ts[i]:.6f}] bridges "
                    f"{i - last - 1} sub-floor grid point(s)")
        last = i

    lo = ts[lo_idx].astype(float)
    hi = ts[hi_idx].astype(float)
    flo = vals[lo_idx].astype(float)
    while lo.size and float(np.max(hi - lo)) > refine_tol:
        mid = 0.5 * (lo + hi)
        fmid = np.atleast_1d(frak_f(spec, mid))
        take_left = (np.sign(fmid) == np.sign(flo)) & (fmid != 0.0)
        lo = np.where(take_left, mid, lo)
        flo = np.where(take_left, fmid, flo)
        hi = np.where(take_left, hi, mid)
    zeros = [(float(0.5 * (a + b)), float(b - a)) for a, b in zip(lo, hi)]
    return ZeroScanReport(t0=t0, t1=t1, step=step, refine_tol=refine_tol,
                          zeros=zeros, n0=len(zeros), warnings=warnings)


def _edge_winding(spec: CombinationSpec, p0: tuple, p1: tuple,
                  n_init: int, max_points: int = 2**14) -> float:
    """Unwrapped argument change of the scaled combination along a segment."""
    u = np.linspace(0.0, 1.0, max(n_init, 8))
    s0, t0 = p0
    s1, t1 = p1

    def values(uu):
        return frak_f_sigma(spec, s0 + (s1 - s0) * uu, t0 + (t1 - t0) * uu)

    vals = values(u)
    for _ in range(60):
        if np.any(np.abs(vals) == 0.0):
            raise ContourUnstableError(f"exact zero on contour segment {p0}->{p1}")
        dphi = np.angle(vals[1:] / vals[:-1])
        bad = np.nonzero(np.abs(dphi) > math.pi / 2)[0]
        if bad.size == 0:
            return float(np.sum(dphi))
        if u.size + bad.size > max_points:
            raise ContourUnstableError(
                f"segment {p0}->{p1}: phase not resolved with {u.size} points")
        mids = 0.5 * (u[bad] + u[bad + 1])
        mv = values(mids)
        u = np.insert(u, bad + 1, mids)
        vals = np.insert(vals, bad + 1, mv)
    raise ContourUnstableError(f"segment {p0}->{p1}: refinement did not converge")


def count_zeros_region(spec: CombinationSpec, sigma_lo: float, sigma_hi: float,
                       t0: float, t1: float, max_retries: int = 3) -> int:
    """Zeros of F inside [sigma_lo, sigma_hi] x [t0, t1] by winding number.

    Requires t0 > 0 so the Gamma-factor poles (non-positive real axis) stay
    outside.  When the winding fails to stabilize, the contour is perturbed
    outward by up to step/10-sized nudges before giving up.
    """
    if t0 <= 0:
        raise ValueError("t0 must be positive (Gamma poles on the real axis)")
    if sigma_hi <= sigma_lo or t1 <= t0:
        raise ValueError("degenerate rectangle")
    step = default_step(t1, spec.fld.D)
    density = 2.0 * math.log((t1 + 3.0) * math.sqrt(spec.fld.D)) / math.pi
    nudge = 0.0
    last_err = None
    for attempt in range(max_retries + 1):
        slo, shi = sigma_lo - nudge, sigma_hi + nudge
        a, b = t0 - nudge, t1 + nudge
        if a <= 0:
            a = t0 * 0.5
        corners = [(slo, a), (shi, a), (shi, b), (slo, b), (slo, a)]
        n_vert = max(64, int(8 * density * (b - a)))
        n_horz = max(64, int(32 * (shi - slo)))
        try:
            total = 0.0
            for k in range(4):
                n_init = n_vert if k % 2 == 1 else n_horz
                total += _edge_winding(spec, corners[k], corners[k + 1], n_init)
            w = total / (2.0 * math.pi)
            if abs(w - round(w)) > 0.15:
                raise ContourUnstableError(
                    f"winding {w:.4f} not close to an integer on "
                    f"[{slo},{shi}]x[{a},{b}]")
            return int(round(w))
        except ContourUnstableError as err:
            last_err = err
            nudge += step / 10.0
    raise ContourUnstableError(f"contour count failed after retries: {last_err}")


def density_counts(spec: CombinationSpec, sigmas: list, t0: float, t1: float,
                   sigma_hi: float = 2.5) -> list:
    """N(sigma, T) rows: zero counts in Re s >= sigma slabs of [t0, t1]."""
    return [(float(s), count_zeros_region(spec, s, sigma_hi, t0, t1)) for s in sigmas]


def proportion_report(spec: CombinationSpec, t_values: list, sigma_lo: float = -1.0,
                      sigma_hi: float = 2.5, step: float | None = None) -> dict:
    """Sign-change vs box counts over [T, 2T] windows, with T log T trend."""
    rows = []
    for T in t_values:
        rep = scan_sign_changes(spec, T, 2.0 * T, step=step)
        nbox = count_zeros_region(spec, sigma_lo, sigma_hi, T, 2.0 * T)
        ratio = rep.n0 / nbox if nbox else float("nan")
        rows.append({
            "T": float(T),
            "n0": rep.n0,
            "n_box": nbox,
            "ratio": ratio,
            "n0_over_TlogT": rep.n0 / (T * math.log(T)),
            "warnings": rep.warnings,
        })
    return {"rows": rows, "sigma_lo": sigma_lo, "sigma_hi": sigma_hi}
