"""Value-distribution statistics of log|L(1/2+it)|.

Centerpiece: the normalized difference of two distinct L-functions over one
field,

    (log|L_j(1/2+it)| - log|L_j'(1/2+it)|) / sqrt((n_j + n_j') pi loglog T),

sampled over t in [T, 2T] and compared (Kolmogorov-Smirnov) against the
centered Gaussian with density e^{-pi u^2}.  Supporting measurements: finite
prime sums approximating log|L|, window averages Delta(t,H), 2k-th moments of
the approximation error, and the pair-orthogonality sum
sum_{p<=z} (r(p) - r'(p))^2 / p = (n + n') loglog z + O(1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.special import erf

from .arith import prime_sieve
from .coefficients import CoefficientTable
from .lfunc_eval import EvalContext


def gaussian_cdf(u) -> np.ndarray | float:
    """CDF of the density e^{-pi v^2}: (1 + erf(sqrt(pi) u)) / 2."""
    return 0.5 * (1.0 + erf(math.sqrt(math.pi) * np.asarray(u, dtype=float)))


def prime_sum(table: CoefficientTable, t: float, z: float) -> float:
    """Re sum_{p < z} r(p) p^{-1/2 - it} (empty sum for z <= 2)."""
    if z > table.N + 1:
        raise ValueError(f"z={z} beyond table length {table.N}")
    primes, _ = prime_sieve(int(math.ceil(z)) - 1)
    if primes.size == 0:
        return 0.0
    p = primes.astype(float)
    rp = table.r[primes]
    return float(np.sum(rp * np.cos(t * np.log(p)) / np.sqrt(p)))


def _distinct_pair_guard(a: CoefficientTable, b: CoefficientTable) -> None:
    if a.D != b.D:
        raise ValueError("characters must belong to the same field")
    if b.char_index in (a.char_index, a.conjugate_index):
        raise ValueError(
            f"characters {a.char_index} and {b.char_index} define the same L-function")


@dataclass
class DistReport:
    T: float
    samples: int
    excluded: int
    clipped: int
    ks: float
    bin_edges: np.ndarray
    bin_mass: np.ndarray
    target_mass: np.ndarray
    statistics: np.ndarray = dc_field(repr=False, default=None)
    denominator: float = 0.0


def ks_distance(sorted_stats: np.ndarray) -> float:
    n = len(sorted_stats)
    cdf = gaussian_cdf(sorted_stats)
    up = np.max(np.arange(1, n + 1) / n - cdf)
    dn = np.max(cdf - np.arange(0, n) / n)
    return float(max(up, dn))


def clt_histogram(ctx_a: EvalContext, ctx_b: EvalContext, T: float,
                  samples: int = 4000, bins: int = 40, seed: int = 0,
                  clip_floor: float = -12.0, resample_cap: int = 3,
                  offsets: np.ndarray | None = None) -> DistReport:
    """Distribution of the normalized log|L| difference over t in [T, 2T].

    Samples landing within the clip floor of a zero of either L-function are
    redrawn up to resample_cap times, then excluded (and counted).  Passing
    the same `offsets` array across several T values gives common random
    numbers, which sharpens trend comparisons between heights.
    """
    _distinct_pair_guard(ctx_a.table, ctx_b.table)
    if T < 100:
        raise ValueError("need T >= 100")
    n_a = 1 if ctx_a.table.is_complex else 2
    n_b = 1 if ctx_b.table.is_complex else 2
    denom = math.sqrt((n_a + n_b) * math.pi * math.log(math.log(T)))

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    if offsets is None:
        offsets = rng.random(samples)
    ts = T * (1.0 + np.asarray(offsets, dtype=float))

    la, ca = ctx_a.log_abs_l_batch(ts, floor=clip_floor)
    lb, cb = ctx_b.log_abs_l_batch(ts, floor=clip_floor)
    clipped_mask = ca | cb
    clipped_total = int(np.sum(clipped_mask))
    for _ in range(resample_cap):
        if not np.any(clipped_mask):
            break
        redraw = T * (1.0 + rng.random(int(np.sum(clipped_mask))))
        la2, ca2 = ctx_a.log_abs_l_batch(redraw, floor=clip_floor)
        lb2, cb2 = ctx_b.log_abs_l_batch(redraw, floor=clip_floor)
        idx = np.nonzero(clipped_mask)[0]
        la[idx], lb[idx] = la2, lb2
        still = ca2 | cb2
        clipped_total += int(np.sum(still))
        clipped_mask[:] = False
        clipped_mask[idx[still]] = True

    keep = ~clipped_mask
    stats = (la[keep] - lb[keep]) / denom
    stats_sorted = np.sort(stats)
    mass, edges = np.histogram(stats_sorted, bins=bins)
    mass = mass / stats_sorted.size
    target = gaussian_cdf(edges[1:]) - gaussian_cdf(edges[:-1])
    return DistReport(T=T, samples=int(stats_sorted.size),
                      excluded=int(np.sum(clipped_mask)), clipped=clipped_total,
                      ks=ks_distance(stats_sorted), bin_edges=edges,
                      bin_mass=mass, target_mass=target,
                      statistics=stats_sorted, denominator=denom)


def delta_average(ctx: EvalContext, t: float, H: float,
                  n_panels: int | None = None, floor: float = -50.0) -> float:
    """Delta(t, H) = (1/H) int_t^{t+H} log|L(1/2+iu)| du (clip policy inherited)."""
    if H < 0:
        raise ValueError("H must be >= 0")
    if H == 0.0:
        return ctx.log_abs_l(t, floor)[0]
    if n_panels is None:
        n_panels = max(2, int(math.ceil(H * 4.0 * math.log(max(t, 10.0)))))
    x, w = np.polynomial.legendre.leggauss(8)
    edges = np.linspace(t, t + H, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    vals, _ = ctx.log_abs_l_batch(nodes, floor)
    return float(np.sum(weights * vals) / H)


def moment_2k(ctx: EvalContext, T: float, z: float | None, k: int,
              samples: int = 256, mode: str = "prime_sum", seed: int = 0,
              H: float | None = None) -> dict:
    """Monte-Carlo 2k-th moment of the log|L| approximation error.

    mode='prime_sum': statistic log|L(1/2+it)| - Re sum_{p<z} r(p) p^{-1/2-it},
    with z defaulting to T^{1/(4k)}.  mode='window': statistic
    Delta(t,H) - log|L(1/2+i(t+u))| with u drawn uniformly from [0, H].
    """
    if k not in (1, 2, 3):
        raise ValueError("k must be 1, 2, or 3")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    ts = T * (1.0 + rng.random(samples))
    if mode == "prime_sum":
        if z is None:
            z = T ** (1.0 / (4.0 * k))
        logl, _ = ctx.log_abs_l_batch(ts)
        stats = np.array([logl[i] - prime_sum(ctx.table, float(ts[i]), z)
                          for i in range(samples)])
        meta = {"z": float(z)}
    elif mode == "window":
        if H is None:
            H = 8.0 / math.log(T)
        us = H * rng.random(samples)
        stats = np.empty(samples)
        for i in range(samples):
            d = delta_average(ctx, float(ts[i]), H)
            stats[i] = d - ctx.log_abs_l(float(ts[i] + us[i]))[0]
        meta = {"H": float(H)}
    else:
        raise ValueError(f"unknown mode {mode!r}")
    powered = stats ** (2 * k)
    est = float(np.mean(powered))
    se = float(np.std(powered, ddof=1) / math.sqrt(samples))
    return {"estimate": est, "stderr": se, "k": k, "T": float(T),
            "mode": mode, "samples": samples, **meta}


def orthogonality_sum(table_a: CoefficientTable, table_b: CoefficientTable,
                      z: float) -> tuple[float, float, float]:
    """sum over primes p < z of (r(p) - r'(p))^2 / p vs (n + n') loglog z.

    Returns (value, predicted, residual); rejects conjugate/equal pairs,
    which share an L-function and make the sum degenerate.
    """
    _distinct_pair_guard(table_a, table_b)
    zi = int(math.ceil(z)) - 1
    if zi > min(table_a.N, table_b.N):
        raise ValueError("z beyond table range")
    if zi < 2:
        return 0.0, 0.0, 0.0
    primes, _ = prime_sieve(zi)
    diff = table_a.r[primes] - table_b.r[primes]
    value = float(np.sum(diff * diff / primes.astype(float)))
    n_a = 1 if table_a.is_complex else 2
    n_b = 1 if table_b.is_complex else 2
    predicted = (n_a + n_b) * math.log(math.log(z))
    return value, predicted, value - predicted
