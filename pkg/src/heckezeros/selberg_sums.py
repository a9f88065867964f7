"""Quadruple correlation sums of mollifier coefficients, two independent ways.

The object is

    S(theta) = sum_{nu1..nu4 <= X} beta(nu1)beta(nu2)beta(nu3)beta(nu4)
               / (nu2 nu4) * (q/(nu1 nu3))^{1-theta}
               * K(nu1 nu4 / q, 1-theta) * K(nu2 nu3 / q, 1-theta),

with q = gcd(nu1 nu4, nu2 nu3).  Route one ("brute") groups the quadruple sum
over product pairs (nu1 nu4, nu2 nu3) with vectorized gcds and a precomputed
K table, accumulating with compensated summation (the beta weights mix
signs).  Route two ("decomposed") applies Moebius inversion to the gcd
coupling:

    S(theta) = sum_{d <= X^2} sum_{m | d} mu(m) (d/m)^{1-theta} g(d, m)^2,
    g(d, m)  = sum_{nu1 nu4 = 0 mod d} beta(nu1)beta(nu4)
               / (nu1^{1-theta} nu4) * K(nu1 nu4 m / d, 1-theta).

Agreement of the two routes is the module's core oracle; the remaining
operations check the Moebius/K identity pointwise and the weighted
single-variable sums S_theta(X, gamma, N) with their smoothing identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arith import divisors_from_factorization, mobius_sieve, prime_sieve, trial_factorize
from .coefficients import (CoefficientTable, alpha_coefficients, k_function,
                           k_table, mollifier_weights, smoothing_weight)


@dataclass
class SumConfig:
    """Cutoff, exponent shift and series tolerance for the S(theta) routes."""

    x: int
    theta: float
    tol: float = 1e-12
    brute_cap: int = 200

    def __post_init__(self):
        if not (0.0 <= self.theta <= 0.25):
            raise ValueError("theta must lie in [0, 1/4]")
        if self.x < 1:
            raise ValueError("X must be >= 1")


def _neumaier_sum(partials) -> float:
    total = 0.0
    comp = 0.0
    for v in partials:
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


def _product_weights(beta: np.ndarray, x: int, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Values m and weights U(m) = sum_{n1 n4 = m} beta(n1) beta(n4) n1^{theta-1}/n4."""
    U = np.zeros(x * x + 1)
    nu = np.arange(1, x + 1)
    for n1 in range(1, x + 1):
        if beta[n1] == 0.0:
            continue
        w1 = beta[n1] * float(n1) ** (theta - 1.0)
        np.add.at(U, n1 * nu, w1 * beta[1: x + 1] / nu)
    mvals = np.nonzero(U)[0]
    return mvals.astype(np.int64), U[mvals]


def selberg_sum_brute(cfg: SumConfig, table: CoefficientTable,
                      beta: np.ndarray | None = None) -> float:
    """S(theta) by the literal quadruple sum, organized over product pairs.

    Cost is quadratic in the number of distinct products (about 1.6e9 raw
    term evaluations at X = 200, cut down by the grouping); X beyond
    brute_cap is rejected with a cost estimate.
    """
    x = cfg.x
    if x > cfg.brute_cap:
        raise ValueError(
            f"X={x} exceeds the brute-force cap {cfg.brute_cap} "
            f"(~{x**4:.2e} raw terms)")
    if beta is None:
        beta = _beta_for(table, x)
    s = 1.0 - cfg.theta
    mvals, uvals = _product_weights(beta, x, cfg.theta)
    ktab = k_table(x * x, s, table, cfg.tol)
    partials = []
    chunk = 256
    for i0 in range(0, mvals.size, chunk):
        mc = mvals[i0:i0 + chunk]
        q = np.gcd.outer(mc, mvals)
        # K is looked up at m/q and n/q; uvals carry the beta signs
        block = (np.float_power(q, s)
                 * ktab[mc[:, None] // q] * ktab[mvals[None, :] // q]
                 * uvals[i0:i0 + chunk, None] * uvals[None, :])
        partials.append(float(np.sum(block)))
    return _neumaier_sum(partials)


def _beta_for(table: CoefficientTable, x: int) -> np.ndarray:
    alpha = alpha_coefficients(table, x)
    return mollifier_weights(alpha, float(x)).beta


def selberg_sum_decomposed(cfg: SumConfig, table: CoefficientTable,
                           beta: np.ndarray | None = None) -> float:
    """S(theta) via the Moebius decomposition over (d, m | d)."""
    x = cfg.x
    if beta is None:
        beta = _beta_for(table, x)
    s = 1.0 - cfg.theta
    ktab = k_table(x * x, s, table, cfg.tol)
    mu = mobius_sieve(x * x)
    nu = np.arange(1, x + 1, dtype=np.int64)
    beta_scaled1 = beta[1:] * np.float_power(nu, cfg.theta - 1.0)   # beta(n1) n1^{theta-1}
    beta_scaled4 = beta[1:] / nu                                    # beta(n4) / n4
    partials = []
    for d in range(1, x * x + 1):
        g = np.gcd(nu, d)
        d1 = d // g
        valid = d1 <= x
        if not np.any(valid):
            continue
        n1 = nu[valid]
        d1v = d1[valid]
        counts = x // d1v
        total = int(counts.sum())
        if total == 0:
            continue
        rep1 = np.repeat(n1, counts)
        repd = np.repeat(d1v, counts)
        start = np.cumsum(counts) - counts
        intra = np.arange(total) - np.repeat(start, counts) + 1
        n4 = repd * intra
        w = beta_scaled1[rep1 - 1] * beta_scaled4[n4 - 1]
        base = rep1 * n4 // d
        dsum = 0.0
        for m in divisors_from_factorization(trial_factorize(d, _small_primes(d))):
            mum = int(mu[m])
            if mum == 0:
                continue
            gdm = float(np.sum(w * ktab[base * m]))
            dsum += mum * float(d / m) ** s * gdm * gdm
        partials.append(dsum)
    return _neumaier_sum(partials)


_SP_CACHE: dict = {}


def _small_primes(n: int) -> np.ndarray:
    bound = max(100, math.isqrt(n) + 1)
    key = bound if bound <= 1000 else 1 + bound // 1000
    if key not in _SP_CACHE:
        _SP_CACHE[key] = prime_sieve(max(bound, 1000 * key))[0]
    return _SP_CACHE[key]


def mobius_k_identity(nus: tuple, theta: float, table: CoefficientTable,
                      tol: float = 1e-12) -> float:
    """Residual of the gcd-coupling Moebius identity at one tuple.

    LHS = q^{1-theta} K(nu1 nu4/q) K(nu2 nu3/q) with q = gcd(nu1 nu4, nu2 nu3);
    RHS = sum_{d|q} sum_{m|d} mu(m) (d/m)^{1-theta} K(nu1 nu4 m/d) K(nu2 nu3 m/d).
    """
    nu1, nu2, nu3, nu4 = nus
    s = 1.0 - theta
    a = nu1 * nu4
    b = nu2 * nu3
    q = math.gcd(a, b)
    lhs = q**s * k_function(a // q, s, table, tol) * k_function(b // q, s, table, tol)
    fac = trial_factorize(q, _small_primes(q))
    rhs = 0.0
    for d in divisors_from_factorization(fac):
        dfac = trial_factorize(d, _small_primes(d))
        for m in divisors_from_factorization(dfac):
            mu_m = _mu_of(m)
            if mu_m == 0:
                continue
            rhs += (mu_m * float(d / m) ** s
                    * k_function(a * m // d, s, table, tol)
                    * k_function(b * m // d, s, table, tol))
    return abs(lhs - rhs)


def _mu_of(m: int) -> int:
    out = 1
    for _, e in trial_factorize(m, _small_primes(m)):
        if e > 1:
            return 0
        out = -out
    return out


def s_theta_weighted(x: float, gamma: float, n_coprime: int, theta: float,
                     table: CoefficientTable, tol: float = 1e-12
                     ) -> tuple[float, float, float]:
    """S_theta(X, gamma, N) = sum_{nu <= X, (nu,N)=1} alpha(nu) K(nu) nu^{gamma-1} log(X/nu).

    Returns (value, envelope, ratio) with the envelope
    X^gamma sqrt(log X) prod_{p | N} (1 + 1/p)^2.
    """
    if not (0.0 <= theta <= 0.25 and 0.0 <= gamma <= 0.25):
        raise ValueError("theta and gamma must lie in [0, 1/4]")
    if n_coprime < 1:
        raise ValueError("N must be >= 1")
    xi = int(math.floor(x))
    alpha = alpha_coefficients(table, max(xi, 1))
    ktab = k_table(max(xi, 1), 1.0 - theta, table, tol)
    val = 0.0
    for nu in range(1, xi + 1):
        if math.gcd(nu, n_coprime) != 1 or alpha[nu] == 0.0:
            continue
        val += alpha[nu] * ktab[nu] * float(nu) ** (gamma - 1.0) * math.log(x / nu)
    env = x**gamma * math.sqrt(max(math.log(x), 1e-12))
    for p, _ in trial_factorize(n_coprime, _small_primes(n_coprime)):
        env *= (1.0 + 1.0 / p) ** 2
    ratio = val / env if env else float("inf")
    return val, env, ratio


def s_theta_smoothed(x: float, a: float, gamma: float, n_coprime: int,
                     theta: float, table: CoefficientTable, tol: float = 1e-12) -> float:
    """S_theta(X, A, gamma, N): the A-shifted smoothed sum over nu <= X/A."""
    xi = int(math.floor(x / a))
    if xi < 1:
        return 0.0
    alpha = alpha_coefficients(table, xi)
    ktab = k_table(xi, 1.0 - theta, table, tol)
    val = 0.0
    for nu in range(1, xi + 1):
        if math.gcd(nu, n_coprime) != 1 or alpha[nu] == 0.0:
            continue
        val += (alpha[nu] * ktab[nu] * float(nu) ** (gamma - 1.0)
                * smoothing_weight(a * nu, x))
    return val


def smoothing_identity_check(x: float, a: float, gamma: float, n_coprime: int,
                             theta: float, table: CoefficientTable,
                             tol: float = 1e-12) -> float:
    """Residual of S_theta(X,A,gamma,N) = (2/log X)(S_theta(X/A,..) - S_theta(sqrt(X)/A,..))."""
    if a < 1 or math.sqrt(x) / a < 1:
        raise ValueError("need A >= 1 and sqrt(X)/A >= 1")
    lhs = s_theta_smoothed(x, a, gamma, n_coprime, theta, table, tol)
    rhs = (2.0 / math.log(x)) * (
        s_theta_weighted(x / a, gamma, n_coprime, theta, table, tol)[0]
        - s_theta_weighted(math.sqrt(x) / a, gamma, n_coprime, theta, table, tol)[0])
    return abs(lhs - rhs)
