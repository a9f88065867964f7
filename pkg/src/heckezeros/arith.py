"""Shared integer-arithmetic tables and symbols.

Provides Eratosthenes / smallest-prime-factor sieves, factorization against a
sieve or by trial division, divisor-count and Moebius arrays, and the
Kronecker symbol (a|n) for n >= 1.
"""

from __future__ import annotations

import math

import numpy as np


def prime_sieve(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Primes <= n and the boolean sieve."""
    if n < 2:
        return np.array([], dtype=np.int64), np.zeros(max(n + 1, 1), dtype=bool)
    is_prime = np.ones(n + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if is_prime[p]:
            is_prime[p * p:: p] = False
    return np.nonzero(is_prime)[0].astype(np.int64), is_prime


def spf_sieve(n: int) -> np.ndarray:
    """spf[k] = smallest prime factor of k for 2 <= k <= n (spf[0] = 0, spf[1] = 1)."""
    spf = np.arange(n + 1, dtype=np.int64)
    for p in range(2, math.isqrt(n) + 1):
        if spf[p] == p:
            sl = spf[p * p:: p]
            np.minimum(sl, p, out=sl)
    return spf


def factorize(n: int, spf: np.ndarray) -> list[tuple[int, int]]:
    """Prime factorization [(p, e), ...] of n using a precomputed spf array."""
    out = []
    while n > 1:
        p = int(spf[n])
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        out.append((p, e))
    return out


def trial_factorize(n: int, primes: np.ndarray) -> list[tuple[int, int]]:
    """Factor n by trial division; primes must reach sqrt(n)."""
    out = []
    m = n
    for p in primes:
        p = int(p)
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
    if m > 1:
        out.append((m, 1))
    return out


def divisors_from_factorization(fac: list[tuple[int, int]]) -> list[int]:
    divs = [1]
    for p, e in fac:
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def divisor_count_sieve(n: int) -> np.ndarray:
    """tau[k] = number of divisors of k, 1 <= k <= n."""
    tau = np.zeros(n + 1, dtype=np.int64)
    for d in range(1, n + 1):
        tau[d::d] += 1
    return tau


def mobius_sieve(n: int) -> np.ndarray:
    """mu[k] for 0 <= k <= n (mu[0] = 0)."""
    mu = np.ones(n + 1, dtype=np.int64)
    mu[0] = 0
    primes, _ = prime_sieve(n)
    for p in primes:
        p = int(p)
        mu[p::p] *= -1
        mu[p * p:: p * p] = 0
    return mu


def squarefree(n: int) -> bool:
    if n % 4 == 0:
        return False
    p = 3
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 2
    return True


def _jacobi(a: int, m: int) -> int:
    # m odd positive
    a %= m
    sign = 1
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if m % 8 in (3, 5):
                sign = -sign
        a, m = m, a
        if a % 4 == 3 and m % 4 == 3:
            sign = -sign
        a %= m
    return sign if m == 1 else 0


def kronecker_symbol(a: int, n: int) -> int:
    """Kronecker symbol (a|n) for n >= 1, completely multiplicative in n."""
    if n < 1:
        raise ValueError("kronecker_symbol requires n >= 1")
    if n == 1:
        return 1
    e = 0
    while n % 2 == 0:
        n //= 2
        e += 1
    if e and a % 2 == 0:
        return 0
    s2 = 1 if a % 8 in (1, 7) else -1  # (a|2) for odd a
    result = s2**e if e else 1
    return result * _jacobi(a, n)
