import math

import numpy as np

from heckezeros.arith import (divisor_count_sieve, divisors_from_factorization,
                              factorize, kronecker_symbol, mobius_sieve,
                              prime_sieve, spf_sieve, squarefree,
                              trial_factorize)


def test_prime_sieve_counts():
    primes, is_prime = prime_sieve(1000)
    assert len(primes) == 168
    assert is_prime[997] and not is_prime[999]


def test_spf_and_factorize():
    spf = spf_sieve(10000)
    assert factorize(9999, spf) == [(3, 2), (11, 1), (101, 1)]
    assert factorize(1024, spf) == [(2, 10)]
    primes, _ = prime_sieve(100)
    assert trial_factorize(9991, primes) == [(97, 1), (103, 1)]


def test_divisor_count_matches_enumeration():
    tau = divisor_count_sieve(500)
    for n in (1, 12, 360, 499):
        assert tau[n] == sum(1 for d in range(1, n + 1) if n % d == 0)


def test_divisors_from_factorization():
    assert divisors_from_factorization([(2, 2), (3, 1)]) == [1, 2, 3, 4, 6, 12]


def test_mobius_small_values():
    mu = mobius_sieve(60)
    assert list(mu[1:11]) == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]


def test_squarefree():
    assert squarefree(2 * 3 * 5 * 7)
    assert not squarefree(12)


def test_kronecker_legendre_oracle():
    # for odd prime p not dividing a: (a|p) = a^((p-1)/2) mod p
    primes, _ = prime_sieve(200)
    for a in (-23, -31, -47, -71, 5, -4):
        for p in primes[1:]:
            p = int(p)
            if a % p == 0:
                assert kronecker_symbol(a, p) == 0
                continue
            legendre = pow(a % p, (p - 1) // 2, p)
            expected = 1 if legendre == 1 else -1
            assert kronecker_symbol(a, p) == expected, (a, p)


def test_kronecker_completely_multiplicative():
    for a in (-23, -47, -84):
        vals = [kronecker_symbol(a, n) for n in range(1, 1001)]
        for n in range(1, 101):
            for m in range(1, 1000 // n + 1):
                assert vals[n * m - 1] == vals[n - 1] * vals[m - 1]


def test_kronecker_two_and_unit():
    assert kronecker_symbol(-23, 1) == 1
    # -23 = 1 mod 8 so 2 splits
    assert kronecker_symbol(-23, 2) == 1
    assert kronecker_symbol(-23, 23) == 0
    assert math.prod(kronecker_symbol(-47, n) for n in (3, 7)) == kronecker_symbol(-47, 21)
