import math

import numpy as np
import pytest

from heckezeros.coefficients import (alpha_coefficients, k_function, k_table,
                                     mollifier_weights)
from heckezeros.selberg_sums import (SumConfig, mobius_k_identity,
                                     s_theta_weighted, selberg_sum_brute,
                                     selberg_sum_decomposed,
                                     smoothing_identity_check)


def literal_quadruple_sum(table, x, theta):
    """Order-independent oracle: fsum of the literal quadruple sum."""
    beta = mollifier_weights(alpha_coefficients(table, x), float(x)).beta
    s = 1.0 - theta
    kc = {}

    def K(m):
        if m not in kc:
            kc[m] = k_function(m, s, table)
        return kc[m]

    terms = []
    for n1 in range(1, x + 1):
        for n2 in range(1, x + 1):
            for n3 in range(1, x + 1):
                for n4 in range(1, x + 1):
                    q = math.gcd(n1 * n4, n2 * n3)
                    terms.append(beta[n1] * beta[n2] * beta[n3] * beta[n4]
                                 / (n2 * n4) * (q / (n1 * n3)) ** s
                                 * K(n1 * n4 // q) * K(n2 * n3 // q))
    return math.fsum(sorted(terms))      # summation-order independent


def test_config_validation():
    with pytest.raises(ValueError):
        SumConfig(x=10, theta=0.3)
    with pytest.raises(ValueError):
        SumConfig(x=0, theta=0.1)


def test_x_equals_one_is_one(table23):
    cfg = SumConfig(x=1, theta=0.125)
    assert selberg_sum_brute(cfg, table23) == 1.0
    assert selberg_sum_decomposed(cfg, table23) == 1.0


def test_brute_cap_rejected(table23):
    with pytest.raises(ValueError) as err:
        selberg_sum_brute(SumConfig(x=300, theta=0.0), table23)
    assert "cap" in str(err.value)


@pytest.mark.parametrize("x,theta", [(4, 0.0), (4, 0.25), (7, 0.125)])
def test_brute_matches_literal_oracle(table23, x, theta):
    cfg = SumConfig(x=x, theta=theta)
    got = selberg_sum_brute(cfg, table23)
    want = literal_quadruple_sum(table23, x, theta)
    assert got == pytest.approx(want, abs=1e-9, rel=1e-12)
    assert isinstance(got, float)


@pytest.mark.parametrize("x", [10, 25])
@pytest.mark.parametrize("theta", [0.0, 0.125, 0.25])
def test_brute_equals_decomposed(table23, x, theta):
    cfg = SumConfig(x=x, theta=theta)
    b = selberg_sum_brute(cfg, table23)
    d = selberg_sum_decomposed(cfg, table23)
    assert abs(b - d) <= 1e-6 * max(abs(b), 1e-30)


def test_mobius_identity_trivial_gcd(table23):
    # q = 1: both sides are K(n1 n4) K(n2 n3) exactly
    assert mobius_k_identity((3, 7, 11, 5), 0.125, table23) < 1e-12


def test_mobius_identity_prime_gcd_structure(table23):
    # q = p: RHS has exactly the (d, m) pairs (1,1), (p,1), (p,p)
    p = 3
    nus = (p, p, 2, 1)
    s = 1.0 - 0.2
    a, b = nus[0] * nus[3], nus[1] * nus[2]
    q = math.gcd(a, b)
    assert q == p
    rhs = (k_function(a, s, table23) * k_function(b, s, table23)
           + p**s * k_function(a // p, s, table23) * k_function(b // p, s, table23)
           - k_function(a, s, table23) * k_function(b, s, table23))
    lhs = q**s * k_function(a // q, s, table23) * k_function(b // q, s, table23)
    assert lhs == pytest.approx(rhs, abs=1e-12)
    assert mobius_k_identity(nus, 0.2, table23) < 1e-12


def test_mobius_identity_random_tuples(table23):
    rng = np.random.default_rng(14)
    worst = 0.0
    for _ in range(120):
        nus = tuple(int(v) for v in rng.integers(1, 10**4, 4))
        theta = float(rng.choice([0.0, 0.1, 0.25]))
        lhs_scale = 1.0
        worst = max(worst, mobius_k_identity(nus, theta, table23) / lhs_scale)
    assert worst < 1e-9


def test_s_theta_hand_expansion(table23):
    theta, gamma = 0.1, 0.2
    val, env, ratio = s_theta_weighted(3.0, gamma, 1, theta, table23)
    alpha = alpha_coefficients(table23, 3)
    kt = k_table(3, 1 - theta, table23)
    hand = math.log(3.0) + alpha[2] * kt[2] * 2.0 ** (gamma - 1) * math.log(1.5)
    assert val == pytest.approx(hand, abs=1e-14)
    assert ratio == pytest.approx(val / env)


def test_s_theta_coprimality_degenerate(table23):
    # N divisible by all primes <= X: only nu = 1 survives
    val, _, _ = s_theta_weighted(10.0, 0.2, 2 * 3 * 5 * 7, 0.15, table23)
    assert val == pytest.approx(math.log(10.0), abs=1e-14)


def test_s_theta_parameter_guards(table23):
    with pytest.raises(ValueError):
        s_theta_weighted(10.0, 0.3, 1, 0.1, table23)
    with pytest.raises(ValueError):
        s_theta_weighted(10.0, 0.1, 0, 0.1, table23)


def test_s_theta_ratio_bounded_across_x(table23):
    ratios = [abs(s_theta_weighted(float(x), 0.1, 6, 0.1, table23)[2])
              for x in (10, 100, 1000)]
    assert max(ratios) < 10.0 * max(min(ratios), 0.05)


def test_smoothing_identity_random_grid(table23):
    rng = np.random.default_rng(4)
    for _ in range(12):
        x = float(rng.uniform(9.0, 150.0))
        a = float(rng.uniform(1.0, math.sqrt(x)))
        res = smoothing_identity_check(x, a, 0.2, 3, 0.1, table23)
        assert res < 1e-9, (x, a)


def test_smoothing_identity_edge_cases(table23):
    # A = 1 definitional case
    assert smoothing_identity_check(25.0, 1.0, 0.0, 1, 0.0, table23) < 1e-12
    # X/A < 2: both sides reduce to the nu = 1 terms
    assert smoothing_identity_check(9.0, 2.95, 0.1, 1, 0.1, table23) < 1e-12
    with pytest.raises(ValueError):
        smoothing_identity_check(9.0, 4.0, 0.1, 1, 0.1, table23)
