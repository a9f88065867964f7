import math

import numpy as np
import pytest

from heckezeros.arith import divisor_count_sieve, prime_sieve
from heckezeros.class_field import Form, build_field, characters
from heckezeros.coefficients import (CoefficientTable, TableInvariantError,
                                     abs_alpha_convolution, alpha_coefficients,
                                     alpha_prime_power, capital_b, k_function,
                                     k_table, mollifier_weights,
                                     r_coefficients, smoothing_weight,
                                     theta_counts, verify_hecke)


def brute_theta(form, n):
    a, b, c = form.a, form.b, form.c
    count = 0
    B = 2 * int(math.isqrt(4 * n)) + 2
    for x in range(-B, B + 1):
        for y in range(-B, B + 1):
            if a * x * x + b * x * y + c * y * y == n:
                count += 1
    return count


def test_theta_counts_examples():
    r = theta_counts(Form(1, 0, 1), 10, 4)
    assert r[1] == 4           # (+-1,0),(0,+-1)
    assert r[2] == 4 and r[3] == 0
    assert theta_counts(Form(1, 1, 6), 10, 23)[2] == 0
    assert theta_counts(Form(2, 1, 3), 10, 23)[2] == 2


@pytest.mark.parametrize("form,d", [(Form(1, 1, 6), 23), (Form(2, 1, 3), 23),
                                    (Form(3, 1, 4), 47)])
def test_theta_counts_vs_brute(form, d):
    r = theta_counts(form, 40, d)
    for n in range(1, 41):
        assert r[n] == brute_theta(form, n), n


def test_theta_rejects_oversize():
    with pytest.raises(ValueError):
        theta_counts(Form(1, 1, 6), 10**7 + 1, 23)
    with pytest.raises(MemoryError):
        theta_counts(Form(1, 1, 6), 10**7, 23, memory_cap_bytes=1000)


def test_r_table_spec_examples(field23, table23):
    r = table23.r
    assert r[1] == 1.0
    assert r[2] == -1.0        # (1/2)(0 + w*2 + conj(w)*2)
    # inert primes have r(p) = 0
    assert r[5] == 0.0 and r[7] == 0.0
    # principal character: r(n) = sum_{d|n} chi(d); r(4) = 3
    t0 = r_coefficients(field23, characters(field23)[0], 5000)
    assert t0.r[4] == 3.0


def test_conjugate_tables_bitwise_identical(field47):
    chs = characters(field47)
    ta = r_coefficients(field47, chs[1], 4000)
    tb = r_coefficients(field47, chs[chs[1].conjugate_index], 4000)
    assert np.array_equal(ta.r, tb.r)


def test_tau_majorant(table23):
    tau = divisor_count_sieve(table23.N)
    assert np.all(np.abs(table23.r[1:]) <= tau[1:] + 1e-9)


def test_verify_hecke_clean_and_fault_injection(field23, table23):
    rep = verify_hecke(table23, field23)
    assert rep.ok and rep.checked_coprime > 50000
    corrupt = CoefficientTable(D=table23.D, char_index=table23.char_index,
                               conjugate_index=table23.conjugate_index,
                               is_principal=False, is_complex=True,
                               N=100, r=table23.r[:101].copy(), chi=table23.chi)
    corrupt.r[6] += 0.5
    bad = verify_hecke(corrupt, field23)
    assert not bad.ok
    assert any(v[1] == 6 for v in bad.violations)


def test_construction_fails_loudly_on_bad_orientation(field23):
    # a fake character breaking the homomorphism must be caught
    ch = characters(field23)[1]
    import copy
    broken = copy.deepcopy(ch)
    broken.angles[1], broken.angles[2] = broken.angles[2], broken.angles[1] * 2
    with pytest.raises(TableInvariantError):
        r_coefficients(field23, broken, 3000)


def test_partial_sum_r_squared_linear_growth(field23):
    table = r_coefficients(field23, characters(field23)[1], 10**6)
    sums = {x: float(np.sum(table.r[1: x + 1] ** 2)) for x in (10**4, 10**5, 10**6)}
    cs = [sums[x] / x for x in sums]
    assert max(cs) / min(cs) < 1.5, cs


def test_alpha_examples_and_recursion(table23):
    alpha = alpha_coefficients(table23, 100)
    assert alpha[1] == 1.0
    assert alpha[2] == pytest.approx(0.5)            # -r(2)/2 with r(2) = -1
    # direct expansion check of the prime-power recursion
    rp, chip = -1.0, 1
    assert alpha_prime_power(rp, chip, 2) == pytest.approx(chip / 2 - rp**2 / 8)
    assert alpha_prime_power(rp, chip, 3) == pytest.approx(rp * chip / 4 - rp**3 / 16)


def test_alpha_convolution_inverse_identity(table23, alpha23):
    # sum_{m v1 v2 = n} r(m) a(v1) a(v2) = [n = 1], brute triple convolution
    X = 10**4
    conv2 = np.zeros(X + 1)
    for i in range(1, X + 1):
        if alpha23[i]:
            conv2[i:: i][: X // i] += alpha23[i] * alpha23[1: X // i + 1]
    full = np.zeros(X + 1)
    for m in range(1, X + 1):
        if table23.r[m]:
            full[m:: m][: X // m] += table23.r[m] * conv2[1: X // m + 1]
    assert abs(full[1] - 1.0) < 1e-9
    assert np.max(np.abs(full[2:])) < 1e-9


def test_mollifier_weight_branches(alpha23):
    mt = mollifier_weights(alpha23, 100.0)
    assert mt.beta[5] == mt.alpha[5]                   # nu < sqrt(X)
    assert mt.beta[100] == 0.0                         # L(X) = 0
    assert mt.beta[10] == pytest.approx(mt.alpha[10])  # nu = sqrt(X): weight 1
    mt1 = mollifier_weights(alpha23, 1.0)
    assert mt1.beta[1] == 1.0 and mt1.nu_max == 1      # X = 1: eta == 1
    assert smoothing_weight(50.0, 100.0) == pytest.approx(2 * math.log(2.0) / math.log(100.0))


def test_k_function_examples(table23):
    assert k_function(1, 1.0, table23) == 1.0
    # inert prime: numerator vanishes identically
    assert k_function(5, 0.8, table23) == 0.0
    with pytest.raises(ValueError):
        k_function(6, 0.5, table23)


def test_k_function_direct_sum_oracle(table23):
    # 200-term direct summation of both series at s = 1
    for p in (2, 3, 13):
        rp = [table23.r_prime_power(p, j) for j in range(220)]
        num = math.fsum(rp[1 + j] * rp[j] * p**-j for j in range(200))
        den = math.fsum(rp[j] ** 2 * p**-j for j in range(200))
        assert k_function(p, 1.0, table23) == pytest.approx(num / den, abs=1e-11)


def test_k_table_matches_pointwise(table23):
    kt = k_table(2000, 0.75, table23)
    for m in (2, 12, 36, 100, 1997):
        assert kt[m] == pytest.approx(k_function(m, 0.75, table23), abs=1e-12)


def test_k_tau_bound_eq30(table23):
    tau = divisor_count_sieve(10**4)
    for theta in (0.0, 0.125, 0.25):
        kt = k_table(10**4, 1.0 - theta, table23)
        assert np.all(kt[1:] <= tau[1:] * (1 + 1e-9))


def test_abs_alpha_convolution_bounds(table23, alpha23):
    b = abs_alpha_convolution(alpha23)
    tau = divisor_count_sieve(10**4)
    assert np.all(b[1:] <= tau[1:] + 1e-9)
    primes, _ = prime_sieve(10**4)
    for p in primes[:100]:
        assert b[p] == pytest.approx(abs(table23.r[p]), abs=1e-12)
        assert capital_b(int(p), table23) == pytest.approx(abs(table23.r[p]), abs=1e-12)
    assert capital_b(8, table23) == 4.0  # tau(8)
