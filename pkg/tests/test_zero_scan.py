import math

import numpy as np
import pytest

from heckezeros.zero_scan import (CombinationSpec, count_zeros_region,
                                  default_step, frak_f, frak_f_imag_residue,
                                  proportion_report, scan_sign_changes)


@pytest.fixture(scope="module")
def spec23(field23, ctx23):
    return CombinationSpec(fld=field23, terms=[(1, 1.0)], contexts={1: ctx23})


@pytest.fixture(scope="module")
def spec47(field47, ctxs47):
    return CombinationSpec(fld=field47, terms=[(1, 1.0), (2, 1.0)], contexts=ctxs47)


def test_combination_validation(field47, ctxs47):
    with pytest.raises(ValueError):
        CombinationSpec(fld=field47, terms=[], contexts=ctxs47)
    with pytest.raises(ValueError):
        CombinationSpec(fld=field47, terms=[(1, 0.0)], contexts=ctxs47)
    with pytest.raises(ValueError):  # 4 is the conjugate of 1: same L-function
        CombinationSpec(fld=field47, terms=[(1, 1.0), (4, 2.0)], contexts=ctxs47)


def test_frak_f_single_term_and_linearity(spec23, ctx23, field23):
    for t in (0.0, 12.5, 31.0):
        assert frak_f(spec23, t) == pytest.approx(ctx23.lambda_scaled(t), abs=1e-14)
    double = CombinationSpec(fld=field23, terms=[(1, 2.0)], contexts={1: ctx23})
    ts = np.array([3.0, 17.0, 99.5])
    assert np.allclose(frak_f(double, ts), 2.0 * frak_f(spec23, ts), atol=1e-13)


def test_frak_f_termwise_sum(spec47, ctxs47):
    t = 10.0
    direct = ctxs47[1].lambda_scaled(t) + ctxs47[2].lambda_scaled(t)
    assert frak_f(spec47, t) == pytest.approx(direct, abs=1e-13)


def test_frak_f_imag_residue(spec47):
    assert frak_f_imag_residue(spec47, 25.0) < 2 * 1e-9


def test_constant_sign_interval_empty(spec23):
    # no zeros of the single-L detector in (0, 5): first zero is near 5.11
    rep = scan_sign_changes(spec23, 0.2, 4.8)
    assert rep.n0 == 0 and rep.zeros == []


def test_scan_matches_box_count_D23(spec23):
    rep = scan_sign_changes(spec23, 0.05, 30.0)
    nbox = count_zeros_region(spec23, -1.0, 2.5, 0.05, 30.0)
    assert rep.n0 == nbox == 21
    # every bracket is genuinely sign-changing and tight
    for z, w in rep.zeros:
        assert w <= rep.refine_tol * (1 + 1e-9)
        lo, hi = z - w, z + w
        assert frak_f(spec23, lo) * frak_f(spec23, hi) < 0


def test_step_halving_never_decreases_n0(spec23):
    rep = scan_sign_changes(spec23, 0.05, 40.0)
    rep2 = scan_sign_changes(spec23, 0.05, 40.0, step=rep.step / 2)
    assert rep2.n0 >= rep.n0
    # m=1 stability: the zero list is unchanged up to refinement
    assert rep2.n0 == rep.n0
    z1 = np.array([z for z, _ in rep.zeros])
    z2 = np.array([z for z, _ in rep2.zeros])
    assert np.max(np.abs(z1 - z2)) < 2 * rep.step


def test_scan_validates_arguments(spec23):
    with pytest.raises(ValueError):
        scan_sign_changes(spec23, 5.0, 4.0)
    with pytest.raises(ValueError):
        scan_sign_changes(spec23, 1.0, 2.0, step=0.1, refine_tol=0.2)


def test_count_zero_free_euler_region(spec47):
    assert count_zeros_region(spec47, 2.0, 2.5, 1.0, 120.0) == 0


def test_count_rejects_bad_boxes(spec23):
    with pytest.raises(ValueError):
        count_zeros_region(spec23, -1.0, 2.5, 0.0, 10.0)
    with pytest.raises(ValueError):
        count_zeros_region(spec23, 2.5, -1.0, 1.0, 10.0)


def test_count_additivity(spec47):
    a, mid, b = 0.5, 61.7, 123.4
    whole = count_zeros_region(spec47, -1.0, 2.5, a, b)
    parts = (count_zeros_region(spec47, -1.0, 2.5, a, mid)
             + count_zeros_region(spec47, -1.0, 2.5, mid, b))
    assert whole == parts


def test_n0_le_nbox_containment(spec47):
    rep = scan_sign_changes(spec47, 50.0, 150.0)
    nbox = count_zeros_region(spec47, -1.0, 2.5, 50.0, 150.0)
    assert rep.n0 <= nbox


def test_default_step_formula():
    assert default_step(200.0, 23) == pytest.approx(
        1.0 / (4.0 * math.log(203.0 * math.sqrt(23.0))))


def test_proportion_report_fields(spec23):
    rep = proportion_report(spec23, [40.0])
    row = rep["rows"][0]
    assert 0.0 <= row["ratio"] <= 1.0
    assert row["n0"] <= row["n_box"]
    assert row["n0_over_TlogT"] > 0
