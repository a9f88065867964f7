import numpy as np
import pytest

from heckezeros.class_field import build_field, characters
from heckezeros.coefficients import r_coefficients, alpha_coefficients
from heckezeros.lfunc_eval import build_eval_contexts


@pytest.fixture(scope="session")
def field23():
    return build_field(23)


@pytest.fixture(scope="session")
def field47():
    return build_field(47)


@pytest.fixture(scope="session")
def field71():
    return build_field(71)


@pytest.fixture(scope="session")
def table23(field23):
    """Complex-character r table for D=23, long enough for t_max ~ 250."""
    return r_coefficients(field23, characters(field23)[1], 60000)


@pytest.fixture(scope="session")
def table23_exact(table23):
    """r(n) rounded to exact half-integers (h=3: values lie in Z/2)."""
    r = np.round(table23.r * 2.0) / 2.0
    assert np.max(np.abs(r - table23.r)) < 1e-10
    return r


@pytest.fixture(scope="session")
def ctx23(field23, table23):
    return build_eval_contexts(field23, {1: table23}, t_max=320.0)[1]


@pytest.fixture(scope="session")
def tables47(field47):
    chs = characters(field47)
    return {i: r_coefficients(field47, chs[i], 60000) for i in (1, 2)}


@pytest.fixture(scope="session")
def ctxs47(field47, tables47):
    return build_eval_contexts(field47, tables47, t_max=450.0)


@pytest.fixture(scope="session")
def alpha23(table23):
    return alpha_coefficients(table23, 10000)
