import math
import re

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from smoothlearn import INFINITY, DomainError, LossParams, OutOfRegionError, bound_value, series_dyadic_lower
from smoothlearn.bounds import (
    BOUND_NAMES,
    dyadic_partial_sum,
    grid_side,
    holder_constant_ratio,
    lemma_residual_2qin,
    lemma_residual_2qout,
    lemma_residual_uv,
    sample_2qin,
    sample_2qout,
    sample_uv,
    uv_threshold,
)

# 30-digit mpmath evaluations of the closed forms
LOW_CONSTANT_Q15 = 0.199026692033641120700
DYADIC_SERIES = {0.1: 0.242201599441534352, 0.25: 0.104365314052179990, 0.4: 0.0562543790057215688}
DYADIC_TEN_TERMS = {0.1: 0.174362384566922517, 0.25: 0.101309590290368374, 0.4: 0.0561559563442131583}
HOLDER = {1.1: 1.86658638718009855, 1.5: 1.03928987762541177}


def value(name, **kw):
    n = kw.pop("n", None)
    return bound_value(name, LossParams(**kw), n=n).value


# -- closed forms ---------------------------------------------------------------------


def test_linint_ceiling_at_q_one_and_a_half():
    assert value("2qup", q=1.5) == 2.0


def test_quadratic_floor_at_q_one_and_a_half():
    assert value("2qlow", q=1.5) == pytest.approx(LOW_CONSTANT_Q15, rel=1e-14)


def test_general_floor_reduces_to_quadratic_floor_at_p_two():
    assert value("pqlow", p=2.0, q=1.5) == pytest.approx(LOW_CONSTANT_Q15, rel=1e-14)


def test_nn_ceiling_example():
    assert value("nnupper", p=3.0, d=2) == 48.0


def test_grid_floor_examples():
    assert value("gridlow", p=1.0, d=2, n=2) == 1.0
    assert value("gridlow", p=1.0, d=2, n=8) == 4.0
    assert value("gridlow", p=1.0, d=2, m=70) == 4.0


def test_grid_floor_without_budget_is_infinite_below_d():
    rep = bound_value("gridlow", LossParams(p=1.0, d=2))
    assert rep.infinite and rep.kind == "lower"


@pytest.mark.parametrize("p", [1.1, 1.5])
def test_holder_ceiling(p):
    assert value("holder", p=p) == pytest.approx(HOLDER[p], rel=1e-14)


@pytest.mark.parametrize(
    "name,kw,hint",
    [
        ("nnupper", {"p": 2.0, "d": 2}, "p > d"),
        ("2qup", {"q": 2.5}, "q in (1, 2)"),
        ("holder", {"p": 2.0}, "p in (1, 2)"),
        ("boundedm_upper", {"p": 1.0, "d": 2}, "trial budget"),
        ("pq_exact", {"p": 3.0, "q": 1.25}, "p >= 6"),
        ("dyadic", {"p": 1.6}, "eps"),
    ],
)
def test_out_of_region_names_the_hypothesis(name, kw, hint):
    with pytest.raises(OutOfRegionError, match=re.escape(hint)):
        value(name, **kw)


def test_unknown_bound_name():
    with pytest.raises(OutOfRegionError):
        value("opt")


@pytest.mark.parametrize("p,q", [(4.0, 1.5), (2.0, 2.0), (2.0, 3.0), (6.0, 1.25)])
def test_exact_region_returns_one(p, q):
    assert value("pq_exact", p=p, q=q) == 1.0


@pytest.mark.parametrize("p,q", [(3.9, 1.5), (1.9, 2.5), (5.9, 1.25)])
def test_open_region_is_not_claimed(p, q):
    with pytest.raises(OutOfRegionError):
        value("pq_exact", p=p, q=q)


def test_all_names_are_known():
    params = LossParams(p=1.2, q=1.5, d=2, m=64)
    for name in BOUND_NAMES:
        try:
            rep = bound_value(name, params)
        except OutOfRegionError:
            continue
        assert rep.value >= 0 and rep.kind in ("lower", "upper")


# -- sandwich consistency ---------------------------------------------------------------


@given(st.floats(1.0001, 1.9999))
def test_quadratic_floor_below_linint_ceiling(q):
    assert value("2qlow", q=q) <= value("2qup", q=q)


@given(st.integers(1, 4), st.floats(0.05, 0.95), st.integers(1, 10**6))
def test_grid_floor_below_bounded_budget_ceiling(d, frac, m):
    p = frac * d
    kw = dict(p=p, d=d, m=m)
    assert value("gridlow", **kw) <= value("boundedm_upper", **kw) * (1 + 1e-12)
    assert value("gridlow", **kw) <= value("boundedm_upper_finite", **kw) * (1 + 1e-12)


@given(st.integers(1, 3), st.floats(0.05, 0.95), st.integers(1, 10**6))
def test_finite_budget_ceiling_never_exceeds_asymptotic_form(d, frac, m):
    kw = dict(p=frac * d, d=d, m=m)
    assert value("boundedm_upper_finite", **kw) <= value("boundedm_upper", **kw) * (1 + 1e-12)


@given(st.floats(1.0001, 1.4999))
def test_dyadic_floor_below_holder_ceiling(p):
    assert value("dyadic", p=p) <= value("holder", p=p)


def test_grid_side():
    assert [grid_side(m, 2) for m in (1, 3, 4, 16, 17, 4096)] == [1, 1, 2, 4, 4, 64]
    assert grid_side(27, 3) == 3 and grid_side(26, 3) == 2


# -- dyadic series --------------------------------------------------------------------


@pytest.mark.parametrize("eps", [0.1, 0.25, 0.4])
def test_series_closed_form_matches_oracle(eps):
    assert series_dyadic_lower(eps) == pytest.approx(DYADIC_SERIES[eps], rel=1e-13)
    assert dyadic_partial_sum(eps, 10) == pytest.approx(DYADIC_TEN_TERMS[eps], rel=1e-13)


def test_closed_form_matches_partial_sum_of_two_hundred_terms():
    assert dyadic_partial_sum(0.25, 200) == pytest.approx(series_dyadic_lower(0.25), rel=1e-10)


@given(st.floats(1e-4, 0.4999))
def test_closed_form_matches_truncated_series(eps):
    assert dyadic_partial_sum(eps) == pytest.approx(series_dyadic_lower(eps), rel=1e-10)


def test_series_near_upper_end_is_finite():
    v = series_dyadic_lower(0.5 - 1e-12)
    assert 0 < v < math.inf


def test_series_grows_like_inverse_square_root():
    eps = np.geomspace(1e-4, 0.4, 200)
    scaled = np.array([series_dyadic_lower(e) * math.sqrt(e) for e in eps])
    assert scaled.min() > 0.01 and scaled.max() < 1.0


def test_series_domain():
    with pytest.raises(DomainError):
        series_dyadic_lower(0.5)


# -- residuals -------------------------------------------------------------------------


@given(st.floats(1e-3, 10), st.floats(1e-3, 10), st.floats(1.001, 1.999))
def test_2qin_vanishes_at_zero(a, b, q):
    assert lemma_residual_2qin(a, b, q, 0.0) == 0.0


def test_2qin_sample_points():
    assert lemma_residual_2qin(1.0, 1.0, 1.5, 0.5) >= 0
    assert np.isfinite(lemma_residual_2qin(0.3, 0.7, 1.9, -0.3 + 1e-15))
    assert lemma_residual_2qin(0.3, 0.7, 1.9, -0.3 + 1e-15) >= 0


def test_2qin_domain():
    with pytest.raises(DomainError):
        lemma_residual_2qin(1.0, 1.0, 1.5, 1.0)


def test_2qout_at_right_edge_matches_reduced_form():
    a, b, q = 0.3, 0.5, 1.4
    reduced = a * ((a + b) / a) ** q - (a + b) - (q - 1) * b**q / (a + b) ** (q - 1)
    assert lemma_residual_2qout(a, b, q, b) == pytest.approx(reduced, rel=1e-12)
    assert reduced >= 0


def test_2qout_sample_point():
    assert lemma_residual_2qout(0.4, 0.4, 1.5, 1.0) >= 0


@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99), st.floats(1.01, 1.99))
def test_2qout_mirror_symmetry(a, b, q):
    assert lemma_residual_2qout(a, b, q, -a) == pytest.approx(lemma_residual_2qout(b, a, q, a), rel=1e-12, abs=1e-15)


def test_2qout_domain():
    with pytest.raises(DomainError):
        lemma_residual_2qout(0.4, 0.4, 1.5, 0.1)
    with pytest.raises(DomainError):
        lemma_residual_2qout(0.6, 0.6, 1.5, 2.0, corollary=True)


def test_uv_at_binding_configuration():
    q, a = 1.5, 0.5
    u = uv_threshold(q, a) / 2
    assert lemma_residual_uv(q, a, u, -u) > 0


def test_uv_with_v_zero():
    q, a = 1.5, 0.5
    assert lemma_residual_uv(q, a, uv_threshold(q, a), 0.0) > 0


def test_uv_grows_when_scaled_up():
    q, a = 1.3, 0.4
    u = uv_threshold(q, a)
    v = -0.1
    assert lemma_residual_uv(q, a, 2 * u, 2 * v) > lemma_residual_uv(q, a, u, v)


def test_uv_precondition():
    with pytest.raises(DomainError):
        lemma_residual_uv(1.5, 0.5, 0.1, 0.0)


def test_residuals_vectorise(rng):
    a, b, q, x = sample_2qin(rng, 1000)
    vec = lemma_residual_2qin(a, b, q, x)
    assert vec.shape == (1000,)
    assert vec[7] == lemma_residual_2qin(a[7], b[7], q[7], x[7])


def test_samplers_respect_domains(rng):
    a, b, q, x = sample_2qin(rng, 10**4)
    assert np.all((x > -a) & (x < b)) and np.all((q > 1) & (q < 2))
    a, b, q, x = sample_2qout(rng, 10**4, corollary=True)
    assert np.all(a + b <= 1.0) and np.all((x <= -a) | (x >= b))
    q, a, u, v = sample_uv(rng, 10**4)
    assert np.all(np.abs(u - v) >= uv_threshold(q, a) * (1 - 1e-12))


# -- elementary inequality -------------------------------------------------------------


def test_holder_constant_ratio_is_at_most_one():
    p = np.linspace(1.0 + 1e-6, 2.0 - 1e-6, 10**4)
    assert np.all(holder_constant_ratio(p) <= 1.0 + 1e-12)
