import math

import numpy as np
import pytest

from conftest import CBRT_P, COS_P, SUP_DERIV_CBRT
from fixiter.errors import ConfigError, DomainError, NumericError
from fixiter.mappings import (CATALOG, TOL, Mapping, PropertyReport, builtin_cbrt_map,
                              check_condition_c, check_contraction, check_nonexpansive,
                              check_prop1_iii, check_quasi_nonexpansive, default_grid,
                              estimate_contraction_modulus, fixed_point_reference,
                              get_mapping, grid_points, perturbed)
from fixiter.numerics import BoxDomain, Point, distance

GRID = 300


def test_catalog_ids():
    assert set(CATALOG) == {"cbrt", "half", "cosine", "identity", "double"}
    with pytest.raises(ConfigError):
        get_mapping("tan")


def test_cbrt_map(cbrt):
    p = Point.of(1.521379706804568)
    assert abs(cbrt(p).coords[0] - p.coords[0]) <= math.ulp(p.coords[0]) * 2
    assert cbrt(Point.of(0.0)).coords[0] == pytest.approx(1.2599210498948731648, abs=1e-15)
    assert cbrt.domain == BoxDomain.interval(0.0, 4.0)
    assert cbrt.fixed_point_hint == p


def test_mapping_rejects_non_self_map():
    with pytest.raises(ConfigError):
        Mapping("grow", BoxDomain.interval(0.0, 1.0), lambda x: Point.of(x[0] + 0.5))
    with pytest.raises(ConfigError):
        Mapping("bad", BoxDomain.interval(0.0, 1.0), lambda x: x, theta_hint=1.0)


def test_batch_agrees_with_scalar_eval():
    for mid in CATALOG:
        m = get_mapping(mid)
        xs = grid_points(m.domain, 101)
        scalar = np.array([m(Point(tuple(r))).coords for r in xs])
        np.testing.assert_allclose(m.eval_many(xs), scalar, rtol=0, atol=4e-16)


def test_grid_points_shape():
    box = BoxDomain(Point.of(0.0, 0.0), Point.of(1.0, 2.0))
    assert grid_points(box, 100).shape == (100, 2)
    assert grid_points(BoxDomain.interval(0, 4), 7).shape == (7, 1)
    with pytest.raises(ConfigError):
        grid_points(box, 1)


def test_default_grid_env(monkeypatch):
    monkeypatch.delenv("FIXITER_GRID", raising=False)
    assert default_grid() == 10_000
    monkeypatch.setenv("FIXITER_GRID", "123")
    assert default_grid() == 123
    monkeypatch.setenv("FIXITER_GRID", "lots")
    with pytest.raises(ConfigError):
        default_grid()


def test_modulus_linear_and_identity(half):
    for n in (2, 17, 1000):
        assert estimate_contraction_modulus(half, n) == 0.5
        assert estimate_contraction_modulus(get_mapping("identity"), n) == 1.0


def test_modulus_cbrt_against_derivative(cbrt):
    est = estimate_contraction_modulus(cbrt, 10_000)
    # lower bound on sup |T'| = T'(0), approached from below
    assert est <= SUP_DERIV_CBRT
    assert est == pytest.approx(SUP_DERIV_CBRT, abs=1e-4)


def test_modulus_brute_force_pairs(cbrt):
    # all pairs, no 1-D shortcut
    xs = np.linspace(0.0, 4.0, 60)
    tx = (xs + 2.0) ** (1.0 / 3.0)
    brute = max(abs(tx[i] - tx[j]) / abs(xs[i] - xs[j])
                for i in range(60) for j in range(60) if i != j)
    assert estimate_contraction_modulus(cbrt, 60) == pytest.approx(brute, rel=1e-12)


def test_modulus_2d_map():
    box = BoxDomain(Point.of(-1.0, -1.0), Point.of(1.0, 1.0))
    c, s = math.cos(0.3), math.sin(0.3)
    rot = Mapping("rot", box, lambda x: Point.of(0.5 * (c * x[0] - s * x[1]),
                                                 0.5 * (s * x[0] + c * x[1])),
                  batch=lambda xs: 0.5 * xs @ np.array([[c, s], [-s, c]]))
    assert estimate_contraction_modulus(rot, 400) == pytest.approx(0.5, rel=1e-12)
    p = fixed_point_reference(rot)
    assert distance(p, Point.of(0.0, 0.0)) < 1e-15
    assert check_condition_c(rot, 100).passed


def test_modulus_degenerate_domain():
    m = Mapping("pt", BoxDomain.interval(1.0, 1.0), lambda x: x)
    with pytest.raises(DomainError):
        estimate_contraction_modulus(m, 10)


@pytest.mark.parametrize("mid", ["cbrt", "cosine", "half"])
def test_modulus_nondecreasing_in_grid(mid):
    m = get_mapping(mid)
    ests = [estimate_contraction_modulus(m, n) for n in (3, 10, 100, 1000, 10_000)]
    assert all(b >= a for a, b in zip(ests, ests[1:]))
    assert ests[-1] < 1.0


@pytest.mark.parametrize("mid", ["cbrt", "half", "cosine", "identity"])
def test_condition_c_passes(mid):
    m = get_mapping(mid)
    r = check_condition_c(m, GRID)
    assert r.passed and r.witness is None
    assert r.samples_checked == GRID * (GRID - 1)


def test_condition_c_fails_on_double():
    m = get_mapping("double")
    r = check_condition_c(m, GRID)
    assert r.verdict == "fail"
    x, y = r.witness
    assert x != y
    # re-evaluate the defining implication
    assert 0.5 * distance(x, m(x)) <= distance(x, y)
    assert distance(m(x), m(y)) > distance(x, y)
    assert distance(m(x), m(y)) == pytest.approx(2 * distance(x, y))


@pytest.mark.parametrize("mid,p", [("cbrt", 1.521379706804568), ("half", 0.0),
                                   ("cosine", 0.739085133215161)])
def test_quasi_nonexpansive_passes(mid, p):
    assert check_quasi_nonexpansive(get_mapping(mid), Point.of(p), GRID).passed


def test_quasi_nonexpansive_double_and_errors():
    m = get_mapping("double")
    r = check_quasi_nonexpansive(m, Point.of(0.0), GRID)
    assert r.verdict == "fail"
    x, p = r.witness
    assert x.coords[0] > 0 and distance(m(x), p) > distance(x, p)
    with pytest.raises(ConfigError):
        check_quasi_nonexpansive(m, Point.of(0.3), GRID)


@pytest.mark.parametrize("mid", ["cbrt", "half", "cosine", "identity"])
def test_prop1_iii_passes(mid):
    assert check_prop1_iii(get_mapping(mid), GRID).passed


def test_prop1_iii_diagonal_and_double():
    m = get_mapping("double")
    r = check_prop1_iii(m, GRID)
    assert r.verdict == "fail"
    x, y = r.witness
    assert distance(x, m(y)) > 3 * distance(m(x), x) + distance(x, y) + TOL
    # x = y reduces to |x - Tx| <= 3|Tx - x|
    for v in np.linspace(0, 1, 11):
        x = Point.of(float(v))
        assert distance(x, m(x)) <= 3 * distance(m(x), x) + distance(x, x)


def test_lipschitz_checks(half):
    assert check_contraction(half, GRID).passed
    assert check_nonexpansive(get_mapping("identity"), GRID).passed
    assert not check_contraction(get_mapping("identity"), GRID).passed
    r = check_nonexpansive(get_mapping("double"), GRID)
    assert r.verdict == "fail" and r.estimated_modulus == 2.0


def test_property_report_invariant():
    with pytest.raises(ValueError):
        PropertyReport("condition_C", "fail", 3)
    with pytest.raises(ValueError):
        PropertyReport("condition_C", "pass", 3, (Point.of(0.0), Point.of(1.0)))


@pytest.mark.parametrize("mid", ["cbrt", "half", "cosine", "identity", "double"])
def test_prop1_implications(mid):
    # nonexpansive => condition (C) => quasi-nonexpansive at a fixed point
    m = get_mapping(mid)
    if check_nonexpansive(m, 120).passed:
        assert check_condition_c(m, 120).passed
    if check_condition_c(m, 120).passed:
        p = fixed_point_reference(m) if mid != "identity" else m.fixed_point_hint
        assert check_quasi_nonexpansive(m, p, 120).passed


def test_fixed_point_reference():
    p = fixed_point_reference(builtin_cbrt_map(), 1e-15)
    assert p.coords[0] == pytest.approx(CBRT_P, abs=1e-15)
    assert fixed_point_reference(get_mapping("half")) == Point.of(0.0)
    q = fixed_point_reference(get_mapping("cosine"), 1e-15)
    assert q.coords[0] == pytest.approx(COS_P, abs=1e-15)
    assert q.coords[0] == pytest.approx(0.739085133215161, abs=1e-15)
    for mid in ("cbrt", "cosine", "half"):
        m = get_mapping(mid)
        p = fixed_point_reference(m)
        assert distance(m(p), p) <= 1e-15


def test_fixed_point_reference_bisection_fallback():
    # x -> 1 - x on [0, 1]: Picard oscillates, bisection finds 1/2
    flip = Mapping("flip", BoxDomain.interval(0.0, 1.0), lambda x: Point.of(1.0 - x[0]))
    assert fixed_point_reference(flip, 1e-15, x0=Point.of(0.2)) == Point.of(0.5)


def test_fixed_point_reference_failure():
    box = BoxDomain(Point.of(0.0, 0.0), Point.of(1.0, 1.0))
    swap = Mapping("swap", box, lambda x: Point.of(1.0 - x[0], x[1]))
    with pytest.raises(NumericError):
        fixed_point_reference(swap, x0=Point.of(0.2, 0.5), max_iter=50)


def test_perturbed_operator(cbrt):
    mt = perturbed(cbrt, 1e-3)
    xs = grid_points(cbrt.domain, 500)
    gap = np.abs(mt.eval_many(xs) - cbrt.eval_many(xs))
    assert gap.max() <= 1e-3 + 1e-15
    top = perturbed(get_mapping("identity"), 0.1)
    assert top(Point.of(1.0)) == Point.of(1.0)
    with pytest.raises(ConfigError):
        perturbed(cbrt, -1.0)
