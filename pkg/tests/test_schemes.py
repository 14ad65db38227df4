import math

import pytest
from hypothesis import given, settings, strategies as st

from fixiter.errors import ConfigError, DomainError
from fixiter.mappings import Mapping, get_mapping
from fixiter.numerics import BoxDomain, ParamSchedule, Point, distance
from fixiter.schemes import (EVALS_PER_STEP, SchemeId, StopRule, parse_scheme, run, step,
                             step_classic, step_k, step_picard_s, step_thakur_new,
                             step_vatan_two_step)

unit = st.floats(0.0, 1.0)


def compose(m, x, times):
    for _ in range(times):
        x = m(x)
    return x


def counting(m):
    calls = [0]

    def func(x):
        calls[0] += 1
        return m.func(x)

    return Mapping(m.id, m.domain, func, m.theta_hint, m.fixed_point_hint, m.batch), calls


@pytest.mark.parametrize("fn,expected", [
    (step_k, 1.522643193061496),
    (step_picard_s, 1.530160376515624),
    (step_thakur_new, 1.530163443560674),
    (step_vatan_two_step, 1.527152378405542),
])
def test_first_step_matches_table(cbrt, x199, fn, expected):
    assert fn(cbrt, x199, 0.25, 0.25).output.coords[0] == pytest.approx(expected, abs=1e-12)


def test_step_k_intermediates(cbrt, x199):
    tr = step_k(cbrt, x199, 0.25, 0.25)
    tx = (1.99 + 2) ** (1 / 3)
    z = 0.75 * 1.99 + 0.25 * tx
    assert tr.intermediate("z").coords[0] == z
    y = ((1 - 0.25) * tx + 0.25 * (z + 2) ** (1 / 3) + 2) ** (1 / 3)
    assert tr.intermediate("y").coords[0] == y
    assert tr.output.coords[0] == (y + 2) ** (1 / 3)


@pytest.mark.parametrize("scheme", list(SchemeId))
def test_fixed_point_is_preserved(scheme, half):
    p = Point.of(0.0)
    tr = step(scheme, half, p, 0.3, 0.7, 0.2)
    assert tr.output == p
    assert all(v == p for _, v in tr.intermediates)


@settings(max_examples=50)
@given(x=st.floats(0.0, 4.0), beta=unit)
def test_degenerate_collapses(x, beta):
    cbrt = get_mapping("cbrt")
    x = Point.of(x)
    assert step_k(cbrt, x, 0.0, beta).output == compose(cbrt, x, 3)
    assert step_picard_s(cbrt, x, 0.0, beta).output == compose(cbrt, x, 2)
    assert step_thakur_new(cbrt, x, 0.0, beta).output == compose(cbrt, x, 2)
    assert step_vatan_two_step(cbrt, x, 0.0, 0.0).output == compose(cbrt, x, 2)
    assert step_classic("mann", cbrt, x, 1.0, beta).output == step_classic("picard", cbrt, x, 0, 0).output
    assert step_classic("ishikawa", cbrt, x, 0.0, beta).output == x


def test_picard_step_value(cbrt, x199):
    # mpmath: 3.99^(1/3)
    out = step_classic("picard", cbrt, x199, 0.5, 0.5).output.coords[0]
    assert out == pytest.approx(1.5860771138627697663, abs=1e-15)


def test_noor_gamma_defaults_to_beta(cbrt, x199):
    a = step_classic("noor", cbrt, x199, 0.3, 0.6)
    b = step_classic("noor", cbrt, x199, 0.3, 0.6, 0.6)
    c = step_classic("noor", cbrt, x199, 0.3, 0.6, 0.1)
    assert a == b and a.output != c.output


@pytest.mark.parametrize("scheme", list(SchemeId))
def test_evaluation_counts(cbrt, x199, scheme):
    m, calls = counting(cbrt)
    step(scheme, m, x199, 0.4, 0.6, 0.5)
    assert calls[0] == EVALS_PER_STEP[scheme]


def test_step_rejects_escaping_intermediate():
    box = BoxDomain.interval(0.0, 1.0)
    m = Mapping("sneaky", box, lambda x: Point.of(x[0] if x[0] < 0.9 else 0.9))
    # bypass the construction check to simulate a mis-registered map
    object.__setattr__(m, "func", lambda x: Point.of(x[0] + 0.5))
    with pytest.raises(DomainError):
        step_k(m, Point.of(0.8), 0.5, 0.5)


def test_parse_scheme():
    assert parse_scheme("vatan_two_step") is SchemeId.VATAN_TWO_STEP
    assert str(SchemeId.K) == "k"
    with pytest.raises(ConfigError):
        parse_scheme("abbas")


def test_run_records_and_table_column(cbrt, x199, quarter):
    traj = run("k", cbrt, x199, quarter, StopRule.fixed_count(11))
    assert traj.stop_reason == "max_iter"
    assert len(traj.records) == 12
    assert traj.records[0].x == x199 and traj.records[0].trace is None
    assert [r.n for r in traj.records] == list(range(12))
    expected = [1.99, 1.522643193061496, 1.521383278248461, 1.521379716901169,
                1.521379706833111, 1.521379706804648] + [1.521379706804568] * 6
    for r, e in zip(traj.records, expected):
        assert r.x.coords[0] == pytest.approx(e, abs=1e-12)
        assert r.residual == distance(cbrt(r.x), r.x)
        assert r.error == distance(r.x, cbrt.fixed_point_hint)
    assert traj.records[3].trace.input == traj.records[2].x


@pytest.mark.parametrize("scheme", list(SchemeId))
def test_run_from_fixed_point_stops_immediately(scheme, half):
    traj = run(scheme, half, Point.of(0.0), ParamSchedule.constant(0.5, 0.5))
    assert traj.stop_reason == "tol_reached"
    assert all(r.x == Point.of(0.0) for r in traj.records)
    assert len(traj.records) == 2


def test_run_picard_on_half(half):
    traj = run("picard", half, Point.of(1.0), ParamSchedule.constant(0, 0),
               StopRule(max_iter=60, tol_step=1e-9, tol_res=None))
    for r in traj.records:
        assert r.x.coords[0] == 2.0 ** -r.n
    assert traj.stop_reason == "tol_reached"
    last, prev = traj.records[-1].x, traj.records[-2].x
    assert distance(last, prev) <= 1e-9 < distance(prev, traj.records[-3].x)


def test_run_stop_rules(cbrt, x199, quarter):
    t = run("mann", cbrt, x199, quarter, StopRule(max_iter=500, tol_step=None, tol_res=1e-6))
    assert t.stop_reason == "residual_reached" and t.records[-1].residual <= 1e-6
    assert t.records[-2].residual > 1e-6
    t = run("k", cbrt, x199, quarter)
    # the orbit lands on the machine fixed point, where T(x) == x exactly
    assert t.stop_reason == "residual_reached" and t.records[-1].residual == 0.0
    t = run("k", cbrt, x199, quarter, StopRule(tol_res=None))
    assert t.stop_reason == "tol_reached" and t.final == t.records[-2].x
    t = run("k", cbrt, x199, quarter, StopRule(max_iter=3))
    assert t.stop_reason == "max_iter" and len(t.records) == 4
    with pytest.raises(ConfigError):
        StopRule(max_iter=0)
    with pytest.raises(ConfigError):
        StopRule(tol_step=-1.0)


def test_run_detects_two_cycle():
    box = BoxDomain.interval(0.0, 1.0)
    flip = Mapping("flip", box, lambda x: Point.of(1.0 - x[0]))
    t = run("picard", flip, Point.of(0.25), ParamSchedule.constant(0, 0))
    assert t.stop_reason == "stalled"
    assert [r.x.coords[0] for r in t.records] == [0.25, 0.75, 0.25]


def test_run_with_tabulated_schedule(cbrt, x199):
    s = ParamSchedule.tabulated([(0.5, 0.5)] * 3)
    with pytest.raises(IndexError):
        run("k", cbrt, x199, s, StopRule.fixed_count(5))


def test_run_rejects_bad_start(cbrt):
    with pytest.raises(DomainError):
        run("k", cbrt, Point.of(5.0), ParamSchedule.constant(0.5, 0.5))


@settings(max_examples=25, deadline=None)
@given(x0=st.floats(0.0, 4.0), a=unit, b=unit)
def test_k_per_step_contraction_bound(x0, a, b):
    cbrt = get_mapping("cbrt")
    theta = cbrt.theta_hint
    p = Point.of(1.5213797068045676)
    traj = run("k", cbrt, Point.of(x0), ParamSchedule.constant(a, b), StopRule.fixed_count(12), p=p)
    for r0, r1 in zip(traj.records, traj.records[1:]):
        factor = theta ** 3 * (1 - a * b * (1 - theta))
        assert r1.error <= factor * r0.error + 1e-12


@pytest.mark.parametrize("mid", ["cbrt", "half", "cosine", "identity"])
def test_k_error_nonincreasing_and_residual_vanishes(mid):
    m = get_mapping(mid)
    for x0 in (m.domain.lower, m.domain.center, m.domain.upper):
        traj = run("k", m, x0, ParamSchedule.constant(0.5, 0.5), StopRule(max_iter=200))
        p = x0 if mid == "identity" else m.fixed_point_hint
        errs = [distance(x, p) for x in traj.xs]
        assert all(e1 <= e0 + 1e-12 for e0, e1 in zip(errs, errs[1:]))
        assert traj.records[-1].residual < 1e-10


def test_two_dimensional_run():
    box = BoxDomain(Point.of(-1.0, -1.0), Point.of(1.0, 1.0))
    m = Mapping("shrink2", box, lambda x: Point.of(0.5 * x[1], -0.5 * x[0]))
    traj = run("k", m, Point.of(1.0, 1.0), ParamSchedule.constant(0.5, 0.5),
               StopRule(max_iter=100, tol_step=1e-14), p=Point.of(0.0, 0.0))
    assert traj.records[-1].error < 1e-13
    assert math.isfinite(traj.records[-1].residual)
