"""Error bounds, rate comparison, stability and data-dependence experiments.

Limits cannot be read off finite data, so "converges to 0" is decided by a
trailing-window rule: the largest of the last :data:`WINDOW` terms must be
below :data:`LIMIT_TOL`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal, Optional, Sequence, Union

import numpy as np

from .errors import ConfigError, NumericError
from .mappings import (TOL, Mapping, estimate_contraction_modulus, fixed_point_reference,
                       grid_points)
from .numerics import ParamSchedule, Point, distance, schedule_at
from .schemes import SchemeId, StopRule, Trajectory, run, step_k

__all__ = [
    "WINDOW",
    "LIMIT_TOL",
    "RateReport",
    "StabilityReport",
    "DataDependenceReport",
    "Diagnostics",
    "bound_k_product",
    "bound_k_exponential",
    "bound_picard_s_product",
    "rate_ratio",
    "berinde_compare",
    "compare_k_vs_picard_s",
    "stability_forward",
    "stability_backward",
    "approaching",
    "oscillating",
    "geometric_noise",
    "data_dependence",
    "trajectory_diagnostics",
    "k_step_bound_excess",
    "first_converged_index",
]

WINDOW = 10
LIMIT_TOL = 1e-8
# Berinde verdict: final ratio must fall below this fraction of the initial one
RATIO_DROP = 1e-3


def _check_theta(theta: float) -> None:
    if not 0.0 < theta < 1.0:
        raise ConfigError(f"contraction modulus {theta!r} not in (0, 1)")


def _check_args(n: int, e0: float, theta: float) -> None:
    _check_theta(theta)
    if n < 0:
        raise ConfigError(f"step index must be >= 0, got {n}")
    if e0 < 0:
        raise ConfigError(f"initial error must be >= 0, got {e0}")


def _damping_product(n: int, theta: float, s: ParamSchedule) -> float:
    prod = 1.0
    for k in range(n + 1):
        a, b = schedule_at(s, k)
        prod *= 1.0 - a * b * (1.0 - theta)
    return prod


def bound_k_product(n: int, e0: float, theta: float, s: ParamSchedule) -> float:
    """``e0 * theta^(3(n+1)) * prod_{k<=n} (1 - alpha_k beta_k (1 - theta))``.

    Upper bound on ``|x_{n+1} - p|`` for K iteration on a contraction.
    """
    _check_args(n, e0, theta)
    return e0 * _damping_product(n, theta, s) * theta ** (3 * (n + 1))


def bound_k_exponential(n: int, e0: float, theta: float, s: ParamSchedule) -> float:
    """The looser bound ``e0 * theta^(3(n+1)) * exp(-(1 - theta) sum alpha_k beta_k)``."""
    _check_args(n, e0, theta)
    total = math.fsum(a * b for a, b in (schedule_at(s, k) for k in range(n + 1)))
    return e0 * math.exp(-(1.0 - theta) * total) * theta ** (3 * (n + 1))


def bound_picard_s_product(n: int, e0: float, theta: float, s: ParamSchedule) -> float:
    """Same as :func:`bound_k_product` with ``theta^(2(n+1))``; bounds Picard-S."""
    _check_args(n, e0, theta)
    return e0 * _damping_product(n, theta, s) * theta ** (2 * (n + 1))


def rate_ratio(theta: float, n: int) -> float:
    """Ratio of the K bound to the Picard-S bound, ``theta^(n+1)``."""
    _check_theta(theta)
    if n < 0:
        raise ConfigError(f"step index must be >= 0, got {n}")
    return theta ** (n + 1)


@dataclass(frozen=True)
class RateReport:
    a: tuple[float, ...]
    b: tuple[float, ...]
    ratio: tuple[float, ...]
    verdict: Literal["A_faster", "B_faster", "inconclusive"]
    theta: Optional[float] = None
    schedule: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "theta": self.theta,
            "schedule": self.schedule,
            "horizon": len(self.ratio),
            "a": list(self.a),
            "b": list(self.b),
            "ratio": list(self.ratio),
        }


def berinde_compare(a: Sequence[float], b: Sequence[float], horizon: Optional[int] = None,
                    theta: Optional[float] = None,
                    schedule: Optional[ParamSchedule] = None) -> RateReport:
    """Compare two error-bound sequences in Berinde's sense.

    ``A_faster`` when ``a_n / b_n`` decreases strictly over the horizon and
    ends below ``1e-3`` of its first value; ``B_faster`` is the mirror case;
    anything else is ``inconclusive``.
    """
    h = min(len(a), len(b)) if horizon is None else horizon
    if h < 2 or len(a) < h or len(b) < h:
        raise ConfigError(f"need at least 2 terms in both sequences over horizon {h}")
    a = tuple(float(v) for v in a[:h])
    b = tuple(float(v) for v in b[:h])
    if any(not v > 0 for v in a + b):
        raise ConfigError("bound sequences must be positive over the horizon")
    ratio = tuple(x / y for x, y in zip(a, b))
    steps = list(zip(ratio, ratio[1:]))
    if all(r1 < r0 for r0, r1 in steps) and ratio[-1] < RATIO_DROP * ratio[0]:
        verdict = "A_faster"
    elif all(r1 > r0 for r0, r1 in steps) and ratio[-1] * RATIO_DROP > ratio[0]:
        verdict = "B_faster"
    else:
        verdict = "inconclusive"
    return RateReport(a, b, ratio, verdict, theta,
                      None if schedule is None else schedule.summary())


def compare_k_vs_picard_s(theta: float, s: ParamSchedule, e0: float = 1.0,
                          horizon: Optional[int] = None) -> RateReport:
    """Berinde comparison of the K bound (A) against the Picard-S bound (B).

    Without an explicit horizon the sequences are extended until the K bound
    nears the bottom of the binary64 range (capped at 1000 terms).
    """
    _check_theta(theta)
    if e0 <= 0:
        raise ConfigError("initial error must be positive for a rate comparison")
    limit = 1000 if horizon is None else horizon
    a, b = [], []
    prod = 1.0
    # same operation order as the bound functions, so terms agree bit for bit
    for n in range(limit):
        alpha, beta = schedule_at(s, n)
        prod *= 1.0 - alpha * beta * (1.0 - theta)
        an = e0 * prod * theta ** (3 * (n + 1))
        if horizon is None and an < 1e-290:
            break
        a.append(an)
        b.append(e0 * prod * theta ** (2 * (n + 1)))
    return berinde_compare(a, b, theta=theta, schedule=s)


@dataclass(frozen=True)
class StabilityReport:
    direction: Literal["forward", "backward"]
    t: tuple[Point, ...]
    eps: tuple[float, ...]
    errors: tuple[float, ...]
    t_converges: bool
    eps_converges: bool
    applicable: bool = True

    @property
    def equivalence_holds(self) -> bool:
        return self.t_converges == self.eps_converges

    @property
    def eps_window_max(self) -> float:
        return max(self.eps[-WINDOW:])

    @property
    def error_window_max(self) -> float:
        return max(self.errors[-WINDOW:])

    def to_dict(self) -> dict:
        return {
            "direction": self.direction,
            "applicable": self.applicable,
            "t_converges": self.t_converges,
            "eps_converges": self.eps_converges,
            "equivalence_holds": self.equivalence_holds,
            "eps_window_max": self.eps_window_max,
            "error_window_max": self.error_window_max,
            "t": [list(x) for x in self.t],
            "eps": list(self.eps),
            "errors": list(self.errors),
        }


def _window_below(values: Sequence[float]) -> bool:
    return max(values[-WINDOW:]) < LIMIT_TOL


def _known_fixed_point(m: Mapping) -> Point:
    return m.fixed_point_hint if m.fixed_point_hint is not None else fixed_point_reference(m)


def approaching(p: Point, amplitude: float = 0.3) -> Callable[[int], Point]:
    """``t_n = p + amplitude / 2^n`` in every coordinate."""
    return lambda n: Point(tuple(c + amplitude / 2.0 ** n for c in p))


def oscillating(p: Point, amplitude: float = 0.3) -> Callable[[int], Point]:
    """``t_n = p + amplitude * (-1)^n`` in every coordinate."""
    return lambda n: Point(tuple(c + amplitude * (-1.0) ** n for c in p))


def geometric_noise(amplitude: float = 0.1) -> Callable[[int], float]:
    return lambda n: amplitude / 2.0 ** n


def stability_forward(m: Mapping, s: ParamSchedule, t: Callable[[int], Point],
                      horizon: int = 60) -> StabilityReport:
    """Measure ``eps_n = |t_{n+1} - K(t_n)|`` along a given sequence ``t``.

    ``t`` is clamped into the domain; ``K`` is one full K-iteration step with
    the schedule's ``(alpha_n, beta_n)``. Reports whether ``t_n -> p`` and
    whether ``eps_n -> 0`` under the trailing-window rule.
    """
    if horizon < WINDOW:
        raise ConfigError(f"horizon must be at least {WINDOW}")
    p = _known_fixed_point(m)
    ts = [m.domain.clamp(t(n)) for n in range(horizon + 1)]
    eps = []
    for n in range(horizon):
        alpha, beta = schedule_at(s, n)
        eps.append(distance(ts[n + 1], step_k(m, ts[n], alpha, beta, n).output))
    errors = [distance(x, p) for x in ts]
    return StabilityReport("forward", tuple(ts), tuple(eps), tuple(errors),
                           _window_below(errors), _window_below(eps))


def stability_backward(m: Mapping, s: ParamSchedule,
                       noise: Callable[[int], Union[float, Point]],
                       horizon: int = 100, t0: Optional[Point] = None) -> StabilityReport:
    """Run the perturbed orbit ``t_{n+1} = clamp(K(t_n) + eta_n)``.

    Then ``eps_n <= |eta_n|``. The report is marked not applicable when the
    noise itself does not vanish under the window rule, since the
    implication being tested assumes ``eps_n -> 0``.
    """
    if horizon < WINDOW:
        raise ConfigError(f"horizon must be at least {WINDOW}")
    p = _known_fixed_point(m)
    t = m.domain.center if t0 is None else t0
    m.domain.require(t, "t0")
    ts, eps, sizes = [t], [], []
    for n in range(horizon):
        alpha, beta = schedule_at(s, n)
        kt = step_k(m, t, alpha, beta, n).output
        eta = noise(n)
        if not isinstance(eta, Point):
            eta = Point((float(eta),) * kt.dim)
        sizes.append(math.hypot(*eta.coords))
        t = m.domain.clamp(Point(tuple(a + b for a, b in zip(kt, eta))))
        eps.append(distance(t, kt))
        ts.append(t)
    errors = [distance(x, p) for x in ts]
    return StabilityReport("backward", tuple(ts), tuple(eps), tuple(errors),
                           _window_below(errors), _window_below(eps),
                           applicable=_window_below(sizes))


@dataclass(frozen=True)
class DataDependenceReport:
    eps: float
    theta: float
    p: Point
    p_tilde: Optional[Point]
    observed_gap: Optional[float]
    theoretical_bound: float
    bound_holds: Optional[bool]
    products_at_least_half: bool
    divergent_sum_certified: bool
    operator_gap: float
    applicable: bool = True

    def to_dict(self) -> dict:
        return {
            "applicable": self.applicable,
            "eps": self.eps,
            "theta": self.theta,
            "p": list(self.p),
            "p_tilde": None if self.p_tilde is None else list(self.p_tilde),
            "observed_gap": self.observed_gap,
            "theoretical_bound": self.theoretical_bound,
            "bound_holds": self.bound_holds,
            "operator_gap": self.operator_gap,
            "products_at_least_half": self.products_at_least_half,
            "divergent_sum_certified": self.divergent_sum_certified,
        }


def data_dependence(m: Mapping, m_tilde: Mapping, eps: float, s: ParamSchedule,
                    horizon: int = 10_000, grid_size: Optional[int] = None,
                    x0: Optional[Point] = None) -> DataDependenceReport:
    """Compare the fixed point of ``m`` with the K-iteration limit for ``m_tilde``.

    ``p`` comes from :func:`fixed_point_reference`; ``p_tilde`` is the point
    where K iteration driven by ``m_tilde`` stalls. The bound is
    ``7 eps / (1 - theta)`` with ``theta`` the grid-estimated modulus of ``m``.
    A schedule with some ``alpha_n beta_n < 1/2`` (checked over the horizon)
    or without a certified divergent sum yields a not-applicable report.

    Raises
    ------
    ConfigError
        If ``m_tilde`` is farther than ``eps`` from ``m`` on the grid, or the
        estimated modulus of ``m`` is not below 1.
    """
    if eps < 0:
        raise ConfigError(f"eps must be >= 0, got {eps}")
    if m.domain != m_tilde.domain:
        raise ConfigError("operators must share a domain")
    xs = grid_points(m.domain, grid_size if grid_size is not None else 2001)
    diff = m.eval_many(xs) - m_tilde.eval_many(xs)
    gap = float(np.max(np.sqrt(np.sum(diff * diff, axis=1))))
    if gap > eps + TOL:
        raise ConfigError(f"approximate operator is {gap:.3e} from T on the grid, more than eps={eps}")
    theta = estimate_contraction_modulus(m, grid_size)
    _check_theta(theta)
    bound = 7.0 * eps / (1.0 - theta)
    p = fixed_point_reference(m)

    n_check = horizon if s.kind != "tabulated" else min(horizon, len(s.table))
    half_ok = all(a * b >= 0.5 for a, b in (schedule_at(s, n) for n in range(n_check)))
    if not (half_ok and s.divergent_sum_certified):
        return DataDependenceReport(eps, theta, p, None, None, bound, None, half_ok,
                                    s.divergent_sum_certified, gap, applicable=False)

    start = m.domain.center if x0 is None else x0
    traj = run(SchemeId.K, m_tilde, start, s, StopRule(max_iter=horizon, tol_step=0.0, tol_res=None))
    if traj.stop_reason == "max_iter":
        raise NumericError(f"K iteration on {m_tilde.id!r} did not stall within {horizon} steps")
    p_tilde = traj.final
    observed = distance(p, p_tilde)
    return DataDependenceReport(eps, theta, p, p_tilde, observed, bound,
                                observed <= bound + TOL, half_ok, True, gap)


@dataclass(frozen=True)
class Diagnostics:
    errors: tuple[float, ...]
    monotonicity_violation: float
    final_residual: float
    max_norm: float

    def to_dict(self) -> dict:
        return {
            "monotonicity_violation": self.monotonicity_violation,
            "final_residual": self.final_residual,
            "max_norm": self.max_norm,
        }


def trajectory_diagnostics(traj: Trajectory, p: Point) -> Diagnostics:
    """Largest increase of ``|x_n - p|``, final residual and ``max |x_n|``."""
    errors = tuple(distance(x, p) for x in traj.xs)
    violation = max((e1 - e0 for e0, e1 in zip(errors, errors[1:])), default=0.0)
    zero = Point((0.0,) * p.dim)
    return Diagnostics(errors, max(violation, 0.0), traj.records[-1].residual,
                       max(distance(x, zero) for x in traj.xs))


def k_step_bound_excess(traj: Trajectory, theta: float, p: Point) -> float:
    """Largest ``|x_{n+1} - p| - theta^3 (1 - a_n b_n (1 - theta)) |x_n - p|``.

    Non-positive (up to rounding) for K iteration on a contraction of modulus
    ``theta``.
    """
    _check_theta(theta)
    worst = -math.inf
    xs = traj.xs
    for n, (x, nxt) in enumerate(zip(xs, xs[1:])):
        a, b = schedule_at(traj.schedule, n)
        factor = theta ** 3 * (1.0 - a * b * (1.0 - theta))
        worst = max(worst, distance(nxt, p) - factor * distance(x, p))
    return worst


def first_converged_index(traj: Trajectory, target: Point, tol: float = 5e-16) -> Optional[int]:
    """First ``n`` from which every later iterate stays within ``tol`` of ``target``."""
    hit = None
    for r in traj.records:
        if distance(r.x, target) <= tol:
            if hit is None:
                hit = r.n
        else:
            hit = None
    return hit
