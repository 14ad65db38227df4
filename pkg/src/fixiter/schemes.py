"""Step functions and orbit runner for the K iteration and its competitors.

Every step evaluates its displayed formula in order, with convex
combinations written out as ``(1 - t) * x + t * y``. Schemes and their
``T``-evaluations per step:

==============  ======================================================  =====
scheme          step                                                    evals
==============  ======================================================  =====
k               z = (1-b)x + bTx; y = T((1-a)Tx + aTz); x' = Ty          4
picard_s        w = (1-b)u + bTu; v = (1-a)Tu + aTw; u' = Tv             3
thakur_new      w = (1-b)u + bTu; v = T((1-a)u + aw); u' = Tv            3
vatan_two_step  v = T((1-b)u + bTu); u' = T((1-a)v + aTv)                4
picard          x' = Tx                                                  1
mann            x' = (1-a)x + aTx                                        1
ishikawa        y = (1-b)x + bTx; x' = (1-a)x + aTy                      2
noor            z = (1-g)x + gTx; y = (1-b)x + bTz; x' = (1-a)x + aTy    3
==============  ======================================================  =====
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Literal, Optional

from .errors import ConfigError, NumericError
from .mappings import Mapping
from .numerics import ParamSchedule, Point, convex_combine, distance, schedule_at

__all__ = [
    "SchemeId",
    "StepTrace",
    "StopRule",
    "Record",
    "Trajectory",
    "EVALS_PER_STEP",
    "step_k",
    "step_picard_s",
    "step_thakur_new",
    "step_vatan_two_step",
    "step_classic",
    "step",
    "run",
    "parse_scheme",
]


class SchemeId(str, Enum):
    K = "k"
    PICARD_S = "picard_s"
    THAKUR_NEW = "thakur_new"
    VATAN_TWO_STEP = "vatan_two_step"
    PICARD = "picard"
    MANN = "mann"
    ISHIKAWA = "ishikawa"
    NOOR = "noor"

    def __str__(self) -> str:
        return self.value


CLASSIC = (SchemeId.PICARD, SchemeId.MANN, SchemeId.ISHIKAWA, SchemeId.NOOR)

EVALS_PER_STEP = {
    SchemeId.K: 4,
    SchemeId.PICARD_S: 3,
    SchemeId.THAKUR_NEW: 3,
    SchemeId.VATAN_TWO_STEP: 4,
    SchemeId.PICARD: 1,
    SchemeId.MANN: 1,
    SchemeId.ISHIKAWA: 2,
    SchemeId.NOOR: 3,
}


def parse_scheme(name: str | SchemeId) -> SchemeId:
    try:
        return SchemeId(name)
    except ValueError:
        choices = ", ".join(s.value for s in SchemeId)
        raise ConfigError(f"unknown scheme {name!r}; choose from {choices}") from None


@dataclass(frozen=True)
class StepTrace:
    n: int
    input: Point
    intermediates: tuple[tuple[str, Point], ...]
    output: Point

    def intermediate(self, name: str) -> Point:
        return dict(self.intermediates)[name]


def _checked(m: Mapping, n: int, x: Point,
             parts: list[tuple[str, Point]], out: Point) -> StepTrace:
    for name, pt in parts:
        m.domain.require(pt, f"intermediate {name} at step {n}")
    m.domain.require(out, f"iterate at step {n + 1}")
    return StepTrace(n, x, tuple(parts), out)


def step_k(m: Mapping, x: Point, alpha: float, beta: float, n: int = 0) -> StepTrace:
    tx = m(x)
    z = convex_combine(beta, x, tx)
    y = m(convex_combine(alpha, tx, m(z)))
    return _checked(m, n, x, [("z", z), ("y", y)], m(y))


def step_picard_s(m: Mapping, u: Point, alpha: float, beta: float, n: int = 0) -> StepTrace:
    tu = m(u)
    w = convex_combine(beta, u, tu)
    v = convex_combine(alpha, tu, m(w))
    return _checked(m, n, u, [("w", w), ("v", v)], m(v))


def step_thakur_new(m: Mapping, u: Point, alpha: float, beta: float, n: int = 0) -> StepTrace:
    w = convex_combine(beta, u, m(u))
    v = m(convex_combine(alpha, u, w))
    return _checked(m, n, u, [("w", w), ("v", v)], m(v))


def step_vatan_two_step(m: Mapping, u: Point, alpha: float, beta: float,
                        n: int = 0) -> StepTrace:
    v = m(convex_combine(beta, u, m(u)))
    return _checked(m, n, u, [("v", v)], m(convex_combine(alpha, v, m(v))))


def step_classic(scheme: SchemeId | str, m: Mapping, x: Point, alpha: float, beta: float,
                 gamma: Optional[float] = None, n: int = 0) -> StepTrace:
    """One step of Picard, Mann, Ishikawa or Noor iteration.

    ``gamma`` only affects Noor and defaults to ``beta``.
    """
    scheme = parse_scheme(scheme)
    if scheme is SchemeId.PICARD:
        return _checked(m, n, x, [], m(x))
    if scheme is SchemeId.MANN:
        return _checked(m, n, x, [], convex_combine(alpha, x, m(x)))
    if scheme is SchemeId.ISHIKAWA:
        y = convex_combine(beta, x, m(x))
        return _checked(m, n, x, [("y", y)], convex_combine(alpha, x, m(y)))
    if scheme is SchemeId.NOOR:
        g = beta if gamma is None else gamma
        z = convex_combine(g, x, m(x))
        y = convex_combine(beta, x, m(z))
        return _checked(m, n, x, [("z", z), ("y", y)], convex_combine(alpha, x, m(y)))
    raise ConfigError(f"{scheme} is not a classic scheme")


_STEPS: dict[SchemeId, Callable[..., StepTrace]] = {
    SchemeId.K: step_k,
    SchemeId.PICARD_S: step_picard_s,
    SchemeId.THAKUR_NEW: step_thakur_new,
    SchemeId.VATAN_TWO_STEP: step_vatan_two_step,
}


def step(scheme: SchemeId | str, m: Mapping, x: Point, alpha: float, beta: float,
         gamma: Optional[float] = None, n: int = 0) -> StepTrace:
    """Dispatch one step of any scheme."""
    scheme = parse_scheme(scheme)
    if scheme in _STEPS:
        return _STEPS[scheme](m, x, alpha, beta, n)
    return step_classic(scheme, m, x, alpha, beta, gamma, n)


@dataclass(frozen=True)
class StopRule:
    """When to stop a run.

    ``tol_step`` and ``tol_res`` of ``None`` disable that test; the default
    ``0.0`` stops on an exact stall (or an exactly zero residual).
    """

    max_iter: int = 100
    tol_step: Optional[float] = 0.0
    tol_res: Optional[float] = 0.0

    def __post_init__(self) -> None:
        if self.max_iter < 1:
            raise ConfigError("max_iter must be >= 1")
        for name in ("tol_step", "tol_res"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ConfigError(f"{name} must be >= 0")

    @classmethod
    def fixed_count(cls, n: int) -> StopRule:
        return cls(max_iter=n, tol_step=None, tol_res=None)


@dataclass(frozen=True)
class Record:
    n: int
    x: Point
    residual: float
    error: Optional[float]
    trace: Optional[StepTrace] = None


StopReason = Literal["tol_reached", "residual_reached", "max_iter", "stalled"]


@dataclass(frozen=True)
class Trajectory:
    scheme: SchemeId
    mapping_id: str
    schedule: ParamSchedule
    x0: Point
    stop: StopRule
    records: tuple[Record, ...] = field(default=())
    stop_reason: StopReason = "max_iter"
    gamma: Optional[float] = None

    @property
    def xs(self) -> list[Point]:
        return [r.x for r in self.records]

    @property
    def errors(self) -> list[Optional[float]]:
        return [r.error for r in self.records]

    @property
    def residuals(self) -> list[float]:
        return [r.residual for r in self.records]

    @property
    def final(self) -> Point:
        return self.records[-1].x


def run(scheme: SchemeId | str, m: Mapping, x0: Point, s: ParamSchedule,
        stop: StopRule = StopRule(), gamma: Optional[float] = None,
        p: Optional[Point] = None) -> Trajectory:
    """Iterate ``scheme`` from ``x0`` until ``stop`` fires.

    Residuals ``|T x_n - x_n|`` are recorded for every iterate, errors
    ``|x_n - p|`` when ``p`` (default: the map's fixed-point hint) is known.
    Stop tests are applied in the order step tolerance, residual tolerance,
    ulp-level two-cycle (``stalled``, only while a step tolerance is active),
    iteration cap.
    """
    scheme = parse_scheme(scheme)
    m.domain.require(x0, "starting point")
    if p is None:
        p = m.fixed_point_hint

    def record(n: int, x: Point, trace: Optional[StepTrace]) -> Record:
        return Record(n, x, distance(m(x), x), None if p is None else distance(x, p), trace)

    records = [record(0, x0, None)]
    reason: StopReason = "max_iter"
    x, prev = x0, None
    for n in range(stop.max_iter):
        alpha, beta = schedule_at(s, n)
        try:
            trace = step(scheme, m, x, alpha, beta, gamma, n)
        except NumericError as exc:
            raise NumericError(f"{scheme} step {n} from {x}: {exc}") from exc
        nxt = trace.output
        records.append(record(n + 1, nxt, trace))
        if stop.tol_step is not None and distance(nxt, x) <= stop.tol_step:
            reason = "tol_reached"
            break
        if stop.tol_res is not None and records[-1].residual <= stop.tol_res:
            reason = "residual_reached"
            break
        if stop.tol_step is not None and prev is not None and nxt == prev:
            reason = "stalled"
            break
        prev, x = x, nxt
    return Trajectory(scheme, m.id, s, x0, stop, tuple(records), reason, gamma)
