"""Points, box domains, convex combinations and parameter schedules.

Everything here is an immutable value and every function is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .errors import ConfigError, DomainError, NumericError

__all__ = [
    "Point",
    "BoxDomain",
    "ParamSchedule",
    "FORMULAS",
    "convex_combine",
    "distance",
    "schedule_at",
]


@dataclass(frozen=True)
class Point:
    """A point of R^d, d >= 1, with finite binary64 coordinates."""

    coords: tuple[float, ...]

    def __post_init__(self) -> None:
        coords = tuple(float(c) for c in self.coords)
        if not coords:
            raise ValueError("a point needs at least one coordinate")
        if not all(math.isfinite(c) for c in coords):
            raise NumericError(f"non-finite coordinate in {coords!r}")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def of(cls, *values: float) -> Point:
        return cls(tuple(values))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self) -> Iterator[float]:
        return iter(self.coords)

    def __getitem__(self, i: int) -> float:
        return self.coords[i]

    def __float__(self) -> float:
        if len(self.coords) != 1:
            raise TypeError("only 1-D points convert to float")
        return self.coords[0]

    def __repr__(self) -> str:
        return f"Point{self.coords!r}"


def _as_point(x: Point | float | Sequence[float]) -> Point:
    if isinstance(x, Point):
        return x
    if isinstance(x, (int, float)):
        return Point((float(x),))
    return Point(tuple(x))


def _check_dims(x: Point, y: Point) -> None:
    if x.dim != y.dim:
        raise ValueError(f"dimension mismatch: {x.dim} != {y.dim}")


def convex_combine(t: float, x: Point, y: Point) -> Point:
    """Return ``(1 - t) * x + t * y`` evaluated literally, per component.

    The expression is not re-associated (no ``x + t * (y - x)``) so that
    iterates are bit-reproducible.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"combination weight {t!r} outside [0, 1]")
    _check_dims(x, y)
    s = 1.0 - t
    return Point(tuple(s * a + t * b for a, b in zip(x.coords, y.coords)))


def distance(x: Point, y: Point) -> float:
    """Euclidean distance between two points of the same dimension."""
    _check_dims(x, y)
    if x.dim == 1:
        return abs(x.coords[0] - y.coords[0])
    return math.hypot(*(a - b for a, b in zip(x.coords, y.coords)))


@dataclass(frozen=True)
class BoxDomain:
    """Closed axis-aligned box ``[lower, upper]`` in R^d."""

    lower: Point
    upper: Point

    def __post_init__(self) -> None:
        _check_dims(self.lower, self.upper)
        if any(lo > hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError(f"empty box: {self.lower} > {self.upper}")

    @classmethod
    def interval(cls, lo: float, hi: float) -> BoxDomain:
        return cls(Point((lo,)), Point((hi,)))

    @property
    def dim(self) -> int:
        return self.lower.dim

    @property
    def degenerate(self) -> bool:
        return all(lo == hi for lo, hi in zip(self.lower, self.upper))

    @property
    def center(self) -> Point:
        return convex_combine(0.5, self.lower, self.upper)

    def contains(self, x: Point, slack: float = 0.0) -> bool:
        if x.dim != self.dim:
            return False
        return all(lo - slack <= c <= hi + slack
                   for lo, c, hi in zip(self.lower, x, self.upper))

    def clamp(self, x: Point) -> Point:
        _check_dims(x, self.lower)
        return Point(tuple(min(max(c, lo), hi)
                           for lo, c, hi in zip(self.lower, x, self.upper)))

    def require(self, x: Point, what: str = "point", slack: float = 1e-12) -> None:
        if not self.contains(x, slack):
            raise DomainError(f"{what} {x} outside domain [{self.lower}, {self.upper}]")


# Closed catalog of formula schedules: id -> (alpha_n, beta_n) given coefficients.
FORMULAS = {
    # alpha_n = a/(n+1), beta_n = b/(n+1); sum of products converges
    "harmonic": lambda n, a, b: (a / (n + 1), b / (n + 1)),
    # alpha_n = a/sqrt(n+1), beta_n = b/sqrt(n+1); sum of products diverges
    "inverse_sqrt": lambda n, a, b: (a / math.sqrt(n + 1), b / math.sqrt(n + 1)),
}


@dataclass(frozen=True)
class ParamSchedule:
    """The control sequences ``alpha_n`` and ``beta_n`` in [0, 1].

    ``kind`` is one of ``"constant"``, ``"tabulated"`` or a key of
    :data:`FORMULAS`. For constant and formula schedules ``alpha`` and
    ``beta`` hold the constants (coefficients); tabulated schedules keep
    their pairs in ``table``.
    """

    kind: str
    alpha: float = 0.0
    beta: float = 0.0
    table: tuple[tuple[float, float], ...] = field(default=())

    def __post_init__(self) -> None:
        if self.kind == "tabulated":
            table = tuple((float(a), float(b)) for a, b in self.table)
            if not table:
                raise ConfigError("tabulated schedule needs at least one entry")
            object.__setattr__(self, "table", table)
            pairs = table
        elif self.kind == "constant" or self.kind in FORMULAS:
            # coefficients bound every term of the closed formulas from above
            pairs = ((self.alpha, self.beta),)
        else:
            raise ConfigError(f"unknown schedule kind {self.kind!r}")
        for a, b in pairs:
            if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
                raise ConfigError(f"schedule values ({a}, {b}) outside [0, 1]")

    @classmethod
    def constant(cls, alpha: float, beta: float) -> ParamSchedule:
        return cls("constant", float(alpha), float(beta))

    @classmethod
    def tabulated(cls, pairs: Sequence[tuple[float, float]]) -> ParamSchedule:
        return cls("tabulated", table=tuple(pairs))

    @classmethod
    def formula(cls, name: str, alpha: float = 1.0, beta: float = 1.0) -> ParamSchedule:
        return cls(name, float(alpha), float(beta))

    @property
    def divergent_sum_certified(self) -> bool:
        """True when sum(alpha_n * beta_n) is known to diverge."""
        if self.kind == "constant":
            return self.alpha * self.beta > 0.0
        if self.kind == "inverse_sqrt":
            return self.alpha * self.beta > 0.0
        return False

    def summary(self) -> dict:
        if self.kind == "tabulated":
            return {"kind": self.kind, "table": [list(p) for p in self.table]}
        return {"kind": self.kind, "alpha": self.alpha, "beta": self.beta}


def schedule_at(s: ParamSchedule, n: int) -> tuple[float, float]:
    """Return ``(alpha_n, beta_n)`` for step ``n >= 0``."""
    if n < 0:
        raise IndexError(f"negative step index {n}")
    if s.kind == "constant":
        return s.alpha, s.beta
    if s.kind == "tabulated":
        if n >= len(s.table):
            raise IndexError(f"step {n} past end of tabulated schedule (length {len(s.table)})")
        return s.table[n]
    return FORMULAS[s.kind](n, s.alpha, s.beta)
