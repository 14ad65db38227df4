"""Self-maps of box domains, the built-in catalog, and grid-based property checks.

The checks sample a uniform grid and test the defining inequality of each
mapping class on every (ordered) pair of grid points. They are falsifiers,
not proofs: a ``fail`` comes with a witness pair that can be re-evaluated, a
``pass`` only says no violation was found at that density.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np

from .errors import ConfigError, DomainError, NumericError
from .numerics import BoxDomain, Point, distance

__all__ = [
    "Mapping",
    "PropertyReport",
    "CATALOG",
    "TOL",
    "get_mapping",
    "builtin_cbrt_map",
    "perturbed",
    "default_grid",
    "grid_points",
    "estimate_contraction_modulus",
    "check_contraction",
    "check_nonexpansive",
    "check_condition_c",
    "check_quasi_nonexpansive",
    "check_prop1_iii",
    "fixed_point_reference",
]

TOL = 1e-12
DEFAULT_GRID = 10_000
# upper bound on pair-matrix entries materialized at once
_CHUNK_ENTRIES = 2_000_000

PropertyName = Literal["contraction", "nonexpansive", "quasi_nonexpansive",
                       "condition_C", "prop1_iii"]


def default_grid() -> int:
    """Grid density for property checks; ``FIXITER_GRID`` overrides it."""
    raw = os.environ.get("FIXITER_GRID")
    if raw is None:
        return DEFAULT_GRID
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"FIXITER_GRID={raw!r} is not an integer") from None
    if value < 2:
        raise ConfigError("FIXITER_GRID must be at least 2")
    return value


def grid_points(domain: BoxDomain, grid_size: int) -> np.ndarray:
    """Uniform tensor grid over ``domain`` as an ``(N, d)`` array.

    In 1-D this is exactly ``grid_size`` points; in d dimensions each axis
    gets ``round(grid_size ** (1/d))`` points (at least 2).
    """
    if grid_size < 2:
        raise ConfigError(f"grid_size must be >= 2, got {grid_size}")
    d = domain.dim
    per_axis = grid_size if d == 1 else max(2, round(grid_size ** (1.0 / d)))
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in zip(domain.lower, domain.upper)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


@dataclass(frozen=True)
class Mapping:
    """A deterministic self-map ``T`` of a box domain.

    ``func`` maps a :class:`Point` to a :class:`Point`. ``batch``, when
    given, evaluates ``T`` row-wise on an ``(N, d)`` array and is used only
    by the grid checks.
    """

    id: str
    domain: BoxDomain
    func: Callable[[Point], Point]
    theta_hint: Optional[float] = None
    fixed_point_hint: Optional[Point] = None
    batch: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self) -> None:
        if self.theta_hint is not None and not 0.0 < self.theta_hint < 1.0:
            raise ConfigError(f"theta_hint {self.theta_hint} not in (0, 1)")
        if self.fixed_point_hint is not None:
            self.domain.require(self.fixed_point_hint, "fixed_point_hint")
        # self-map check on a coarse grid
        images = self.eval_many(grid_points(self.domain, 257))
        lo = np.asarray(self.domain.lower.coords) - TOL
        hi = np.asarray(self.domain.upper.coords) + TOL
        bad = np.flatnonzero(~np.all((images >= lo) & (images <= hi), axis=1))
        if bad.size:
            raise ConfigError(f"mapping {self.id!r} does not map its domain into itself "
                              f"(image {images[bad[0]].tolist()})")

    def __call__(self, x: Point) -> Point:
        return self.func(x)

    def eval_many(self, xs: np.ndarray) -> np.ndarray:
        if self.batch is not None:
            return np.asarray(self.batch(xs), dtype=float).reshape(xs.shape)
        return np.array([self.func(Point(tuple(row))).coords for row in xs], dtype=float)

    def summary(self) -> dict:
        return {
            "id": self.id,
            "domain": [list(self.domain.lower), list(self.domain.upper)],
            "theta_hint": self.theta_hint,
            "fixed_point_hint": None if self.fixed_point_hint is None
            else list(self.fixed_point_hint),
        }


@dataclass(frozen=True)
class PropertyReport:
    property: PropertyName
    verdict: Literal["pass", "fail"]
    samples_checked: int
    witness: Optional[tuple[Point, Point]] = None
    estimated_modulus: Optional[float] = None

    def __post_init__(self) -> None:
        if (self.verdict == "fail") != (self.witness is not None):
            raise ValueError("a failing report needs a witness and a passing one must not have one")

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {
            "property": self.property,
            "verdict": self.verdict,
            "samples_checked": self.samples_checked,
            "witness": None if self.witness is None else [list(w) for w in self.witness],
            "estimated_modulus": self.estimated_modulus,
        }


def _scalar(f: Callable[[float], float]) -> Callable[[Point], Point]:
    return lambda x: Point((f(x.coords[0]),))


def _cbrt(x: float) -> float:
    return (x + 2.0) ** (1.0 / 3.0)


def builtin_cbrt_map() -> Mapping:
    """``T(x) = (x + 2)^(1/3)`` on ``[0, 4]``."""
    return Mapping(
        id="cbrt",
        domain=BoxDomain.interval(0.0, 4.0),
        func=_scalar(_cbrt),
        theta_hint=(1.0 / 3.0) * 2.0 ** (-2.0 / 3.0),
        fixed_point_hint=Point((1.521379706804568,)),
        batch=lambda xs: np.power(xs + 2.0, 1.0 / 3.0),
    )


def _half() -> Mapping:
    return Mapping("half", BoxDomain.interval(0.0, 1.0), _scalar(lambda x: x / 2.0),
                   theta_hint=0.5, fixed_point_hint=Point((0.0,)), batch=lambda xs: xs / 2.0)


def _cosine() -> Mapping:
    return Mapping("cosine", BoxDomain.interval(0.0, 1.0), _scalar(math.cos),
                   theta_hint=math.sin(1.0), fixed_point_hint=Point((0.739085133215161,)),
                   batch=np.cos)


def _identity() -> Mapping:
    # every point is fixed; the hint picks one
    return Mapping("identity", BoxDomain.interval(0.0, 1.0), lambda x: x,
                   fixed_point_hint=Point((0.0,)), batch=lambda xs: xs.copy())


def _double() -> Mapping:
    # 2x capped at the upper end so the map stays a self-map of [0, 1];
    # it is exactly 2x on [0, 1/2]
    return Mapping("double", BoxDomain.interval(0.0, 1.0), _scalar(lambda x: min(2.0 * x, 1.0)),
                   fixed_point_hint=Point((0.0,)), batch=lambda xs: np.minimum(2.0 * xs, 1.0))


CATALOG: dict[str, Callable[[], Mapping]] = {
    "cbrt": builtin_cbrt_map,
    "half": _half,
    "cosine": _cosine,
    "identity": _identity,
    "double": _double,
}


def get_mapping(map_id: str) -> Mapping:
    try:
        return CATALOG[map_id]()
    except KeyError:
        raise ConfigError(f"unknown map {map_id!r}; choose from {', '.join(CATALOG)}") from None


def perturbed(m: Mapping, eps: float, map_id: Optional[str] = None) -> Mapping:
    """Approximate operator ``clamp(T(x) + eps)``; stays within ``eps`` of ``T``."""
    if eps < 0:
        raise ConfigError(f"perturbation size must be >= 0, got {eps}")
    dom = m.domain
    lo = np.asarray(dom.lower.coords)
    hi = np.asarray(dom.upper.coords)

    def func(x: Point) -> Point:
        return dom.clamp(Point(tuple(c + eps for c in m(x))))

    return Mapping(
        id=map_id or f"{m.id}+{eps!r}",
        domain=dom,
        func=func,
        theta_hint=m.theta_hint,
        batch=lambda xs: np.clip(m.eval_many(xs) + eps, lo, hi),
    )


def _pair_norms(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix of distances between rows of ``a`` and rows of ``b``."""
    diff = a[:, None, :] - b[None, :, :]
    if diff.shape[-1] == 1:
        return np.abs(diff[..., 0])
    return np.sqrt(np.sum(diff * diff, axis=-1))


def _row_norms(a: np.ndarray) -> np.ndarray:
    return np.abs(a[:, 0]) if a.shape[1] == 1 else np.sqrt(np.sum(a * a, axis=1))


def _scan_pairs(xs: np.ndarray, violated: Callable[[slice], np.ndarray],
                confirm: Callable[[int, int], bool]) -> Optional[tuple[int, int]]:
    """Lowest ordered pair (i, j), i != j, flagged by ``violated`` and ``confirm``.

    ``violated(rows)`` returns a boolean matrix for rows ``rows`` against all
    columns; ``confirm`` re-checks a candidate with scalar evaluation so the
    returned witness always reproduces.
    """
    n = xs.shape[0]
    step = max(1, _CHUNK_ENTRIES // n)
    for start in range(0, n, step):
        rows = slice(start, min(n, start + step))
        bad = violated(rows)
        idx = np.arange(rows.start, rows.stop)
        bad[idx - start, idx] = False
        for r, c in zip(*np.nonzero(bad)):
            if confirm(start + int(r), int(c)):
                return start + int(r), int(c)
    return None


def _point(row: np.ndarray) -> Point:
    return Point(tuple(float(v) for v in row))


def _resolve_grid(grid_size: Optional[int]) -> int:
    return default_grid() if grid_size is None else grid_size


def estimate_contraction_modulus(m: Mapping, grid_size: Optional[int] = None) -> float:
    """Largest difference quotient ``|Tx - Ty| / |x - y|`` over grid pairs.

    This is a lower bound on the Lipschitz constant that tightens as the grid
    is refined.
    """
    grid_size = _resolve_grid(grid_size)
    if m.domain.degenerate:
        raise DomainError(f"domain of {m.id!r} is a single point")
    xs = grid_points(m.domain, grid_size)
    txs = m.eval_many(xs)
    if xs.shape[1] == 1:
        # In 1-D a chord slope is a weighted mean of the slopes of the
        # consecutive sub-chords, so adjacent pairs attain the maximum.
        dx = np.diff(xs[:, 0])
        dt = np.abs(np.diff(txs[:, 0]))
        keep = dx > 0
        return float(np.max(dt[keep] / dx[keep]))
    best = 0.0
    n = xs.shape[0]
    step = max(1, _CHUNK_ENTRIES // n)
    for start in range(0, n, step):
        rows = slice(start, min(n, start + step))
        dx = _pair_norms(xs[rows], xs)
        dt = _pair_norms(txs[rows], txs)
        keep = dx > 0
        if keep.any():
            best = max(best, float(np.max(dt[keep] / dx[keep])))
    return best


def _check_lipschitz(m: Mapping, bound: float, strict: bool, prop: PropertyName,
                     grid_size: Optional[int]) -> PropertyReport:
    grid_size = _resolve_grid(grid_size)
    xs = grid_points(m.domain, grid_size)
    txs = m.eval_many(xs)
    modulus = estimate_contraction_modulus(m, grid_size)

    def bad_pair(dt, dx):
        return dt >= bound * dx if strict else dt > bound * dx + TOL

    def violated(rows):
        return bad_pair(_pair_norms(txs[rows], txs), _pair_norms(xs[rows], xs))

    def confirm(i, j):
        x, y = _point(xs[i]), _point(xs[j])
        return x != y and bad_pair(distance(m(x), m(y)), distance(x, y))

    n = xs.shape[0]
    hit = _scan_pairs(xs, violated, confirm)
    if hit is None:
        return PropertyReport(prop, "pass", n * (n - 1), estimated_modulus=modulus)
    return PropertyReport(prop, "fail", n * (n - 1), (_point(xs[hit[0]]), _point(xs[hit[1]])),
                          estimated_modulus=modulus)


def check_contraction(m: Mapping, grid_size: Optional[int] = None) -> PropertyReport:
    """Pass when every grid pair has difference quotient strictly below 1."""
    return _check_lipschitz(m, 1.0, True, "contraction", grid_size)


def check_nonexpansive(m: Mapping, grid_size: Optional[int] = None) -> PropertyReport:
    return _check_lipschitz(m, 1.0, False, "nonexpansive", grid_size)


def check_condition_c(m: Mapping, grid_size: Optional[int] = None) -> PropertyReport:
    """Grid check of Suzuki's condition (C).

    For every ordered pair ``(x, y)`` with ``|x - Tx| / 2 <= |x - y|`` the
    check requires ``|Tx - Ty| <= |x - y|``; both sides get slack ``TOL``.
    """
    grid_size = _resolve_grid(grid_size)
    xs = grid_points(m.domain, grid_size)
    txs = m.eval_many(xs)
    half_res = 0.5 * _row_norms(xs - txs)

    def violated(rows):
        dx = _pair_norms(xs[rows], xs)
        premise = half_res[rows, None] <= dx + TOL
        return premise & (_pair_norms(txs[rows], txs) > dx + TOL)

    def confirm(i, j):
        x, y = _point(xs[i]), _point(xs[j])
        tx, ty = m(x), m(y)
        dx = distance(x, y)
        return 0.5 * distance(x, tx) <= dx + TOL and distance(tx, ty) > dx + TOL

    n = xs.shape[0]
    hit = _scan_pairs(xs, violated, confirm)
    if hit is None:
        return PropertyReport("condition_C", "pass", n * (n - 1))
    return PropertyReport("condition_C", "fail", n * (n - 1),
                          (_point(xs[hit[0]]), _point(xs[hit[1]])))


def check_quasi_nonexpansive(m: Mapping, p: Point,
                             grid_size: Optional[int] = None) -> PropertyReport:
    """Check ``|Tx - p| <= |x - p| + TOL`` at every grid point.

    The witness of a failure is the pair ``(x, p)``.
    """
    if distance(m(p), p) > TOL:
        raise ConfigError(f"{p} is not a fixed point of {m.id!r} "
                          f"(|Tp - p| = {distance(m(p), p):.3e})")
    grid_size = _resolve_grid(grid_size)
    xs = grid_points(m.domain, grid_size)
    txs = m.eval_many(xs)
    pc = np.asarray(p.coords)[None, :]
    bad = _row_norms(txs - pc) > _row_norms(xs - pc) + TOL
    for i in np.flatnonzero(bad):
        x = _point(xs[i])
        if distance(m(x), p) > distance(x, p) + TOL:
            return PropertyReport("quasi_nonexpansive", "fail", xs.shape[0], (x, p))
    return PropertyReport("quasi_nonexpansive", "pass", xs.shape[0])


def check_prop1_iii(m: Mapping, grid_size: Optional[int] = None) -> PropertyReport:
    """Grid check of ``|x - Ty| <= 3|Tx - x| + |x - y|``.

    The inequality is a consequence of condition (C); the check itself does
    not require condition (C) so it can also expose maps that break it.
    """
    grid_size = _resolve_grid(grid_size)
    xs = grid_points(m.domain, grid_size)
    txs = m.eval_many(xs)
    res = _row_norms(txs - xs)

    def violated(rows):
        lhs = _pair_norms(xs[rows], txs)
        return lhs > 3.0 * res[rows, None] + _pair_norms(xs[rows], xs) + TOL

    def confirm(i, j):
        x, y = _point(xs[i]), _point(xs[j])
        return distance(x, m(y)) > 3.0 * distance(m(x), x) + distance(x, y) + TOL

    # the diagonal reduces to |x - Tx| <= 3|Tx - x|, which always holds
    n = xs.shape[0]
    hit = _scan_pairs(xs, violated, confirm)
    if hit is None:
        return PropertyReport("prop1_iii", "pass", n * (n - 1))
    return PropertyReport("prop1_iii", "fail", n * (n - 1),
                          (_point(xs[hit[0]]), _point(xs[hit[1]])))


def _bisect_fixed_point(m: Mapping, tol: float) -> Point:
    lo, hi = m.domain.lower.coords[0], m.domain.upper.coords[0]
    g = lambda x: m(Point((x,))).coords[0] - x  # noqa: E731
    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return Point((lo,))
    if ghi == 0.0:
        return Point((hi,))
    if (glo > 0) == (ghi > 0):
        raise NumericError(f"T(x) - x does not change sign on the domain of {m.id!r}")
    while True:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        gm = g(mid)
        if gm == 0.0:
            return Point((mid,))
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    best = min((lo, hi), key=lambda x: abs(g(x)))
    if abs(g(best)) > tol:
        raise NumericError(f"bisection for {m.id!r} ended with residual {abs(g(best)):.3e} > {tol}")
    return Point((best,))


def fixed_point_reference(m: Mapping, tol: float = 1e-15, max_iter: int = 10_000,
                          x0: Optional[Point] = None) -> Point:
    """Independent fixed-point oracle.

    Runs plain Picard iteration ``x <- T(x)`` until the iterate stops moving
    (or settles into an ulp-level two-cycle). Scalar maps fall back to
    bisection on ``T(x) - x`` when Picard iteration does not settle.

    Raises
    ------
    NumericError
        If neither route produces ``p`` with ``|T(p) - p| <= tol``.
    """
    x = m.domain.center if x0 is None else x0
    prev = None
    for _ in range(max_iter):
        nxt = m(x)
        if nxt == x or nxt == prev:
            best = min((x, nxt), key=lambda z: distance(m(z), z))
            if distance(m(best), best) <= tol:
                return best
            break
        prev, x = x, nxt
    if m.domain.dim == 1:
        return _bisect_fixed_point(m, tol)
    raise NumericError(f"Picard iteration on {m.id!r} did not settle within {max_iter} steps; "
                       "the map may not be a contraction")
