"""Process curves, work, admissibility and holonomy of the Gibbs connection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import calculus as calc
from . import kernels
from .calculus import Dual, QuadratureSpec
from .geometry import (
    EnergySplit,
    PhaseSpace,
    State,
    TangentVector,
    gibbs_form,
    gibbs_form_energy_split,
    symplectic_form,
    universal_energy,
)

CLOSURE_TOL = 1e-9


@dataclass(frozen=True)
class ProcessCurve:
    """A path ``[0, 1] -> M`` given as a map to flat ``(x; p)`` vectors.

    ``velocity`` may be supplied; otherwise it is taken by forward-mode
    differentiation of ``func``, which must then accept a dual ``t``.
    ``breakpoints`` are interior parameters where the velocity may jump;
    integrals are split there.  For closed curves the endpoint ``t = 1`` is
    identified with ``t = 0``.
    """

    space: PhaseSpace
    func: Callable[[float], Sequence]
    closed: bool = False
    velocity_func: Callable[[float], Sequence] | None = None
    breakpoints: tuple[float, ...] = ()
    waypoints: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        bps = tuple(sorted(float(b) for b in self.breakpoints if 0.0 < b < 1.0))
        object.__setattr__(self, "breakpoints", bps)
        z0 = self._raw(0.0)
        if z0.size != 2 * self.space.n:
            raise ValueError(f"curve map returns {z0.size} coordinates, need {2 * self.space.n}")
        if self.closed:
            z1 = self._raw(1.0)
            gap = float(np.max(np.abs(z1 - z0)))
            scale = max(1.0, float(np.max(np.abs(z0))))
            if gap > CLOSURE_TOL * scale:
                raise ValueError(f"curve marked closed but endpoints differ by {gap:.3g}")

    def _raw(self, t: float) -> np.ndarray:
        return np.array([calc.real_part(v) for v in self.func(t)], dtype=float)

    def point(self, t: float) -> State:
        if self.closed and t == 1.0:
            t = 0.0
        return State.from_vector(self._raw(t))

    def velocity(self, t: float) -> TangentVector:
        if self.velocity_func is not None:
            return TangentVector.from_vector(np.asarray(self.velocity_func(t), dtype=float))
        out = self.func(Dual(float(t), (1.0,)))
        return TangentVector.from_vector(
            [calc.real_part(v.partials[0]) if isinstance(v, Dual) else 0.0 for v in out]
        )

    @property
    def pieces(self) -> list[tuple[float, float]]:
        cuts = (0.0, *self.breakpoints, 1.0)
        return list(zip(cuts[:-1], cuts[1:]))

    def reversed(self) -> ProcessCurve:
        vel = None if self.velocity_func is None else (lambda t: -np.asarray(self.velocity_func(1.0 - t)))
        return ProcessCurve(
            self.space,
            lambda t: self.func(1.0 - t),
            self.closed,
            vel,
            tuple(1.0 - b for b in self.breakpoints),
        )

    def reparameterized(self, phi: Callable, dphi: Callable) -> ProcessCurve:
        """``t -> c(phi(t))`` for an increasing ``phi`` with ``phi(0)=0``, ``phi(1)=1``."""
        if self.velocity_func is not None:
            vel = lambda t: dphi(t) * np.asarray(self.velocity_func(phi(t)))  # noqa: E731
        else:
            vel = lambda t: dphi(t) * self.velocity(phi(t)).vector  # noqa: E731
        inv = []
        for b in self.breakpoints:
            inv.append(calc.solve_bracketed(lambda s, b=b: phi(s) - b, 0.0, 1.0, tol=0.0, xtol=0.0))
        return ProcessCurve(self.space, lambda t: self.func(phi(calc.real_part(t))), self.closed, vel, tuple(inv))

    def then(self, other: ProcessCurve) -> ProcessCurve:
        """Concatenation: ``self`` on ``[0, 1/2]``, ``other`` on ``[1/2, 1]``."""
        if other.space != self.space:
            raise ValueError("cannot join curves in different phase spaces")
        if not np.array_equal(self._raw(1.0), other._raw(0.0)):
            raise ValueError("curves do not meet")

        def func(t):
            tt = calc.real_part(t)
            return self.func(2 * t) if tt <= 0.5 else other.func(2 * t - 1)

        def vel(t):
            if t < 0.5:
                return 2 * self.velocity(2 * t).vector
            return 2 * other.velocity(2 * t - 1).vector

        bps = (*(0.5 * b for b in self.breakpoints), 0.5, *(0.5 + 0.5 * b for b in other.breakpoints))
        closed = np.array_equal(self._raw(0.0), other._raw(1.0))
        return ProcessCurve(self.space, func, bool(closed), vel, bps)


def curve(space: PhaseSpace, func: Callable, closed: bool = False) -> ProcessCurve:
    return ProcessCurve(space, func, closed)


def constant_curve(space: PhaseSpace, s: State) -> ProcessCurve:
    z = s.vector
    return ProcessCurve(space, lambda t: z, True, lambda t: np.zeros_like(z))


def polyline(space: PhaseSpace, waypoints: Sequence, closed: bool = False) -> ProcessCurve:
    """Piecewise-linear path through ``waypoints`` at uniform parameter spacing.

    Waypoints are :class:`State` objects or flat ``(x; p)`` vectors.  A closed
    polyline returns to the first waypoint.
    """
    pts = np.array([w.vector if isinstance(w, State) else np.asarray(w, dtype=float) for w in waypoints])
    if pts.ndim != 2 or pts.shape[1] != 2 * space.n:
        raise ValueError(f"waypoints must each have {2 * space.n} coordinates")
    if closed and not np.array_equal(pts[0], pts[-1]):
        pts = np.vstack([pts, pts[:1]])
    if len(pts) < 2:
        raise ValueError("a polyline needs at least two waypoints")
    m = len(pts) - 1

    def segment(t):
        k = min(int(math.floor(calc.real_part(t) * m)), m - 1)
        return max(k, 0)

    def func(t):
        k = segment(t)
        u = t * m - k
        return [pts[k, i] + u * (pts[k + 1, i] - pts[k, i]) for i in range(pts.shape[1])]

    def vel(t):
        return m * (pts[segment(t) + 1] - pts[segment(t)])

    return ProcessCurve(space, func, closed, vel, tuple(k / m for k in range(1, m)), pts)


def embedded_curve(emb, path: Callable, closed: bool = False, breakpoints=()) -> ProcessCurve:
    """Image under the embedding of a parameter-space path ``path(t)``."""

    def func(t):
        q = [calc.real_part(v) for v in path(calc.real_part(t))]
        return emb.point(q).vector

    def vel(t):
        tt = Dual(float(t), (1.0,))
        qd = path(tt)
        q = [calc.real_part(v) for v in qd]
        dq = np.array([calc.real_part(v.partials[0]) if isinstance(v, Dual) else 0.0 for v in qd])
        return emb.jacobian(q) @ dq

    return ProcessCurve(emb.space, func, closed, vel, tuple(breakpoints))


def embedded_polyline(emb, waypoints: Sequence[Sequence[float]], closed: bool = False) -> ProcessCurve:
    pts = np.asarray(waypoints, dtype=float)
    if closed and not np.array_equal(pts[0], pts[-1]):
        pts = np.vstack([pts, pts[:1]])
    m = len(pts) - 1
    if m < 1:
        raise ValueError("a polyline needs at least two waypoints")

    def path(t):
        k = max(min(int(math.floor(calc.real_part(t) * m)), m - 1), 0)
        u = t * m - k
        return [pts[k, i] + u * (pts[k + 1, i] - pts[k, i]) for i in range(pts.shape[1])]

    return embedded_curve(emb, path, closed, tuple(k / m for k in range(1, m)))


# ------------------------------------------------------------------ integrals


def _one_sided(f: Callable[[float], float], a: float, b: float) -> Callable[[float], float]:
    # velocities may jump at piece ends; evaluate just inside the piece
    lo, hi = math.nextafter(a, b), math.nextafter(b, a)
    return lambda t: f(min(max(t, lo), hi))


def _integrate(c: ProcessCurve, integrand: Callable[[float], float], spec: QuadratureSpec) -> float:
    pieces = c.pieces
    share = QuadratureSpec(spec.abs_tol / len(pieces), spec.max_depth, spec.min_depth)
    total = 0.0
    for a, b in pieces:
        total += calc.adaptive_simpson(_one_sided(integrand, a, b), a, b, share)[0]
    return total


def gibbs_rate(space: PhaseSpace, c: ProcessCurve, t: float) -> float:
    """``α(ċ(t))``."""
    return gibbs_form(space, c.point(t), c.velocity(t))


def work(space: PhaseSpace, c: ProcessCurve, spec: QuadratureSpec | None = None) -> float:
    """``W[c] = ∫_c α``."""
    spec = spec or QuadratureSpec()
    return _integrate(c, lambda t: gibbs_rate(space, c, t), spec)


class Admissibility(NamedTuple):
    admissible: bool
    max_violation: float
    argmax_t: float


def violation(space: PhaseSpace, c: ProcessCurve, t: float) -> float:
    """``|α(ċ)| / |ċ|``: the Gibbs form on the unit tangent (0 where ``ċ = 0``)."""
    v = c.velocity(t)
    speed = float(np.linalg.norm(v.vector))
    if speed == 0.0:
        return 0.0
    return abs(gibbs_form(space, c.point(t), v)) / speed


def is_admissible(space: PhaseSpace, c: ProcessCurve, tol: float = 1e-8, samples: int = 512) -> Admissibility:
    """Sample ``violation`` on a uniform grid, then refine around the worst sample."""
    if samples < 2:
        raise ValueError("need at least two samples")
    ts = np.linspace(0.0, 1.0, samples)
    ps = np.empty((samples, space.n))
    dxs = np.empty((samples, space.n))
    for r, t in enumerate(ts):
        s, v = c.point(t), c.velocity(t)
        speed = float(np.linalg.norm(v.vector))
        ps[r] = s.p
        dxs[r] = v.dx / speed if speed > 0 else 0.0
    best, arg = kernels.max_abs_pairing(ps, dxs)
    best_t = float(ts[arg])
    h = 1.0 / (samples - 1)
    for _ in range(4):
        lo, hi = max(0.0, best_t - h), min(1.0, best_t + h)
        for t in np.linspace(lo, hi, 17):
            val = violation(space, c, float(t))
            if val > best:
                best, best_t = val, float(t)
        h /= 8.0
    return Admissibility(best <= tol, best, best_t)


def holonomy(space: PhaseSpace, loop: ProcessCurve, spec: QuadratureSpec | None = None) -> float:
    """Fiber increment of the loop lifted through the Gibbs connection.

    The lift solves ``u̇ = α(ċ)``, so the increment is the cyclic work.
    """
    if not loop.closed:
        raise ValueError("holonomy needs a closed curve")
    return horizontal_lift(space, loop, [0.0, 1.0], spec=spec)[-1]


def horizontal_lift(
    space: PhaseSpace, c: ProcessCurve, ts: Sequence[float], u0: float = 0.0, spec: QuadratureSpec | None = None
) -> np.ndarray:
    """Fiber coordinate of the lifted curve at increasing parameters ``ts``."""
    spec = spec or QuadratureSpec()
    ts = [float(t) for t in ts]
    if any(b < a for a, b in zip(ts, ts[1:])):
        raise ValueError("lift parameters must be increasing")
    cuts = sorted(set(ts) | {b for b in c.breakpoints if ts[0] < b < ts[-1]})
    per = QuadratureSpec(spec.abs_tol / max(1, len(cuts) - 1), spec.max_depth, spec.min_depth)
    f = lambda t: gibbs_rate(space, c, t)  # noqa: E731
    acc = {cuts[0]: u0}
    u = u0
    for a, b in zip(cuts, cuts[1:]):
        if b > a:
            u += calc.adaptive_simpson(_one_sided(f, a, b), a, b, per)[0]
        acc[b] = u
    return np.array([acc[t] for t in ts])


class EnergyBudget(NamedTuple):
    heat: float
    work: float
    energy: float

    def recompose(self) -> float:
        return -self.heat - self.work + self.energy


def energy_budget(space: PhaseSpace, c: ProcessCurve, spec: QuadratureSpec | None = None) -> EnergyBudget:
    """Integrated heat, work and internal-energy parts of ``α`` along ``c``."""
    spec = spec or QuadratureSpec()
    spec = QuadratureSpec(spec.abs_tol / 3, spec.max_depth, spec.min_depth)

    def part(k):
        def f(t):
            split: EnergySplit = gibbs_form_energy_split(space, c.point(t), c.velocity(t))
            return split[k]

        return _integrate(c, f, spec)

    return EnergyBudget(part(0), part(1), part(2))


def energy_change(space: PhaseSpace, c: ProcessCurve) -> float:
    return universal_energy(space, c.point(1.0)) - universal_energy(space, c.point(0.0))


# -------------------------------------------------------------------- stokes


@dataclass(frozen=True)
class AxisRectangle:
    """Rectangle ``x_range × p_range`` in the plane of pair ``pair`` (1-based).

    Traversed counterclockwise with ``x`` horizontal and ``p`` vertical
    unless ``clockwise``; the other coordinates are taken from ``base``.
    """

    pair: int
    x_range: tuple[float, float]
    p_range: tuple[float, float]
    base: State | None = None
    clockwise: bool = False


class StokesReport(NamedTuple):
    line_integral: float
    area_value: float
    discrepancy: float


def rectangle_loop(space: PhaseSpace, rect: AxisRectangle) -> ProcessCurve:
    n = space.n
    if not 1 <= rect.pair <= n:
        raise ValueError(f"pair index {rect.pair} outside 1..{n}")
    vals = [*rect.x_range, *rect.p_range]
    if len(rect.x_range) != 2 or len(rect.p_range) != 2 or not all(math.isfinite(v) for v in vals):
        raise ValueError("rectangle ranges must be two finite numbers each")
    base = rect.base.vector if rect.base is not None else np.zeros(2 * n)
    if base.size != 2 * n:
        raise ValueError("rectangle base state has the wrong dimension")
    (x0, x1), (p0, p1) = rect.x_range, rect.p_range
    corners = [(x0, p0), (x1, p0), (x1, p1), (x0, p1)]
    if rect.clockwise:
        corners = corners[::-1]
    i = rect.pair - 1
    pts = []
    for x, p in corners:
        z = base.copy()
        z[i], z[n + i] = x, p
        pts.append(z)
    return polyline(space, pts, closed=True)


def stokes_check(space: PhaseSpace, rect: AxisRectangle, spec: QuadratureSpec | None = None) -> StokesReport:
    """Compare the loop integral of ``α`` with the ``ω``-area of the rectangle."""
    spec = spec or QuadratureSpec()
    n = space.n
    i = rect.pair - 1
    loop = rectangle_loop(space, rect)
    line = holonomy(space, loop, spec)
    (x0, x1), (p0, p1) = rect.x_range, rect.p_range
    u = np.zeros(2 * n)
    v = np.zeros(2 * n)
    u[i] = x1 - x0
    v[n + i] = p1 - p0
    area = symplectic_form(space, TangentVector.from_vector(u), TangentVector.from_vector(v))
    if rect.clockwise:
        area = -area
    return StokesReport(line, area, abs(line - area))


def polyline_work_exact(space: PhaseSpace, c: ProcessCurve) -> float:
    """Closed-form work of a polyline (trapezoid rule is exact on each segment)."""
    pts = c.waypoints
    if pts is None:
        raise ValueError("curve was not built by polyline()")
    n = space.n
    return kernels.polyline_work(pts[:, :n], pts[:, n:])
