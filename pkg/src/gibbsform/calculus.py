"""Forward-mode differentiation, quadrature and root finding.

Dual numbers carry a value and a tuple of partials.  Values and partials
may themselves be duals, which gives exact second derivatives by nesting.
Functions written with the operators below plus :func:`log`, :func:`exp`
and :func:`sqrt` work for floats and duals alike.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


class DomainError(ValueError):
    """A function was evaluated outside its domain (e.g. ``ln`` of a non-positive number)."""


def real_part(x) -> float:
    while isinstance(x, Dual):
        x = x.value
    return float(x)


class Dual:
    __slots__ = ("value", "partials")

    def __init__(self, value, partials: Sequence = ()):
        self.value = value
        self.partials = tuple(partials)

    def __repr__(self):
        return f"Dual({self.value!r}, {self.partials!r})"

    def __neg__(self):
        return Dual(-self.value, [-a for a in self.partials])

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value + other.value, [a + b for a, b in zip(self.partials, other.partials)])
        return Dual(self.value + other, self.partials)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value - other.value, [a - b for a, b in zip(self.partials, other.partials)])
        return Dual(self.value - other, self.partials)

    def __rsub__(self, other):
        return Dual(other - self.value, [-a for a in self.partials])

    def __mul__(self, other):
        if isinstance(other, Dual):
            u, v = self.value, other.value
            return Dual(u * v, [u * b + a * v for a, b in zip(self.partials, other.partials)])
        return Dual(self.value * other, [a * other for a in self.partials])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            if real_part(other.value) == 0.0:
                raise ZeroDivisionError("dual division by zero")
            q = self.value / other.value
            return Dual(q, [(a - q * b) / other.value for a, b in zip(self.partials, other.partials)])
        return Dual(self.value / other, [a / other for a in self.partials])

    def __rtruediv__(self, other):
        if real_part(self.value) == 0.0:
            raise ZeroDivisionError("dual division by zero")
        q = other / self.value
        return Dual(q, [-q * a / self.value for a in self.partials])

    def __pow__(self, k):
        if isinstance(k, Dual):
            return exp(k * log(self))
        if k == 0:
            return Dual(self.value**0, [0.0 * a for a in self.partials])
        if float(k).is_integer():
            k = int(k)
            if k < 0 and real_part(self.value) == 0.0:
                raise ZeroDivisionError("negative power of zero")
            lower = self.value ** (k - 1)
        else:
            if real_part(self.value) <= 0.0:
                raise DomainError(f"non-integer power {k} of non-positive number {real_part(self.value)}")
            lower = self.value ** (k - 1)
        return Dual(lower * self.value, [k * lower * a for a in self.partials])

    def __rpow__(self, base):
        return exp(self * log(base))

    def log(self):
        if real_part(self.value) <= 0.0:
            raise DomainError(f"ln of non-positive number {real_part(self.value)}")
        return Dual(log(self.value), [a / self.value for a in self.partials])

    def exp(self):
        e = exp(self.value)
        return Dual(e, [e * a for a in self.partials])

    def sqrt(self):
        return self**0.5

    def __lt__(self, other):
        return real_part(self) < real_part(other)

    def __le__(self, other):
        return real_part(self) <= real_part(other)

    def __gt__(self, other):
        return real_part(self) > real_part(other)

    def __ge__(self, other):
        return real_part(self) >= real_part(other)


def log(x):
    if isinstance(x, Dual):
        return x.log()
    if x <= 0:
        raise DomainError(f"ln of non-positive number {x}")
    return math.log(x)


ln = log


def exp(x):
    if isinstance(x, Dual):
        return x.exp()
    return math.exp(x)


def sqrt(x):
    if isinstance(x, Dual):
        return x.sqrt()
    if x < 0:
        raise DomainError(f"sqrt of negative number {x}")
    return math.sqrt(x)


@dataclass(frozen=True)
class ScalarField:
    """A function of ``arity`` reals, closed under dual arithmetic."""

    arity: int
    evaluator: Callable
    names: tuple[str, ...] = ()

    def __call__(self, q):
        if len(q) != self.arity:
            raise ValueError(f"expected {self.arity} arguments, got {len(q)}")
        return self.evaluator(q)


def _seed(q: Sequence[float]) -> list[Dual]:
    m = len(q)
    return [Dual(float(q[i]), [1.0 if j == i else 0.0 for j in range(m)]) for i in range(m)]


def _partials(r, m: int) -> np.ndarray:
    if isinstance(r, Dual):
        return np.array([real_part(a) for a in r.partials], dtype=float)
    return np.zeros(m)


def value_and_gradient(f, q) -> tuple[float, np.ndarray]:
    q = [float(v) for v in q]
    r = f(_seed(q))
    return real_part(r), _partials(r, len(q))


def gradient(f, q) -> np.ndarray:
    """Exact (to rounding) forward-mode gradient of ``f`` at ``q``."""
    return value_and_gradient(f, q)[1]


def value_gradient_hessian(f, q) -> tuple[float, np.ndarray, np.ndarray]:
    """Value, gradient and Hessian from one dual-over-dual evaluation."""
    q = [float(v) for v in q]
    m = len(q)
    zeros = [0.0] * m
    args = [
        Dual(
            Dual(q[i], [1.0 if j == i else 0.0 for j in range(m)]),
            [Dual(1.0 if j == i else 0.0, zeros) for j in range(m)],
        )
        for i in range(m)
    ]
    r = f(args)
    if not isinstance(r, Dual):
        return float(r), np.zeros(m), np.zeros((m, m))
    inner = r.value
    value = real_part(inner)
    grad = np.array([real_part(a) for a in r.partials])
    hess = np.zeros((m, m))
    for j, dj in enumerate(r.partials):
        if isinstance(dj, Dual):
            hess[j] = [real_part(a) for a in dj.partials]
    return value, grad, hess


def hessian(f, q) -> np.ndarray:
    return value_gradient_hessian(f, q)[2]


def _call_float(f, q):
    r = f(list(q))
    return real_part(r)


def fd_gradient(f, q, h: float = 1e-6) -> np.ndarray:
    """Central differences with relative step ``h·max(1, |q_i|)``."""
    q = np.asarray(q, dtype=float)
    g = np.zeros(q.size)
    for i in range(q.size):
        step = h * max(1.0, abs(q[i]))
        up, dn = q.copy(), q.copy()
        up[i] += step
        dn[i] -= step
        g[i] = (_call_float(f, up) - _call_float(f, dn)) / (up[i] - dn[i])
    return g


def fd_second_partial(f, q, i: int, j: int) -> float:
    """Central-difference ``∂²f/∂q_i∂q_j`` with step ``max(1e-5, 1e-5·|q|)``."""
    q = np.asarray(q, dtype=float)
    hi = max(1e-5, 1e-5 * abs(q[i]))
    hj = max(1e-5, 1e-5 * abs(q[j]))

    def at(di, dj):
        z = q.copy()
        z[i] += di
        z[j] += dj
        return _call_float(f, z)

    if i == j:
        return (at(hi, 0) - 2 * at(0, 0) + at(-hi, 0)) / (hi * hi)
    return (at(hi, hj) - at(hi, -hj) - at(-hi, hj) + at(-hi, -hj)) / (4 * hi * hj)


def second_partial(f, q, i: int, j: int, method: str = "dual") -> float:
    """``∂²f/∂q_i∂q_j`` (0-based indices) by nested duals or central differences."""
    m = len(q)
    if not (0 <= i < m and 0 <= j < m):
        raise IndexError(f"partial indices ({i}, {j}) out of range for {m} variables")
    if method == "dual":
        return float(hessian(f, q)[i, j])
    if method == "fd":
        return fd_second_partial(f, q, i, j)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------- quadrature


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-6
    max_depth: int = 50
    min_depth: int = 3

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if not 1 <= self.max_depth <= 60:
            raise ValueError("max_depth must be in 1..60")


class QuadratureError(RuntimeError):
    """Tolerance not met at the depth limit."""

    def __init__(self, estimate: float, error_bound: float):
        super().__init__(f"adaptive Simpson did not converge: estimate {estimate!r}, error bound {error_bound:.3g}")
        self.estimate = estimate
        self.error_bound = error_bound


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, spec: QuadratureSpec) -> tuple[float, float]:
    """Integrate ``f`` over ``[a, b]``; returns ``(value, error_estimate)``.

    Raises :class:`QuadratureError` if some panel still misses its share of
    the tolerance at ``max_depth``.
    """
    failed = False

    def simpson(fa, fm, fb, w):
        return w * (fa + 4.0 * fm + fb) / 6.0

    def recurse(a, fa, b, fb, m, fm, whole, tol, depth):
        nonlocal failed
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, m - a)
        right = simpson(fm, frm, fb, b - m)
        delta = left + right - whole
        if depth >= spec.min_depth and abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0, abs(delta) / 15.0
        if depth >= spec.max_depth:
            failed = True
            return left + right + delta / 15.0, abs(delta) / 15.0
        lv, le = recurse(a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1)
        rv, re = recurse(m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1)
        return lv + rv, le + re

    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    for v in (fa, fm, fb):
        if not math.isfinite(v):
            raise ValueError(f"integrand is not finite on [{a}, {b}]")
    value, err = recurse(a, fa, b, fb, m, fm, simpson(fa, fm, fb, b - a), spec.abs_tol, 1)
    if failed and err > spec.abs_tol:
        raise QuadratureError(value, err)
    return value, err


def integrate_one_form(form: Callable[[float], float], spec: QuadratureSpec | None = None) -> float:
    """``∫_0^1 form(t) dt`` by adaptive Simpson to ``spec.abs_tol``."""
    spec = spec or QuadratureSpec()
    return adaptive_simpson(form, 0.0, 1.0, spec)[0]


# -------------------------------------------------------------- root finding


class RootError(ValueError):
    """No sign change, non-finite evaluation, or iteration limit."""


def _value_and_slope(f, x: float) -> tuple[float, float]:
    try:
        r = f(Dual(x, (1.0,)))
    except TypeError:
        return float(f(x)), math.nan
    if isinstance(r, Dual):
        return real_part(r.value), real_part(r.partials[0])
    return float(r), 0.0


def solve_bracketed(
    f: Callable, lo: float, hi: float, tol: float = 1e-12, *, xtol: float | None = None, maxiter: int = 500
) -> float:
    """Root of ``f`` in ``[lo, hi]`` by Newton steps safeguarded with bisection.

    Stops once ``|f(x)| <= tol`` or the bracket is narrower than ``xtol``
    (default ``tol``).  With ``tol = xtol = 0`` it runs to the resolution of
    the floating point grid.  The slope comes from a dual evaluation of
    ``f``; functions that reject duals fall back to pure bisection.
    """
    lo, hi = float(lo), float(hi)
    if lo > hi:
        lo, hi = hi, lo
    xtol = tol if xtol is None else xtol
    flo, _ = _value_and_slope(f, lo)
    fhi, _ = _value_and_slope(f, hi)
    if not (math.isfinite(flo) and math.isfinite(fhi)):
        raise RootError(f"non-finite value at bracket end: f({lo})={flo}, f({hi})={fhi}")
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise RootError(f"no sign change on [{lo}, {hi}]: f(lo)={flo:.6g}, f(hi)={fhi:.6g}")
    # keep f(neg) < 0 < f(pos)
    neg, pos = (lo, hi) if flo < 0 else (hi, lo)
    x = 0.5 * (lo + hi)
    step_old = abs(hi - lo)
    step = step_old
    for _ in range(maxiter):
        fx, slope = _value_and_slope(f, x)
        if not math.isfinite(fx):
            raise RootError(f"non-finite value f({x}) = {fx}")
        if abs(fx) <= tol:
            return x
        if fx < 0:
            neg = x
        else:
            pos = x
        a, b = min(neg, pos), max(neg, pos)
        if b - a <= xtol:
            return x
        x_new = None
        if math.isfinite(slope) and slope != 0.0:
            cand = x - fx / slope
            if a < cand < b and abs(cand - x) < 0.5 * step_old:
                x_new = cand
        if x_new is None:
            x_new = 0.5 * (a + b)
            if x_new in (a, b):
                return x
        step_old, step = step, abs(x_new - x)
        if x_new == x:
            return x
        x = x_new
    raise RootError(f"no convergence after {maxiter} iterations (last x = {x})")
