"""System submanifolds generated by defining functions, and equations of state.

A :class:`DefiningFunction` ``g`` on the associated variables of a nonempty
index set ``J`` generates an embedding ``ι`` of the parameter space into
phase space: parameters fill their own coordinates and the conjugates are

    p_i = -∂g/∂x^i   (i ∉ J)        x^k = +∂g/∂p_k   (k ∈ J)

so that ``ι*α = d(f_J∘ι - g)``.  This vanishes exactly when ``g`` is
homogeneous of degree one in its extensive arguments.
"""

from __future__ import annotations

import inspect
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import calculus as calc
from .calculus import DomainError, ScalarField
from .geometry import (
    PhaseSpace,
    State,
    TangentVector,
    gibbs_form,
    make_standard_model,
    symplectic_form,
)
from .lattice import IndexSet, as_index_set, associated_variables, potential_name, potential_value

R_SI = 8.314462618  # J/(mol K)

EOS_NAMES = ("ideal_gas", "van_der_waals", "berthelot", "dieterici", "onnes")

Box = tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class DefiningFunction:
    """``g`` on the associated variables of ``J``, in pair order."""

    J: IndexSet
    g: ScalarField
    domain: Box = ()
    label: str = ""

    def __post_init__(self):
        J = self.J if isinstance(self.J, IndexSet) else IndexSet(self.J)
        object.__setattr__(self, "J", J)
        if not J.members:
            raise ValueError(
                "J must be nonempty: the all-intensive chart is degenerate (the intensive "
                "variables are dependent on any system), so no embedding is generated from it"
            )
        if self.domain and len(self.domain) != self.g.arity:
            raise ValueError("domain needs one interval per argument")


def as_field(g, arity: int) -> ScalarField:
    return g if isinstance(g, ScalarField) else ScalarField(arity, g)


class EmbeddedPoint(NamedTuple):
    state: State
    jacobian: np.ndarray  # (2n, n): d(x; p)/dq
    g: float


@dataclass(frozen=True)
class Embedding:
    space: PhaseSpace
    source: DefiningFunction
    domain: Box = field(default=())

    def __post_init__(self):
        n = self.space.n
        J = as_index_set(self.source.J, n)
        if self.source.g.arity != n:
            raise ValueError(f"defining function takes {self.source.g.arity} arguments, need {n}")
        if not self.domain:
            dom = self.source.domain or ((-math.inf, math.inf),) * n
            object.__setattr__(self, "domain", tuple(dom))
        object.__setattr__(self, "_J", J)

    @property
    def dimension(self) -> int:
        return self.space.n

    @property
    def J(self) -> IndexSet:
        return self._J

    @property
    def parameters(self) -> tuple[str, ...]:
        return associated_variables(self.space, self._J)

    @property
    def potential(self) -> str:
        return potential_name(self.space, self._J)

    def check_domain(self, q) -> None:
        for name, v, (lo, hi) in zip(self.parameters, q, self.domain):
            if not (lo < v < hi):
                raise DomainError(f"{name} = {v} outside ({lo}, {hi})")

    def evaluate(self, q: Sequence[float]) -> EmbeddedPoint:
        """Embedded state and Jacobian from one dual-over-dual pass through ``g``."""
        q = np.asarray(q, dtype=float)
        n = self.space.n
        if q.size != n:
            raise ValueError(f"expected {n} parameters, got {q.size}")
        self.check_domain(q)
        try:
            gv, grad, hess = calc.value_gradient_hessian(self.source.g, list(q))
        except (ZeroDivisionError, OverflowError) as exc:
            raise DomainError(f"defining function failed at {q.tolist()}: {exc}") from exc
        if not (np.isfinite(gv) and np.all(np.isfinite(grad)) and np.all(np.isfinite(hess))):
            raise DomainError(f"defining function not finite at {q.tolist()}")
        x = np.empty(n)
        p = np.empty(n)
        jac = np.zeros((2 * n, n))
        for i in range(n):
            if i + 1 in self._J:
                p[i] = q[i]
                x[i] = grad[i]
                jac[n + i, i] = 1.0
                jac[i] = hess[i]
            else:
                x[i] = q[i]
                p[i] = -grad[i]
                jac[i, i] = 1.0
                jac[n + i] = -hess[i]
        return EmbeddedPoint(State(x, p), jac, gv)

    def point(self, q) -> State:
        return self.evaluate(q).state

    def jacobian(self, q) -> np.ndarray:
        return self.evaluate(q).jacobian

    def pushforward(self, q) -> list[TangentVector]:
        jac = self.jacobian(q)
        return [TangentVector.from_vector(jac[:, j]) for j in range(self.space.n)]

    def parameter_index(self, which) -> int:
        if isinstance(which, str):
            return self.parameters.index(self._resolve(which))
        j = int(which)
        if not 0 <= j < self.space.n:
            raise IndexError(f"parameter index {j} out of range")
        return j

    def _resolve(self, name: str) -> str:
        kind, i, _ = self.space.locate(name)
        return self.space.pair_labels[i][0 if kind == "x" else 1]

    def partial(self, target: str, wrt: str, q) -> float:
        """``∂target/∂wrt`` holding the other parameters fixed (displayed names allowed)."""
        k, sign = self.space.coordinate_index(target)
        _, _, wsign = self.space.locate(wrt)
        if self._resolve(wrt) not in self.parameters:
            raise ValueError(f"{wrt} is not a parameter of this embedding ({', '.join(self.parameters)})")
        j = self.parameter_index(wrt)
        return sign * wsign * float(self.jacobian(q)[k, j])

    def value(self, name: str, q) -> float:
        return self.space.value_of(self.point(q), name)


def build_embedding(space: PhaseSpace, df: DefiningFunction, domain: Box = ()) -> Embedding:
    return Embedding(space, df, tuple(domain))


def gibbs_duhem_residual(emb: Embedding, q) -> np.ndarray:
    """``(ι*α)(∂/∂q_j)`` for every parameter direction ``j``."""
    pt = emb.evaluate(q)
    return np.array(
        [gibbs_form(emb.space, pt.state, TangentVector.from_vector(pt.jacobian[:, j])) for j in range(emb.dimension)]
    )


def euler_gap(emb: Embedding, q) -> float:
    """``f_J∘ι - g``: zero for degree-one homogeneous ``g``."""
    pt = emb.evaluate(q)
    return potential_value(emb.space, emb.J, pt.state) - pt.g


def maxwell_residual(emb: Embedding, q, i, j) -> float:
    """``(ι*ω)(∂_i, ∂_j)`` for two distinct parameter directions (index or name)."""
    a, b = emb.parameter_index(i), emb.parameter_index(j)
    if a == b:
        raise ValueError("Maxwell residual needs two distinct parameter directions")
    jac = emb.jacobian(q)
    u = TangentVector.from_vector(jac[:, a])
    v = TangentVector.from_vector(jac[:, b])
    return symplectic_form(emb.space, u, v)


@dataclass(frozen=True)
class GibbsRelation:
    """``target = sign · ∂g/∂wrt`` at fixed ``held``."""

    emb: Embedding
    target: str
    sign: float
    wrt: str
    held: tuple[str, ...]

    def __call__(self, q) -> float:
        j = self.emb.parameters.index(self.wrt)
        return self.sign * float(calc.gradient(self.emb.source.g, list(q))[j])

    @property
    def formula(self) -> str:
        s = "" if self.sign > 0 else "−"
        held = ",".join(self.held)
        return f"{self.target} = {s}∂{self.emb.potential}/∂{self.wrt} |_{{{held}}}"


def gibbs_relation(emb: Embedding, target: str) -> GibbsRelation:
    space = emb.space
    kind, i, dsign = space.locate(target)
    name = space.pair_labels[i][0 if kind == "x" else 1]
    if name in emb.parameters:
        raise ValueError(f"{target} is a parameter of the embedding, not a derived coordinate")
    conj = space.pair_labels[i][1 if kind == "x" else 0]
    sign = (1.0 if kind == "x" else -1.0) * dsign
    held = tuple(v for v in emb.parameters if v != conj)
    shown = target if dsign < 0 else name
    return GibbsRelation(emb, shown, sign, conj, held)


# ------------------------------------------------------------ defining functions

POSITIVE: Box = ((0.0, math.inf),) * 3


def _field(names, fn) -> ScalarField:
    return ScalarField(len(names), fn, tuple(names))


def ideal_gas_fundamental(R: float = 1.0, c: float = 0.0) -> DefiningFunction:
    """Helmholtz ``F(T,V,N) = -NRT (ln(V/N) + 3/2 ln T + c)``."""
    if not R > 0:
        raise ValueError("R must be positive")

    def F(q):
        T, V, N = q
        return -N * R * T * (calc.log(V / N) + 1.5 * calc.log(T) + c)

    return DefiningFunction(IndexSet({2, 3}), _field(("T", "V", "N"), F), POSITIVE, "ideal_gas")


def ideal_gas_energy_fundamental(R: float = 1.0, c: float = 0.0) -> DefiningFunction:
    """Internal energy ``U(S,V,N) = 3/2 NRT`` with ``T`` solved from the entropy of
    :func:`ideal_gas_fundamental` (same ``R``, ``c``)."""
    if not R > 0:
        raise ValueError("R must be positive")

    def U(q):
        S, V, N = q
        T = calc.exp((S / (N * R) - calc.log(V / N) - c - 1.5) / 1.5)
        return 1.5 * N * R * T

    return DefiningFunction(IndexSet({1, 2, 3}), _field(("S", "V", "N"), U), POSITIVE, "ideal_gas_energy")


def vdw_fundamental(R: float = 1.0, a: float = 0.0, b: float = 0.0, c: float = 0.0) -> DefiningFunction:
    """``F = -NRT (ln((V-Nb)/N) + 3/2 ln T + c) - aN²/V``, valid for ``V > Nb``."""
    if not R > 0 or a < 0 or b < 0:
        raise ValueError("need R > 0, a >= 0, b >= 0")

    def F(q):
        T, V, N = q
        if V - N * b <= 0:
            raise DomainError(f"V = {calc.real_part(V)} <= Nb = {calc.real_part(N * b)}")
        return -N * R * T * (calc.log((V - N * b) / N) + 1.5 * calc.log(T) + c) - a * N * N / V

    return DefiningFunction(IndexSet({2, 3}), _field(("T", "V", "N"), F), POSITIVE, "van_der_waals")


def berthelot_fundamental(R: float = 1.0, a: float = 0.0, b: float = 0.0, c: float = 0.0) -> DefiningFunction:
    """Berthelot gas: as van der Waals with attraction ``a/T``."""
    if not R > 0 or a < 0 or b < 0:
        raise ValueError("need R > 0, a >= 0, b >= 0")

    def F(q):
        T, V, N = q
        if V - N * b <= 0:
            raise DomainError(f"V = {calc.real_part(V)} <= Nb = {calc.real_part(N * b)}")
        return -N * R * T * (calc.log((V - N * b) / N) + 1.5 * calc.log(T) + c) - a * N * N / (T * V)

    return DefiningFunction(IndexSet({2, 3}), _field(("T", "V", "N"), F), POSITIVE, "berthelot")


def _zero(T):
    return 0.0


def onnes_fundamental(
    R: float = 1.0, a: float = 1.0, B: Callable = _zero, C: Callable = _zero, c: float = 0.0
) -> DefiningFunction:
    """Virial gas truncated after the ``C`` term, extensive form ``aN/V``."""
    if not R > 0:
        raise ValueError("R must be positive")

    def F(q):
        T, V, N = q
        y = a * N / V
        return -N * R * T * (calc.log(V / N) - B(T) * y - 0.5 * C(T) * y * y + 1.5 * calc.log(T) + c)

    return DefiningFunction(IndexSet({2, 3}), _field(("T", "V", "N"), F), POSITIVE, "onnes")


# ---------------------------------------------------------- equations of state


def _law_ideal(p, V, T, N, c):
    return p * V - c.R * T * N


def _law_vdw(p, V, T, N, c):
    return (p + c.a / (V * V)) * (V - c.b) - c.R * T * N


def _law_berthelot(p, V, T, N, c):
    return (p + c.a / (T * V * V)) * (V - c.b) - c.R * T * N


def _law_dieterici(p, V, T, N, c):
    return p * (V - c.b) * calc.exp(c.a / (c.R * T * V)) - c.R * T * N


def _law_onnes(p, V, T, N, c):
    y = c.a / V
    return p * V - N * c.R * T * (1 + c.B(T) * y + c.C(T) * y * y)


LAWS = {
    "ideal_gas": _law_ideal,
    "van_der_waals": _law_vdw,
    "berthelot": _law_berthelot,
    "dieterici": _law_dieterici,
    "onnes": _law_onnes,
}


@dataclass(frozen=True)
class EosConstraint:
    """One of the catalog laws, written literally as ``LHS - RHS``.

    ``B`` and ``C`` are the Onnes virial coefficients as functions of ``T``.
    """

    name: str
    R: float = 1.0
    a: float | None = None  # 0, or 1 for the Onnes reduced-density scale
    b: float = 0.0
    B: Callable = _zero
    C: Callable = _zero

    def __post_init__(self):
        if self.name not in LAWS:
            raise KeyError(f"unknown equation of state {self.name!r}; choose from {', '.join(EOS_NAMES)}")
        if self.a is None:
            object.__setattr__(self, "a", 1.0 if self.name == "onnes" else 0.0)
        if not self.R > 0:
            raise ValueError("R must be positive")

    def check_domain(self, V, T) -> None:
        if self.name in ("van_der_waals", "berthelot", "dieterici") and not V > self.b:
            raise DomainError(f"{self.name}: need V > b, got V={calc.real_part(V)}, b={self.b}")
        if self.name in ("berthelot", "dieterici") and not T > 0:
            raise DomainError(f"{self.name}: need T > 0, got T={calc.real_part(T)}")
        if self.name == "onnes" and V == 0:
            raise DomainError("onnes: V must be nonzero")

    def law(self, p, V, T, N):
        """Residual for raw values (any of which may be duals)."""
        self.check_domain(V, T)
        return LAWS[self.name](p, V, T, N, self)

    def residual(self, s: State) -> float:
        T, Pbar = s.x[0], s.x[1]
        V, N = s.p[1], s.p[2]
        return float(self.law(-Pbar, V, T, N))

    def pressure(self, V, T, N) -> float:
        """Solve the law for ``p`` (every catalog law is linear in ``p``)."""
        r0 = self.law(0.0, V, T, N)
        r1 = self.law(1.0, V, T, N)
        return -r0 / (r1 - r0)


def eos_constraint(name: str, **params) -> EosConstraint:
    return EosConstraint(name, **params)


def eos_residual(c: EosConstraint, s: State) -> float:
    return c.residual(s)


def solve_eos(
    c: EosConstraint,
    known: dict[str, float],
    unknown: str,
    bracket: tuple[float, float],
    tol: float = 1e-10,
) -> float:
    """Solve ``c`` for one of ``P, V, T, N`` given the other three.

    With several roots in the bracket (van der Waals below the critical
    temperature) the one found is returned; narrow the bracket to pick another.
    """
    space = make_standard_model()
    names = ("P", "V", "T", "N")

    def resolve(name):
        kind, i, sign = space.locate(name)
        label = space.pair_labels[i][0 if kind == "x" else 1]
        key = {"P̄": "P", "V": "V", "T": "T", "N": "N"}.get(label)
        if key is None:
            raise KeyError(f"{name} does not enter the equation of state")
        # stored P̄ = -P; a value given as P̄ converts with the opposite sign
        return key, (-sign if key == "P" else 1.0)

    vals = {}
    for k, v in known.items():
        key, conv = resolve(k)
        vals[key] = conv * float(v)
    target, out_sign = resolve(unknown)
    missing = [k for k in names if k != target and k not in vals]
    if missing:
        raise ValueError(f"need values for {', '.join(missing)}")

    def f(u):
        args = dict(vals)
        args[target] = u
        return c.law(args["P"], args["V"], args["T"], args["N"])

    # the bracket is in the units of ``unknown``; P̄ brackets map to P
    root = calc.solve_bracketed(f, out_sign * bracket[0], out_sign * bracket[1], tol=0.0, xtol=0.0)
    res = calc.real_part(f(root))
    if abs(res) > tol:
        raise calc.RootError(f"root {root} leaves residual {res:.3g} > {tol:.3g}")
    return out_sign * root


CATALOG_FUNDAMENTALS = {
    "ideal_gas": ideal_gas_fundamental,
    "van_der_waals": vdw_fundamental,
    "berthelot": berthelot_fundamental,
    "onnes": onnes_fundamental,
}


def catalog_fundamental(name: str, **params) -> DefiningFunction:
    try:
        factory = CATALOG_FUNDAMENTALS[name]
    except KeyError:
        if name in EOS_NAMES:
            raise KeyError(f"no closed-form fundamental relation for {name!r}") from None
        raise KeyError(f"unknown system {name!r}; choose from {', '.join(EOS_NAMES)}") from None
    accepted = inspect.signature(factory).parameters
    return factory(**{k: v for k, v in params.items() if k in accepted})
