"""Phase space, states, and the Gibbs and symplectic forms.

Coordinates are always laid out as ``(x^1..x^n, p_1..p_n)``: intensive
coordinates first, then their conjugate extensive coordinates.  In the
standard model the pairs are ``(T, S)``, ``(P̄, V)``, ``(μ, N)`` where
``P̄ = -P`` is stored internally; only I/O flips the sign back.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np


class DimensionError(ValueError):
    """Vector lengths disagree with the phase space dimension."""


PBAR = "P̄"
MU = "μ"

# ASCII spellings accepted wherever a variable name is read from text.
ALIASES = {"Pbar": PBAR, "mu": MU}


def canonical_name(name: str) -> str:
    name = name.strip()
    return ALIASES.get(name, unicodedata.normalize("NFC", name))


def strip_bar(name: str) -> str:
    """Drop a combining macron: the name of the un-negated quantity."""
    return "".join(ch for ch in name if ch != "̄")


@dataclass(frozen=True)
class PhaseSpace:
    """``n`` conjugate (intensive, extensive) pairs.

    ``display_sign[i]`` marks pairs whose intensive coordinate is stored with
    the opposite sign of the quantity shown to users (``P̄ = -P``).
    """

    pair_labels: tuple[tuple[str, str], ...]
    display_sign: tuple[bool, ...] = ()

    def __post_init__(self):
        labels = tuple((str(a), str(b)) for a, b in self.pair_labels)
        object.__setattr__(self, "pair_labels", labels)
        if not self.display_sign:
            object.__setattr__(self, "display_sign", (False,) * len(labels))
        else:
            object.__setattr__(self, "display_sign", tuple(bool(f) for f in self.display_sign))
        if len(labels) < 1:
            raise ValueError("a phase space needs at least one conjugate pair")
        if len(self.display_sign) != len(labels):
            raise ValueError("display_sign must have one flag per pair")
        flat = [name for pair in labels for name in pair]
        if any(not name for name in flat):
            raise ValueError("variable labels must be nonempty")
        if len(set(flat)) != len(flat):
            raise ValueError(f"variable labels must be distinct, got {flat}")
        shown = [self.display_name(name) for name in flat]
        if len(set(shown)) != len(shown):
            raise ValueError("displayed variable names collide")

    @property
    def n(self) -> int:
        return len(self.pair_labels)

    @property
    def intensive(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.pair_labels)

    @property
    def extensive(self) -> tuple[str, ...]:
        return tuple(b for _, b in self.pair_labels)

    @property
    def variables(self) -> tuple[str, ...]:
        """All 2n names in coordinate order."""
        return self.intensive + self.extensive

    def locate(self, name: str) -> tuple[str, int, float]:
        """Resolve a variable name to ``(kind, pair_index, sign)``.

        ``kind`` is ``"x"`` or ``"p"``; ``sign`` is -1 when ``name`` is the
        displayed form of a sign-flipped coordinate (``"P"`` for ``P̄``).
        """
        name = canonical_name(name)
        for i, (a, b) in enumerate(self.pair_labels):
            if name == a:
                return "x", i, 1.0
            if name == b:
                return "p", i, 1.0
            if self.display_sign[i] and name == strip_bar(a):
                return "x", i, -1.0
        raise KeyError(f"unknown variable {name!r}; known: {', '.join(self.variables)}")

    def coordinate_index(self, name: str) -> tuple[int, float]:
        """Index into the flat ``(x; p)`` vector plus the display sign."""
        kind, i, sign = self.locate(name)
        return (i if kind == "x" else self.n + i), sign

    def display_name(self, name: str) -> str:
        """External name of a coordinate (``P̄`` -> ``P`` if flagged)."""
        for i, (a, _) in enumerate(self.pair_labels):
            if name == a and self.display_sign[i]:
                return strip_bar(a)
        return name

    def to_display(self, name: str, value: float) -> tuple[str, float]:
        kind, i, _ = self.locate(name)
        if kind == "x" and self.display_sign[i]:
            return strip_bar(self.pair_labels[i][0]), -value
        return (self.pair_labels[i][0] if kind == "x" else self.pair_labels[i][1]), value

    def state(self, x: Sequence[float], p: Sequence[float]) -> State:
        s = State(x, p)
        check_state(self, s)
        return s

    def state_from(self, values: dict[str, float], default: float = 0.0) -> State:
        """Build a state from named values; displayed names are sign-converted."""
        z = np.full(2 * self.n, float(default))
        for name, value in values.items():
            k, sign = self.coordinate_index(name)
            z[k] = sign * float(value)
        return State.from_vector(z)

    def value_of(self, s: State, name: str) -> float:
        k, sign = self.coordinate_index(name)
        return sign * float(s.vector[k])


def _frozen(values, what: str) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} entries must be finite, got {arr}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class State:
    """A point of phase space: intensive ``x`` and extensive ``p``."""

    x: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen(self.x, "state"))
        object.__setattr__(self, "p", _frozen(self.p, "state"))
        if self.x.shape != self.p.shape:
            raise DimensionError(f"x has {self.x.size} entries but p has {self.p.size}")

    @classmethod
    def from_vector(cls, z) -> State:
        z = np.asarray(z, dtype=float).reshape(-1)
        if z.size % 2:
            raise DimensionError("flat state vector must have even length")
        n = z.size // 2
        return cls(z[:n], z[n:])

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.p])

    def __eq__(self, other):
        if not isinstance(other, State):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.p, other.p)

    def __repr__(self):
        return f"State(x={self.x.tolist()}, p={self.p.tolist()})"


@dataclass(frozen=True, eq=False)
class TangentVector:
    """A direction ``(dx; dp)`` at some state."""

    dx: np.ndarray
    dp: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dx", _frozen(self.dx, "tangent"))
        object.__setattr__(self, "dp", _frozen(self.dp, "tangent"))
        if self.dx.shape != self.dp.shape:
            raise DimensionError(f"dx has {self.dx.size} entries but dp has {self.dp.size}")

    @classmethod
    def from_vector(cls, z) -> TangentVector:
        z = np.asarray(z, dtype=float).reshape(-1)
        if z.size % 2:
            raise DimensionError("flat tangent vector must have even length")
        n = z.size // 2
        return cls(z[:n], z[n:])

    @classmethod
    def zero(cls, n: int) -> TangentVector:
        return cls(np.zeros(n), np.zeros(n))

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.dx, self.dp])

    def __add__(self, other: TangentVector) -> TangentVector:
        return TangentVector(self.dx + other.dx, self.dp + other.dp)

    def __mul__(self, a: float) -> TangentVector:
        return TangentVector(a * self.dx, a * self.dp)

    __rmul__ = __mul__

    def __repr__(self):
        return f"TangentVector(dx={self.dx.tolist()}, dp={self.dp.tolist()})"


def check_state(space: PhaseSpace, s: State) -> None:
    if s.x.size != space.n:
        raise DimensionError(f"state has {s.x.size} pairs, phase space has {space.n}")


def check_tangent(space: PhaseSpace, v: TangentVector) -> None:
    if v.dx.size != space.n:
        raise DimensionError(f"tangent vector has {v.dx.size} pairs, phase space has {space.n}")


def make_standard_model() -> PhaseSpace:
    """The six-dimensional space with pairs ``(T,S), (P̄,V), (μ,N)``."""
    return PhaseSpace((("T", "S"), (PBAR, "V"), (MU, "N")), (False, True, False))


def gibbs_form(space: PhaseSpace, s: State, v: TangentVector) -> float:
    """Evaluate ``α = p_i dx^i`` at ``s`` on ``v``."""
    check_state(space, s)
    check_tangent(space, v)
    return float(np.dot(s.p, v.dx))


def symplectic_form(space: PhaseSpace, u: TangentVector, v: TangentVector) -> float:
    """``ω(u, v)`` for ``ω = dp_i ∧ dx^i``."""
    check_tangent(space, u)
    check_tangent(space, v)
    return float(np.dot(u.dp, v.dx) - np.dot(v.dp, u.dx))


def symplectic_gram(space: PhaseSpace) -> np.ndarray:
    """Matrix of ``ω`` on the coordinate basis, rows/columns in (x; p) order."""
    m = 2 * space.n
    basis = [TangentVector.from_vector(e) for e in np.eye(m)]
    return np.array([[symplectic_form(space, a, b) for b in basis] for a in basis])


def universal_energy(space: PhaseSpace, s: State) -> float:
    """``U = p_i x^i``; the standard model gives ``TS + P̄V + μN``."""
    check_state(space, s)
    return float(np.dot(s.p, s.x))


def energy_differential(space: PhaseSpace, s: State, v: TangentVector) -> float:
    """``dU(v) = p_i dx^i + x^i dp_i``."""
    check_state(space, s)
    check_tangent(space, v)
    return float(np.dot(s.p, v.dx) + np.dot(s.x, v.dp))


class EnergySplit(NamedTuple):
    dQ: float
    dW: float
    dU: float

    def recompose(self) -> float:
        """``-dQ - dW + dU``, which equals the Gibbs form."""
        return -self.dQ - self.dW + self.dU


def gibbs_form_energy_split(space: PhaseSpace, s: State, v: TangentVector) -> EnergySplit:
    """Split ``α(v)`` into heat, work and internal-energy parts.

    Pair 1 is the thermal pair: ``dQ = x^1 dp_1`` (``T dS``) and
    ``dW = Σ_{i>1} x^i dp_i`` (``P̄ dV + μ dN``), so that
    ``α = -dQ - dW + dU``.
    """
    check_state(space, s)
    check_tangent(space, v)
    dQ = float(s.x[0] * v.dp[0])
    dW = float(np.dot(s.x[1:], v.dp[1:]))
    return EnergySplit(dQ, dW, energy_differential(space, s, v))
