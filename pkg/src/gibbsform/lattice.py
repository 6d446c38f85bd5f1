"""The Boolean lattice of thermodynamic potentials ``f_J = Σ_{k∈J} p_k x^k``.

Index sets are 1-based, matching pair numbering; internally every subset
is also a bitmask with bit ``k-1`` set for member ``k``.
"""

from __future__ import annotations

import itertools
import unicodedata
import warnings
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from . import kernels
from .geometry import PhaseSpace, State, TangentVector, check_state, check_tangent

MAX_LATTICE_N = 20

MINUS = "−"

# Standard-model names keyed by subset of pair indices (T,S)=1, (P̄,V)=2, (μ,N)=3.
STANDARD_NAMES = {
    frozenset({1, 2, 3}): "U",
    frozenset({2, 3}): "F",
    frozenset({1, 2}): "I",
    frozenset({1, 3}): "H",
    frozenset({2}): "Ω",
    frozenset({3}): "G",
    frozenset({1}): "Γ",
    frozenset(): "0",
}

NAME_ALIASES = {"Omega": "Ω", "Gamma": "Γ", "zero": "0"}


class NonEdgeDifferenceWarning(UserWarning):
    """A potential difference between non-nested index sets."""


@dataclass(frozen=True)
class IndexSet:
    """A subset of ``{1..n}``."""

    members: frozenset

    def __init__(self, members: Iterable[int] = ()):
        items = [int(k) for k in members]
        if len(set(items)) != len(items):
            raise ValueError(f"duplicate members in index set {items}")
        if any(k < 1 for k in items):
            raise ValueError(f"index set members must be >= 1, got {sorted(items)}")
        object.__setattr__(self, "members", frozenset(items))

    @classmethod
    def from_mask(cls, mask: int) -> IndexSet:
        return cls(k + 1 for k in range(int(mask).bit_length()) if (mask >> k) & 1)

    @property
    def mask(self) -> int:
        return sum(1 << (k - 1) for k in self.members)

    def sorted(self) -> tuple[int, ...]:
        return tuple(sorted(self.members))

    def complement(self, n: int) -> IndexSet:
        return IndexSet(k for k in range(1, n + 1) if k not in self.members)

    def check(self, n: int) -> IndexSet:
        bad = [k for k in self.members if k > n]
        if bad:
            raise IndexError(f"index set {self} has members {sorted(bad)} outside 1..{n}")
        return self

    def __contains__(self, k) -> bool:
        return k in self.members

    def __iter__(self):
        return iter(self.sorted())

    def __len__(self) -> int:
        return len(self.members)

    def __le__(self, other: IndexSet) -> bool:
        return self.members <= other.members

    def __lt__(self, other: IndexSet) -> bool:
        return self.members < other.members

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.sorted())) + "}"

    def __repr__(self) -> str:
        return f"IndexSet({str(self)})"


def as_index_set(J, n: int) -> IndexSet:
    if not isinstance(J, IndexSet):
        J = IndexSet(J)
    return J.check(n)


def _width(label: str) -> int:
    return sum(1 for ch in label if not unicodedata.combining(ch))


def product_symbol(a: str, b: str) -> str:
    """``TS`` for one-character symbols, ``a·b`` otherwise."""
    if _width(a) == 1 and _width(b) == 1:
        return a + b
    return f"{a}·{b}"


def potential_name(space: PhaseSpace, J: IndexSet) -> str:
    if space.n == 3:
        return STANDARD_NAMES[J.members]
    if not J.members:
        return "0"
    return "f_{" + ",".join(map(str, J.sorted())) + "}"


def resolve_potential(space: PhaseSpace, name: str) -> IndexSet:
    """Index set for a potential name (``F``, ``Omega``, ``f_{1,3}``) or index list."""
    name = NAME_ALIASES.get(name.strip(), name.strip())
    for J in all_subsets(space.n):
        if potential_name(space, J) == name:
            return J
    raise KeyError(f"unknown potential {name!r}")


def all_subsets(n: int) -> list[IndexSet]:
    """Subsets in lattice display order: larger first, then lexicographic."""
    out = []
    for size in range(n, -1, -1):
        out.extend(IndexSet(c) for c in itertools.combinations(range(1, n + 1), size))
    return out


def potential_value(space: PhaseSpace, J, s: State) -> float:
    """``f_J(s) = Σ_{k∈J} p_k x^k``."""
    J = as_index_set(J, space.n)
    check_state(space, s)
    idx = [k - 1 for k in J.sorted()]
    return float(np.dot(s.p[idx], s.x[idx])) if idx else 0.0


def potential_values(space: PhaseSpace, states: np.ndarray, subsets=None) -> np.ndarray:
    """All (or the given) potentials for a batch of flat ``(x; p)`` state rows."""
    states = np.atleast_2d(np.asarray(states, dtype=float))
    n = space.n
    if states.shape[1] != 2 * n:
        raise ValueError(f"state rows must have {2 * n} entries")
    if subsets is None:
        masks = np.arange(1 << n, dtype=np.int64)
    else:
        masks = np.array([as_index_set(J, n).mask for J in subsets], dtype=np.int64)
    terms = states[:, :n] * states[:, n:]
    return kernels.subset_sums(terms, masks)


class ComplementPair(NamedTuple):
    fJ: float
    fJc: float


def complement_pair(space: PhaseSpace, J, s: State) -> ComplementPair:
    J = as_index_set(J, space.n)
    return ComplementPair(potential_value(space, J, s), potential_value(space, J.complement(space.n), s))


def potential_difference(space: PhaseSpace, J1, J2, s: State) -> float:
    """``f_{J1} - f_{J2}``; warns unless ``J2 ⊆ J1``."""
    J1 = as_index_set(J1, space.n)
    J2 = as_index_set(J2, space.n)
    if not J2 <= J1:
        warnings.warn(
            f"{J2} is not contained in {J1}; the difference is not a sum of edge products",
            NonEdgeDifferenceWarning,
            stacklevel=2,
        )
        return potential_value(space, J1, s) - potential_value(space, J2, s)
    return potential_value(space, IndexSet(J1.members - J2.members), s)


def associated_variables(space: PhaseSpace, J) -> tuple[str, ...]:
    """Natural coordinates of ``f_J``: ``x^i`` for ``i ∉ J``, ``p_k`` for ``k ∈ J``."""
    J = as_index_set(J, space.n)
    return tuple(b if i + 1 in J else a for i, (a, b) in enumerate(space.pair_labels))


class Term(NamedTuple):
    """``sign · coefficient d(differential)``."""

    sign: int
    coefficient: str
    differential: str


def differential_expansion(space: PhaseSpace, J) -> tuple[Term, ...]:
    """``df_J = -Σ_{i∉J} p_i dx^i + Σ_{k∈J} x^k dp_k`` on a system."""
    J = as_index_set(J, space.n)
    terms = []
    for i, (a, b) in enumerate(space.pair_labels):
        if i + 1 in J:
            terms.append(Term(+1, a, b))
        else:
            terms.append(Term(-1, b, a))
    return tuple(terms)


def format_terms(terms: Iterable[Term]) -> str:
    out = []
    for t in terms:
        body = f"{t.coefficient} d{t.differential}"
        if not out:
            out.append(body if t.sign > 0 else f"{MINUS}{body}")
        else:
            out.append(f"{'+' if t.sign > 0 else MINUS} {body}")
    return " ".join(out)


def gibbs_form_via_potential(space: PhaseSpace, J, s: State, v: TangentVector) -> float:
    """``Σ_{i∉J} p_i dx^i - Σ_{k∈J} x^k dp_k + df_J``, evaluated on ``v``."""
    J = as_index_set(J, space.n)
    check_state(space, s)
    check_tangent(space, v)
    inside = np.zeros(space.n, dtype=bool)
    inside[[k - 1 for k in J]] = True
    out = ~inside
    df = np.dot(s.p[inside], v.dx[inside]) + np.dot(s.x[inside], v.dp[inside])
    return float(np.dot(s.p[out], v.dx[out]) - np.dot(s.x[inside], v.dp[inside]) + df)


@dataclass(frozen=True, eq=False)
class SplittingProjector:
    """Projector ``P_A`` onto ``A`` along ``B`` for a splitting ``Q = A ⊕ B``."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"projector must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("projector entries must be finite")
        err = np.max(np.abs(m @ m - m)) if m.size else 0.0
        if err > 1e-12:
            raise ValueError(f"matrix is not idempotent (max |P·P - P| = {err:.3g})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_index_set(cls, J, n: int) -> SplittingProjector:
        J = as_index_set(J, n)
        d = np.zeros(n)
        d[[k - 1 for k in J]] = 1.0
        return cls(np.diag(d))


def splitting_potential(space: PhaseSpace, A, s: State) -> float:
    """``p((π_A)_* V)``: the covector ``p`` applied to the projected position."""
    if not isinstance(A, SplittingProjector):
        A = SplittingProjector(A)
    check_state(space, s)
    if A.matrix.shape[0] != space.n:
        raise ValueError(f"projector is {A.matrix.shape[0]}x{A.matrix.shape[0]}, space has n={space.n}")
    return float(s.p @ A.matrix @ s.x)


@dataclass(frozen=True)
class PotentialNode:
    J: IndexSet
    name: str
    terms: tuple[tuple[str, str], ...]

    @property
    def formula(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(product_symbol(a, b) for a, b in self.terms)

    def __str__(self) -> str:
        return f"{self.name} = {self.formula}"


@dataclass(frozen=True)
class Lattice:
    """Nodes in display order; edges as ``(lower_mask, upper_mask)`` cover pairs."""

    n: int
    nodes: tuple[PotentialNode, ...]
    edges: tuple[tuple[int, int], ...]

    def node(self, J) -> PotentialNode:
        J = as_index_set(J, self.n)
        for node in self.nodes:
            if node.J == J:
                return node
        raise KeyError(J)

    def covers(self) -> list[tuple[PotentialNode, PotentialNode]]:
        """Edges as ``(upper, lower)`` node pairs, upper nodes in display order."""
        by_mask = {node.J.mask: node for node in self.nodes}
        rank = {node.J.mask: i for i, node in enumerate(self.nodes)}
        pairs = sorted(self.edges, key=lambda e: (rank[e[1]], rank[e[0]]))
        return [(by_mask[hi], by_mask[lo]) for lo, hi in pairs]


def make_node(space: PhaseSpace, J: IndexSet) -> PotentialNode:
    terms = tuple(space.pair_labels[k - 1] for k in J.sorted())
    return PotentialNode(J, potential_name(space, J), terms)


def enumerate_lattice(space: PhaseSpace) -> Lattice:
    """All ``2^n`` potentials and the ``n·2^(n-1)`` Hasse edges."""
    n = space.n
    if n > MAX_LATTICE_N:
        raise ValueError(f"refusing to enumerate 2^{n} potentials (limit n <= {MAX_LATTICE_N})")
    nodes = tuple(make_node(space, J) for J in all_subsets(n))
    edges = tuple((m, m | (1 << k)) for m in range(1 << n) for k in range(n) if not (m >> k) & 1)
    return Lattice(n, nodes, edges)


class Relation(NamedTuple):
    """``variable = sign · ∂potential/∂wrt`` holding ``held`` fixed."""

    variable: str
    sign: int
    potential: str
    J: IndexSet
    wrt: str
    held: tuple[str, ...]


def gibbs_relations(space: PhaseSpace) -> list[tuple[str, list[Relation]]]:
    """Every variable expressed as a derivative of each potential that has it as a slope.

    ``x^i = +∂f_J/∂p_i`` for ``J ∋ i`` and ``p_i = -∂f_J/∂x^i`` for nonempty
    ``J ∌ i``.  Rows come intensive variables first, then extensive.
    """
    subsets = all_subsets(space.n)
    rows = []
    for i, (a, b) in enumerate(space.pair_labels):
        rels = []
        for J in subsets:
            if i + 1 in J:
                assoc = associated_variables(space, J)
                held = tuple(v for v in assoc if v != b)
                rels.append(Relation(a, +1, potential_name(space, J), J, b, held))
        rows.append((a, rels))
    for i, (a, b) in enumerate(space.pair_labels):
        rels = []
        for J in subsets:
            if J.members and i + 1 not in J:
                assoc = associated_variables(space, J)
                held = tuple(v for v in assoc if v != a)
                rels.append(Relation(b, -1, potential_name(space, J), J, a, held))
        rows.append((b, rels))
    return rows


class MaxwellIdentity(NamedTuple):
    """``sign · ∂lhs_num/∂lhs_den = ∂rhs_num/∂rhs_den`` on a chart.

    The chart contains ``lhs_den`` and ``rhs_den`` (from two different pairs)
    plus one coordinate from each remaining pair, listed in ``others``.
    """

    sign: int
    lhs_num: str
    lhs_den: str
    rhs_num: str
    rhs_den: str
    pairs: tuple[int, int]
    others: tuple[tuple[str, str], ...]


def maxwell_identities(space: PhaseSpace) -> list[MaxwellIdentity]:
    """Mixed-partial identities for every two pairs and every chart choice.

    On a chart containing ``q_a`` and ``q_b`` the slope of the generating
    function along ``q`` is ``σ(q)·conj(q)`` with ``σ = -1`` for intensive and
    ``+1`` for extensive ``q``; equality of mixed partials gives
    ``σ_a σ_b ∂conj(q_b)/∂q_a = ∂conj(q_a)/∂q_b``.
    """
    out = []
    labels = space.pair_labels
    for i, j in itertools.combinations(range(space.n), 2):
        others = tuple(labels[k] for k in range(space.n) if k not in (i, j))
        for kind_a, kind_b in itertools.product((0, 1), repeat=2):
            qa, ca = labels[i][kind_a], labels[i][1 - kind_a]
            qb, cb = labels[j][kind_b], labels[j][1 - kind_b]
            sa = -1 if kind_a == 0 else 1
            sb = -1 if kind_b == 0 else 1
            out.append(MaxwellIdentity(sa * sb, cb, qa, ca, qb, (i + 1, j + 1), others))
    return out
