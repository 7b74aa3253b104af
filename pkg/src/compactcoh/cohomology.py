"""Relative simplicial cohomology of the regions cut out by a refinement.

The open set ``V = {g > 0}`` is the complement, in the punctured support, of
the closed subcomplex of nonpositive cells.  It deformation retracts onto the
full subcomplex of the order complex (the barycentric subdivision) spanned
by the positive cells, and the same retraction preserves ``V`` intersected
with any union of walls.  All cohomology is with rational coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Hashable, Iterable, Sequence

from .linalg import rank
from .refine import POSITIVE, Cell, LabeledComplex

Simplex = tuple[Hashable, ...]


@dataclass(frozen=True)
class SimplicialComplex:
    """A finite abstract simplicial complex; simplices are sorted vertex tuples."""

    simplices: frozenset[Simplex]

    @classmethod
    def from_simplices(cls, simplices: Iterable[Iterable[Hashable]]) -> SimplicialComplex:
        """Close the given simplices under taking faces."""
        out: set[Simplex] = set()
        for s in simplices:
            s = tuple(sorted(set(s)))
            for k in range(1, len(s) + 1):
                out.update(combinations(s, k))
        return cls(frozenset(out))

    @property
    def vertices(self) -> list[Hashable]:
        return sorted(s[0] for s in self.simplices if len(s) == 1)

    @property
    def dimension(self) -> int:
        return max((len(s) for s in self.simplices), default=0) - 1

    def is_subcomplex_of(self, other: SimplicialComplex) -> bool:
        return self.simplices <= other.simplices

    def is_closed(self) -> bool:
        return all(f in self.simplices for s in self.simplices for f in combinations(s, len(s) - 1) if f)

    def __len__(self) -> int:
        return len(self.simplices)


@dataclass(frozen=True)
class PairDims:
    dims: tuple[int, ...]

    def __getitem__(self, j: int) -> int:
        # negative degrees and degrees past the end vanish
        if j < 0 or j >= len(self.dims):
            return 0
        return self.dims[j]

    def euler(self) -> int:
        return sum((-1) ** j * d for j, d in enumerate(self.dims))


def order_complex(lc: LabeledComplex, vertex_filter: Callable[[Cell], bool]) -> SimplicialComplex:
    """Chains of nonzero cells passing ``vertex_filter``, ordered by inclusion."""
    keep = {k for k, c in enumerate(lc.cells) if vertex_filter(c)}
    faces = lc.proper_faces
    chains: set[Simplex] = set()

    def extend(chain: tuple[int, ...]) -> None:
        chains.add(tuple(sorted(chain)))
        for f in faces[chain[-1]]:
            if f in keep:
                extend(chain + (f,))

    for k in keep:
        extend((k,))
    return SimplicialComplex(frozenset(chains))


def _graded(simplices: Iterable[Simplex]) -> dict[int, list[Simplex]]:
    out: dict[int, list[Simplex]] = {}
    for s in simplices:
        out.setdefault(len(s) - 1, []).append(s)
    for v in out.values():
        v.sort()
    return out


def relative_dims(K: SimplicialComplex, L: SimplicialComplex, max_degree: int) -> PairDims:
    """``dim H^j(K, L; Q)`` for ``0 <= j <= max_degree``."""
    if not L.is_subcomplex_of(K):
        raise ValueError("L is not contained in K")
    if not L.is_closed():
        raise ValueError("L is not closed under faces")
    rel = _graded(K.simplices - L.simplices)
    top = max(rel, default=-1)
    ranks = {}
    for j in range(0, top):
        # coboundary C^j -> C^{j+1} has the transpose of the boundary matrix
        lower = {s: i for i, s in enumerate(rel.get(j, []))}
        rows = []
        for s in rel.get(j + 1, []):
            row = {}
            for pos in range(len(s)):
                f = s[:pos] + s[pos + 1 :]
                if f in lower:
                    row[lower[f]] = (-1) ** pos
            rows.append([row.get(i, 0) for i in range(len(lower))])
        ranks[j] = rank(rows) if rows and lower else 0
    dims = []
    for j in range(max_degree + 1):
        n = len(rel.get(j, []))
        dims.append(n - ranks.get(j, 0) - ranks.get(j - 1, 0))
    return PairDims(tuple(dims))


def relative_euler(K: SimplicialComplex, L: SimplicialComplex) -> int:
    """Alternating count of the simplices of ``K`` not in ``L``."""
    return sum((-1) ** (len(s) - 1) for s in K.simplices - L.simplices)


EMPTY = SimplicialComplex(frozenset())


def pair_dims_V_W(lc: LabeledComplex, J: Iterable[int], max_degree: int) -> PairDims:
    """``dim H^j(V, V cap U_{alpha in J} alpha^perp)`` with ``V = {g > 0}``."""
    J = frozenset(J)
    if not any(c.sign == POSITIVE for c in lc.cells):
        return PairDims((0,) * (max_degree + 1))
    N = order_complex(lc, lambda c: c.sign == POSITIVE)
    NW = order_complex(lc, lambda c: c.sign == POSITIVE and bool(c.walls & J))
    return relative_dims(N, NW, max_degree)


def chamber_rel_dims(lc: LabeledComplex, max_degree: int) -> PairDims:
    """``dim H^i(A, V)`` for the (contractible) support ``A`` of the fan."""
    if not any(c.sign == POSITIVE for c in lc.cells):
        return PairDims((1,) + (0,) * max_degree)
    N = order_complex(lc, lambda c: c.sign == POSITIVE)
    absolute = relative_dims(N, EMPTY, max(max_degree - 1, 0))
    dims = [0]
    for i in range(1, max_degree + 1):
        d = absolute[i - 1]
        if i == 1:
            d -= 1
        dims.append(d)
    return PairDims(tuple(dims))


def reduced_dims(K: SimplicialComplex, max_degree: int) -> tuple[int, ...]:
    dims = list(relative_dims(K, EMPTY, max_degree).dims)
    if K.simplices:
        dims[0] -= 1
    return tuple(dims)


def boundary_of_simplex(n: int) -> SimplicialComplex:
    """The boundary of the ``n``-simplex on vertices ``0..n`` (an ``(n-1)``-sphere)."""
    return SimplicialComplex.from_simplices(combinations(range(n + 1), n))


def _as_complex(simplices: Sequence[Sequence[Hashable]]) -> SimplicialComplex:
    return SimplicialComplex.from_simplices(simplices)
