"""Simplicial refinement of a fan along the zero set of ``g = <nu, .> - h``.

On each maximal cone ``sigma`` the function ``g`` is linear, with linear part
``nu - h_sigma``.  The cone is cut by its own hyperplane ``{g = 0}``: new rays
are the primitive points of ``{g = 0}`` on the 2-faces spanned by generators
with opposite signs, and each half is re-triangulated by a placing
triangulation over the globally sorted ray set.  Placing triangulations
restrict to placing triangulations on faces, and ``g`` agrees on shared faces,
so neighbouring cones induce identical subdivisions on their common faces.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Sequence

from .fan import DOMINANT, ChamberFan, PLFunction, Ray, eval_h
from .linalg import det, dot, solve_rational

POSITIVE, ZERO, NEGATIVE = 1, 0, -1


class RefinementError(ValueError):
    pass


@dataclass(frozen=True)
class Cell:
    """A nonzero simplicial cone of the refinement.

    ``sign`` is the constant sign of ``g`` on the relative interior and
    ``walls`` the simple roots whose wall contains the whole cell.
    """

    rays: tuple[Ray, ...]
    sign: int
    walls: frozenset[int]
    parent: int

    @property
    def dim(self) -> int:
        return len(self.rays)


@dataclass(frozen=True)
class LabeledComplex:
    fan: ChamberFan
    h: PLFunction
    nu: tuple[Fraction, ...]
    functionals: tuple[tuple[Fraction, ...], ...]
    cells: tuple[Cell, ...]
    maximal: tuple[tuple[Ray, ...], ...]
    pieces: tuple[tuple[int, tuple[Ray, ...]], ...]

    @cached_property
    def index(self) -> dict[tuple[Ray, ...], int]:
        return {c.rays: k for k, c in enumerate(self.cells)}

    @cached_property
    def proper_faces(self) -> tuple[tuple[int, ...], ...]:
        """For each cell, the indices of its nonzero proper faces."""
        out = []
        for c in self.cells:
            faces = []
            for k in range(1, c.dim):
                faces.extend(self.index[sub] for sub in combinations(c.rays, k))
            out.append(tuple(sorted(faces)))
        return tuple(out)

    def g(self, n: Sequence[int | Fraction]) -> Fraction:
        """``<nu, n> - h(n)``, evaluated from the input data rather than the cells."""
        return self.fan.pairing(self.nu, n) - eval_h(self.h, n)

    @property
    def positive_cells(self) -> list[int]:
        return [k for k, c in enumerate(self.cells) if c.sign == POSITIVE]


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


def placing_triangulation(rays: Sequence[Ray]) -> list[tuple[int, ...]]:
    """Placing triangulation of the pointed cone spanned by ``rays``, in the given order.

    Returns simplices as sorted tuples of indices into ``rays``.  A ray lying
    in the current cone is skipped; a ray outside the current linear span is
    joined to every simplex; otherwise it is joined to each boundary facet it
    sees (it lies strictly beyond the facet's hyperplane inside the span).
    """
    simplices: list[tuple[int, ...]] = []
    for k, p in enumerate(rays):
        if not simplices:
            simplices = [(k,)]
            continue
        first = simplices[0]
        if solve_rational(list(zip(*(rays[i] for i in first))), list(p)) is None:
            simplices = [s + (k,) for s in simplices]
            continue
        facet_count: dict[tuple[int, ...], int] = {}
        for s in simplices:
            for q in s:
                f = tuple(i for i in s if i != q)
                facet_count[f] = facet_count.get(f, 0) + 1
        new = []
        for s in simplices:
            coeffs = solve_rational(list(zip(*(rays[i] for i in s))), list(p))
            for pos, q in enumerate(s):
                f = tuple(i for i in s if i != q)
                if facet_count[f] == 1 and coeffs[pos] < 0:
                    new.append(f + (k,))
        simplices.extend(new)
    return [tuple(sorted(s)) for s in simplices]


def _split_cone(fan: ChamberFan, cone: tuple[Ray, ...], functional: Sequence[Fraction]) -> list[tuple[Ray, ...]]:
    values = [dot(functional, v) for v in cone]
    pos = [v for v, x in zip(cone, values) if x > 0]
    neg = [v for v, x in zip(cone, values) if x < 0]
    if not pos or not neg:
        return [cone]
    zero = [v for v, x in zip(cone, values) if x == 0]
    cut = []
    for (vi, gi), (vj, gj) in combinations(zip(cone, values), 2):
        if gi * gj < 0:
            point = [gi * b - gj * a for a, b in zip(vi, vj)]
            if gi < 0:
                point = [-x for x in point]
            cut.append(fan.primitive(point))
    out = []
    for half in (pos, neg):
        rays = sorted(set(half) | set(zero) | set(cut))
        for s in placing_triangulation(rays):
            out.append(tuple(rays[i] for i in s))
    return out


def graph_refinement(fan: ChamberFan, h: PLFunction, nu: Sequence[int | Fraction]) -> LabeledComplex:
    """Refine ``fan`` so that ``<nu, n> - h(n)`` has constant sign on every open cell."""
    if h.fan != fan:
        raise RefinementError("h is not adapted to this fan")
    nu = tuple(Fraction(x) for x in nu)
    if len(nu) != fan.rank:
        raise RefinementError(f"nu has {len(nu)} coordinates, expected {fan.rank}")
    functionals = tuple(
        tuple(a - b for a, b in zip(fan.functional(nu), fan.functional(hs))) for hs in h.values
    )
    pieces = []
    for k, cone in enumerate(fan.maximal_cones):
        for piece in _split_cone(fan, cone, functionals[k]):
            pieces.append((k, piece))
    pieces.sort(key=lambda kp: kp[1])

    parent: dict[tuple[Ray, ...], int] = {}
    for k, piece in pieces:
        for d in range(1, len(piece) + 1):
            for sub in combinations(piece, d):
                parent.setdefault(sub, k)

    cells = []
    for rays in sorted(parent, key=lambda s: (len(s), s)):
        k = parent[rays]
        signs = {_sign(dot(functionals[k], v)) for v in rays}
        if POSITIVE in signs and NEGATIVE in signs:
            raise AssertionError(f"cell {rays} straddles the zero set of g")
        sign = POSITIVE if POSITIVE in signs else NEGATIVE if NEGATIVE in signs else ZERO
        cells.append(Cell(rays, sign, fan.walls_containing(rays), k))
    return LabeledComplex(
        fan,
        h,
        nu,
        functionals,
        tuple(cells),
        tuple(p for _, p in pieces),
        tuple(pieces),
    )


# -- validation helpers used by the property suites --------------------------


def volume_defects(lc: LabeledComplex) -> list[int]:
    """Maximal cones whose pieces do not tile them.

    Each piece is measured in the barycentric coordinates of its parent cone:
    rays are rescaled to the slice where those coordinates sum to 1, and the
    piece volumes (absolute determinants) must add up to 1.
    """
    fan = lc.fan
    totals: dict[int, Fraction] = {k: Fraction(0) for k in range(len(fan.maximal_cones))}
    for k, piece in lc.pieces:
        cone = fan.maximal_cones[k]
        cols = list(zip(*cone))
        rows = []
        for w in piece:
            c = solve_rational(cols, list(w))
            s = sum(c)
            rows.append([x / s for x in c])
        totals[k] += abs(det(rows))
    return [k for k, v in totals.items() if v != 1]


def face_matching_defects(lc: LabeledComplex) -> list[tuple[Ray, ...]]:
    """Codimension-one cells not shared by exactly the right number of maximal cells."""
    r = lc.fan.rank
    count: dict[tuple[Ray, ...], int] = {}
    for m in lc.maximal:
        for sub in combinations(m, r - 1):
            count[sub] = count.get(sub, 0) + 1
    bad = []
    for c in lc.cells:
        if c.dim != r - 1:
            continue
        on_boundary = lc.fan.mode == DOMINANT and bool(c.walls)
        expected = 1 if on_boundary else 2
        if count.get(c.rays, 0) != expected:
            bad.append(c.rays)
    return bad


def sign_violations(lc: LabeledComplex, points: Sequence[tuple[int, Sequence[Fraction]]]) -> list[int]:
    """Sample points given as ``(cell index, positive coefficients)`` whose sign disagrees with the label."""
    bad = []
    for k, coeffs in points:
        cell = lc.cells[k]
        n = [sum((c * v[i] for c, v in zip(coeffs, cell.rays)), Fraction(0)) for i in range(lc.fan.rank)]
        if _sign(lc.g(n)) != cell.sign:
            bad.append(k)
    return bad

