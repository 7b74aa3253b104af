"""Smooth fans and piecewise-linear functions on them.

A regular compactification of a semisimple group is described by a smooth
simplicial subdivision of the dominant chamber (the nonnegative orthant in
fundamental-coweight coordinates).  A complete smooth fan in ``Z^r`` describes
a smooth complete toric variety.  Line bundles are piecewise-linear functions
``h`` given by one linear form ``h_sigma`` per maximal cone.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Sequence

from .linalg import RatMatrix, as_rat, det, dot, primitive_vector, solve_rational
from .rootsys import Coweight, RootDatum, Weight

Ray = tuple[int, ...]

DOMINANT = "dominant"
FULL = "full"


class FanError(ValueError):
    """Invalid fan data; ``kind`` is a short machine-readable tag."""

    def __init__(self, kind: str, message: str):
        super().__init__(f"{kind}: {message}")
        self.kind = kind


class PLFunctionError(ValueError):
    def __init__(self, kind: str, message: str):
        super().__init__(f"{kind}: {message}")
        self.kind = kind


@dataclass(frozen=True)
class ChamberFan:
    """A validated smooth fan; construct with :func:`build_chamber_fan` or :func:`build_complete_fan`.

    ``maximal_cones`` keeps the caller's cone order; each cone's rays are
    sorted.  ``lattice`` is a basis of the cocharacter lattice Y, used for
    primitivity and smoothness (Y is dual to the root datum's X).
    """

    mode: str
    rank: int
    maximal_cones: tuple[tuple[Ray, ...], ...]
    root_datum: RootDatum | None
    lattice: tuple[tuple[Fraction, ...], ...]

    @property
    def rays(self) -> tuple[Ray, ...]:
        return tuple(sorted({v for cone in self.maximal_cones for v in cone}))

    @cached_property
    def faces(self) -> frozenset[frozenset[Ray]]:
        """All nonzero faces of all maximal cones."""
        out = set()
        for cone in self.maximal_cones:
            for k in range(1, len(cone) + 1):
                out.update(frozenset(c) for c in combinations(cone, k))
        return frozenset(out)

    def functional(self, lam: Sequence[Fraction | int]) -> tuple[Fraction, ...]:
        """Coefficients of ``n -> <lam, n>`` on coweight coordinates."""
        if self.mode == DOMINANT:
            return self.root_datum.to_root_coords(lam)
        return tuple(Fraction(x) for x in lam)

    def pairing(self, lam: Sequence[Fraction | int], n: Sequence[int | Fraction]) -> Fraction:
        return dot(self.functional(lam), n)

    def walls_containing(self, rays: Sequence[Ray]) -> frozenset[int]:
        """Simple roots ``alpha`` whose wall ``alpha^perp`` contains every ray."""
        if self.mode != DOMINANT:
            return frozenset()
        return frozenset(a for a in range(self.rank) if all(v[a] == 0 for v in rays))

    @cached_property
    def _lattice_inv(self) -> RatMatrix:
        # columns of the lattice basis -> coordinates in that basis
        return RatMatrix(self.lattice).transpose().inverse()

    def lattice_coords(self, n: Sequence[int | Fraction]) -> tuple[Fraction, ...]:
        return self._lattice_inv.apply([Fraction(x) for x in n])

    def primitive(self, n: Sequence[int | Fraction]) -> Ray:
        """The primitive element of Y on the ray through ``n``."""
        coords = primitive_vector(self.lattice_coords(n))
        back = RatMatrix(self.lattice).transpose().apply(coords)
        return tuple(int(x) for x in back)

    def locate(self, n: Sequence[int | Fraction]) -> int:
        """Index of a maximal cone containing ``n``; raises if ``n`` is outside the support."""
        for k, cone in enumerate(self.maximal_cones):
            c = solve_rational(list(zip(*cone)), list(n))
            if c is not None and all(x >= 0 for x in c):
                return k
        raise FanError("outside-support", f"{tuple(map(str, n))} is not in the support of the fan")

    def scaled(self, factor: int) -> list[list[Ray]]:
        return [[tuple(factor * x for x in v) for v in cone] for cone in self.maximal_cones]


def _cocharacter_basis(rd: RootDatum) -> tuple[tuple[Fraction, ...], ...]:
    # Y = {n : <x, n> in Z for x in X}; with B the root coordinates of a basis
    # of X (as rows), Y is spanned by the columns of B^{-1}.
    b = RatMatrix([rd.to_root_coords(g) for g in rd.lattice_gens])
    inv = b.inverse()
    return tuple(tuple(inv[i, j] for i in range(rd.rank)) for j in range(rd.rank))


def _normalize_cones(stub: ChamberFan, cones, canonicalize: bool) -> list[tuple[Ray, ...]]:
    out = []
    for k, cone in enumerate(cones):
        rays = []
        for v in cone:
            v = tuple(Fraction(x) for x in v)
            if any(x.denominator != 1 for x in v):
                raise FanError("non-integral", f"cone {k}: generator {v} is not integral")
            if not any(v):
                raise FanError("zero-generator", f"cone {k} has a zero generator")
            rays.append(stub.primitive(v) if canonicalize else tuple(int(x) for x in v))
        if len(set(rays)) != len(rays):
            raise FanError("non-simplicial", f"cone {k} repeats a generator")
        out.append(tuple(sorted(rays)))
    return out


def _validate(fan: ChamberFan) -> None:
    r = fan.rank
    cones = fan.maximal_cones
    if not cones:
        raise FanError("empty", "no maximal cones given")
    if len(set(cones)) != len(cones):
        raise FanError("overlap", "a maximal cone is listed twice")
    for k, cone in enumerate(cones):
        if len(cone) != r:
            raise FanError("non-simplicial", f"cone {k} has {len(cone)} generators in rank {r}")
        if fan.mode == DOMINANT:
            for v in cone:
                if any(x < 0 for x in v):
                    raise FanError("outside-chamber", f"cone {k}: generator {v} lies outside the dominant chamber")
        d = det([fan.lattice_coords(v) for v in cone])
        if d == 0:
            raise FanError("degenerate", f"cone {k} is not full-dimensional")
        if abs(d) != 1:
            raise FanError("non-smooth", f"cone {k} has |det| = {abs(d)} with respect to the lattice Y")

    # facet matching: every facet is shared by exactly two cones lying on
    # opposite sides, or lies on the boundary of the ambient support
    owners: dict[frozenset[Ray], list[tuple[int, Ray]]] = {}
    for k, cone in enumerate(cones):
        for v in cone:
            facet = frozenset(cone) - {v}
            owners.setdefault(facet, []).append((k, v))
    for facet, own in owners.items():
        on_wall = fan.mode == DOMINANT and bool(fan.walls_containing(list(facet)))
        if len(own) > 2 or (on_wall and len(own) > 1):
            raise FanError("overlap", f"facet {sorted(facet)} is shared by cones {[k for k, _ in own]}")
        if len(own) == 2:
            (k1, v1), (k2, v2) = own
            normal = _facet_normal(sorted(facet), r)
            s1, s2 = dot(normal, v1), dot(normal, v2)
            if s1 * s2 >= 0:
                raise FanError("overlap", f"cones {k1} and {k2} lie on the same side of their common facet")
        elif not on_wall:
            raise FanError(
                "coverage-gap",
                f"facet {sorted(facet)} of cone {own[0][0]} is neither shared nor on the boundary of the support",
            )

    # the facet structure makes the covering multiplicity constant; check it is 1
    point = _generic_interior_point(cones[0])
    hits = 0
    for cone in cones:
        c = solve_rational(list(zip(*cone)), list(point))
        if c is not None and all(x >= 0 for x in c):
            if any(x == 0 for x in c):
                raise AssertionError("generic point landed on a cone boundary")
            hits += 1
    if hits != 1:
        raise FanError("overlap", f"cones cover the support {hits} times")


def _facet_normal(facet: Sequence[Ray], r: int) -> tuple[Fraction, ...]:
    # a nonzero vector orthogonal to the r-1 facet generators
    for probe in range(r):
        e = [0] * r
        e[probe] = 1
        rows = [list(v) for v in facet] + [e]
        x = solve_rational(rows, [0] * (r - 1) + [1])
        if x is not None:
            return x
    raise FanError("degenerate", f"facet {facet} is not of full rank")


def _generic_interior_point(cone: Sequence[Ray]) -> tuple[Fraction, ...]:
    r = len(cone[0])
    weights = [Fraction(1, 7919**k) + 1 for k in range(len(cone))]
    return tuple(sum((w * v[i] for w, v in zip(weights, cone)), Fraction(0)) for i in range(r))


def build_chamber_fan(
    rd: RootDatum, cones: Sequence[Sequence[Sequence[int]]], canonicalize: bool = True
) -> ChamberFan:
    """Validate a smooth subdivision of the dominant chamber.

    Generators are integer vectors in fundamental-coweight coordinates.  With
    ``canonicalize`` they are first replaced by primitive vectors of Y;
    without it they are taken verbatim, so a non-primitive generator makes
    its cone non-smooth.
    """
    lattice = _cocharacter_basis(rd)
    stub = ChamberFan(DOMINANT, rd.rank, (), rd, lattice)
    fan = ChamberFan(DOMINANT, rd.rank, tuple(_normalize_cones(stub, cones, canonicalize)), rd, lattice)
    _validate(fan)
    return fan


def wonderful_fan(rd: RootDatum) -> ChamberFan:
    """The trivial subdivision: the dominant chamber and its faces."""
    lattice = _cocharacter_basis(rd)
    stub = ChamberFan(DOMINANT, rd.rank, (), rd, lattice)
    basis = [stub.primitive([int(i == j) for j in range(rd.rank)]) for i in range(rd.rank)]
    return build_chamber_fan(rd, [basis])


def build_complete_fan(
    rank: int, cones: Sequence[Sequence[Sequence[int]]], canonicalize: bool = True
) -> ChamberFan:
    """Validate a complete smooth fan in ``R^rank`` (the torus case)."""
    lattice = tuple(tuple(Fraction(int(i == j)) for j in range(rank)) for i in range(rank))
    stub = ChamberFan(FULL, rank, (), None, lattice)
    fan = ChamberFan(FULL, rank, tuple(_normalize_cones(stub, cones, canonicalize)), None, lattice)
    _validate(fan)
    return fan


@dataclass(frozen=True)
class PLFunction:
    """``h`` with linear part ``values[k]`` on ``fan.maximal_cones[k]``."""

    fan: ChamberFan
    values: tuple[Weight, ...]

    def value_on(self, k: int) -> Weight:
        return self.values[k]

    def __call__(self, n: Sequence[int | Fraction]) -> Fraction:
        return eval_h(self, n)


def build_pl_function(fan: ChamberFan, assignments: Sequence[Sequence[int | str | Fraction]]) -> PLFunction:
    """Validate continuity and integrality of a piecewise-linear function."""
    if len(assignments) != len(fan.maximal_cones):
        raise PLFunctionError(
            "shape", f"{len(assignments)} linear forms given for {len(fan.maximal_cones)} maximal cones"
        )
    values = []
    for k, a in enumerate(assignments):
        w = tuple(as_rat(x) for x in a)
        if len(w) != fan.rank:
            raise PLFunctionError("shape", f"h[{k}] has {len(w)} coordinates, expected {fan.rank}")
        values.append(w)
    for (k1, c1), (k2, c2) in combinations(enumerate(fan.maximal_cones), 2):
        shared = set(c1) & set(c2)
        for n in sorted(shared):
            a, b = fan.pairing(values[k1], n), fan.pairing(values[k2], n)
            if a != b:
                raise PLFunctionError(
                    "discontinuous",
                    f"h[{k1}] and h[{k2}] disagree on the shared ray {n}: {a} != {b}",
                )
    for k, w in enumerate(values):
        if any(x.denominator != 1 for x in w):
            # h must be integral on the cover's cocharacters: coroots in the
            # semisimple case (so h_sigma in P), Z^r for a torus
            raise PLFunctionError(
                "non-integral", f"h[{k}] = {tuple(map(str, w))} is not an integral weight"
            )
    return PLFunction(fan, tuple(values))


def eval_h(h: PLFunction, n: Sequence[int | Fraction]) -> Fraction:
    """``h(n) = <h_sigma, n>`` for any maximal cone containing ``n``."""
    if not any(n):
        return Fraction(0)
    k = h.fan.locate(n)
    return h.fan.pairing(h.values[k], n)


def in_h_plus_X(mu: Sequence[int | Fraction], h: PLFunction) -> bool:
    """``mu - h_sigma`` lies in X for every maximal cone (``Z^r`` for a torus)."""
    fan = h.fan
    for w in h.values:
        diff = tuple(Fraction(m) - x for m, x in zip(mu, w))
        if fan.mode == DOMINANT:
            if not fan.root_datum.in_lattice(diff, "X"):
                return False
        elif any(x.denominator != 1 for x in diff):
            return False
    return True


def coweight(*coords: int) -> Coweight:
    return tuple(int(c) for c in coords)
