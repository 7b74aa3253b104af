"""Multiplicities of simple G x G-modules in the cohomology of line bundles.

Two independent routes are provided.  The general route refines the fan
along ``<nu, .> = h`` and reads the multiplicity off relative cohomology of
the positive region (:func:`multiplicity`).  For the trivial fan and a linear
``h = lambda`` there is also a pure counting formula over the Weyl group
(:func:`wonderful_multiplicity`); :func:`check_wonderful_oracle` compares the
two.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .cohomology import PairDims, chamber_rel_dims, pair_dims_V_W
from .fan import DOMINANT, FULL, ChamberFan, PLFunction, build_pl_function, in_h_plus_X, wonderful_fan
from .linalg import as_rat, det
from .refine import graph_refinement
from .rootsys import RootDatum, Weight, WeylElement

WORKERS_ENV = "COMPACTCOH_WORKERS"
CHAMBER = "chamber"


class EngineError(ValueError):
    pass


@dataclass(frozen=True)
class Term:
    """One summand of a multiplicity: a Weyl group element (or the chamber term)."""

    label: str
    degree: int
    value: int


@dataclass(frozen=True)
class MultiplicityReport:
    mode: str
    mu: Weight
    i: int
    value: int
    breakdown: tuple[Term, ...] = ()
    dim_endo: int | None = None
    lam: tuple[Weight, ...] = ()

    def term(self, label: str) -> int:
        return sum(t.value for t in self.breakdown if t.label == label)


@dataclass(frozen=True)
class DecompositionTable:
    rows: tuple[MultiplicityReport, ...]
    totals: Mapping[int, int]
    warning: str = field(default="")


def _weight(coords: Iterable[int | str | Fraction]) -> Weight:
    return tuple(as_rat(x) for x in coords)


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def parallel_map(fn: Callable, items: Sequence, workers: int | None = None) -> list:
    """``[fn(x) for x in items]``, optionally spread over processes; order is preserved."""
    items = list(items)
    workers = _default_workers() if workers is None else workers
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


# -- general route -----------------------------------------------------------


@lru_cache(maxsize=8192)
def _pair_dims(h: PLFunction, nu: Weight, J: frozenset[int]) -> PairDims:
    lc = graph_refinement(h.fan, h, nu)
    return pair_dims_V_W(lc, J, h.fan.rank)


@lru_cache(maxsize=8192)
def _chamber_dims(h: PLFunction, mu: Weight) -> PairDims:
    lc = graph_refinement(h.fan, h, mu)
    return chamber_rel_dims(lc, h.fan.rank)


def clear_caches() -> None:
    _pair_dims.cache_clear()
    _chamber_dims.cache_clear()


_recorder: set | None = None


@contextmanager
def recording_configurations():
    """Collect every ``(h, nu, J)`` whose refinement is consulted (``J`` is None for the chamber term).

    Only calls made in this process are seen, so run with one worker.
    """
    global _recorder
    previous, _recorder = _recorder, set()
    try:
        yield _recorder
    finally:
        _recorder = previous if previous is None else previous | _recorder


def _pair(h: PLFunction, nu: Weight, J: frozenset[int]) -> PairDims:
    if _recorder is not None:
        _recorder.add((h, nu, J))
    return _pair_dims(h, nu, J)


def _chamber(h: PLFunction, mu: Weight) -> PairDims:
    if _recorder is not None:
        _recorder.add((h, mu, None))
    return _chamber_dims(h, mu)


def _check_regular(rd: RootDatum, fan: ChamberFan, h: PLFunction, mu: Weight) -> None:
    if fan.mode != DOMINANT:
        raise EngineError("the general formula needs a subdivision of the dominant chamber")
    if h.fan != fan:
        raise EngineError("h is not adapted to this fan")
    if fan.root_datum != rd:
        raise EngineError("the fan was built for a different root datum")
    if len(mu) != rd.rank:
        raise EngineError(f"mu has {len(mu)} coordinates, expected {rd.rank}")
    if not rd.in_lattice(mu, "P") or not rd.is_dominant(mu):
        raise EngineError(f"mu = {tuple(map(str, mu))} is not a dominant integral weight")


def multiplicities(rd: RootDatum, fan: ChamberFan, h: PLFunction, mu) -> list[MultiplicityReport]:
    """Reports for every degree ``0 <= i <= dim X`` at once."""
    mu = _weight(mu)
    _check_regular(rd, fan, h, mu)
    top = rd.dim_group
    if not in_h_plus_X(mu, h):
        return [MultiplicityReport("regular", mu, i, 0, (), None, h.values) for i in range(top + 1)]
    terms: dict[int, list[Term]] = {i: [] for i in range(top + 1)}
    for t in rd.weyl_elements[1:]:
        shift = 2 * t.length + 1
        if shift > top:
            continue
        dims = _pair(h, rd.dot_action(t, mu), rd.descent_set(t))
        for i in range(top + 1):
            j = i - shift
            terms[i].append(Term(t.label, j, dims[j]))
    chamber = _chamber(h, mu)
    out = []
    for i in range(top + 1):
        terms[i].append(Term(CHAMBER, i, chamber[i]))
        value = sum(term.value for term in terms[i])
        out.append(MultiplicityReport("regular", mu, i, value, tuple(terms[i]), None, h.values))
    return out


def multiplicity(rd: RootDatum, fan: ChamberFan, h: PLFunction, mu, i: int) -> MultiplicityReport:
    """``m^i_h(mu)`` by the general formula, with a per-``t`` breakdown."""
    mu = _weight(mu)
    _check_regular(rd, fan, h, mu)
    if i < 0 or i > rd.dim_group:
        return MultiplicityReport("regular", mu, i, 0, (), None, h.values)
    if not in_h_plus_X(mu, h):
        return MultiplicityReport("regular", mu, i, 0, (), None, h.values)
    terms = []
    for t in rd.weyl_elements[1:]:
        j = i - 2 * t.length - 1
        value = _pair(h, rd.dot_action(t, mu), rd.descent_set(t))[j] if j >= 0 else 0
        terms.append(Term(t.label, j, value))
    terms.append(Term(CHAMBER, i, _chamber(h, mu)[i]))
    return MultiplicityReport("regular", mu, i, sum(t.value for t in terms), tuple(terms), None, h.values)


def toric_multiplicity(fan: ChamberFan, h: PLFunction, mu, i: int) -> MultiplicityReport:
    """``dim H^i(R^r, V(h, mu))`` for a complete fan: the weight-``mu`` part of ``H^i``."""
    if fan.mode != FULL:
        raise EngineError("toric multiplicities need a complete fan")
    if h.fan != fan:
        raise EngineError("h is not adapted to this fan")
    mu = _weight(mu)
    if len(mu) != fan.rank:
        raise EngineError(f"mu has {len(mu)} coordinates, expected {fan.rank}")
    if i < 0 or i > fan.rank or not in_h_plus_X(mu, h):
        return MultiplicityReport("toric", mu, i, 0, (), 1, h.values)
    value = _chamber(h, mu)[i]
    return MultiplicityReport("toric", mu, i, value, (Term(CHAMBER, i, value),), 1, h.values)


def m0_characterization(rd: RootDatum, fan: ChamberFan, h: PLFunction, mu) -> bool:
    """Whether ``<mu, n> <= h(n)`` on the whole support and ``mu`` lies in ``h + X``."""
    mu = _weight(mu)
    if not in_h_plus_X(mu, h):
        return False
    for k, cone in enumerate(fan.maximal_cones):
        for v in cone:
            if fan.pairing(mu, v) > fan.pairing(h.values[k], v):
                return False
    return True


# -- closed form on the trivial fan ------------------------------------------


def wonderful_terms(rd: RootDatum, lam, mu) -> list[tuple[WeylElement, int]]:
    """``(t, 2 l(t) + |J_t|)`` for every ``t`` with ``t * mu`` in ``lam + Q_t``."""
    lam, mu = _weight(lam), _weight(mu)
    out = []
    for t in rd.weyl_elements:
        nu = rd.dot_action(t, mu)
        if rd.in_Qt(tuple(a - b for a, b in zip(nu, lam)), t):
            out.append((t, 2 * t.length + len(rd.descent_set(t))))
    return out


def _check_wonderful(rd: RootDatum, lam: Weight, mu: Weight) -> None:
    if len(lam) != rd.rank or len(mu) != rd.rank:
        raise EngineError(f"weights must have {rd.rank} coordinates")
    if not rd.in_lattice(lam, "P"):
        raise EngineError(f"lambda = {tuple(map(str, lam))} is not integral")
    if not rd.in_lattice(mu, "P") or not rd.is_dominant(mu):
        raise EngineError(f"mu = {tuple(map(str, mu))} is not a dominant integral weight")


def wonderful_multiplicity(rd: RootDatum, lam, mu, i: int) -> MultiplicityReport:
    """Number of ``t in W`` with ``2 l(t) + |J_t| = i`` and ``t * mu - lam in Q_t``."""
    lam, mu = _weight(lam), _weight(mu)
    _check_wonderful(rd, lam, mu)
    terms = tuple(Term(t.label, d, 1) for t, d in wonderful_terms(rd, lam, mu) if d == i)
    return MultiplicityReport("wonderful", mu, i, len(terms), terms, None, (lam,))


def wonderful_multiplicities(rd: RootDatum, lam, mu) -> dict[int, int]:
    """``{i: m^i_lam(mu)}`` over the degrees where it is nonzero."""
    lam, mu = _weight(lam), _weight(mu)
    _check_wonderful(rd, lam, mu)
    out: dict[int, int] = {}
    for _, d in wonderful_terms(rd, lam, mu):
        out[d] = out.get(d, 0) + 1
    return dict(sorted(out.items()))


def wonderful_support(rd: RootDatum, mu, lam) -> set[Weight]:
    """Weights ``t * mu`` contributing for ``lam``, computed by two independent routes.

    Route one enumerates ``t`` and tests ``t * mu`` against ``lam + Q_{J_t}``
    and ``P_{J_t}``.  Route two takes the orbit ``W * mu`` as a set and keeps
    the weights lying in ``(lam + Q_J) cap P_J`` for some subset ``J``.
    """
    lam, mu = _weight(lam), _weight(mu)
    _check_wonderful(rd, lam, mu)
    by_t = set()
    for t in rd.weyl_elements:
        nu = rd.dot_action(t, mu)
        J = rd.descent_set(t)
        if rd.in_QJ(tuple(a - b for a, b in zip(nu, lam)), J) and rd.in_PJ(nu, J):
            by_t.add(nu)
    orbit = {rd.dot_action(t, mu) for t in rd.weyl_elements}
    by_J = set()
    for bits in product((False, True), repeat=rd.rank):
        J = {a for a, b in enumerate(bits) if b}
        for nu in orbit:
            if rd.in_QJ(tuple(a - b for a, b in zip(nu, lam)), J) and rd.in_PJ(nu, J):
                by_J.add(nu)
    if by_t != by_J:
        raise AssertionError(f"support routes disagree: {sorted(by_t)} vs {sorted(by_J)}")
    return by_t


def _root_coord_matrix(rd: RootDatum) -> tuple[np.ndarray, int]:
    """Integer matrix ``M`` and ``d`` with ``d * (root coords of lam) = M @ lam``."""
    d = abs(int(det(rd.cartan)))
    rows = []
    for i in range(rd.rank):
        e = [int(i == j) for j in range(rd.rank)]
        rows.append([int(x * d) for x in rd.to_root_coords(e)])
    return np.array(rows, dtype=np.int64).T, d


def search_wonderful(
    rd: RootDatum,
    mu,
    i: int | Sequence[int],
    predicate: Callable,
    radius: int,
    center=None,
) -> list[Weight]:
    """All ``lam`` in the box ``|lam - center|_inf <= radius`` whose closed-form count passes ``predicate``.

    With an integer ``i`` the predicate receives the array of ``m^i`` values;
    with a list of degrees it receives a dict ``{degree: array}``.  Results
    are sorted lexicographically.
    """
    mu = _weight(mu)
    degrees = [i] if isinstance(i, int) else list(i)
    r = rd.rank
    center = np.zeros(r, dtype=np.int64) if center is None else np.array([int(x) for x in center], dtype=np.int64)
    axis = np.arange(-radius, radius + 1, dtype=np.int64)
    grid = np.stack(np.meshgrid(*([axis] * r), indexing="ij"), axis=-1).reshape(-1, r) + center
    M, d = _root_coord_matrix(rd)
    lam_root = grid @ M.T
    counts = {deg: np.zeros(len(grid), dtype=np.int64) for deg in degrees}
    for t in rd.weyl_elements:
        deg = 2 * t.length + len(rd.descent_set(t))
        if deg not in counts:
            continue
        nu = rd.dot_action(t, mu)
        nu_root = M @ np.array([int(x) for x in nu], dtype=np.int64)
        gamma = nu_root[None, :] - lam_root  # d * root coords of t*mu - lam
        ok = np.all(gamma % d == 0, axis=1)
        J = rd.descent_set(t)
        for a in range(r):
            ok &= gamma[:, a] > 0 if a in J else gamma[:, a] <= 0
        counts[deg] += ok
    keep = predicate(counts[degrees[0]]) if isinstance(i, int) else predicate(counts)
    keep = np.asarray(keep, dtype=bool)
    return sorted(tuple(Fraction(int(x)) for x in row) for row in grid[keep])


# -- tables and oracles ------------------------------------------------------


def dominant_box(rd_rank: int, radius: int) -> list[Weight]:
    return [tuple(Fraction(x) for x in p) for p in product(range(radius + 1), repeat=rd_rank)]


def full_box(rank: int, radius: int) -> list[Weight]:
    return [tuple(Fraction(x) for x in p) for p in product(range(-radius, radius + 1), repeat=rank)]


TRUNCATION_WARNING = "the mu-support is only scanned inside the requested box; totals may be incomplete"


def decomposition_table(
    rd: RootDatum | None,
    fan: ChamberFan,
    h: PLFunction,
    i_range: Iterable[int],
    mu_radius: int,
    workers: int | None = None,
) -> DecompositionTable:
    """Nonzero multiplicities for ``mu`` in a box, with ``sum m * dim End L(mu)`` per degree.

    Dominant ``mu`` with ``|mu|_inf <= mu_radius`` for a chamber subdivision,
    and every ``mu`` in ``[-mu_radius, mu_radius]^r`` for a complete fan.
    """
    i_range = sorted(set(i_range))
    warnings.warn(TRUNCATION_WARNING, stacklevel=2)
    if fan.mode == FULL:
        mus = full_box(fan.rank, mu_radius)
        reports = [toric_multiplicity(fan, h, mu, i) for mu in mus for i in i_range]
    else:
        mus = dominant_box(rd.rank, mu_radius)
        per_mu = parallel_map(_MultTask(rd, fan, h), mus, workers)
        wanted = set(i_range)
        reports = []
        for mu, reps in zip(mus, per_mu):
            dim = rd.weyl_dimension(mu) ** 2
            for rep in reps:
                if rep.i in wanted:
                    reports.append(_with_dim(rep, dim))
    rows = tuple(sorted((r for r in reports if r.value), key=lambda r: (r.i, r.mu)))
    totals = {i: 0 for i in i_range}
    for r in rows:
        totals[r.i] += r.value * r.dim_endo
    return DecompositionTable(rows, totals, TRUNCATION_WARNING)


def _with_dim(rep: MultiplicityReport, dim: int) -> MultiplicityReport:
    return MultiplicityReport(rep.mode, rep.mu, rep.i, rep.value, rep.breakdown, dim, rep.lam)


@dataclass(frozen=True)
class _MultTask:
    rd: RootDatum
    fan: ChamberFan
    h: PLFunction

    def __call__(self, mu: Weight) -> list[MultiplicityReport]:
        return multiplicities(self.rd, self.fan, self.h, mu)


@dataclass(frozen=True)
class Mismatch:
    lam: Weight
    mu: Weight
    i: int
    general: int
    closed_form: int


@dataclass(frozen=True)
class _OracleTask:
    rd: RootDatum
    mus: tuple[Weight, ...]
    i_range: tuple[int, ...]

    def __call__(self, lam: Weight) -> list[Mismatch]:
        fan = wonderful_fan(self.rd)
        h = build_pl_function(fan, [lam])
        out = []
        for mu in self.mus:
            general = {r.i: r.value for r in multiplicities(self.rd, fan, h, mu)}
            closed = wonderful_multiplicities(self.rd, lam, mu)
            for i in self.i_range:
                a, b = general.get(i, 0), closed.get(i, 0)
                if a != b:
                    out.append(Mismatch(lam, mu, i, a, b))
        return out


def check_wonderful_oracle(
    rd: RootDatum,
    lam_radius: int,
    mu_radius: int,
    i_range: Iterable[int] | None = None,
    workers: int | None = None,
) -> list[Mismatch]:
    """Compare the general formula on the trivial fan with the closed form.

    ``lam`` runs over ``[-lam_radius, lam_radius]^r`` and ``mu`` over the
    dominant weights with ``|mu|_inf <= mu_radius``.  An empty list means
    every triple agrees.
    """
    i_range = tuple(range(rd.dim_group + 1)) if i_range is None else tuple(sorted(set(i_range)))
    task = _OracleTask(rd, tuple(dominant_box(rd.rank, mu_radius)), i_range)
    lams = full_box(rd.rank, lam_radius)
    return [m for chunk in parallel_map(task, lams, workers) for m in chunk]
