"""Acceptance criteria, one test each, at the stated tolerances and time limits.

Every value compared here comes from an independent source: the worked
blow-up example, classical formulas for projective spaces and toric
surfaces, or a second computational route.  Criterion 10 re-validates every
refinement consulted by criteria 1-9; the configurations are recorded while
those criteria run.
"""

from __future__ import annotations

import random
import subprocess
import sys
import time
from fractions import Fraction
from itertools import product
from math import comb
from pathlib import Path

import numpy as np

from _support import complex_defects, euler_defects
from compactcoh.cohomology import pair_dims_V_W
from compactcoh.engine import (
    check_wonderful_oracle,
    decomposition_table,
    multiplicity,
    recording_configurations,
    search_wonderful,
    toric_multiplicity,
    wonderful_multiplicities,
    wonderful_multiplicity,
)
from compactcoh.fan import build_chamber_fan, build_complete_fan, build_pl_function, wonderful_fan
from compactcoh.linalg import solve_rational
from compactcoh.refine import graph_refinement
from compactcoh.rootsys import MAX_WEYL_ORDER, _VALID_RANKS, _WEYL_ORDER, build_root_datum

ROOT = Path(__file__).resolve().parent.parent

# configurations (h, nu, J) consulted by each criterion, for criterion 10
RECORDED: dict[int, set] = {}


def _record(n: int, seen: set) -> None:
    RECORDED.setdefault(n, set()).update(seen)


# -- 1 -------------------------------------------------------------------------


def criterion_1():
    start = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "compactcoh", "mult", str(ROOT / "problems" / "pgl3_blowup.json"),
         "--mu", "0,0", "--i", "3", "--format", "csv"],
        capture_output=True, text=True,
    )
    elapsed = time.perf_counter() - start
    assert proc.returncode == 0, proc.stderr
    rows = [line.split(",") for line in proc.stdout.splitlines()[1:]]
    terms = {r[3]: int(r[5]) for r in rows}
    assert terms["total"] == 2
    assert (terms["s1"], terms["s2"], terms["chamber"]) == (1, 1, 0)
    assert all(v == 0 for k, v in terms.items() if k not in ("s1", "s2", "total"))
    assert elapsed < 5, elapsed

    rd = build_root_datum("A", 2)
    fan = build_chamber_fan(rd, [[(1, 0), (1, 1)], [(1, 1), (0, 1)]])
    h = build_pl_function(fan, [(-5, 4), (4, -5)])
    with recording_configurations() as seen:
        rep = multiplicity(rd, fan, h, (0, 0), 3)
        # record every term's refinement, including those at negative degree
        for t in rd.weyl_elements[1:]:
            seen.add((h, rd.dot_action(t, rd.zero), rd.descent_set(t)))
    assert rep.value == 2 and rep.term("s1") == 1 and rep.term("s2") == 1 and rep.term("chamber") == 0
    _record(1, seen)


def test_criterion_01_pgl3_blowup():
    """criterion 1: PGL(3) blow-up, m^3_h(0) = 2 with breakdown s_a 1, s_b 1, chamber 0, under 5 s"""
    criterion_1()


# -- 2 -------------------------------------------------------------------------


def criterion_2():
    start = time.perf_counter()
    for series, box in [("A", 3), ("B", 3), ("G", 2)]:
        rd = build_root_datum(series, 2)
        with recording_configurations() as seen:
            mismatches = check_wonderful_oracle(rd, box, box, range(rd.dim_group + 1), workers=1)
        _record(2, seen)
        assert mismatches == [], mismatches[:5]
        # the comparison is not vacuous: count the nonzero multiplicities it covered
        nonzero = sum(
            len(wonderful_multiplicities(rd, lam, mu))
            for lam in product(range(-box, box + 1), repeat=2)
            for mu in product(range(box + 1), repeat=2)
        )
        assert nonzero > 50
    assert time.perf_counter() - start < 600


def test_criterion_02_master_oracle():
    """criterion 2: general engine on the trivial fan equals the closed form (A2, B2 box 3; G2 box 2; all i)"""
    criterion_2()


# -- 3 -------------------------------------------------------------------------


def supported_types():
    """Every simple type whose Weyl group is enumerable here, plus some products."""
    out = []
    for series in "ABCDEFG":
        n = 1
        while n <= 8:
            if _VALID_RANKS[series](n) and _WEYL_ORDER[series](n) <= MAX_WEYL_ORDER:
                out.append((series, n))
            n += 1
    # a product's degree set is the sumset of its factors' sets, so it avoids
    # 1, 2 and 4 as soon as the factors do; a few products are checked directly
    out += [("A1xA1", None), ("A1xA2", None), ("A2xB2", None), ("A1xG2", None)]
    return out


def criterion_3():
    for series, rank in supported_types():
        rd = build_root_datum(series, rank)
        assert not rd.degree_set() & {1, 2, 4}, rd.name
    for name, rank, box in [("A1xA1", None, 4), ("A", 2, 4), ("B", 2, 4), ("G", 2, 4), ("A", 3, 3), ("B", 3, 3)]:
        rd = build_root_datum(name, rank)
        for mu in product(range(box + 1), repeat=rd.rank):
            hits = search_wonderful(rd, mu, [1, 2, 4], lambda c: (c[1] > 0) | (c[2] > 0) | (c[4] > 0), box)
            assert hits == [], (rd.name, mu, hits[:3])
        for lam in product(range(-2, 3), repeat=rd.rank):
            for i in (1, 2, 4):
                assert wonderful_multiplicity(rd, lam, rd.zero, i).value == 0


def test_criterion_03_vanishing_degrees():
    """criterion 3: wonderful multiplicities vanish for i in {1,2,4}; degree sets avoid {1,2,4} for every supported W"""
    criterion_3()


# -- 4 -------------------------------------------------------------------------


def criterion_4():
    for name, rank in [("A1xA1", None), ("A", 2), ("B", 2), ("G", 2)]:
        rd = build_root_datum(name, rank)
        for lam in product(range(-4, 5), repeat=2):
            for mu in product(range(5), repeat=2):
                counts = wonderful_multiplicities(rd, lam, mu)
                assert all(v == 1 for v in counts.values()), (rd.name, lam, mu, counts)
    for series in ("A", "B"):
        rd = build_root_datum(series, 3)
        # 2 l(t) + |J_t| = 3 only for simple reflections
        assert {t.word for t in rd.weyl_elements if 2 * t.length + len(rd.descent_set(t)) == 3} == {
            (a,) for a in range(3)
        }
        for mu in product(range(4), repeat=3):
            bad = search_wonderful(rd, mu, 3, lambda m: m > 1, 3)
            assert bad == [], (rd.name, mu, bad[:3])


def test_criterion_04_multiplicity_free():
    """criterion 4: rank-2 wonderful multiplicities are 0 or 1 (box 4); m^3 is 0 or 1 for A3, B3 (box 3)"""
    criterion_4()


# -- 5, 6 ----------------------------------------------------------------------


def criterion_5():
    rd = build_root_datum("D", 4)
    start = time.perf_counter()
    found = search_wonderful(rd, rd.zero, 5, lambda m: m == 3, 8)
    elapsed = time.perf_counter() - start
    assert found
    # confirm a witness with the scalar count, term by term
    rep = wonderful_multiplicity(rd, found[0], rd.zero, 5)
    assert rep.value == 3
    assert elapsed < 120, elapsed


def test_criterion_05_d4_triple_multiplicity():
    """criterion 5: D4 has lambda with m^5_lambda(0) = 3 within radius 8, under 2 min"""
    criterion_5()


def criterion_6():
    rd = build_root_datum("F", 4)
    start = time.perf_counter()
    found = search_wonderful(rd, rd.zero, [10, 11], lambda c: (c[10] > 0) & (c[11] > 0), 12)
    elapsed = time.perf_counter() - start
    assert found
    counts = wonderful_multiplicities(rd, found[0], rd.zero)
    assert counts.get(10, 0) > 0 and counts.get(11, 0) > 0
    assert elapsed < 600, elapsed


def test_criterion_06_f4_two_degrees():
    """criterion 6: F4 has lambda with m^10_lambda(0) > 0 and m^11_lambda(0) > 0 within radius 12, under 10 min"""
    criterion_6()


# -- 7 -------------------------------------------------------------------------


def p3_cohomology(n: int) -> dict[int, int]:
    """Classical dim H^i(P^3, O(n))."""
    out = {0: comb(n + 3, 3) if n >= 0 else 0, 1: 0, 2: 0, 3: comb(-n - 1, 3) if n <= -4 else 0}
    return out


def criterion_7():
    import warnings

    rd = build_root_datum("A", 1)
    fan = wonderful_fan(rd)
    seen_all = set()
    for n in range(-8, 9):
        h = build_pl_function(fan, [(n,)])
        # weights contribute only for mu <= n (degree 0) or mu <= -n - 4 (degree 3),
        # so the box of radius 8 holds the whole support
        with warnings.catch_warnings(), recording_configurations() as seen:
            warnings.simplefilter("ignore")
            table = decomposition_table(rd, fan, h, range(rd.dim_group + 1), 8, workers=1)
        seen_all |= seen
        assert table.totals == p3_cohomology(n), (n, table.totals)
        closed = {i: 0 for i in range(4)}
        for mu in range(9):
            for i, m in wonderful_multiplicities(rd, (n,), (mu,)).items():
                closed[i] += m * (mu + 1) ** 2
        assert closed == p3_cohomology(n)
        assert all(r.i in (0, 3) for r in table.rows)
    _record(7, seen_all)


def test_criterion_07_projective_space():
    """criterion 7: wonderful PGL(2) = P^3, sum of m * dim End L(mu) equals dim H^i(P^3, O(n)) for n in [-8, 8]"""
    criterion_7()


# -- 8 -------------------------------------------------------------------------


def pl_from_divisor(fan, coeffs: dict) -> object:
    """h with h(v) = coeffs[v] on every ray v."""
    rows = []
    for cone in fan.maximal_cones:
        rows.append(solve_rational([list(v) for v in cone], [coeffs[v] for v in cone]))
    return build_pl_function(fan, rows)


def toric_totals(fan, h) -> dict[int, int]:
    """Sum of toric multiplicities over all mu in the bounding box of the linear parts of h.

    Outside the convex hull of the linear parts there is a direction along
    which g = <mu, .> - h is positive on every cone, and V deformation
    retracts onto it, so nothing outside contributes.
    """
    lo = [int(np.floor(min(float(v[k]) for v in h.values))) for k in range(fan.rank)]
    hi = [int(np.ceil(max(float(v[k]) for v in h.values))) for k in range(fan.rank)]
    totals = {i: 0 for i in range(fan.rank + 1)}
    for mu in product(*[range(a, b + 1) for a, b in zip(lo, hi)]):
        for i in range(fan.rank + 1):
            totals[i] += toric_multiplicity(fan, h, mu, i).value
    return totals


def lattice_points(rays, coeffs, bound=40) -> int:
    """#{mu : <mu, v> <= a_v for all rays}, by direct enumeration."""
    r = len(rays[0])
    return sum(
        1
        for mu in product(range(-bound, bound + 1), repeat=r)
        if all(sum(m * x for m, x in zip(mu, v)) <= a for v, a in zip(rays, coeffs))
    )


def p1_cohomology(d):
    return {0: d + 1 if d >= 0 else 0, 1: -d - 1 if d <= -2 else 0}


def p2_cohomology(d):
    return {0: comb(d + 2, 2) if d >= 0 else 0, 1: 0, 2: comb(-d - 1, 2) if d <= -3 else 0}


F1_RAYS = [(1, 0), (0, 1), (-1, 1), (0, -1)]
# D_i^2 = -c_i where v_{i-1} + v_{i+1} = c_i v_i; neighbours meet once, opposite rays not at all
F1_INTERSECTION = [
    [0, 1, 0, 1],
    [1, -1, 1, 0],
    [0, 1, 0, 1],
    [1, 0, 1, 1],
]


def f1_cohomology(a) -> dict[int, int]:
    """h^0 by lattice points, h^2 by Serre duality, h^1 by Riemann-Roch."""
    h0 = lattice_points(F1_RAYS, a, bound=20)
    h2 = lattice_points(F1_RAYS, [-1 - x for x in a], bound=20)
    k = [-1] * 4
    dd = sum(a[i] * F1_INTERSECTION[i][j] * a[j] for i in range(4) for j in range(4))
    dk = sum(a[i] * F1_INTERSECTION[i][j] * k[j] for i in range(4) for j in range(4))
    chi = 1 + Fraction(dd - dk, 2)
    assert chi.denominator == 1
    return {0: h0, 1: h0 + h2 - int(chi), 2: h2}


def criterion_8():
    seen_all = set()
    with recording_configurations() as seen:
        p1 = build_complete_fan(1, [[(1,)], [(-1,)]])
        for p, q in product(range(-6, 7), repeat=2):
            if -6 <= p - q <= 6:
                h = pl_from_divisor(p1, {(1,): p, (-1,): -q})
                assert toric_totals(p1, h) == p1_cohomology(p - q), (p, q)

        p2 = build_complete_fan(2, [[(1, 0), (0, 1)], [(0, 1), (-1, -1)], [(-1, -1), (1, 0)]])
        for a in product(range(-2, 3), repeat=3):
            h = pl_from_divisor(p2, dict(zip([(1, 0), (0, 1), (-1, -1)], a)))
            assert toric_totals(p2, h) == p2_cohomology(sum(a)), a

        rays = [(1, 0), (0, 1), (-1, 0), (0, -1)]
        p1p1 = build_complete_fan(2, [[rays[k], rays[(k + 1) % 4]] for k in range(4)])
        for a in product(range(-2, 3), repeat=4):
            h = pl_from_divisor(p1p1, dict(zip(rays, a)))
            x, y = p1_cohomology(a[0] + a[2]), p1_cohomology(a[1] + a[3])
            kunneth = {k: sum(x[i] * y[k - i] for i in range(2) if 0 <= k - i <= 1) for k in range(3)}
            assert toric_totals(p1p1, h) == kunneth, a
    seen_all |= seen

    f1 = build_complete_fan(2, [[F1_RAYS[k], F1_RAYS[(k + 1) % 4]] for k in range(4)])
    # cohomology depends on the class (a2 + a4, a1 + a3 + a4); check every class met by
    # coefficients in [-4, 4] through its first representative, then a random sample of
    # other representatives, which differ from it by a character twist
    classes: dict[tuple[int, int], tuple[int, ...]] = {}
    all_coeffs = list(product(range(-4, 5), repeat=4))
    for a in all_coeffs:
        classes.setdefault((a[1] + a[3], a[0] + a[2] + a[3]), a)
    sample = random.Random(2024).sample(all_coeffs, 60)
    with recording_configurations() as seen:
        for a in list(classes.values()) + sample:
            h = pl_from_divisor(f1, dict(zip(F1_RAYS, a)))
            assert toric_totals(f1, h) == f1_cohomology(a), a
    seen_all |= seen
    _record(8, seen_all)


def test_criterion_08_toric_oracles():
    """criterion 8: toric multiplicities reproduce line-bundle cohomology of P^1, P^2, P^1 x P^1 and F_1"""
    criterion_8()


# -- 9 -------------------------------------------------------------------------


def criterion_9():
    seen = set()
    for series in ("A", "B", "G"):
        rd = build_root_datum(series, 2)
        fan = wonderful_fan(rd)
        for t in rd.weyl_elements[1:]:
            J = rd.descent_set(t)
            sphere = tuple(int(j == len(J) - 1) for j in range(3))
            for nu in product(range(-4, 5), repeat=2):
                if not rd.in_lattice(nu, "Q"):
                    continue
                # nu = t*mu - lambda with mu = 0 and h = lambda linear
                nu = tuple(Fraction(x) for x in nu)
                lam = tuple(a - b for a, b in zip(rd.dot_action(t, rd.zero), nu))
                h = build_pl_function(fan, [lam])
                point = rd.dot_action(t, rd.zero)
                dims = pair_dims_V_W(graph_refinement(fan, h, point), J, 2).dims
                seen.add((h, point, J))
                expected = sphere if rd.in_Qt(nu, t) else (0, 0, 0)
                assert dims == expected, (rd.name, t, nu, dims)
    _record(9, seen)


def test_criterion_09_diamond_oracle():
    """criterion 9: on the trivial fan the pair is a (|J_t|-1)-sphere pair exactly when nu in Q_t (A2, B2, G2, nu in box 4 of Q)"""
    criterion_9()


# -- 10 ------------------------------------------------------------------------


def criterion_10():
    runners = {1: criterion_1, 2: criterion_2, 7: criterion_7, 8: criterion_8, 9: criterion_9}
    for n, run in runners.items():
        if n not in RECORDED:
            run()
    rng = random.Random(10)
    checked = 0
    for n in sorted(RECORDED):
        # refinements depend on the cone functionals only; check each distinct one once
        distinct = {}
        for h, nu, J in RECORDED[n]:
            fan = h.fan
            key = (fan, tuple(tuple(a - b for a, b in zip(fan.functional(nu), fan.functional(v))) for v in h.values))
            distinct.setdefault(key, (h, nu, set()))[2].add(J)
        for h, nu, walls in distinct.values():
            lc = graph_refinement(h.fan, h, nu)
            problems = complex_defects(lc, rng, 100)
            for J in walls:
                problems += euler_defects(lc, J)
            assert problems == [], (n, nu, problems)
            checked += 1
    assert checked > 1000


def test_criterion_10_property_suites():
    """criterion 10: volume, face matching, 100-point sign soundness, determinism and Euler consistency on all refinements of criteria 1-9"""
    criterion_10()
