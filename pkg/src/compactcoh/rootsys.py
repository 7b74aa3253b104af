"""Root data, Weyl groups and the lattice cones used by the multiplicity formulas.

Conventions
-----------
* Simple roots are numbered as in Bourbaki, indices ``0 .. r-1`` internally
  and ``1 .. r`` in labels such as ``"s1s2"``.
* ``cartan[i][j] = <alpha_j, alpha_i^vee>``; hence column ``j`` of the Cartan
  matrix is ``alpha_j`` written in fundamental-weight coordinates.
* Weights are tuples of Fractions in the basis of fundamental weights.
  Their "root coordinates" are the coefficients in the basis of simple roots.
* Coweights are integer tuples in the basis of fundamental coweights, dual to
  the simple roots, so ``<alpha_i, n> = n[i]`` and the dominant chamber is the
  nonnegative orthant.  The pairing of a weight with a coweight is the dot
  product of its root coordinates with the coweight coordinates.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import factorial, prod
from typing import Iterable, Sequence

from .linalg import RatMatrix, as_rat, lattice_basis, solve_integral

Weight = tuple[Fraction, ...]
Coweight = tuple[int, ...]

MAX_WEYL_ORDER = 60_000


def weight(*coords: int | str | Fraction) -> Weight:
    """Build a weight from fundamental-weight coordinates."""
    if len(coords) == 1 and isinstance(coords[0], (list, tuple)):
        coords = tuple(coords[0])
    return tuple(as_rat(c) for c in coords)


def _cartan_simple(series: str, n: int) -> list[list[int]]:
    a = [[2 if i == j else 0 for j in range(n)] for i in range(n)]

    def link(i: int, j: int, aij: int = -1, aji: int = -1) -> None:
        a[i][j] = aij
        a[j][i] = aji

    if series == "A":
        for i in range(n - 1):
            link(i, i + 1)
    elif series == "B":
        for i in range(n - 2):
            link(i, i + 1)
        # alpha_{n-1} long, alpha_n short
        link(n - 2, n - 1, -1, -2)
    elif series == "C":
        for i in range(n - 2):
            link(i, i + 1)
        link(n - 2, n - 1, -2, -1)
    elif series == "D":
        for i in range(n - 2):
            link(i, i + 1)
        link(n - 3, n - 1)
    elif series == "E":
        # Bourbaki: 1-3-4-5-6(-7-8), 2 attached to 4
        link(0, 2)
        link(1, 3)
        for i in range(2, n - 1):
            link(i, i + 1)
    elif series == "F":
        link(0, 1)
        # alpha_1, alpha_2 long; alpha_3, alpha_4 short
        link(1, 2, -1, -2)
        link(2, 3)
    elif series == "G":
        # alpha_1 short, alpha_2 long
        link(0, 1, -3, -1)
    return a


_VALID_RANKS = {
    "A": lambda n: n >= 1,
    "B": lambda n: n >= 2,
    "C": lambda n: n >= 2,
    "D": lambda n: n >= 4,
    "E": lambda n: n in (6, 7, 8),
    "F": lambda n: n == 4,
    "G": lambda n: n == 2,
}

_WEYL_ORDER = {
    "A": lambda n: factorial(n + 1),
    "B": lambda n: 2**n * factorial(n),
    "C": lambda n: 2**n * factorial(n),
    "D": lambda n: 2 ** (n - 1) * factorial(n),
    "E": lambda n: {6: 51_840, 7: 2_903_040, 8: 696_729_600}[n],
    "F": lambda n: 1152,
    "G": lambda n: 12,
}


def parse_components(series: str, rank: int | None = None) -> list[tuple[str, int]]:
    """Split a type such as ``"A1xA1"`` or ``("B", 2)`` into simple components."""
    s = series.strip().upper().replace("×", "X")
    if re.fullmatch(r"[A-G]", s):
        if rank is None:
            raise ValueError(f"type {series!r} needs a rank")
        comps = [(s, rank)]
    else:
        parts = s.split("X")
        comps = []
        for part in parts:
            m = re.fullmatch(r"([A-G])(\d+)", part)
            if not m:
                raise ValueError(f"cannot parse root system type {series!r}")
            comps.append((m.group(1), int(m.group(2))))
        total = sum(n for _, n in comps)
        if rank is not None and rank != total:
            raise ValueError(f"type {series!r} has rank {total}, not {rank}")
    for s_, n in comps:
        if not _VALID_RANKS[s_](n):
            raise ValueError(f"invalid finite type {s_}{n}")
    return comps


@dataclass(frozen=True)
class WeylElement:
    """An element of W acting on fundamental-weight coordinates.

    ``matrix`` acts on column vectors; ``word`` is the lexicographically
    smallest reduced word (0-based simple reflection indices), so the element
    equals ``s_{word[0]} ... s_{word[-1]}``.
    """

    matrix: tuple[tuple[int, ...], ...]
    word: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.word)

    def act(self, lam: Sequence[Fraction | int]) -> Weight:
        return tuple(sum((c * Fraction(x) for c, x in zip(row, lam)), Fraction(0)) for row in self.matrix)

    @property
    def label(self) -> str:
        return "".join(f"s{i + 1}" for i in self.word) or "1"

    def __repr__(self) -> str:
        return f"WeylElement({self.label})"


def _matmul(a: tuple[tuple[int, ...], ...], b: tuple[tuple[int, ...], ...]) -> tuple[tuple[int, ...], ...]:
    cols = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in cols) for row in a)


@dataclass(frozen=True)
class RootDatum:
    """Combinatorial shadow of a semisimple group: Cartan data plus the lattice X.

    ``lattice_gens`` generate the character lattice X in fundamental-weight
    coordinates; the cover used for the multiplicities always has character
    lattice P (all integral weights).
    """

    series: str
    rank: int
    cartan: tuple[tuple[int, ...], ...]
    lattice_gens: tuple[Weight, ...]
    lattice_name: str = "adjoint"
    components: tuple[tuple[str, int], ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        r = self.rank
        if len(self.cartan) != r or any(len(row) != r for row in self.cartan):
            raise ValueError("Cartan matrix has the wrong shape")
        # Q <= X <= P
        for g in self.lattice_gens:
            if len(g) != r or any(x.denominator != 1 for x in g):
                raise ValueError(f"lattice generator {g} is not an integral weight")
        for i in range(r):
            if not self.in_lattice(self.simple_root(i), "X"):
                raise ValueError(f"lattice X does not contain the simple root alpha_{i + 1}")

    # -- basic data -----------------------------------------------------------

    @property
    def name(self) -> str:
        return "x".join(f"{s}{n}" for s, n in self.components) or f"{self.series}{self.rank}"

    @cached_property
    def _cartan_inv(self) -> RatMatrix:
        return RatMatrix(self.cartan).inverse()

    @cached_property
    def symmetrizer(self) -> tuple[Fraction, ...]:
        """``d_i = (alpha_i, alpha_i)/2`` with the shortest roots of each component at 1."""
        r = self.rank
        d: list[Fraction | None] = [None] * r
        for start in range(r):
            if d[start] is not None:
                continue
            d[start] = Fraction(1)
            queue = deque([start])
            comp = [start]
            while queue:
                i = queue.popleft()
                for j in range(r):
                    if j != i and self.cartan[i][j] and d[j] is None:
                        # a_ij d_i = a_ji d_j
                        d[j] = Fraction(self.cartan[i][j]) * d[i] / self.cartan[j][i]
                        queue.append(j)
                        comp.append(j)
            m = min(d[j] for j in comp)
            for j in comp:
                d[j] = d[j] / m
        return tuple(d)  # type: ignore[arg-type]

    def inner(self, a: Sequence[int | Fraction], b: Sequence[int | Fraction]) -> Fraction:
        """Invariant form on root coordinates."""
        d = self.symmetrizer
        r = self.rank
        return sum(
            (Fraction(a[i]) * b[j] * self.cartan[i][j] * d[i] for i in range(r) for j in range(r) if a[i] and b[j]),
            Fraction(0),
        )

    def simple_root(self, i: int) -> Weight:
        return tuple(Fraction(self.cartan[k][i]) for k in range(self.rank))

    def fundamental_weight(self, i: int) -> Weight:
        return tuple(Fraction(int(k == i)) for k in range(self.rank))

    @property
    def zero(self) -> Weight:
        return (Fraction(0),) * self.rank

    @property
    def rho(self) -> Weight:
        return (Fraction(1),) * self.rank

    def to_root_coords(self, lam: Sequence[Fraction | int]) -> tuple[Fraction, ...]:
        return self._cartan_inv.apply([Fraction(x) for x in lam])

    def from_root_coords(self, gamma: Sequence[Fraction | int]) -> Weight:
        r = self.rank
        return tuple(sum((Fraction(self.cartan[i][j]) * gamma[j] for j in range(r)), Fraction(0)) for i in range(r))

    def pairing(self, lam: Sequence[Fraction | int], n: Sequence[int | Fraction]) -> Fraction:
        """``<lam, n>`` for a weight and a coweight in fundamental-coweight coordinates."""
        return sum((g * x for g, x in zip(self.to_root_coords(lam), n)), Fraction(0))

    # -- roots ---------------------------------------------------------------

    @cached_property
    def positive_roots(self) -> tuple[tuple[int, ...], ...]:
        """Positive roots in root coordinates, sorted by height then lexicographically."""
        r = self.rank
        simple = [tuple(int(i == j) for j in range(r)) for i in range(r)]
        seen = set(simple)
        queue = deque(simple)
        while queue:
            beta = queue.popleft()
            for i in range(r):
                # <beta, alpha_i^vee> = sum_j beta_j a_ij
                c = sum(beta[j] * self.cartan[i][j] for j in range(r))
                new = tuple(beta[j] - (c if j == i else 0) for j in range(r))
                if all(x >= 0 for x in new) and any(new) and new not in seen:
                    seen.add(new)
                    queue.append(new)
        return tuple(sorted(seen, key=lambda b: (sum(b), b)))

    @property
    def dim_group(self) -> int:
        """``|Phi| + r``: the dimension of G, equal to the dimension of any compactification."""
        return 2 * len(self.positive_roots) + self.rank

    def coroot_pairing(self, lam: Sequence[Fraction | int], beta: Sequence[int]) -> Fraction:
        """``<lam, beta^vee>`` for a weight ``lam`` and a root ``beta`` in root coordinates."""
        d = self.symmetrizer
        num = sum((Fraction(lam[j]) * beta[j] * d[j] for j in range(self.rank)), Fraction(0))
        return 2 * num / self.inner(beta, beta)

    # -- Weyl group ----------------------------------------------------------

    @cached_property
    def _reflections(self) -> tuple[tuple[tuple[int, ...], ...], ...]:
        r = self.rank
        out = []
        for i in range(r):
            # s_i(p) = p - p_i * alpha_i; alpha_i = column i of the Cartan matrix
            m = [[int(a == b) for b in range(r)] for a in range(r)]
            for k in range(r):
                m[k][i] -= self.cartan[k][i]
            out.append(tuple(tuple(row) for row in m))
        return tuple(out)

    @property
    def weyl_order(self) -> int:
        return prod(_WEYL_ORDER[s](n) for s, n in self.components)

    @cached_property
    def weyl_elements(self) -> tuple[WeylElement, ...]:
        """All of W, ordered by length and then by reduced word."""
        if self.weyl_order > MAX_WEYL_ORDER:
            raise ValueError(f"|W| = {self.weyl_order} is beyond desk scale")
        r = self.rank
        ident = tuple(tuple(int(a == b) for b in range(r)) for a in range(r))
        level = [WeylElement(ident, ())]
        seen = {ident}
        out = list(level)
        while level:
            nxt = []
            for w in level:
                for i in range(r):
                    m = _matmul(w.matrix, self._reflections[i])
                    if m not in seen:
                        seen.add(m)
                        nxt.append(WeylElement(m, w.word + (i,)))
            out.extend(nxt)
            level = nxt
        return tuple(out)

    def identity(self) -> WeylElement:
        return self.weyl_elements[0]

    def longest_element(self) -> WeylElement:
        return self.weyl_elements[-1]

    def element(self, word: Iterable[int]) -> WeylElement:
        """The element ``s_{w0} s_{w1} ...`` for a 0-based word, with its canonical word."""
        m = self.identity().matrix
        for i in word:
            m = _matmul(m, self._reflections[i])
        return self._by_matrix[m]

    @cached_property
    def _by_matrix(self) -> dict:
        return {w.matrix: w for w in self.weyl_elements}

    def compose(self, w: WeylElement, v: WeylElement) -> WeylElement:
        return self._by_matrix[_matmul(w.matrix, v.matrix)]

    def inverse(self, w: WeylElement) -> WeylElement:
        return self.element(reversed(w.word))

    def dot_action(self, w: WeylElement, lam: Sequence[Fraction | int]) -> Weight:
        """``w * lam = w(lam + rho) - rho``."""
        shifted = w.act([Fraction(x) + 1 for x in lam])
        return tuple(x - 1 for x in shifted)

    def is_positive_root(self, beta_weight: Sequence[Fraction]) -> bool:
        return all(x >= 0 for x in self.to_root_coords(beta_weight))

    def descent_set(self, t: WeylElement) -> frozenset[int]:
        """``J_t``: indices of simple roots alpha with ``t^{-1}(alpha) < 0``."""
        return self._descents[t.matrix]

    @cached_property
    def _descents(self) -> dict:
        # t^{-1}(alpha_i) < 0  iff  (t rho, alpha_i) < 0  iff  coordinate i of t(rho) is negative
        return {
            t.matrix: frozenset(i for i, row in enumerate(t.matrix) if sum(row) < 0) for t in self.weyl_elements
        }

    def descent_set_by_inverse(self, t: WeylElement) -> frozenset[int]:
        """``J_t`` straight from the definition; slower, kept as a cross-check."""
        tinv = self.inverse(t)
        return frozenset(i for i in range(self.rank) if not self.is_positive_root(tinv.act(self.simple_root(i))))

    def inversion_count(self, w: WeylElement) -> int:
        """Number of positive roots sent to negative roots."""
        count = 0
        for beta in self.positive_roots:
            image = w.act(self.from_root_coords(beta))
            if not self.is_positive_root(image):
                count += 1
        return count

    # -- lattices and cones -------------------------------------------------

    def in_lattice(self, nu: Sequence[Fraction | int], which: str = "X") -> bool:
        """Exact membership of a weight in Q (roots), X (characters of G) or P."""
        nu = [Fraction(x) for x in nu]
        if which == "P":
            return all(x.denominator == 1 for x in nu)
        if which == "Q":
            return all(x.denominator == 1 for x in self.to_root_coords(nu))
        if which == "X":
            if not all(x.denominator == 1 for x in nu):
                return False
            gens = self.lattice_gens
            cols = [[g[i] for g in gens] for i in range(self.rank)]
            return solve_integral(cols, nu) is not None
        raise ValueError(f"unknown lattice {which!r}; expected Q, X or P")

    def is_dominant(self, mu: Sequence[Fraction | int]) -> bool:
        return all(Fraction(x) >= 0 for x in mu)

    def in_QJ(self, nu: Sequence[Fraction | int], J: Iterable[int]) -> bool:
        """``nu = sum q_a alpha_a`` with integral ``q`` and ``q_a > 0`` exactly for ``a`` in J."""
        J = set(J)
        gamma = self.to_root_coords(nu)
        if any(g.denominator != 1 for g in gamma):
            return False
        return all((g > 0) == (a in J) for a, g in enumerate(gamma))

    def in_Qt(self, nu: Sequence[Fraction | int], t: WeylElement) -> bool:
        return self.in_QJ(nu, self.descent_set(t))

    def in_PJ(self, nu: Sequence[Fraction | int], J: Iterable[int]) -> bool:
        """``nu = sum p_a omega_a`` with integral ``p`` and ``p_a < -1`` exactly for ``a`` in J."""
        J = set(J)
        nu = [Fraction(x) for x in nu]
        if any(p.denominator != 1 for p in nu):
            return False
        return all((p < -1) == (a in J) for a, p in enumerate(nu))

    def weyl_dimension(self, mu: Sequence[Fraction | int]) -> int:
        """Dimension of the simple module of highest weight ``mu``."""
        mu = [Fraction(x) for x in mu]
        if not self.in_lattice(mu, "P") or not self.is_dominant(mu):
            raise ValueError(f"{tuple(map(str, mu))} is not a dominant integral weight")
        shifted = [x + 1 for x in mu]
        num = Fraction(1)
        for beta in self.positive_roots:
            num *= self.coroot_pairing(shifted, beta) / self.coroot_pairing(self.rho, beta)
        assert num.denominator == 1
        return int(num)

    def degree_set(self) -> frozenset[int]:
        """``{2 l(t) + |J_t| : t in W}``."""
        return frozenset(2 * t.length + len(self.descent_set(t)) for t in self.weyl_elements)


def build_root_datum(
    series: str, rank: int | None = None, lattice_choice: str | Sequence[Sequence[int | str | Fraction]] = "adjoint"
) -> RootDatum:
    """Root datum of a given type (``"A", 2`` or ``"A1xA1"``) with X = Q, P or explicit generators."""
    comps = parse_components(series, rank)
    r = sum(n for _, n in comps)
    cartan = [[0] * r for _ in range(r)]
    offset = 0
    for s, n in comps:
        block = _cartan_simple(s, n)
        for i in range(n):
            for j in range(n):
                cartan[offset + i][offset + j] = block[i][j]
        offset += n
    cartan_t = tuple(tuple(row) for row in cartan)
    if isinstance(lattice_choice, str):
        name = lattice_choice
        if lattice_choice == "adjoint":
            gens = [tuple(Fraction(cartan[k][i]) for k in range(r)) for i in range(r)]
        elif lattice_choice == "simply_connected":
            gens = [tuple(Fraction(int(k == i)) for k in range(r)) for i in range(r)]
        else:
            raise ValueError(f"unknown lattice choice {lattice_choice!r}")
    else:
        name = "custom"
        gens = [tuple(as_rat(x) for x in g) for g in lattice_choice]
    basis = tuple(tuple(x for x in b) for b in lattice_basis(gens))
    if len(basis) != r:
        raise ValueError("lattice generators do not span a full-rank lattice")
    series_name = comps[0][0] if len(comps) == 1 else "x".join(f"{s}{n}" for s, n in comps)
    return RootDatum(series_name, r, cartan_t, basis, name, tuple(comps))
