"""Exact rational linear algebra.

Everything downstream (root data, fans, refinements, cohomology ranks) is
computed with :class:`fractions.Fraction` and Python integers, so there is no
overflow and no rounding anywhere in the pipeline.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

Rat = Fraction


def as_rat(value: int | str | Fraction) -> Fraction:
    """Coerce an int, a Fraction or a ``"p/q"`` string to a Fraction."""
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational number")


class RatMatrix:
    """Immutable dense matrix of Fractions."""

    __slots__ = ("_rows", "_ncols")

    def __init__(self, rows: Iterable[Iterable[int | str | Fraction]], ncols: int | None = None):
        rows = tuple(tuple(as_rat(x) for x in row) for row in rows)
        if rows:
            widths = {len(r) for r in rows}
            if len(widths) != 1:
                raise ValueError("ragged matrix rows")
            (width,) = widths
            if ncols is not None and ncols != width:
                raise ValueError("column count mismatch")
            ncols = width
        self._rows = rows
        self._ncols = ncols or 0

    @classmethod
    def identity(cls, n: int) -> RatMatrix:
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> RatMatrix:
        return cls([[0] * ncols for _ in range(nrows)], ncols)

    @property
    def rows(self) -> tuple[tuple[Fraction, ...], ...]:
        return self._rows

    @property
    def shape(self) -> tuple[int, int]:
        return len(self._rows), self._ncols

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self._rows[i][j]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RatMatrix) and self.shape == other.shape and self._rows == other._rows

    def __hash__(self) -> int:
        return hash((self._rows, self._ncols))

    def __repr__(self) -> str:
        body = ", ".join("[" + ", ".join(str(x) for x in r) + "]" for r in self._rows)
        return f"RatMatrix([{body}])"

    def transpose(self) -> RatMatrix:
        n, m = self.shape
        return RatMatrix([[self._rows[i][j] for i in range(n)] for j in range(m)], n)

    def __matmul__(self, other: RatMatrix) -> RatMatrix:
        n, k = self.shape
        k2, m = other.shape
        if k != k2:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        cols = other.transpose().rows
        return RatMatrix([[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in cols] for row in self._rows], m)

    def apply(self, v: Sequence[int | Fraction]) -> tuple[Fraction, ...]:
        if len(v) != self._ncols:
            raise ValueError("vector length mismatch")
        return tuple(sum((a * b for a, b in zip(row, v)), Fraction(0)) for row in self._rows)

    def rank(self) -> int:
        return rank(self._rows)

    def det(self) -> Fraction:
        return det(self._rows)

    def inverse(self) -> RatMatrix:
        n, m = self.shape
        if n != m:
            raise ValueError("inverse of a non-square matrix")
        cols = [solve_rational(self._rows, [1 if i == j else 0 for i in range(n)]) for j in range(n)]
        if any(c is None for c in cols):
            raise ZeroDivisionError("singular matrix")
        return RatMatrix(cols, n).transpose()


def _integer_rows(rows: Iterable[Iterable[int | Fraction]]) -> list[dict[int, int]]:
    """Clear denominators row by row; keeps only nonzero entries."""
    out = []
    for row in rows:
        row = [Fraction(x) for x in row]
        scale = lcm(1, *(x.denominator for x in row))
        sparse = {j: int(x * scale) for j, x in enumerate(row) if x}
        if sparse:
            out.append(sparse)
    return out


def _primitive_row(row: dict[int, int]) -> dict[int, int]:
    g = 0
    for x in row.values():
        g = gcd(g, x)
    if g > 1:
        return {j: x // g for j, x in row.items()}
    return row


def rank(m: RatMatrix | Iterable[Iterable[int | Fraction]]) -> int:
    """Rank over the rationals by fraction-free elimination on sparse rows.

    Each elimination step replaces ``row`` by ``p*row - c*pivot_row`` and then
    divides out the row content, so entries stay integral and small.
    """
    rows = _integer_rows(m.rows if isinstance(m, RatMatrix) else m)
    r = 0
    while rows:
        # pivot on the row with the fewest nonzeros to limit fill-in
        k = min(range(len(rows)), key=lambda idx: len(rows[idx]))
        pivot = rows.pop(k)
        col = min(pivot)
        p = pivot[col]
        r += 1
        nxt = []
        for row in rows:
            c = row.get(col)
            if c is None:
                nxt.append(row)
                continue
            new = {j: p * x for j, x in row.items()}
            for j, x in pivot.items():
                v = new.get(j, 0) - c * x
                if v:
                    new[j] = v
                else:
                    new.pop(j, None)
            if new:
                nxt.append(_primitive_row(new))
        rows = nxt
    return r


def det(m: RatMatrix | Sequence[Sequence[int | Fraction]]) -> Fraction:
    """Exact determinant (Bareiss elimination after clearing denominators)."""
    rows = [list(r) for r in (m.rows if isinstance(m, RatMatrix) else m)]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        return Fraction(1)
    scale = Fraction(1)
    a = []
    for row in rows:
        row = [Fraction(x) for x in row]
        d = lcm(1, *(x.denominator for x in row))
        scale /= d
        a.append([int(x * d) for x in row])
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] * scale


def solve_rational(
    m: RatMatrix | Sequence[Sequence[int | Fraction]], v: Sequence[int | Fraction]
) -> tuple[Fraction, ...] | None:
    """Some rational solution of ``m x = v`` (free variables set to 0), or None."""
    mrows = list(m.rows if isinstance(m, RatMatrix) else m)
    if len(mrows) != len(v):
        raise ValueError("right-hand side length mismatch")
    rows = [list(map(Fraction, r)) + [Fraction(b)] for r, b in zip(mrows, v)]
    ncols = len(rows[0]) - 1 if rows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][c]
        rows[r] = [x / p for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    if any(row[-1] for row in rows[r:]):
        return None
    x = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        x[c] = rows[i][-1]
    return tuple(x)


def _column_hermite(a: list[list[int]]) -> tuple[list[list[int]], list[list[int]], list[int]]:
    """Column-style echelon form ``a @ u = h`` with ``u`` unimodular.

    Returns ``(h, u, pivot_cols)`` where ``pivot_cols[i]`` is the pivot column
    of the i-th pivot row (rows without a pivot are skipped).
    """
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    h = [row[:] for row in a]
    u = [[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)]

    def colop(dst: int, src: int, k: int) -> None:
        # column dst += k * column src
        for row in h:
            row[dst] += k * row[src]
        for row in u:
            row[dst] += k * row[src]

    def swap(c1: int, c2: int) -> None:
        for row in h:
            row[c1], row[c2] = row[c2], row[c1]
        for row in u:
            row[c1], row[c2] = row[c2], row[c1]

    pivot_rows: list[int] = []
    col = 0
    for i in range(nrows):
        if col >= ncols:
            break
        # Euclid on the entries h[i][col:]
        while True:
            nz = [c for c in range(col, ncols) if h[i][c]]
            if not nz:
                break
            c_min = min(nz, key=lambda c: abs(h[i][c]))
            if c_min != col:
                swap(col, c_min)
            done = True
            for c in range(col + 1, ncols):
                if h[i][c]:
                    colop(c, col, -(h[i][c] // h[i][col]))
                    if h[i][c]:
                        done = False
            if done:
                break
        if h[i][col]:
            if h[i][col] < 0:
                for row in h:
                    row[col] = -row[col]
                for row in u:
                    row[col] = -row[col]
            pivot_rows.append(i)
            col += 1
    return h, u, pivot_rows


def solve_integral(
    m: RatMatrix | Sequence[Sequence[int | Fraction]], v: Sequence[int | Fraction]
) -> tuple[int, ...] | None:
    """An integer vector ``x`` with ``m x = v``, or None when none exists."""
    rows = [list(map(Fraction, r)) for r in (m.rows if isinstance(m, RatMatrix) else m)]
    v = [Fraction(b) for b in v]
    if len(rows) != len(v):
        raise ValueError("right-hand side length mismatch")
    if not rows:
        return ()
    ncols = len(rows[0])
    a: list[list[int]] = []
    rhs: list[int] = []
    for row, b in zip(rows, v):
        d = lcm(b.denominator, *(x.denominator for x in row))
        a.append([int(x * d) for x in row])
        rhs.append(int(b * d))
    h, u, pivot_rows = _column_hermite(a)
    y = [0] * ncols
    k = 0
    for i in range(len(a)):
        acc = rhs[i] - sum(h[i][c] * y[c] for c in range(k))
        if k < len(pivot_rows) and pivot_rows[k] == i:
            q, rem = divmod(acc, h[i][k])
            if rem:
                return None
            y[k] = q
            k += 1
        elif acc:
            return None
    return tuple(sum(u[r][c] * y[c] for c in range(ncols)) for r in range(ncols))


def lattice_basis(generators: Sequence[Sequence[int | Fraction]]) -> list[tuple[Fraction, ...]]:
    """A Z-basis of the lattice spanned by rational ``generators`` (as rows)."""
    if not generators:
        return []
    gens = [[Fraction(x) for x in g] for g in generators]
    d = lcm(1, *(x.denominator for g in gens for x in g))
    # columns are generators so that column operations act on them
    a = [[int(g[j] * d) for g in gens] for j in range(len(gens[0]))]
    h, _, pivot_rows = _column_hermite(a)
    return [tuple(Fraction(h[j][k], d) for j in range(len(a))) for k in range(len(pivot_rows))]


def primitive_vector(v: Sequence[int | Fraction]) -> tuple[int, ...]:
    """The primitive integer vector on the ray through a nonzero rational ``v``."""
    v = [Fraction(x) for x in v]
    if not any(v):
        raise ValueError("the zero vector spans no ray")
    d = lcm(1, *(x.denominator for x in v))
    ints = [int(x * d) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    return tuple(x // g for x in ints)


def dot(a: Sequence[int | Fraction], b: Sequence[int | Fraction]) -> Fraction:
    return sum((Fraction(x) * y for x, y in zip(a, b)), Fraction(0))
