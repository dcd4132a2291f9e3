"""Exact rational matrices viewed p-adically: SL_n(Q_p) elements with rational
entries, p-adic valuations, and the Cartan (U pi^m U) and Iwasawa (U H N)
decompositions.

All arithmetic uses :class:`fractions.Fraction`; nothing is ever truncated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InvalidCoweight, NonUnimodular, SphlabError

INF = math.inf

Matrix = tuple  # tuple[tuple[Fraction, ...], ...]
Coweight = tuple  # tuple[int, ...]


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class PrimeContext:
    """The pair (p, n) fixing G = SL_n(Q_p) and U = SL_n(Z_p)."""

    p: int
    n: int

    def __post_init__(self):
        if not isinstance(self.p, int) or not is_prime(self.p):
            raise SphlabError(f"p={self.p!r} is not a prime")
        if not isinstance(self.n, int) or self.n < 2:
            raise SphlabError(f"rank n={self.n!r} must be an integer >= 2")


# ---------------------------------------------------------------------------
# scalars

def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        raise TypeError("floats are not exact; pass a Fraction, int or 'num/den' string")
    return Fraction(x)


def valuation(x, p) -> int | float:
    """p-adic valuation of a rational; ``math.inf`` for zero.

    ``p`` may be a prime or a :class:`PrimeContext`.
    """
    if isinstance(p, PrimeContext):
        p = p.p
    x = as_fraction(x)
    if x == 0:
        return INF
    return _ival(x.numerator, p) - _ival(x.denominator, p)


def _ival(a: int, p: int) -> int:
    a = abs(a)
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    return v


def unit_part(x: Fraction, p: int) -> Fraction:
    """x / p^val(x); has valuation 0."""
    return x / Fraction(p) ** valuation(x, p)


# ---------------------------------------------------------------------------
# plain exact matrices (tuples of tuples of Fraction)

def to_matrix(rows: Iterable[Iterable]) -> Matrix:
    return tuple(tuple(as_fraction(x) for x in row) for row in rows)


def identity(n: int) -> Matrix:
    one, zero = Fraction(1), Fraction(0)
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


def diagonal(entries: Sequence) -> Matrix:
    n = len(entries)
    zero = Fraction(0)
    return tuple(
        tuple(as_fraction(entries[i]) if i == j else zero for j in range(n)) for i in range(n)
    )


def pi_power(m: Sequence[int], p: int) -> Matrix:
    """diag(p^{m_1}, ..., p^{m_n})."""
    return diagonal([Fraction(p) ** k for k in m])


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    cols = tuple(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in cols) for row in a)


def mat_det(a: Matrix) -> Fraction:
    m = [list(row) for row in a]
    n = len(m)
    det = Fraction(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if m[i][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
            det = -det
        det *= m[k][k]
        for i in range(k + 1, n):
            f = m[i][k] / m[k][k]
            if f:
                m[i] = [x - f * y for x, y in zip(m[i], m[k])]
    return det


def is_upper_triangular(a: Matrix) -> bool:
    return all(a[i][j] == 0 for i in range(len(a)) for j in range(i))


def _upper_inv(a: Matrix) -> Matrix:
    # back substitution, column by column
    n = len(a)
    inv = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n - 1, -1, -1):
        inv[i][i] = 1 / a[i][i]
        for j in range(i + 1, n):
            acc = sum(a[i][k] * inv[k][j] for k in range(i + 1, j + 1))
            inv[i][j] = -acc / a[i][i]
    return tuple(tuple(row) for row in inv)


def mat_inv(a: Matrix) -> Matrix:
    n = len(a)
    if is_upper_triangular(a):
        if any(a[i][i] == 0 for i in range(n)):
            raise ZeroDivisionError("singular matrix")
        return _upper_inv(a)
    m = [list(row) + list(e) for row, e in zip(a, identity(n))]
    for k in range(n):
        piv = next((i for i in range(k, n) if m[i][k] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        m[k], m[piv] = m[piv], m[k]
        inv = 1 / m[k][k]
        m[k] = [x * inv for x in m[k]]
        for i in range(n):
            if i != k and m[i][k] != 0:
                f = m[i][k]
                m[i] = [x - f * y for x, y in zip(m[i], m[k])]
    return tuple(tuple(row[n:]) for row in m)


def is_integral(a: Matrix, p: int) -> bool:
    """All entries lie in Z_(p)."""
    return all(x.denominator % p != 0 for row in a for x in row)


def min_valuation(a: Matrix, p: int):
    return min(valuation(x, p) for row in a for x in row)


# ---------------------------------------------------------------------------
# group elements

@dataclass(frozen=True)
class GroupElement:
    """An element of SL_n(Q_p) with rational entries."""

    ctx: PrimeContext
    entries: Matrix

    def __post_init__(self):
        entries = to_matrix(self.entries)
        n = self.ctx.n
        if len(entries) != n or any(len(r) != n for r in entries):
            raise SphlabError(f"expected a {n}x{n} matrix")
        object.__setattr__(self, "entries", entries)
        if mat_det(entries) != 1:
            raise NonUnimodular(f"determinant {mat_det(entries)} != 1")

    @classmethod
    def _trusted(cls, ctx: PrimeContext, entries: Matrix) -> "GroupElement":
        # Skips the determinant check; only for products/inverses of checked elements.
        obj = object.__new__(cls)
        object.__setattr__(obj, "ctx", ctx)
        object.__setattr__(obj, "entries", entries)
        return obj

    @classmethod
    def identity(cls, ctx: PrimeContext) -> "GroupElement":
        return cls._trusted(ctx, identity(ctx.n))

    @classmethod
    def pi(cls, ctx: PrimeContext, m: Sequence[int]) -> "GroupElement":
        m = tuple(int(k) for k in m)
        if len(m) != ctx.n or sum(m) != 0:
            raise InvalidCoweight(f"{m} is not a sum-zero vector of length {ctx.n}")
        return cls._trusted(ctx, pi_power(m, ctx.p))

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        if self.ctx != other.ctx:
            from .errors import ContextMismatch

            raise ContextMismatch(f"{self.ctx} vs {other.ctx}")
        return GroupElement._trusted(self.ctx, mat_mul(self.entries, other.entries))

    def inverse(self) -> "GroupElement":
        return GroupElement._trusted(self.ctx, mat_inv(self.entries))

    def is_integral(self) -> bool:
        return is_integral(self.entries, self.ctx.p)

    def to_json(self) -> list:
        return matrix_to_json(self.entries)

    @classmethod
    def from_json(cls, ctx: PrimeContext, data) -> "GroupElement":
        return cls(ctx, matrix_from_json(data))


def matrix_to_json(a: Matrix) -> list:
    return [[f"{x.numerator}/{x.denominator}" for x in row] for row in a]


def matrix_from_json(data) -> Matrix:
    return to_matrix(data)


# ---------------------------------------------------------------------------
# coweights

def check_coweight(m: Sequence[int], n: int | None = None, dominant: bool = True) -> Coweight:
    m = tuple(m)
    if any(isinstance(k, bool) or int(k) != k for k in m):
        raise InvalidCoweight(f"{m} has non-integer entries")
    m = tuple(int(k) for k in m)
    if n is not None and len(m) != n:
        raise InvalidCoweight(f"{m} has length {len(m)}, expected {n}")
    if sum(m) != 0:
        raise InvalidCoweight(f"{m} does not sum to zero")
    if dominant and any(a < b for a, b in zip(m, m[1:])):
        raise InvalidCoweight(f"{m} is not dominant (non-increasing)")
    return m


def dominant_of(m: Sequence[int]) -> Coweight:
    return tuple(sorted(m, reverse=True))


def dual_coweight(m: Sequence[int]) -> Coweight:
    """Label of the inverse double coset: sort-descending(-m)."""
    return tuple(sorted((-k for k in m), reverse=True))


def dominant_coweights(n: int, spread: int) -> list[Coweight]:
    """All dominant sum-zero m in Z^n with m_1 - m_n <= spread, in a fixed order."""
    out = []

    def rec(prefix, remaining):
        if remaining == 0:
            if sum(prefix) == 0 and prefix[0] - prefix[-1] <= spread:
                out.append(tuple(prefix))
            return
        hi = prefix[-1] if prefix else spread
        lo = (prefix[0] - spread) if prefix else -spread
        for k in range(hi, lo - 1, -1):
            rec(prefix + [k], remaining - 1)

    rec([], n)
    return sorted(out, key=lambda m: (m[0] - m[-1], tuple(-k for k in m)))


# ---------------------------------------------------------------------------
# Cartan decomposition

@dataclass(frozen=True)
class CartanForm:
    u1: GroupElement
    m: Coweight
    u2: GroupElement

    def reconstruct(self) -> GroupElement:
        ctx = self.u1.ctx
        return self.u1 @ GroupElement.pi(ctx, self.m) @ self.u2


def _require_det_one(g) -> tuple[PrimeContext, Matrix]:
    if not isinstance(g, GroupElement):
        raise TypeError("expected a GroupElement")
    return g.ctx, g.entries


def _smith_bottom_up(a: Matrix, p: int, track: bool):
    """Valuation-pivoted diagonalisation by integral unimodular row/column ops.

    Pivots are placed from the bottom-right corner upwards, so the diagonal
    valuations come out non-increasing.  Returns (D, L, R) with L a R = D when
    ``track`` is set, else (D, None, None).
    """
    n = len(a)
    d = [list(r) for r in a]
    left = [list(r) for r in identity(n)] if track else None
    right = [list(r) for r in identity(n)] if track else None

    def swap_rows(m, i, k):
        # row_k <- row_i, row_i <- -row_k  (determinant preserving)
        m[i], m[k] = [-x for x in m[k]], m[i]

    def swap_cols(m, j, k):
        for row in m:
            row[j], row[k] = -row[k], row[j]

    for k in range(n - 1, -1, -1):
        best = None
        bv = INF
        if d[k][k] != 0:
            bv = valuation(d[k][k], p)
            best = (k, k)
        for i in range(k + 1):
            for j in range(k + 1):
                x = d[i][j]
                if x == 0:
                    continue
                v = valuation(x, p)
                if v < bv:
                    bv, best = v, (i, j)
        if best is None:
            raise NonUnimodular("singular matrix")
        i, j = best
        if i != k:
            swap_rows(d, i, k)
            if track:
                swap_rows(left, i, k)
        if j != k:
            swap_cols(d, j, k)
            if track:
                swap_cols(right, j, k)
        piv = d[k][k]
        for i in range(k):
            f = d[i][k] / piv
            if f:
                d[i] = [x - f * y for x, y in zip(d[i], d[k])]
                if track:
                    left[i] = [x - f * y for x, y in zip(left[i], left[k])]
        for j in range(k):
            f = d[k][j] / piv
            if f:
                for row in d:
                    row[j] -= f * row[k]
                if track:
                    for row in right:
                        row[j] -= f * row[k]
    return d, left, right


def cartan_label(g: GroupElement) -> Coweight:
    """The dominant coweight m with U g U = U pi^m U (no factors tracked)."""
    ctx, a = _require_det_one(g)
    d, _, _ = _smith_bottom_up(a, ctx.p, track=False)
    return tuple(valuation(d[k][k], ctx.p) for k in range(ctx.n))


def cartan_decompose(g: GroupElement) -> CartanForm:
    """g = u1 . pi^m . u2 with u1, u2 in SL_n(Z_(p)) and m dominant."""
    ctx, a = _require_det_one(g)
    if mat_det(a) != 1:
        raise NonUnimodular("cartan_decompose needs det 1")
    p = ctx.p
    d, left, right = _smith_bottom_up(a, p, track=True)
    m = tuple(valuation(d[k][k], p) for k in range(ctx.n))
    # strip the units off the diagonal; their product is 1 because det g = 1
    units = [unit_part(d[k][k], p) for k in range(ctx.n)]
    left = [[x / units[k] for x in left[k]] for k in range(ctx.n)]
    u1 = GroupElement._trusted(ctx, mat_inv(to_matrix(left)))
    u2 = GroupElement._trusted(ctx, mat_inv(to_matrix(right)))
    return CartanForm(u1, m, u2)


# ---------------------------------------------------------------------------
# Iwasawa decomposition

@dataclass(frozen=True)
class IwasawaForm:
    u: GroupElement
    hval: tuple
    hunit: tuple
    nmat: GroupElement

    def h(self) -> Matrix:
        p = self.u.ctx.p
        return diagonal([Fraction(p) ** v * e for v, e in zip(self.hval, self.hunit)])

    def reconstruct(self) -> GroupElement:
        ctx = self.u.ctx
        return self.u @ GroupElement._trusted(ctx, self.h()) @ self.nmat


def iwasawa_decompose(g: GroupElement) -> IwasawaForm:
    """g = u . h . n with u in SL_n(Z_(p)), h diagonal, n upper unitriangular."""
    ctx, a = _require_det_one(g)
    if mat_det(a) != 1:
        raise NonUnimodular("iwasawa_decompose needs det 1")
    p, n = ctx.p, ctx.n
    r = [list(row) for row in a]
    v = [list(row) for row in identity(n)]
    for k in range(n):
        best, bv = None, INF
        for i in range(k, n):
            if r[i][k] != 0:
                val = valuation(r[i][k], p)
                if val < bv:
                    bv, best = val, i
        if best is None:
            raise NonUnimodular("singular matrix")
        if best != k:
            for m in (r, v):
                m[best], m[k] = [-x for x in m[k]], m[best]
        piv = r[k][k]
        for i in range(k + 1, n):
            f = r[i][k] / piv
            if f:
                r[i] = [x - f * y for x, y in zip(r[i], r[k])]
                v[i] = [x - f * y for x, y in zip(v[i], v[k])]
    diag = [r[k][k] for k in range(n)]
    hval = tuple(valuation(x, p) for x in diag)
    hunit = tuple(unit_part(x, p) for x in diag)
    nmat = tuple(tuple(x / diag[i] for x in r[i]) for i in range(n))
    u = mat_inv(to_matrix(v))
    return IwasawaForm(
        GroupElement._trusted(ctx, u), hval, hunit, GroupElement._trusted(ctx, nmat)
    )


def iwasawa_valuation(g: GroupElement) -> tuple:
    """Only the valuation vector of the H-part; what spherical functions need.

    An upper-triangular g is already h.n with u = 1, so its diagonal
    valuations are returned without running the elimination.
    """
    a = g.entries
    if is_upper_triangular(a):
        return tuple(valuation(a[k][k], g.ctx.p) for k in range(g.ctx.n))
    return iwasawa_decompose(g).hval
