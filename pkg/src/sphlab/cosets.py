"""Left cosets inside a double coset U pi^m U.

Production enumeration goes through column Hermite normal forms of lattices:
the left cosets w U in U pi^m U correspond to lattices w Z_p^n, and after the
shift a = m - m_n these are exactly the sublattices of Z_p^n with elementary
divisors p^a.  :func:`quotient_oracle_count` counts the same set by an orbit
computation in (Z/p^N)^n that shares no code with the HNF path.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import ResourceLimit
from .padic import (
    Coweight,
    GroupElement,
    PrimeContext,
    cartan_label,
    check_coweight,
    dominant_of,
)

DEFAULT_COSET_CAP = 10**6
DEFAULT_GROUP_CAP = 10**12

_default_cap = DEFAULT_COSET_CAP


def set_default_cap(cap: int | None) -> None:
    """Coset cap used whenever a caller passes ``cap=None``."""
    global _default_cap
    _default_cap = DEFAULT_COSET_CAP if cap is None else int(cap)


def get_default_cap() -> int:
    return _default_cap

_cache: dict = {}
_cache_lock = threading.Lock()


@dataclass(frozen=True)
class CosetList:
    ctx: PrimeContext
    m: Coweight
    reps: tuple

    @property
    def count(self) -> int:
        return len(self.reps)

    def to_json(self) -> dict:
        return {
            "p": self.ctx.p,
            "n": self.ctx.n,
            "m": list(self.m),
            "count": self.count,
            "reps": [w.to_json() for w in self.reps],
        }

    def check_disjoint(self) -> bool:
        """w_i^{-1} w_j is non-integral for every i != j (quadratic in the count)."""
        invs = [w.inverse() for w in self.reps]
        for i, wi in enumerate(invs):
            for j in range(len(self.reps)):
                if i != j and (wi @ self.reps[j]).is_integral():
                    return False
        return True


# ---------------------------------------------------------------------------
# HNF enumeration

def _compositions(total: int, parts: int, cap: int):
    """Non-negative integer vectors of length ``parts`` summing to ``total``,
    every entry at most ``cap``."""
    if parts == 1:
        if total <= cap:
            yield (total,)
        return
    for first in range(min(total, cap), -1, -1):
        for rest in _compositions(total - first, parts - 1, cap):
            yield (first,) + rest


def _int_det(a):
    # Bareiss fraction-free elimination on a small integer matrix.
    m = [list(r) for r in a]
    n = len(m)
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def _vp(x: int, p: int) -> float:
    if x == 0:
        return float("inf")
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def elementary_divisor_exponents(a, p: int) -> tuple:
    """Exponents e_1 >= ... >= e_n of the elementary divisors over Z_(p) of a
    nonsingular integer matrix, from the determinantal divisors
    D_k = min valuation of the k x k minors."""
    n = len(a)
    dets = [0]
    for k in range(1, n + 1):
        dets.append(_determinantal_divisor(a, p, k, floor=dets[-1]))
    ascending = [dets[k] - dets[k - 1] for k in range(1, n + 1)]
    return tuple(sorted(ascending, reverse=True))


def _determinantal_divisor(a, p, k, floor=0):
    # D_k >= D_{k-1} for integer matrices, so hitting ``floor`` ends the scan
    n = len(a)
    best = float("inf")
    if k == 1:
        for row in a:
            for x in row:
                v = _vp(x, p)
                if v < best:
                    best = v
                    if best == floor:
                        return best
        return best
    for rows in itertools.combinations(range(n), k):
        for cols in itertools.combinations(range(n), k):
            v = _vp(_int_det([[a[r][c] for c in cols] for r in rows]), p)
            if v < best:
                best = v
                if best == floor:
                    return best
    return best


def _has_divisors(a, p: int, target_d: Sequence[int]) -> bool:
    """Do the determinantal divisors D_1..D_{n-1} match ``target_d``?  (D_n is
    fixed by the diagonal, so it is not rechecked.)"""
    prev = 0
    for k, want in enumerate(target_d, start=1):
        if _determinantal_divisor(a, p, k, floor=prev) != want:
            return False
        prev = want
    return True


def _hnf_matrices(diag_exps: Sequence[int], p: int):
    """All upper-triangular integer HNFs with diagonal p^{d_k}; entry (k, l),
    k < l, ranges over [0, p^{d_k})."""
    n = len(diag_exps)
    slots = [(k, l) for k in range(n) for l in range(k + 1, n)]
    ranges = [range(p ** diag_exps[k]) for k, _ in slots]
    for values in itertools.product(*ranges):
        a = [[0] * n for _ in range(n)]
        for k in range(n):
            a[k][k] = p ** diag_exps[k]
        for (k, l), x in zip(slots, values):
            a[k][l] = x
        yield a


_ZERO = Fraction(0)


def iter_hnf_cosets(m, ctx: PrimeContext, cap: int | None = None):
    """Yield the coset representatives of U pi^m U one at a time.

    Each is p^{m_n} A for an integer HNF A whose elementary divisors are p^a,
    a = m - m_n.  Raises ResourceLimit once more than ``cap`` have been produced.
    """
    m = check_coweight(m, ctx.n)
    cap = _default_cap if cap is None else cap
    p, n = ctx.p, ctx.n
    shift = m[-1]
    a = tuple(k - shift for k in m)
    ascending = sorted(a)
    target_d = [sum(ascending[:k]) for k in range(1, n)]
    scale = Fraction(p) ** shift
    produced = 0
    for d in _compositions(sum(a), n, a[0]):
        for mat in _hnf_matrices(d, p):
            if not _has_divisors(mat, p, target_d):
                continue
            produced += 1
            if produced > cap:
                raise ResourceLimit(f"more than {cap} cosets in U pi^{m} U")
            yield GroupElement._trusted(
                ctx, tuple(tuple(scale * x if x else _ZERO for x in row) for row in mat)
            )


def left_coset_reps(m: Sequence[int], ctx: PrimeContext, cap: int | None = None) -> CosetList:
    """Representatives w_1..w_L with U pi^m U = disjoint union of w_i U."""
    m = check_coweight(m, ctx.n)
    cap = _default_cap if cap is None else cap
    key = (ctx, m)
    cached = _cache.get(key)
    if cached is None:
        reps = tuple(iter_hnf_cosets(m, ctx, cap))
        cached = CosetList(ctx, m, reps)
        with _cache_lock:
            cached = _cache.setdefault(key, cached)
    if cached.count > cap:
        raise ResourceLimit(f"{cached.count} cosets in U pi^{m} U exceed cap {cap}")
    return cached


def coset_count(g: GroupElement, cap: int | None = None) -> int:
    """L(g): the number of left cosets in U g U."""
    return left_coset_reps(cartan_label(g), g.ctx, cap).count


_counts: dict = {}


def count_for(m: Sequence[int], ctx: PrimeContext, cap: int | None = None) -> int:
    """L(pi^m) for any sum-zero m (not necessarily dominant).

    Streams the enumeration instead of materialising the representatives.
    """
    m = check_coweight(dominant_of(m), ctx.n)
    key = (ctx, m)
    hit = _counts.get(key)
    if hit is None:
        cached = _cache.get(key)
        hit = cached.count if cached is not None else sum(1 for _ in iter_hnf_cosets(m, ctx, cap))
        with _cache_lock:
            _counts[key] = hit
    limit = _default_cap if cap is None else cap
    if hit > limit:
        raise ResourceLimit(f"{hit} cosets in U pi^{m} U exceed cap {limit}")
    return hit


def clear_cache() -> None:
    with _cache_lock:
        _cache.clear()
        _counts.clear()


# ---------------------------------------------------------------------------
# finite-quotient oracle

def sl_order(n: int, p: int, level: int) -> int:
    """|SL_n(Z/p^level)|."""
    if level == 0:
        return 1
    order = p ** (n * (n - 1) // 2)
    for k in range(2, n + 1):
        order *= p**k - 1
    return order * p ** ((level - 1) * (n * n - 1))


def quotient_oracle_count(
    m: Sequence[int], ctx: PrimeContext, group_cap: int | None = None
) -> int:
    """[U : S] for S = {u in U : val(u_kl) >= max(0, m_l - m_k)}.

    S is the stabiliser in U of the lattice with basis p^{m_1 - m_k} e_k, and
    contains the level-N principal congruence subgroup, N = m_1 - m_n.  So the
    index is the size of that lattice's orbit under SL_n(Z/p^N), which is
    generated by the elementary transvections I + E_kl.  Lattices are stored
    as frozensets of their residue vectors mod p^N.
    """
    m = check_coweight(m, ctx.n)
    p, n = ctx.p, ctx.n
    level = m[0] - m[-1]
    if level == 0:
        return 1
    group_cap = DEFAULT_GROUP_CAP if group_cap is None else group_cap
    order = sl_order(n, p, level)
    if order > group_cap:
        raise ResourceLimit(f"|SL_{n}(Z/{p}^{level})| = {order} exceeds cap {group_cap}")
    q = p**level
    steps = [p ** (m[0] - mk) for mk in m]
    start = frozenset(itertools.product(*(range(0, q, s) for s in steps)))
    gens = [(k, l) for k in range(n) for l in range(n) if k != l]

    def act(lattice, k, l):
        out = []
        for x in lattice:
            y = list(x)
            y[k] = (y[k] + y[l]) % q
            out.append(tuple(y))
        return frozenset(out)

    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for lat in frontier:
            for k, l in gens:
                img = act(lat, k, l)
                if img not in seen:
                    seen.add(img)
                    nxt.append(img)
        frontier = nxt
    return len(seen)

