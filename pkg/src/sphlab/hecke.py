"""The spherical Hecke algebra H(G, U) of bi-U-invariant, finitely supported
functions, in the basis of double-coset characteristic functions.

A :class:`HeckeElement` stores one coefficient per dominant coweight m: its
value on U pi^m U.  Structure constants are exact integers; coefficients may be
ints, Fractions or complex floats and are multiplied by those integers only,
so exact inputs give exact outputs.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Complex, Rational
from typing import Mapping

from .cosets import count_for, left_coset_reps
from .errors import ContextMismatch, SphlabError
from .padic import (
    GroupElement,
    PrimeContext,
    cartan_label,
    check_coweight,
    dual_coweight,
)


@dataclass(frozen=True)
class HeckeElement:
    ctx: PrimeContext
    coeffs: Mapping = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for m, c in dict(self.coeffs).items():
            m = check_coweight(m, self.ctx.n)
            if c != 0:
                clean[m] = c
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def basis(cls, ctx: PrimeContext, m) -> "HeckeElement":
        """chi_{U pi^m U}."""
        return cls(ctx, {tuple(m): 1})

    @classmethod
    def unit(cls, ctx: PrimeContext) -> "HeckeElement":
        """chi_U, the identity p_0 of the algebra."""
        return cls(ctx, {(0,) * ctx.n: 1})

    def __getitem__(self, m) -> complex:
        return self.coeffs.get(tuple(m), 0)

    def __eq__(self, other):
        if not isinstance(other, HeckeElement):
            return NotImplemented
        return self.ctx == other.ctx and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.ctx, frozenset(self.coeffs.items())))

    def __add__(self, other: "HeckeElement") -> "HeckeElement":
        _same_ctx(self, other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0) + c
        return HeckeElement(self.ctx, out)

    def __sub__(self, other: "HeckeElement") -> "HeckeElement":
        return self + other.scale(-1)

    def scale(self, z) -> "HeckeElement":
        return HeckeElement(self.ctx, {m: z * c for m, c in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, HeckeElement):
            return convolve(self, other)
        return self.scale(other)

    def __rmul__(self, z):
        return self.scale(z)

    @property
    def support(self) -> list:
        return sorted(self.coeffs)

    def is_exact(self) -> bool:
        return all(isinstance(c, Rational) for c in self.coeffs.values())

    def almost_equal(self, other: "HeckeElement", tol: float = 1e-9) -> bool:
        _same_ctx(self, other)
        keys = set(self.coeffs) | set(other.coeffs)
        return all(abs(self[m] - other[m]) <= tol for m in keys)

    def to_json(self) -> list:
        out = []
        for m in self.support:
            c = complex(self.coeffs[m])
            out.append({"m": list(m), "re": c.real, "im": c.imag})
        return out

    @classmethod
    def from_json(cls, ctx: PrimeContext, data) -> "HeckeElement":
        coeffs = {}
        for item in data:
            re, im = item.get("re", 0), item.get("im", 0)
            c = _exact_or_complex(re, im)
            coeffs[tuple(item["m"])] = c
        return cls(ctx, coeffs)


def _exact_or_complex(re, im):
    if im in (0, 0.0) and isinstance(re, (int, str)):
        return Fraction(re)
    if im in (0, 0.0) and isinstance(re, float) and re.is_integer():
        return int(re)
    return complex(float(Fraction(re)) if isinstance(re, str) else re, im)


def _same_ctx(a: HeckeElement, b: HeckeElement) -> None:
    if a.ctx != b.ctx:
        raise ContextMismatch(f"{a.ctx} vs {b.ctx}")


# ---------------------------------------------------------------------------
# structure constants

_sc_cache: dict = {}
_sc_lock = threading.Lock()


def structure_constants(m1, m2, ctx: PrimeContext, cap: int | None = None) -> dict:
    """chi_{U pi^m1 U} * chi_{U pi^m2 U} = sum_{m3} c^{m3} chi_{U pi^m3 U}.

    c^{m3} = #{i : w_i^{-1} pi^{m3} in U pi^{m2} U} over left coset
    representatives w_i of U pi^{m1} U.  The support is read off from the
    Cartan labels of pi^{m1} v_j, v_j running over cosets of U pi^{m2} U.
    """
    m1 = check_coweight(m1, ctx.n)
    m2 = check_coweight(m2, ctx.n)
    key = (ctx, m1, m2)
    hit = _sc_cache.get(key)
    if hit is not None:
        return dict(hit)
    reps1 = left_coset_reps(m1, ctx, cap).reps
    reps2 = left_coset_reps(m2, ctx, cap).reps
    a = GroupElement.pi(ctx, m1)
    support = sorted({cartan_label(a @ v) for v in reps2}, reverse=True)
    invs = [w.inverse() for w in reps1]
    out = {}
    for m3 in support:
        g = GroupElement.pi(ctx, m3)
        c = sum(1 for wi in invs if cartan_label(wi @ g) == m2)
        if c:
            out[m3] = c
    with _sc_lock:
        _sc_cache.setdefault(key, out)
    return dict(out)


def convolve(f1: HeckeElement, f2: HeckeElement, cap: int | None = None) -> HeckeElement:
    _same_ctx(f1, f2)
    out: dict = {}
    for m1, c1 in f1.coeffs.items():
        for m2, c2 in f2.coeffs.items():
            for m3, c in structure_constants(m1, m2, f1.ctx, cap).items():
                out[m3] = out.get(m3, 0) + c * c1 * c2
    return HeckeElement(f1.ctx, out)


# ---------------------------------------------------------------------------
# involution, modular function, L^1 norm

def modular_function(g: GroupElement, cap: int | None = None) -> Fraction:
    """Delta(g) = L(g) / L(g^{-1})."""
    m = cartan_label(g)
    return Fraction(count_for(m, g.ctx, cap), count_for(dual_coweight(m), g.ctx, cap))


def involve(f: HeckeElement, cap: int | None = None) -> HeckeElement:
    """f*(g) = Delta(g^{-1}) conj(f(g^{-1}))."""
    out = {}
    for m, c in f.coeffs.items():
        target = dual_coweight(m)
        delta = modular_function(GroupElement.pi(f.ctx, tuple(-k for k in target)), cap)
        if delta != 1:
            raise SphlabError(f"modular function {delta} != 1 at {target}; G should be unimodular")
        out[target] = _conj(c)
    return HeckeElement(f.ctx, out)


def _conj(c):
    if isinstance(c, Rational):
        return c
    if isinstance(c, Complex):
        return complex(c).conjugate()
    raise TypeError(f"unsupported coefficient {c!r}")


def l1_norm(f: HeckeElement, cap: int | None = None):
    """sum_m |f(m)| L(pi^m).  Exact when the coefficients are."""
    return sum(abs(c) * count_for(m, f.ctx, cap) for m, c in f.coeffs.items())


def mass(sc: Mapping, ctx: PrimeContext, cap: int | None = None) -> int:
    """sum_{m3} c^{m3} L(pi^{m3}) for a structure-constant map."""
    return sum(c * count_for(m3, ctx, cap) for m3, c in sc.items())


def clear_cache() -> None:
    with _sc_lock:
        _sc_cache.clear()

