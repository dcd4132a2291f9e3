"""Satake parameters and the spherical functions omega_s of (SL_n(Q_p), SL_n(Z_p)).

For a parameter s, the quasi-character alpha_s on the diagonal torus is

    alpha_s(pi^h) = p^{-sum_k h_k (s_k + k - (n+1)/2)},      (k = 1..n)

and omega_s(g) is the U-average of psi(g^{-1} u), psi(u h n) = alpha_s(h).
Splitting U along the left cosets w_1 U, ..., w_L U of U g U turns the integral
into the finite average

    omega_s(g) = (1/L) sum_i alpha_s(pi^{hval(w_i^{-1})})

where hval is the valuation vector of the Iwasawa H-part.  The multiset of
those valuation vectors ("coset data") depends only on the Cartan label of g
and is cached; everything else here is built from it.
"""

from __future__ import annotations

import cmath
import itertools
import math
import threading
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Sequence

from .cosets import count_for, iter_hnf_cosets
from .errors import BadCoweightSum, ContextMismatch, InexactCoefficient, RankTooSmall
from .hecke import HeckeElement
from .padic import (
    GroupElement,
    PrimeContext,
    cartan_label,
    check_coweight,
    dominant_of,
    dual_coweight,
    iwasawa_valuation,
    mat_det,
    to_matrix,
)

DEFAULT_TOL = 1e-9


def _exact(x) -> bool:
    return isinstance(x, Rational)


def _mean(xs):
    total = sum(xs, Fraction(0)) if all(_exact(x) for x in xs) else sum(float(x) for x in xs)
    return total / len(xs)


@dataclass(frozen=True)
class SatakeParameter:
    """A representative s of [s] in C^n / C(1, ..., 1), normalised to sum zero.

    Real and imaginary parts are kept separately so that rational inputs stay
    exact (Fractions); floats are accepted for everything else.
    """

    ctx: PrimeContext
    re: tuple
    im: tuple

    def __post_init__(self):
        n = self.ctx.n
        re = tuple(_coerce(x) for x in self.re)
        im = tuple(_coerce(x) for x in self.im)
        if len(re) != n or len(im) != n:
            raise ValueError(f"parameter needs {n} real and {n} imaginary parts")
        mr, mi = _mean(re), _mean(im)
        object.__setattr__(self, "re", tuple(x - mr for x in re))
        object.__setattr__(self, "im", tuple(x - mi for x in im))

    @classmethod
    def from_complex(cls, ctx: PrimeContext, values: Sequence[complex]) -> "SatakeParameter":
        values = [complex(v) for v in values]
        return cls(ctx, tuple(v.real for v in values), tuple(v.imag for v in values))

    @property
    def exact(self) -> bool:
        return all(_exact(x) for x in self.re + self.im)

    def as_complex(self) -> tuple:
        return tuple(complex(float(a), float(b)) for a, b in zip(self.re, self.im))

    def permuted(self, w: Sequence[int]) -> "SatakeParameter":
        """w.s with (w.s)_k = s_{w[k]}."""
        return SatakeParameter(self.ctx, tuple(self.re[i] for i in w), tuple(self.im[i] for i in w))

    def __neg__(self) -> "SatakeParameter":
        return SatakeParameter(self.ctx, tuple(-x for x in self.re), tuple(-x for x in self.im))

    def conjugate(self) -> "SatakeParameter":
        return SatakeParameter(self.ctx, self.re, tuple(-x for x in self.im))

    def to_json(self) -> dict:
        return {"re": [_num_json(x) for x in self.re], "im": [_num_json(x) for x in self.im]}

    @classmethod
    def from_json(cls, ctx: PrimeContext, data: dict) -> "SatakeParameter":
        return cls(ctx, tuple(_num_parse(x) for x in data["re"]), tuple(_num_parse(x) for x in data["im"]))


def _coerce(x):
    if isinstance(x, bool):
        raise TypeError("bool is not a parameter coordinate")
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return float(x)


def _num_json(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return x


def _num_parse(x):
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, int):
        return Fraction(x)
    return float(x)


# ---------------------------------------------------------------------------
# distinguished parameters

def trivial_param(ctx: PrimeContext) -> SatakeParameter:
    """t with t_k = (n+1)/2 - k; omega_t is the constant function 1."""
    n = ctx.n
    return SatakeParameter(
        ctx, tuple(Fraction(n + 1, 2) - k for k in range(1, n + 1)), (Fraction(0),) * n
    )


def sequence_param(j: int, ctx: PrimeContext, allow_small_rank: bool = False) -> SatakeParameter:
    """s(j) = t + (i/j) r with r = (1, 0, ..., 0, 1)."""
    if ctx.n < 3 and not allow_small_rank:
        raise RankTooSmall("the s(j) family is only guaranteed bounded *-spherical for n >= 3")
    if int(j) != j or j < 1:
        raise ValueError("j must be a positive integer")
    t = trivial_param(ctx)
    r = [0] * ctx.n
    r[0] = r[-1] = 1
    return SatakeParameter(ctx, t.re, tuple(Fraction(x, j) for x in r))


def longest_element(n: int) -> tuple:
    """w_0, the order-reversing permutation."""
    return tuple(range(n - 1, -1, -1))


# ---------------------------------------------------------------------------
# alpha

def alpha_exponent(s: SatakeParameter, h: Sequence[int]) -> tuple:
    """(re, im) of E with alpha_s(pi^h) = p^E, kept exact for exact s."""
    n = s.ctx.n
    if len(h) != n:
        raise BadCoweightSum(f"{tuple(h)} has length {len(h)}, expected {n}")
    if sum(h) != 0:
        raise BadCoweightSum(f"{tuple(h)} does not sum to zero")
    half = Fraction(n + 1, 2)
    re = -sum(hk * (sk + k - half) for k, (hk, sk) in enumerate(zip(h, s.re), start=1))
    im = -sum(hk * sk for hk, sk in zip(h, s.im))
    return re, im


def alpha_eval(s: SatakeParameter, h: Sequence[int]) -> complex:
    re, im = alpha_exponent(s, h)
    logp = math.log(s.ctx.p)
    return cmath.exp(complex(float(re) * logp, float(im) * logp))


# ---------------------------------------------------------------------------
# coset data and omega

_data_cache: dict = {}
_data_lock = threading.Lock()


def coset_data(m, ctx: PrimeContext, cap: int | None = None) -> tuple:
    """((hval, multiplicity), ...) over the left cosets w U of U pi^m U, where
    hval is the Iwasawa valuation vector of w^{-1}.  Sorted, so deterministic."""
    m = check_coweight(m, ctx.n)
    key = (ctx, m)
    hit = _data_cache.get(key)
    if hit is not None:
        return hit
    counts = Counter(iwasawa_valuation(w.inverse()) for w in iter_hnf_cosets(m, ctx, cap))
    data = tuple(sorted(counts.items()))
    with _data_lock:
        return _data_cache.setdefault(key, data)


@lru_cache(maxsize=None)
def omega_at(s: SatakeParameter, m: tuple) -> complex:
    """omega_s(pi^m); m is converted to its dominant representative."""
    m = dominant_of(m)
    data = coset_data(m, s.ctx)
    total = sum(c for _, c in data)
    return sum(c * alpha_eval(s, h) for h, c in data) / total


def omega_eval(s: SatakeParameter, g: GroupElement) -> complex:
    if s.ctx != g.ctx:
        raise ContextMismatch(f"{s.ctx} vs {g.ctx}")
    return omega_at(s, cartan_label(g))


def omega_direct(s: SatakeParameter, g: GroupElement, cap: int | None = None) -> complex:
    """omega_s(g) computed from g's own double coset, without the label cache:
    Iwasawa-decompose w^{-1} for every coset representative w of U g U, after
    twisting the representatives by the Cartan factors of g."""
    from .padic import cartan_decompose

    from .cosets import left_coset_reps

    form = cartan_decompose(g)
    reps = left_coset_reps(form.m, g.ctx, cap).reps
    # w U <-> u1 w U is a bijection of the left cosets of U g U = u1 U pi^m U
    vals = [alpha_eval(s, iwasawa_valuation((form.u1 @ w).inverse())) for w in reps]
    return sum(vals) / len(vals)


# ---------------------------------------------------------------------------
# parameter equivalence and the *-condition

def _equal_mod_diagonal(a: SatakeParameter, b: SatakeParameter, tol: float) -> bool:
    if a.exact and b.exact:
        return a.re == b.re and a.im == b.im
    return all(abs(float(x) - float(y)) <= tol for x, y in zip(a.re + a.im, b.re + b.im))


def params_equivalent(s: SatakeParameter, s2: SatakeParameter, tol: float = DEFAULT_TOL) -> bool:
    """Is s2 - w s in (2 pi i / log p) M^ modulo the diagonal, for some w in S_n?

    Writing d = s2 - w s, membership means Re d is a multiple of (1, ..., 1)
    and every difference (Im d_k - Im d_l) log p / 2 pi is an integer.  When
    both parameters are exact rationals the second test can only succeed with
    the difference equal to 0, because log p / 2 pi is irrational
    (p^b = e^{2 pi a} would make e^{2 pi} algebraic), so the exact path
    compares imaginary parts exactly.
    """
    if s.ctx != s2.ctx:
        raise ContextMismatch(f"{s.ctx} vs {s2.ctx}")
    n = s.ctx.n
    exact = s.exact and s2.exact
    scale = math.log(s.ctx.p) / (2 * math.pi)
    for w in itertools.permutations(range(n)):
        ws = s.permuted(w)
        dre = [a - b for a, b in zip(s2.re, ws.re)]
        dim = [a - b for a, b in zip(s2.im, ws.im)]
        if exact:
            if all(x == dre[0] for x in dre) and all(x == dim[0] for x in dim):
                return True
            continue
        if any(abs(float(x - dre[0])) > tol for x in dre):
            continue
        ok = True
        for k in range(1, n):
            y = float(dim[k] - dim[0]) * scale
            if abs(y - round(y)) > tol:
                ok = False
                break
        if ok:
            return True
    return False


def is_star_param(s: SatakeParameter, tol: float = DEFAULT_TOL):
    """A permutation w with s = -w conj(s) (mod diagonal), or None.

    w_0 is tried first.  This is the sufficient condition for omega_s to be
    *-spherical; the numerical identity omega(g^{-1}) = conj(omega(g)) is the
    actual test (see :func:`star_defect`).
    """
    n = s.ctx.n
    target = -s.conjugate()
    w0 = longest_element(n)
    order = [w0] + [w for w in itertools.permutations(range(n)) if w != w0]
    for w in order:
        if _equal_mod_diagonal(s, target.permuted(w), tol):
            return w
    return None


def star_defect(s: SatakeParameter, coweights) -> float:
    """max |omega_s(pi^{-m}) - conj(omega_s(pi^m))| over the given coweights."""
    return max(
        abs(omega_at(s, tuple(-k for k in m)) - omega_at(s, tuple(m)).conjugate())
        for m in coweights
    )


# ---------------------------------------------------------------------------
# characters of the Hecke algebra

def tau_eval(s: SatakeParameter, f: HeckeElement, cap: int | None = None) -> complex:
    """tau_omega(f) = sum_m f(m) L(pi^m) omega_s(pi^{-m})."""
    if s.ctx != f.ctx:
        raise ContextMismatch(f"{s.ctx} vs {f.ctx}")
    return sum(
        complex(c) * count_for(m, f.ctx, cap) * omega_at(s, dual_coweight(m))
        for m, c in f.coeffs.items()
    )


# ---------------------------------------------------------------------------
# Satake transform

@dataclass(frozen=True)
class LaurentPolynomial:
    """sum_e c_e x^e with x_k = p^{-s_k}; exponent vectors e sum to zero.

    Coefficients are exact rationals.  The JSON form carries a separate
    ``half_p_power`` (coefficient times p^{half_p_power / 2}); on output it is
    always 0 because the p-power in front of each monomial is p^{-sum_k k e_k},
    an integer power, and is folded into the rational coefficient.
    """

    ctx: PrimeContext
    terms: dict

    def __post_init__(self):
        clean = {}
        for e, c in dict(self.terms).items():
            e = tuple(int(x) for x in e)
            if sum(e) != 0:
                raise BadCoweightSum(f"exponent {e} does not sum to zero")
            c = Fraction(c)
            if c:
                clean[e] = clean.get(e, 0) + c
        object.__setattr__(self, "terms", {e: c for e, c in clean.items() if c})

    def __eq__(self, other):
        if not isinstance(other, LaurentPolynomial):
            return NotImplemented
        return self.ctx == other.ctx and self.terms == other.terms

    def __hash__(self):
        return hash((self.ctx, frozenset(self.terms.items())))

    def __add__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return LaurentPolynomial(self.ctx, out)

    def __mul__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return LaurentPolynomial(self.ctx, out)

    def permuted(self, w: Sequence[int]) -> "LaurentPolynomial":
        """Substitute x_k -> x_{w[k]}."""
        n = self.ctx.n
        out = {}
        for e, c in self.terms.items():
            f = [0] * n
            for k in range(n):
                f[w[k]] = e[k]
            out[tuple(f)] = c
        return LaurentPolynomial(self.ctx, out)

    def is_w_invariant(self) -> bool:
        return all(self.permuted(w) == self for w in itertools.permutations(range(self.ctx.n)))

    def evaluate(self, s: SatakeParameter) -> complex:
        logp = math.log(self.ctx.p)
        total = 0j
        for e, c in self.terms.items():
            re = -sum(ek * sk for ek, sk in zip(e, s.re))
            im = -sum(ek * sk for ek, sk in zip(e, s.im))
            total += float(c) * cmath.exp(complex(float(re) * logp, float(im) * logp))
        return total

    def to_json(self) -> list:
        return [
            {
                "exp": list(e),
                "coeff_num": c.numerator,
                "coeff_den": c.denominator,
                "half_p_power": 0,
            }
            for e, c in sorted(self.terms.items())
        ]

    @classmethod
    def from_json(cls, ctx: PrimeContext, data) -> "LaurentPolynomial":
        terms: dict = {}
        for item in data:
            c = Fraction(item["coeff_num"], item.get("coeff_den", 1))
            half = int(item.get("half_p_power", 0))
            if half % 2:
                raise InexactCoefficient("odd half_p_power is not representable over Q")
            c *= Fraction(ctx.p) ** (half // 2)
            e = tuple(item["exp"])
            terms[e] = terms.get(e, 0) + c
        return cls(ctx, terms)


def satake_transform(f: HeckeElement, cap: int | None = None) -> LaurentPolynomial:
    """The polynomial P_f with P_f(x(s)) = tau_{omega_s}(f) for every s."""
    if not f.is_exact():
        raise InexactCoefficient("satake_transform needs rational coefficients")
    ctx = f.ctx
    p = Fraction(ctx.p)
    terms: dict = {}
    for m, c in f.coeffs.items():
        dual = dual_coweight(m)
        weight = Fraction(c) * Fraction(count_for(m, ctx, cap), count_for(dual, ctx, cap))
        for h, mult in coset_data(dual, ctx, cap):
            # alpha_s(pi^h) = p^{-sum_k k h_k} * prod_k x_k^{h_k}  (sum h = 0)
            power = -sum(k * hk for k, hk in enumerate(h, start=1))
            terms[h] = terms.get(h, 0) + weight * mult * p**power
    return LaurentPolynomial(ctx, terms)


# ---------------------------------------------------------------------------
# the functional equation, by exact finite averaging

def _sl_mod_reps(ctx: PrimeContext, level: int, limit: int):
    """Lifts to SL_n(Z_(p)) of every element of SL_n(Z/p^level)."""
    q = ctx.p**level
    n = ctx.n
    if q ** (n * n) > limit:
        raise ValueError(f"enumerating M_{n}(Z/{q}) exceeds limit {limit}")
    for flat in itertools.product(range(q), repeat=n * n):
        a = [list(flat[i * n:(i + 1) * n]) for i in range(n)]
        d = mat_det(to_matrix(a))
        if d % q != 1 % q:
            continue
        # scale the first row by 1/det: same residue mod p^level, det exactly 1
        a[0] = [Fraction(x) / d for x in a[0]]
        yield GroupElement._trusted(ctx, to_matrix(a))


def functional_equation_sides(
    s: SatakeParameter, g1: GroupElement, g2: GroupElement, limit: int = 10**6
) -> tuple:
    """(int_U omega(g1 u g2) du, omega(g1) omega(g2)).

    u -> omega(g1 u g2) is invariant under the level-N principal congruence
    subgroup once N >= m_1 - m_n for the label m of g2, so the integral is the
    exact average over SL_n(Z/p^N).  Labels are counted exactly and each
    distinct label is evaluated once.
    """
    m2 = cartan_label(g2)
    from .padic import cartan_decompose

    form = cartan_decompose(g2)
    # g1 u g2 = g1 u u1 pi^m u2 and u -> u u1 is a bijection of U
    level = max(m2[0] - m2[-1], 1)
    labels = Counter()
    total = 0
    a = GroupElement.pi(g2.ctx, form.m)
    for u in _sl_mod_reps(g1.ctx, level, limit):
        labels[cartan_label(g1 @ u @ a)] += 1
        total += 1
    lhs = sum(c * omega_at(s, m) for m, c in labels.items()) / total
    return lhs, omega_eval(s, g1) * omega_eval(s, g2)


# ---------------------------------------------------------------------------
# convergence along s(j)

def majorant(j: int, m, ctx: PrimeContext) -> float:
    """sum_l |p^{-i (m(l)_1 + m(l)_n) / j} - 1| over the coset data of pi^m."""
    logp = math.log(ctx.p)
    total = 0.0
    for h, mult in coset_data(dominant_of(m), ctx):
        theta = -(h[0] + h[-1]) * logp / j
        total += mult * abs(cmath.exp(1j * theta) - 1)
    return total


def convergence_profile(ctx: PrimeContext, coweights, js) -> list:
    """Per j: max_m |omega_{s(j)}(pi^m) - 1| and max_m of the majorant."""
    rows = []
    for j in js:
        s = sequence_param(j, ctx)
        dev = max(abs(omega_at(s, tuple(m)) - 1) for m in coweights)
        bound = max(majorant(j, m, ctx) for m in coweights)
        rows.append({"j": j, "max_deviation": dev, "majorant": bound})
    return rows


def clear_cache() -> None:
    omega_at.cache_clear()
    with _data_lock:
        _data_cache.clear()
