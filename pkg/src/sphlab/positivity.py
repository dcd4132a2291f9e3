"""Positive-definiteness tests for spherical functions.

A function omega is positive definite when every finite Gram matrix
[omega(g_j^{-1} g_k)] is positive semidefinite.  This module builds those
matrices, gives a PSD verdict with a witness vector, searches for a
non-positive-definite omega_{s(j)} at n >= 3, and certifies unboundedness of
omega_{(sigma, -sigma)} at n = 2.

The eigen-decomposition only *finds* a witness.  What makes a NOT_PSD
certificate valid is the Rayleigh quotient of the stored witness against a
Gram matrix recomputed from scratch, and :func:`verify_certificate` checks
that with plain complex arithmetic.
"""

from __future__ import annotations

import itertools
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cosets import left_coset_reps
from .errors import DimensionMismatch, NonHermitian, NotFound, SphlabError
from .hecke import HeckeElement
from .padic import (
    GroupElement,
    PrimeContext,
    cartan_label,
    dominant_coweights,
    dual_coweight,
)
from .spherical import (
    SatakeParameter,
    coset_data,
    is_star_param,
    omega_at,
    omega_direct,
    omega_eval,
    sequence_param,
    tau_eval,
)

DEFAULT_PSD_TOL = 1e-6
PSD_MARGIN = 1e-9

PSD, NOT_PSD, INCONCLUSIVE = "PSD", "NOT_PSD", "INCONCLUSIVE"


# ---------------------------------------------------------------------------
# Gram matrices


@dataclass
class GramCertificate:
    s: SatakeParameter
    elements: list
    gram: list
    hermitian_defect: float
    min_eigenvalue: float | None = None
    witness: list | None = None
    verdict: str | None = None
    meta: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.elements)

    def to_json(self) -> dict:
        ctx = self.s.ctx
        return {
            "p": ctx.p,
            "n": ctx.n,
            "s": self.s.to_json(),
            "elements": [g.to_json() for g in self.elements],
            "gram": [[_cjson(x) for x in row] for row in self.gram],
            "hermitian_defect": self.hermitian_defect,
            "min_eigenvalue": self.min_eigenvalue,
            "witness": None if self.witness is None else [_cjson(x) for x in self.witness],
            "verdict": self.verdict,
            "meta": dict(self.meta),
        }

    @classmethod
    def from_json(cls, data: dict) -> "GramCertificate":
        ctx = PrimeContext(int(data["p"]), int(data["n"]))
        witness = data.get("witness")
        return cls(
            s=SatakeParameter.from_json(ctx, data["s"]),
            elements=[GroupElement.from_json(ctx, g) for g in data["elements"]],
            gram=[[_cparse(x) for x in row] for row in data["gram"]],
            hermitian_defect=float(data.get("hermitian_defect", 0.0)),
            min_eigenvalue=data.get("min_eigenvalue"),
            witness=None if witness is None else [_cparse(x) for x in witness],
            verdict=data.get("verdict"),
            meta=dict(data.get("meta", {})),
        )


def _cjson(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _cparse(x) -> complex:
    if isinstance(x, (list, tuple)):
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, dict):
        return complex(float(x.get("re", 0.0)), float(x.get("im", 0.0)))
    return complex(x)


def hermitian_defect(mat) -> float:
    n = len(mat)
    return max(
        (abs(mat[j][k] - complex(mat[k][j]).conjugate()) for j in range(n) for k in range(n)),
        default=0.0,
    )


def _check_elements(s: SatakeParameter, elements) -> list:
    elements = list(elements)
    if not elements:
        raise SphlabError("need at least one group element")
    for g in elements:
        if g.ctx != s.ctx:
            raise DimensionMismatch(f"element over {g.ctx}, parameter over {s.ctx}")
    return elements


def gram_matrix(s: SatakeParameter, elements: Sequence[GroupElement]) -> GramCertificate:
    """[omega_s(g_j^{-1} g_k)], symmetrised when s passes the *-test.

    The defect is measured before symmetrising, so it still reports how far the
    raw values are from Hermitian.
    """
    elements = _check_elements(s, elements)
    invs = [g.inverse() for g in elements]
    labels = [[cartan_label(gi @ gk) for gk in elements] for gi in invs]
    gram = [[omega_at(s, m) for m in row] for row in labels]
    defect = hermitian_defect(gram)
    if is_star_param(s) is not None:
        size = len(gram)
        gram = [
            [(gram[j][k] + gram[k][j].conjugate()) / 2 for k in range(size)] for j in range(size)
        ]
    return GramCertificate(s, elements, gram, defect)


def rayleigh(gram, z) -> complex:
    """z^* G z / z^* z."""
    num = sum(
        complex(z[j]).conjugate() * gram[j][k] * z[k]
        for j in range(len(z))
        for k in range(len(z))
    )
    den = sum(abs(x) ** 2 for x in z)
    return num / den


@dataclass(frozen=True)
class Verdict:
    kind: str
    min_eigenvalue: float
    witness: tuple | None = None


def psd_verdict(cert_or_matrix, tol: float = DEFAULT_PSD_TOL, margin: float = PSD_MARGIN) -> Verdict:
    """PSD / NOT_PSD / INCONCLUSIVE for a Hermitian matrix.

    NOT_PSD when the smallest eigenvalue is below -tol (its eigenvector is the
    witness).  PSD when it is at least -margin, which admits the exact zero
    eigenvalues of rank-deficient Gram matrices.  Anything in between is
    INCONCLUSIVE.
    """
    gram = cert_or_matrix.gram if isinstance(cert_or_matrix, GramCertificate) else cert_or_matrix
    defect = hermitian_defect(gram)
    if defect > tol:
        raise NonHermitian(f"Hermitian defect {defect:.3g} exceeds tol {tol}")
    a = np.array(gram, dtype=complex)
    a = (a + a.conj().T) / 2
    vals, vecs = np.linalg.eigh(a)
    lam = float(vals[0])
    if lam < -tol:
        v = vecs[:, 0]
        # fix the phase so the largest coordinate is real and positive
        big = int(np.argmax(np.abs(v)))
        v = v * (abs(v[big]) / v[big])
        return Verdict(NOT_PSD, lam, tuple(complex(x) for x in v))
    if lam >= -margin:
        return Verdict(PSD, lam)
    return Verdict(INCONCLUSIVE, lam)


def certify(
    s: SatakeParameter, elements: Sequence[GroupElement], tol: float = DEFAULT_PSD_TOL
) -> GramCertificate:
    cert = gram_matrix(s, elements)
    v = psd_verdict(cert, tol)
    cert.verdict, cert.min_eigenvalue = v.kind, v.min_eigenvalue
    cert.witness = list(v.witness) if v.witness is not None else None
    return cert


def verify_certificate(cert: GramCertificate, tol: float = DEFAULT_PSD_TOL) -> dict:
    """Recompute every Gram entry from the stored inputs and re-derive the
    Rayleigh quotient of the stored witness.

    Entries go through :func:`omega_direct` on the product g_j^{-1} g_k, so the
    label cache used to build the certificate is not trusted.
    """
    s, elements = cert.s, cert.elements
    size = len(elements)
    fresh = [[0j] * size for _ in range(size)]
    for j in range(size):
        gj_inv = elements[j].inverse()
        for k in range(size):
            fresh[j][k] = omega_direct(s, gj_inv @ elements[k])
    entry_err = max(abs(fresh[j][k] - cert.gram[j][k]) for j in range(size) for k in range(size))
    report = {
        "size": size,
        "max_entry_error": entry_err,
        "hermitian_defect": hermitian_defect(fresh),
    }
    if cert.witness is None:
        v = psd_verdict(fresh, tol)
        report["verdict"] = v.kind
        report["min_eigenvalue"] = v.min_eigenvalue
        report["ok"] = v.kind == cert.verdict
        return report
    if len(cert.witness) != size:
        raise DimensionMismatch("witness length differs from the element count")
    q = rayleigh(fresh, cert.witness)
    report["rayleigh"] = q.real
    report["rayleigh_imag"] = q.imag
    report["ok"] = bool(q.real < -tol / 2 and abs(q.imag) <= tol and entry_err <= 1e-9)
    report["verdict"] = NOT_PSD if report["ok"] else INCONCLUSIVE
    return report


# ---------------------------------------------------------------------------
# the quadratic form and its algebraic counterpart


def inner_form(s: SatakeParameter, elements: Sequence[GroupElement], z: Sequence[complex]) -> complex:
    """sum_{j,k} omega_s(g_j^{-1} g_k) conj(z_j) z_k."""
    elements = _check_elements(s, elements)
    if len(elements) != len(z):
        raise DimensionMismatch(f"{len(elements)} elements but {len(z)} coefficients")
    invs = [g.inverse() for g in elements]
    return sum(
        complex(z[j]).conjugate() * complex(z[k]) * omega_eval(s, invs[j] @ elements[k])
        for j in range(len(z))
        for k in range(len(z))
    )


def inner_form_element(
    ctx: PrimeContext, elements: Sequence[GroupElement], z: Sequence[complex]
) -> HeckeElement:
    """The bi-U-invariant element F with tau_omega(F) equal to the form above.

    Averaging <h, h> for h = sum_k z_k (g_k p_0) over U on both sides gives
    sum_{j,k} conj(z_j) z_k chi_{U x U} / L(x) with x = g_k^{-1} g_j; the
    character then picks out omega(x^{-1}) = omega(g_j^{-1} g_k).
    """
    from .cosets import count_for

    if len(elements) != len(z):
        raise DimensionMismatch(f"{len(elements)} elements but {len(z)} coefficients")
    coeffs: dict = {}
    for (gj, zj), (gk, zk) in itertools.product(zip(elements, z), repeat=2):
        m = cartan_label(gk.inverse() @ gj)
        w = complex(zj).conjugate() * complex(zk) / count_for(m, ctx)
        coeffs[m] = coeffs.get(m, 0) + w
    return HeckeElement(ctx, coeffs)


def inner_form_algebraic(
    s: SatakeParameter, elements: Sequence[GroupElement], z: Sequence[complex]
) -> complex:
    return tau_eval(s, inner_form_element(s.ctx, elements, z))


# ---------------------------------------------------------------------------
# witness search at n >= 3


@dataclass(frozen=True)
class SearchConfig:
    j_min: int = 1
    j_max: int = 16
    max_size: int = 8
    trials: int = 64
    seed: int = 1
    spread: int = 2
    tol: float = DEFAULT_PSD_TOL
    threads: int = 1
    coset_cap: int | None = None


def element_pool(ctx: PrimeContext, spread: int = 2, seed: int = 1, cap: int | None = None) -> list:
    """e, then pi^m for the dominant grid, then their coset-representative
    twists in a seeded order.  Every twist w lies in U pi^m U."""
    grid = dominant_coweights(ctx.n, spread)
    pool = [GroupElement.pi(ctx, m) for m in grid]
    seen = {g.entries for g in pool}
    rng = random.Random(f"pool:{seed}:{ctx.p}:{ctx.n}:{spread}")
    twists = []
    for m in grid:
        for w in left_coset_reps(m, ctx, cap).reps:
            if w.entries not in seen:
                seen.add(w.entries)
                twists.append(w)
    rng.shuffle(twists)
    return pool + twists


def _candidate(pool_size: int, size: int, seed: int, j: int, trial: int) -> tuple:
    # index 0 of the pool is the identity and is always included
    rng = random.Random(f"set:{seed}:{j}:{size}:{trial}")
    rest = sorted(rng.sample(range(1, pool_size), size - 1))
    return (0, *rest)


def find_nonpd_witness(ctx: PrimeContext, config: SearchConfig | None = None) -> GramCertificate:
    """First NOT_PSD certificate in a fixed candidate order.

    Candidates run over set size (2..max_size), then j, then trial.  Each
    candidate's index set is drawn from its own seeded generator, so the
    order, and therefore the answer, does not depend on ``threads``.
    """
    config = config or SearchConfig()
    if ctx.n < 3:
        raise SphlabError("the witness search needs n >= 3")
    pool = element_pool(ctx, config.spread, config.seed, config.coset_cap)
    js = list(range(config.j_min, config.j_max + 1))
    params = {j: sequence_param(j, ctx) for j in js}
    lowest = {j: None for j in js}
    tried = 0

    def evaluate(key):
        size, j, trial = key
        idx = _candidate(len(pool), size, config.seed, j, trial)
        cert = gram_matrix(params[j], [pool[i] for i in idx])
        return key, idx, cert, psd_verdict(cert, config.tol)

    executor = ThreadPoolExecutor(config.threads) if config.threads > 1 else None
    try:
        for size in range(2, min(config.max_size, len(pool)) + 1):
            keys = [(size, j, t) for j in js for t in range(config.trials)]
            results = executor.map(evaluate, keys) if executor else map(evaluate, keys)
            for (size_, j, trial), idx, cert, v in results:
                tried += 1
                if lowest[j] is None or v.min_eigenvalue < lowest[j]:
                    lowest[j] = v.min_eigenvalue
                if v.kind == NOT_PSD:
                    cert.verdict, cert.min_eigenvalue = v.kind, v.min_eigenvalue
                    cert.witness = list(v.witness)
                    cert.meta = {
                        "j": j,
                        "seed": config.seed,
                        "size": size_,
                        "trial": trial,
                        "pool_indices": list(idx),
                        "candidates_tried": tried,
                    }
                    return cert
    finally:
        if executor:
            executor.shutdown(cancel_futures=True)
    raise NotFound(
        f"no NOT_PSD Gram matrix among {tried} candidates",
        report={"min_eigenvalue_per_j": lowest, "candidates_tried": tried},
    )


# ---------------------------------------------------------------------------
# n = 2: unboundedness


@dataclass
class UnboundednessCertificate:
    s: SatakeParameter
    m: int
    value: float
    profile: list
    monotone: bool

    def to_json(self) -> dict:
        return {
            "p": self.s.ctx.p,
            "n": self.s.ctx.n,
            "s": self.s.to_json(),
            "m": self.m,
            "value": self.value,
            "profile": self.profile,
            "monotone": self.monotone,
        }

    @classmethod
    def from_json(cls, data: dict) -> "UnboundednessCertificate":
        ctx = PrimeContext(int(data["p"]), int(data["n"]))
        return cls(
            SatakeParameter.from_json(ctx, data["s"]),
            int(data["m"]),
            float(data["value"]),
            list(data.get("profile", [])),
            bool(data.get("monotone", False)),
        )


def sigma_param(sigma, ctx: PrimeContext) -> SatakeParameter:
    if ctx.n != 2:
        raise SphlabError("(sigma, -sigma) parameters live at n = 2")
    if isinstance(sigma, str):
        sigma = Fraction(sigma)
    return SatakeParameter(ctx, (sigma, -sigma), (0, 0))


def omega_profile(sigma, ctx: PrimeContext, m_max: int, cap: int | None = None) -> list:
    """[(m, omega_s(pi^{(m,-m)}))] for m = 1..m_max."""
    s = sigma_param(sigma, ctx)
    rows = []
    for m in range(1, m_max + 1):
        coset_data((m, -m), ctx, cap)
        rows.append((m, omega_at(s, (m, -m))))
    return rows


def unboundedness_certificate(
    sigma, ctx: PrimeContext, m_max: int = 10, cap: int | None = None
) -> UnboundednessCertificate:
    s = sigma_param(sigma, ctx)
    profile = []
    for m in range(1, m_max + 1):
        coset_data((m, -m), ctx, cap)
        value = abs(omega_at(s, (m, -m)))
        profile.append({"m": m, "abs": value})
        if value > 1:
            growth = [row["abs"] for row in profile]
            monotone = all(a < b for a, b in zip(growth, growth[1:]))
            return UnboundednessCertificate(s, m, value, profile, monotone)
    raise NotFound(f"|omega| <= 1 for every m <= {m_max}", report={"profile": profile})


def verify_unboundedness(cert: UnboundednessCertificate, cap: int | None = None) -> dict:
    g = GroupElement.pi(cert.s.ctx, (cert.m, -cert.m))
    value = abs(omega_direct(cert.s, g, cap))
    return {"value": value, "ok": value > 1 and abs(value - cert.value) <= 1e-9}


def two_point_forms(s: SatakeParameter, g: GroupElement) -> list:
    """Form values on {g, e} for the three test vectors used to show that a
    positive definite function is *-spherical and bounded by 1.

    With w = omega(g): z = (1, 1) and z = (i, 1) give real values only if
    omega(g^{-1}) = conj(w); z = (omega(g^{-1}), -1) then gives 1 - |w|^2.
    """
    e = GroupElement.identity(s.ctx)
    back = omega_eval(s, g.inverse())
    return [
        {"z": _cjson_pair(z), "value": inner_form(s, [g, e], z)}
        for z in ((1, 1), (1j, 1), (back, -1))
    ]


def _cjson_pair(z):
    return [_cjson(x) for x in z]


def two_point_refutes(s: SatakeParameter, g: GroupElement, tol: float = 1e-9) -> bool:
    """True when one of the two-point forms is negative or not real, i.e. the
    finite data already rules out positive definiteness."""
    return any(
        row["value"].real < -tol or abs(row["value"].imag) > tol for row in two_point_forms(s, g)
    )


def grid_hermitian_defect(s: SatakeParameter, spread: int = 2) -> float:
    """max over the dominant grid of |omega(pi^{-m}) - conj(omega(pi^m))|."""
    return max(
        abs(omega_at(s, dual_coweight(m)) - omega_at(s, m).conjugate())
        for m in dominant_coweights(s.ctx.n, spread)
    )
