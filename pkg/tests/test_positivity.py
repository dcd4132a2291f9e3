import json
import random
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sphlab.errors import DimensionMismatch, NonHermitian, NotFound, SphlabError
from sphlab.padic import GroupElement, PrimeContext
from sphlab.positivity import (
    INCONCLUSIVE,
    NOT_PSD,
    PSD,
    GramCertificate,
    SearchConfig,
    UnboundednessCertificate,
    certify,
    element_pool,
    find_nonpd_witness,
    gram_matrix,
    grid_hermitian_defect,
    inner_form,
    inner_form_algebraic,
    omega_profile,
    psd_verdict,
    rayleigh,
    two_point_forms,
    two_point_refutes,
    unboundedness_certificate,
    verify_certificate,
    verify_unboundedness,
)
from sphlab.spherical import SatakeParameter, sequence_param, trivial_param

FIXTURE = Path(__file__).parent / "fixtures" / "nonpd_witness_n3_p2.json"
C22 = PrimeContext(2, 2)
C23 = PrimeContext(2, 3)


def pis(ctx, *ms):
    return [GroupElement.pi(ctx, m) for m in ms]


def test_trivial_gram_is_all_ones():
    pool = element_pool(C23)[:5]
    cert = gram_matrix(trivial_param(C23), pool)
    assert all(x == 1 for row in cert.gram for x in row)
    assert psd_verdict(cert).kind == PSD


def test_single_identity():
    cert = gram_matrix(sequence_param(2, C23), [GroupElement.identity(C23)])
    assert cert.gram == [[1]]


def test_gram_regression_s4():
    cert = certify(sequence_param(4, C23), pis(C23, (0, 0, 0), (1, 0, -1), (2, 0, -2)))
    g = cert.gram
    assert abs(g[0][1] - 0.9928682745456028) < 1e-12
    assert abs(g[0][2] - 0.982316728356471) < 1e-12
    assert abs(g[1][2] - 0.9928682745456028) < 1e-12
    assert cert.hermitian_defect < 1e-9
    assert cert.verdict == PSD


def test_psd_all_ones():
    v = psd_verdict([[1, 1, 1]] * 3)
    assert v.kind == PSD and abs(v.min_eigenvalue) < 1e-12


def test_psd_diag():
    v = psd_verdict([[1, 0], [0, -1]])
    assert v.kind == NOT_PSD
    assert abs(abs(v.witness[1]) - 1) < 1e-12 and abs(v.witness[0]) < 1e-12


def test_inconclusive_band():
    assert psd_verdict([[1, 0], [0, -1e-7]]).kind == INCONCLUSIVE


def test_non_hermitian_rejected():
    with pytest.raises(NonHermitian):
        psd_verdict([[1, 1j], [1j, 1]])


def test_inner_form_examples():
    e = GroupElement.identity(C23)
    assert inner_form(sequence_param(1, C23), [e], [1]) == 1
    pool = element_pool(C23)[:4]
    z = [1, 2j, -1, 0.5 + 0.5j]
    assert abs(inner_form(trivial_param(C23), pool, z) - abs(sum(z)) ** 2) < 1e-12
    with pytest.raises(DimensionMismatch):
        inner_form(trivial_param(C23), pool, [1])


@settings(max_examples=10)
@given(st.integers(1, 16), st.integers(0, 10_000), st.integers(2, 5))
def test_inner_form_matches_gram_and_algebra(j, seed, size):
    rng = random.Random(seed)
    pool = element_pool(C23)
    elements = [pool[0]] + rng.sample(pool[1:], size - 1)
    z = [complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in elements]
    s = sequence_param(j, C23)
    direct = inner_form(s, elements, z)
    cert = gram_matrix(s, elements)
    zn = sum(abs(x) ** 2 for x in z)
    assert abs(direct - rayleigh(cert.gram, z) * zn) < 1e-9
    assert abs(direct - inner_form_algebraic(s, elements, z)) < 1e-9


def test_frozen_witness_reverifies():
    cert = GramCertificate.from_json(json.loads(FIXTURE.read_text()))
    assert cert.verdict == NOT_PSD and cert.min_eigenvalue < -1e-6
    report = verify_certificate(cert)
    assert report["ok"] and report["rayleigh"] < -5e-7
    assert report["max_entry_error"] < 1e-9


def test_frozen_witness_is_what_the_search_finds():
    stored = json.loads(FIXTURE.read_text())
    cert = find_nonpd_witness(C23, SearchConfig(seed=stored["meta"]["seed"]))
    assert cert.meta == {k: v for k, v in stored["meta"].items()}
    assert [g.to_json() for g in cert.elements] == stored["elements"]
    assert abs(cert.min_eigenvalue - stored["min_eigenvalue"]) < 1e-12


def test_threads_do_not_change_the_answer():
    a = find_nonpd_witness(C23, SearchConfig(j_max=4, threads=1))
    b = find_nonpd_witness(C23, SearchConfig(j_max=4, threads=4))
    assert a.to_json() == b.to_json()


def test_tampered_witness_fails():
    cert = GramCertificate.from_json(json.loads(FIXTURE.read_text()))
    cert.witness = [1, 0, 0]
    assert not verify_certificate(cert)["ok"]


def test_search_exhaustion_reports_per_j():
    with pytest.raises(NotFound) as info:
        find_nonpd_witness(C23, SearchConfig(j_min=1, j_max=2, max_size=2, trials=3))
    lowest = info.value.report["min_eigenvalue_per_j"]
    assert set(lowest) == {1, 2}
    # size-2 sets {e, g} are PSD because |omega_{s(j)}| <= 1
    assert all(v > -1e-9 for v in lowest.values())


def test_search_needs_rank_three():
    with pytest.raises(SphlabError):
        find_nonpd_witness(C22)


def test_trivial_parameter_never_fails():
    pool = element_pool(C23)
    rng = random.Random(5)
    for _ in range(20):
        elements = [pool[0]] + rng.sample(pool[1:], 6)
        assert certify(trivial_param(C23), elements).verdict == PSD


def test_grid_defect_for_sequence():
    for j in (1, 5, 16):
        assert grid_hermitian_defect(sequence_param(j, C23), spread=3) < 1e-9


def test_unbounded_sigma_one():
    cert = unboundedness_certificate(1, C22, m_max=10)
    assert cert.m == 1 and cert.value > 1
    assert verify_unboundedness(cert)["ok"]
    again = UnboundednessCertificate.from_json(cert.to_json())
    assert again.m == cert.m and again.s == cert.s
    assert two_point_refutes(cert.s, GroupElement.pi(C22, (1, -1)))


def test_unbounded_profile_grows():
    rows = omega_profile(1, C22, 5)
    values = [abs(v) for _, v in rows]
    assert values == sorted(values) and values[0] > 1


def test_sigma_zero_is_bounded():
    with pytest.raises(NotFound) as info:
        unboundedness_certificate(0, C22, m_max=6)
    assert all(row["abs"] <= 1 for row in info.value.report["profile"])


def test_trivial_sigma_is_one():
    for m, value in omega_profile(Fraction(1, 2), C22, 6):
        assert abs(value - 1) < 1e-12


def test_two_point_forms_bounded_case():
    s = SatakeParameter(C22, (0, 0), (0, 0))
    g = GroupElement.pi(C22, (2, -2))
    forms = two_point_forms(s, g)
    assert not two_point_refutes(s, g)
    w = abs(forms[2]["value"])
    assert forms[2]["value"].real >= 0 and w <= 1


def test_two_point_forms_detect_non_star():
    s = SatakeParameter.from_complex(C22, (0.3 + 0.2j, 0))
    assert two_point_refutes(s, GroupElement.pi(C22, (1, -1)))
