import numpy as np
import pytest
from numpy.testing import assert_allclose

from equivalence import (
    CERT_VERSION,
    EquivalenceCertificate,
    approximant,
    bounded_defect_probe,
    cauchy_table,
    construct_equivalent,
    correction_terms,
    increment_approximant,
    normalized_class_trace,
)
from potential_core import LocallyConstantPotential, quotient_distance
from sequence_core import (
    AdditiveSequence,
    CylinderMeasure,
    MeasureLogSequence,
    almost_additivity_constant,
    asymptotic_defect,
)
from shift_core import DomainError, prefix_index
from thermo import lyapunov_exponent, pressure_additive, pressure_sequence


@pytest.mark.parametrize("depth", [1, 2])
def test_additive_input_recovers_generator(golden, rng, depth):
    f = LocallyConstantPotential.random(golden, depth, rng)
    cert = construct_equivalent(AdditiveSequence(f))
    assert cert.tail_bound <= 1e-9
    assert cert.tolerance_met
    assert quotient_distance(cert.representative, f) <= 1e-9
    assert np.max(cert.cauchy_table) <= 1e-9


def test_additive_input_average_method(full2, rng):
    f = LocallyConstantPotential.random(full2, 2, rng)
    cert = construct_equivalent(AdditiveSequence(f), k_grid=[2, 4], method="average")
    assert cert.method == "average"
    assert quotient_distance(cert.representative, f) <= 1e-9


def test_cocycle_cauchy_table(cocycle_seq):
    table = cauchy_table(cocycle_seq, [2, 4, 8])
    assert_allclose(table, table.T)
    assert_allclose(np.diag(table), 0.0)
    for i in range(3):
        for j in range(3):
            for k in range(3):
                assert table[i, k] <= table[i, j] + table[j, k] + 1e-12
    assert table[0, 1] > table[1, 2] > 0


def test_cocycle_defect_decays_against_approximant(cocycle_seq):
    f8 = approximant(cocycle_seq, 8)
    assert f8.depth == 8
    (_, delta_4), (_, delta_16) = asymptotic_defect(cocycle_seq, f8, [4, 16])
    assert delta_16 < delta_4


def test_cocycle_certificate(cocycle_seq):
    cert = construct_equivalent(cocycle_seq, tol=0.1)
    assert cert.k_star == 8
    assert cert.representative.depth == 9
    assert [n for n, _ in cert.defect_trace] == list(range(1, 17))
    assert cert.tail_bound == pytest.approx(cert.defect_trace[-1][1])
    assert cert.defect_trace[-1][1] < cert.defect_trace[3][1]
    assert cert.tolerance_met
    assert not construct_equivalent(cocycle_seq).tolerance_met


def test_parallel_cauchy_table_matches(cocycle_seq):
    assert_allclose(cauchy_table(cocycle_seq, [1, 2, 4], workers=3), cauchy_table(cocycle_seq, [1, 2, 4]))


def test_bernoulli_increment_is_log_marginal(full2):
    mu = CylinderMeasure.bernoulli(full2, [0.25, 0.75])
    g = increment_approximant(MeasureLogSequence(mu), 3)
    assert g.depth == 4
    assert_allclose(g.values, np.log([0.25, 0.75])[prefix_index(full2, 4, 1)], atol=1e-12)


def test_certificate_json(cocycle_seq, full2):
    cert = construct_equivalent(cocycle_seq, k_grid=[2, 4], defect_horizon=6, tol=0.5)
    data = cert.to_json()
    assert data["version"] == CERT_VERSION
    restored = EquivalenceCertificate.from_json(full2, data)
    assert_allclose(restored.representative.values, cert.representative.values)
    assert restored.defect_trace == cert.defect_trace
    with pytest.raises(DomainError):
        EquivalenceCertificate.from_json(full2, dict(data, version="cert_v0"))


def test_rejects_bad_grids(cocycle_seq):
    with pytest.raises(DomainError):
        construct_equivalent(cocycle_seq, k_grid=[4, 2])
    with pytest.raises(DomainError):
        construct_equivalent(cocycle_seq, k_grid=[])
    with pytest.raises(DomainError):
        construct_equivalent(cocycle_seq, method="median")


def test_correction_terms_and_bounded_defect(golden, rng, cocycle_seq):
    f = LocallyConstantPotential.random(golden, 2, rng)
    terms = correction_terms(AdditiveSequence(f), f, [1, 5])
    assert all(t.sup_norm <= 1e-12 for t in terms)

    cert = construct_equivalent(cocycle_seq, k_grid=[2, 4], defect_horizon=8)
    measured = bounded_defect_probe(cocycle_seq, cert.representative, 8)
    assert measured.horizon == 8
    assert 1 <= measured.argmax_n <= 8
    assert measured.sup_defect == max(v for _, v in measured.trace)


def test_normalized_class_trace_decays(cocycle_seq):
    cert = construct_equivalent(cocycle_seq, k_grid=[2, 4, 8], defect_horizon=4)
    trace = normalized_class_trace(cocycle_seq, cert.representative, [2, 4, 8])
    distances = [d for _, d in trace]
    assert distances[0] > distances[1] > distances[2]


def test_fresh_defects_stay_below_tail_bound(cocycle_seq, golden, rng):
    cert = construct_equivalent(cocycle_seq, tol=0.1)
    for _, delta in asymptotic_defect(cocycle_seq, cert.representative, [18, 20]):
        assert delta <= cert.tail_bound + 1e-12

    f = LocallyConstantPotential.random(golden, 2, rng)
    additive = construct_equivalent(AdditiveSequence(f), k_grid=[2, 4], defect_horizon=6)
    (_, delta), = asymptotic_defect(AdditiveSequence(f), additive.representative, [20])
    assert delta <= additive.tail_bound + additive.tolerance


def test_representatives_from_different_grids_agree(cocycle_seq):
    a = construct_equivalent(cocycle_seq, k_grid=[2, 4, 8], tol=0.1)
    b = construct_equivalent(cocycle_seq, k_grid=[3, 6], tol=0.1)
    assert quotient_distance(a.representative, b.representative) <= a.tail_bound + b.tail_bound + 1e-9


def test_representative_pressure_matches_sequence_pressure(cocycle_seq):
    cert = construct_equivalent(cocycle_seq, tol=0.1)
    C = almost_additivity_constant(cocycle_seq, 8).c_estimate
    estimate = pressure_sequence(cocycle_seq, 12, C)
    P = pressure_additive(cert.representative)
    assert abs(estimate.point - P) <= cert.tail_bound + 2 * estimate.width
    assert estimate.lower - cert.tail_bound <= P <= estimate.upper + cert.tail_bound
    assert P == pytest.approx(np.log(5), abs=cert.tail_bound)


def test_representative_average_matches_lyapunov_exponent(cocycle_seq, full2):
    cert = construct_equivalent(cocycle_seq, tol=0.1)
    rep = cert.representative
    mu = CylinderMeasure.bernoulli(full2, [0.5, 0.5])
    estimate = lyapunov_exponent(cocycle_seq, mu, 12)
    average = float(mu.probabilities(rep.depth) @ rep.values)
    # (1/n) ∫f_n dμ approaches the limit like c/n, so the n=6 to n=12 change measures the remaining gap
    slack = abs(estimate.trace[11][1] - estimate.trace[5][1])
    assert abs(estimate.point - average) <= cert.tail_bound + slack + 1e-9


def test_approximant_defects_shrink_as_k_doubles(cocycle_seq):
    # windows [k, 4k] are truncated at n=16 to stay within exhaustive enumeration
    maxima = []
    for k in (2, 4, 8):
        trace = asymptotic_defect(cocycle_seq, approximant(cocycle_seq, k), range(k, min(4 * k, 16) + 1))
        maxima.append(max(delta for _, delta in trace))
    assert maxima[0] >= maxima[1] >= maxima[2]
    assert maxima[2] > 0
