import numpy as np
import pytest
from numpy.testing import assert_allclose

from potential_core import (
    LocallyConstantPotential,
    birkhoff_cylinder_bounds,
    birkhoff_extrema,
    birkhoff_potential,
    birkhoff_trace,
    coboundary,
    invariant_average_range,
    max_mean_cycle,
    min_mean_cycle,
    quotient_distance,
    quotient_seminorm,
    seminorm_convergence_trace,
    simple_cycle_means,
)
from shift_core import DomainError, Sft, enumerate_words, word_graph


def brute_birkhoff(f, n):
    """S_n f on every admissible (n+k-1)-word, by direct summation."""
    k = f.depth
    return {w: sum(f.value(w[i:i + k]) for i in range(n)) for w in enumerate_words(f.sft, n + k - 1)}


@pytest.fixture
def step(golden):
    return LocallyConstantPotential.from_mapping(golden, 1, {"0": 0.0, "1": 1.0})


def test_from_mapping_and_value(golden):
    f = LocallyConstantPotential.from_mapping(golden, 2, {"00": 1.0, "01": 2.0, "10": 3.0})
    assert f.value((0, 1, 0)) == 2.0
    assert f.to_json() == {"depth": 2, "values": {"00": 1.0, "01": 2.0, "10": 3.0}}
    with pytest.raises(DomainError) as excinfo:
        LocallyConstantPotential.from_mapping(golden, 2, {"00": 1.0, "01": 2.0})
    assert excinfo.value.witness == (1, 0)
    with pytest.raises(DomainError):
        f.value((1, 1))


def test_arithmetic_lifts_depth(full2):
    f = LocallyConstantPotential(full2, 1, [1.0, -1.0])
    g = LocallyConstantPotential(full2, 2, [0.0, 1.0, 2.0, 3.0])
    total = f + g
    assert total.depth == 2
    assert_allclose(total.values, [1.0, 2.0, 1.0, 2.0])
    assert_allclose((np.float64(2.0) * f).values, [2.0, -2.0])
    assert_allclose((f - 1).values, [0.0, -2.0])
    assert_allclose((-f).values, [-1.0, 1.0])


def test_birkhoff_extrema_golden(step):
    extrema = birkhoff_extrema(step, 4)
    assert extrema.max_value == 2.0
    assert extrema.min_value == 0.0
    assert extrema.argmax_word in {(1, 0, 1, 0), (0, 1, 0, 1), (1, 0, 0, 1)}
    assert step.sft.is_admissible(extrema.argmax_word)


@pytest.mark.parametrize("sft", [Sft.full(2), Sft.golden_mean(), Sft.full(3)])
def test_birkhoff_extrema_matches_brute_force(sft, rng):
    for _ in range(5):
        f = LocallyConstantPotential.random(sft, 2, rng)
        for n in range(1, 6):
            sums = brute_birkhoff(f, n)
            extrema = birkhoff_extrema(f, n)
            assert extrema.max_value == pytest.approx(max(sums.values()), abs=1e-12)
            assert extrema.min_value == pytest.approx(min(sums.values()), abs=1e-12)
            assert sums[extrema.argmax_word] == pytest.approx(extrema.max_value, abs=1e-12)
            assert sums[extrema.argmin_word] == pytest.approx(extrema.min_value, abs=1e-12)


def test_birkhoff_trace_matches_extrema(golden, rng):
    f = LocallyConstantPotential.random(golden, 2, rng)
    for n, lo, hi in birkhoff_trace(f, 7):
        extrema = birkhoff_extrema(f, n)
        assert lo == pytest.approx(extrema.min_value, abs=1e-12)
        assert hi == pytest.approx(extrema.max_value, abs=1e-12)


@pytest.mark.parametrize("n,m", [(1, 1), (3, 2), (2, 4), (5, 3), (4, 5)])
def test_cylinder_bounds_match_brute_force(golden, rng, n, m):
    f = LocallyConstantPotential.random(golden, 2, rng)
    sums = brute_birkhoff(f, n)
    length = max(n + f.depth - 1, m)
    lower, upper = birkhoff_cylinder_bounds(f, n, m)
    for i, prefix in enumerate(enumerate_words(golden, m)):
        extensions = [w for w in enumerate_words(golden, length) if w[:m] == prefix]
        values = [sums[w[: n + f.depth - 1]] for w in extensions]
        assert lower[i] == pytest.approx(min(values), abs=1e-12)
        assert upper[i] == pytest.approx(max(values), abs=1e-12)


def test_birkhoff_potential(full2, rng):
    f = LocallyConstantPotential.random(full2, 2, rng)
    s3 = birkhoff_potential(f, 3)
    assert s3.depth == 4
    for word, total in brute_birkhoff(f, 3).items():
        assert s3.value(word) == pytest.approx(total, abs=1e-12)


def test_max_mean_cycle_example(golden):
    graph = word_graph(golden, 1)
    mean, orbit = max_mean_cycle(graph, np.array([0.0, 1.0, 1.0]))
    assert mean == pytest.approx(1.0)
    assert orbit.cycle == (0, 1)
    mean, orbit = min_mean_cycle(graph, np.array([0.0, 1.0, 1.0]))
    assert mean == pytest.approx(0.0)
    assert orbit.cycle == (0,)


def test_seminorm_golden(step):
    report = quotient_seminorm(step)
    assert report.value == pytest.approx(0.5)
    assert invariant_average_range(step) == pytest.approx((0.0, 0.5))
    assert report.witness_cycles[0].cycle == (0, 1)


def test_seminorm_constant(full2):
    report = quotient_seminorm(LocallyConstantPotential.constant(full2, -3.0))
    assert report.value == pytest.approx(3.0)
    assert report.max_mean == pytest.approx(-3.0)


@pytest.mark.parametrize("sft", [Sft.full(2), Sft.golden_mean()])
def test_seminorm_matches_cycle_enumeration(sft, rng):
    for trial in range(50):
        f = LocallyConstantPotential.random(sft, 1 + trial % 2, rng)
        graph = word_graph(sft, f.depth)
        means = [m for m, _ in simple_cycle_means(graph, f.edge_weights(graph))]
        report = quotient_seminorm(f)
        assert report.max_mean == pytest.approx(max(means), abs=1e-9)
        assert report.min_mean == pytest.approx(min(means), abs=1e-9)
        assert report.value == pytest.approx(max(max(means), -min(means), 0.0), abs=1e-9)


def test_witness_cycle_attains_the_mean(full2, rng):
    for _ in range(20):
        f = LocallyConstantPotential.random(full2, 2, rng)
        report = quotient_seminorm(f)
        cycle = report.witness_cycles[0].cycle
        word = cycle * (1 + f.depth)
        average = np.mean([f.value(word[i:i + f.depth]) for i in range(len(cycle))])
        assert average == pytest.approx(report.max_mean, abs=1e-9)


def test_normalized_sup_bounds_seminorm(golden, rng):
    for _ in range(10):
        f = LocallyConstantPotential.random(golden, 2, rng)
        report = seminorm_convergence_trace(f, 32)
        assert all(v >= report.value - 1e-12 for _, v in report.birkhoff_trace)
        assert report.gap >= -1e-12


def test_coboundaries_vanish_in_the_quotient(golden, rng):
    for _ in range(10):
        f = LocallyConstantPotential.random(golden, 1, rng)
        h = LocallyConstantPotential.random(golden, 2, rng, scale=3.0)
        assert quotient_seminorm(coboundary(h)).value == pytest.approx(0.0, abs=1e-9)
        assert quotient_seminorm(f + coboundary(h)).value == pytest.approx(quotient_seminorm(f).value, abs=1e-9)
        assert quotient_distance(f + coboundary(h), f) == pytest.approx(0.0, abs=1e-9)


def test_rejects_bad_values(full2):
    with pytest.raises(DomainError):
        LocallyConstantPotential(full2, 1, [1.0])
    with pytest.raises(DomainError):
        LocallyConstantPotential(full2, 1, [1.0, np.inf])
    with pytest.raises(DomainError):
        birkhoff_extrema(LocallyConstantPotential.constant(full2, 1.0), 0)


def test_normalized_sup_gap_shrinks(rng):
    shifts = [Sft.full(2), Sft.golden_mean()]
    for trial in range(50):
        f = LocallyConstantPotential.random(shifts[trial % 2], 1 + trial % 2, rng)
        report = seminorm_convergence_trace(f, 256)
        trace = dict(report.birkhoff_trace)
        assert trace[256] - report.value >= -1e-12
        assert trace[256] - report.value <= trace[16] - report.value + 1e-12


def test_birkhoff_average_is_in_the_class_of_f(golden, rng):
    for _ in range(3):
        f = LocallyConstantPotential.random(golden, 2, rng)
        for n in range(1, 9):
            assert quotient_distance(birkhoff_potential(f, n) * (1.0 / n), f) <= 1e-9


def test_seminorm_scaling_and_subadditivity(golden, full2, rng):
    for sft in (golden, full2):
        for _ in range(10):
            f = LocallyConstantPotential.random(sft, 2, rng)
            g = LocallyConstantPotential.random(sft, 1, rng)
            value = quotient_seminorm(f).value
            for c in (-2.5, 0.5, 3.0):
                assert quotient_seminorm(c * f).value == pytest.approx(abs(c) * value, abs=1e-9)
            assert quotient_seminorm(f + g).value <= value + quotient_seminorm(g).value + 1e-9


def test_max_mean_cycle_tie_takes_the_fixed_point(full2):
    mean, orbit = max_mean_cycle(word_graph(full2, 1), np.zeros(4))
    assert mean == 0.0
    assert orbit.cycle == (0,)
