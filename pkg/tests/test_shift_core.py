import networkx as nx
import numpy as np
import pytest
from numpy.testing import assert_array_equal

from shift_core import (
    DomainError,
    EnumerationLimitError,
    EventuallyPeriodicPoint,
    PeriodicOrbit,
    Sft,
    canonical_rotation,
    count_words,
    enumerate_words,
    group_reduce,
    parse_word,
    periodic_orbits,
    shift_metric,
    word_graph,
    word_index,
    word_table,
    word_to_str,
)


def test_golden_mean_words(golden):
    assert enumerate_words(golden, 3) == [(0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 0, 1)]
    assert enumerate_words(golden, 1) == [(0,), (1,)]


def test_count_words_matches_table(golden):
    for n in range(1, 12):
        assert count_words(golden, n) == len(word_table(golden, n))


def test_word_table_is_lexicographic_and_read_only(full2):
    table = word_table(full2, 4)
    assert table.shape == (16, 4)
    codes = table.astype(int) @ (2 ** np.arange(3, -1, -1))
    assert_array_equal(codes, np.arange(16))
    with pytest.raises(ValueError):
        table[0, 0] = 1


def test_enumeration_cap(full2):
    with pytest.raises(EnumerationLimitError) as excinfo:
        word_table(full2, 20, cap=1000)
    assert excinfo.value.required == 2 ** 20
    assert excinfo.value.cap == 1000


def test_rejects_invalid_shifts():
    with pytest.raises(DomainError):
        Sft.from_matrix([[1, 0], [0, 1]])
    with pytest.raises(DomainError):
        Sft.from_matrix([[1, 1], [0, 0]])
    with pytest.raises(DomainError):
        Sft.from_matrix([[0, 1], [1, 0]])
    with pytest.raises(DomainError):
        Sft(0, ())


def test_from_json_shorthand():
    assert Sft.from_json({"alphabet_size": 3, "full_shift": True}) == Sft.full(3)
    assert Sft.from_json({"transitions": [[1, 1], [1, 0]]}) == Sft.golden_mean()
    with pytest.raises(DomainError):
        Sft.from_json({"alphabet_size": 3, "transitions": [[1, 1], [1, 0]]})


def test_word_index_and_inadmissible_witness(golden):
    assert_array_equal(word_index(golden, [(0, 1, 0), (1, 0, 1)]), [2, 4])
    with pytest.raises(DomainError) as excinfo:
        word_index(golden, [(0, 1, 1)])
    assert excinfo.value.witness == (0, 1, 1)


def test_group_reduce_folds_onto_prefixes(full2):
    values = np.arange(8, dtype=float)
    assert_array_equal(group_reduce(full2, values, 3, 1, np.maximum), [3.0, 7.0])
    assert_array_equal(group_reduce(full2, values, 3, 2, np.add), [1.0, 5.0, 9.0, 13.0])


def test_word_graph_sizes(golden):
    g1 = word_graph(golden, 1)
    assert (g1.node_count, g1.edge_count) == (2, 3)
    g2 = word_graph(golden, 2)
    assert (g2.node_count, g2.edge_count) == (3, 5)
    assert [g2.node_word(i) for i in range(3)] == [(0, 0), (0, 1), (1, 0)]


def test_word_graph_successors(golden):
    graph = word_graph(golden, 1)
    assert_array_equal(graph.successors, [[0, 1], [0, -1]])
    assert_array_equal(graph.predecessors, [[0, 1], [0, -1]])


def test_periodic_orbits(golden, full2):
    assert [o.cycle for o in periodic_orbits(golden, 2)] == [(0,), (0, 1)]
    assert [str(o) for o in periodic_orbits(full2, 2)] == ["(0)^inf", "(1)^inf", "(01)^inf"]
    assert len(periodic_orbits(full2, 4)) == 3
    # at depth 4 every primitive binary necklace of length <= 4 is a simple cycle
    assert len(periodic_orbits(full2, 4, depth=4)) == 2 + 1 + 2 + 3


def test_periodic_orbits_agree_across_depths(golden):
    shallow = {o.cycle for o in periodic_orbits(golden, 2)}
    deep = {o.cycle for o in periodic_orbits(golden, 2, depth=3)}
    assert shallow == deep


def test_canonical_rotation():
    assert canonical_rotation((1, 0, 0)) == (0, 0, 1)
    assert PeriodicOrbit((1, 0)).canonical().cycle == (0, 1)
    assert not PeriodicOrbit((1,)).is_admissible(Sft.golden_mean())


def test_eventually_periodic_point():
    x = EventuallyPeriodicPoint((1,), (0, 1))
    assert x.head(5) == (1, 0, 1, 0, 1)
    assert x.shift().head(4) == (0, 1, 0, 1)
    assert x.shift().shift().head(3) == (1, 0, 1)


def test_shift_metric():
    x = PeriodicOrbit((0, 1))
    y = EventuallyPeriodicPoint((0, 1, 0), (0,))
    assert shift_metric(x, y) == 2.0 ** -4
    assert shift_metric(x, EventuallyPeriodicPoint((0, 1), (0, 1))) == 0.0


def test_shift_metric_fixed_points_and_period_two():
    assert shift_metric(PeriodicOrbit((0,)), PeriodicOrbit((1,))) == 0.5
    assert shift_metric(PeriodicOrbit((0, 1)), PeriodicOrbit((0,))) == 0.25


def test_shift_metric_is_symmetric_and_shift_at_most_doubles_it(rng):
    def draw():
        prefix = tuple(int(a) for a in rng.integers(0, 2, size=int(rng.integers(0, 4))))
        cycle = tuple(int(a) for a in rng.integers(0, 2, size=int(rng.integers(1, 4))))
        return EventuallyPeriodicPoint(prefix, cycle)

    for _ in range(200):
        x, y = draw(), draw()
        d = shift_metric(x, y)
        assert d == shift_metric(y, x)
        assert shift_metric(x.shift(), y.shift()) <= 2 * d


def test_word_string_round_trip():
    assert word_to_str((0, 1, 1)) == "011"
    assert parse_word("011", 2) == (0, 1, 1)
    assert parse_word("3.11", 12) == (3, 11)
    with pytest.raises(DomainError):
        parse_word("012", 2)


def test_to_networkx_preserves_edges(golden):
    graph = word_graph(golden, 2).to_networkx()
    assert isinstance(graph, nx.DiGraph)
    assert graph.number_of_edges() == 5
