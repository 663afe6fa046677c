import io
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lago import (ActiveTimeNode, LinkStream, infer_tick, parse_edge_list, read_edge_list,
                  stream_from_records, write_edge_list)
from lago.exceptions import (EmptyInput, MalformedRow, NonUniformTimestamp, NotActive, SelfLoop,
                             UnknownNode)


# -- parsing ---------------------------------------------------------------------

def test_parse_infers_tick_from_gaps():
    s = parse_edge_list(["0,a,b", "20,a,c"])
    assert s.m == 2
    assert s.tick_duration == 20
    assert s.horizon == (0, 1)
    assert set(s.edges()) == {("a", "b", 0), ("a", "c", 1)}


def test_parse_collapses_reversed_duplicates():
    s = parse_edge_list(["5,a,b", "5,b,a"])
    assert s.m == 1
    assert list(s.edges()) == [("a", "b", 0)]


def test_parse_empty_input():
    with pytest.raises(EmptyInput):
        parse_edge_list([])
    with pytest.raises(EmptyInput):
        parse_edge_list(["# only a comment", "   "])


def test_parse_whitespace_with_extra_columns():
    rows = ["20\t1\t2\t3B\t3B", "40\t1\t3\t3B\t4A", "100\t2\t3\t3B\t4A"]
    s = parse_edge_list(rows)
    assert s.tick_duration == 20
    assert s.horizon == (0, 4)
    assert s.nodes == ("1", "2", "3")


def test_parse_errors_name_the_line():
    with pytest.raises(MalformedRow) as e:
        parse_edge_list(["0 a b", "x a c"])
    assert e.value.line == 2
    with pytest.raises(SelfLoop) as e:
        parse_edge_list(["0 a b", "", "1 c c"])
    assert e.value.line == 3
    with pytest.raises(MalformedRow):
        parse_edge_list(["0 a"])


def test_declared_tick_must_divide_timestamps():
    with pytest.raises(NonUniformTimestamp) as e:
        parse_edge_list(["0 a b", "30 a c"], tick_duration=20)
    assert e.value.line == 2
    s = parse_edge_list(["0 a b", "40 a c"], tick_duration=20)
    assert s.horizon == (0, 2)


def test_parse_options():
    s = parse_edge_list(["a;b;3", "a;c;6"], delimiter=";", columns=(2, 0, 1))
    assert set(s.edges()) == {("a", "b", 0), ("a", "c", 1)}
    s = parse_edge_list(["t u v", "1 a b"], header=True, horizon=(0, 9), origin=1)
    assert s.horizon == (0, 9) and s.n_ticks == 10


def test_write_read_round_trip(tmp_path):
    s = parse_edge_list(["10 a b", "30 b c", "70 a c"], horizon=(-1, 5))
    text = write_edge_list(s)
    assert text.startswith("# origin=10 tick_duration=20 horizon=-1:5")
    again = parse_edge_list(io.StringIO(text))
    assert again == s
    path = tmp_path / "s.txt"
    path.write_text(text)
    assert read_edge_list(path) == s


def test_stream_from_records_matches_text_parsing():
    recs = [(0, "a", "b"), (0.5, "a", "c"), ("1.5", "b", "c")]
    s = stream_from_records(recs)
    assert s.tick_duration == Fraction(1, 2)
    assert s == parse_edge_list(["0 a b", "0.5 a c", "1.5 b c"])
    with pytest.raises(SelfLoop):
        stream_from_records([(0, "a", "a")])


# -- tick inference ----------------------------------------------------------------

@pytest.mark.parametrize("ts, expected", [
    ([0, 20, 60], 20),
    ([0, 3, 7], 1),
    ([5], 1),
    ([5, 5, 5], 1),
    ([Fraction(1, 2), Fraction(3, 2)], 1),
    ([0, Fraction(1, 3), 1], Fraction(1, 3)),
])
def test_infer_tick(ts, expected):
    assert infer_tick(ts) == expected


# -- queries -------------------------------------------------------------------------

def test_interactions_between():
    s = LinkStream([("a", "b", 5)])
    assert s.interactions_between("a", "b", {5}) == 1
    assert s.interactions_between("b", "a", {4}) == 0
    s = LinkStream([("a", "b", t) for t in (1, 2, 3)])
    assert s.interactions_between("a", "b", {2, 3, 9}) == 2
    with pytest.raises(UnknownNode):
        s.interactions_between("a", "z", {1})


def test_temporal_neighbors():
    s = LinkStream([("u", "x", t) for t in (2, 5, 9)] + [("y", "z", 0)])
    assert s.temporal_neighbors(("u", 5)) == (ActiveTimeNode("u", 2), ActiveTimeNode("u", 9))
    assert s.temporal_neighbors(("u", 2)) == (None, ActiveTimeNode("u", 5))
    assert s.temporal_neighbors(("y", 0)) == (None, None)
    with pytest.raises(NotActive):
        s.temporal_neighbors(("u", 3))


def test_topological_neighbors():
    s = LinkStream([("a", "b", 5)])
    assert s.topological_neighbors(("a", 5)) == {ActiveTimeNode("b", 5)}
    star = LinkStream([("a", "b", 0), ("a", "c", 0)])
    assert star.topological_neighbors(("a", 0)) == {("b", 0), ("c", 0)}
    assert star.topological_neighbors(("b", 0)) == {("a", 0)}
    with pytest.raises(NotActive):
        star.topological_neighbors(("b", 1))


def test_declared_nodes_and_horizon_checks():
    s = LinkStream([("a", "b", 0)], nodes=["a", "b", "c"], horizon=(0, 3))
    assert s.degree == {"a": 1, "b": 1, "c": 0}
    assert s.per_node_activity["c"] == ()
    with pytest.raises(UnknownNode):
        LinkStream([("a", "b", 0)], nodes=["a"])
    with pytest.raises(ValueError):
        LinkStream([("a", "b", 4)], horizon=(0, 3))
    with pytest.raises(ValueError):
        LinkStream([("a", "a", 0)])


def test_numeric_labels_sort_numerically():
    s = LinkStream([("10", "9", 0), ("2", "x", 0)])
    assert s.nodes == ("2", "9", "10", "x")


# -- invariants ----------------------------------------------------------------------

edge_lists = st.lists(
    st.tuples(st.integers(0, 6), st.integers(0, 6), st.integers(0, 12)).filter(
        lambda e: e[0] != e[1]),
    min_size=1, max_size=40)


@settings(max_examples=150, deadline=None)
@given(edge_lists)
def test_stream_invariants(raw):
    s = LinkStream(raw)
    assert sum(s.degree.values()) == 2 * s.m
    assert s.n_active <= 2 * s.m
    assert s.n_active <= len(s.nodes) * s.n_ticks
    expected_active = {(str(u), t) for u, v, t in raw} | {(str(v), t) for u, v, t in raw}
    assert {tuple(a) for a in s.active} == expected_active
    assert s.m == len({(min(str(u), str(v)), max(str(u), str(v)), t) for u, v, t in raw})


@settings(max_examples=100, deadline=None)
@given(edge_lists, st.randoms(use_true_random=False))
def test_parse_ignores_row_order(raw, rnd):
    rows = [f"{t} {u} {v}" for u, v, t in raw]
    shuffled = list(rows)
    rnd.shuffle(shuffled)
    assert parse_edge_list(rows) == parse_edge_list(shuffled)


@settings(max_examples=100, deadline=None)
@given(edge_lists)
def test_temporal_chain_walks_activity(raw):
    s = LinkStream(raw)
    for node, ticks in s.per_node_activity.items():
        if not ticks:
            continue
        walked = [ticks[0]]
        cur = ActiveTimeNode(node, ticks[0])
        while True:
            _, nxt = s.temporal_neighbors(cur)
            if nxt is None:
                break
            walked.append(nxt.tick)
            cur = nxt
        assert tuple(walked) == ticks


def test_random_streams_are_equal_to_rebuilt_copies():
    rng = random.Random(3)
    for _ in range(20):
        edges = [(f"n{rng.randrange(5)}", f"m{rng.randrange(5)}", rng.randrange(8))
                 for _ in range(10)]
        assert LinkStream(edges) == LinkStream(list(reversed(edges)))
