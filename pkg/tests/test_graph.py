import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraudgraph.errors import ContractError, ParseError, SchemaError, UsageError
from fraudgraph.graph import (EdgeType, GraphKind, IsolationPolicy, NodeType,
                              build_graph, connected_components, load_graph,
                              neighbors, parse_edge_file, parse_node_file,
                              remove_isolated, require_no_zero_degree,
                              save_graph)

from conftest import make_graph


class TestBuildGraph:
    def test_minimal_account_device_pair(self):
        g = build_graph([("a", NodeType.ACCOUNT), ("d", NodeType.DEVICE)],
                        [("a", "d", EdgeType.DEVICE_USE)])
        assert g.num_nodes == 2
        assert g.num_edges == 1

    def test_auto_created_account_nodes_from_order_edges(self):
        g = build_graph([], [("b1", "s1", EdgeType.ORDER),
                             ("b1", "s2", EdgeType.ORDER)])
        assert g.num_nodes == 3
        assert g.num_edges == 2
        assert all(g.node_type(n) is NodeType.ACCOUNT for n in ("b1", "s1", "s2"))

    def test_device_use_between_two_accounts_is_schema_error(self):
        with pytest.raises(SchemaError):
            build_graph([("a1", NodeType.ACCOUNT), ("a2", NodeType.ACCOUNT)],
                        [("a1", "a2", EdgeType.DEVICE_USE)])

    def test_conflicting_type_declarations_rejected(self):
        with pytest.raises(SchemaError):
            build_graph([("x", NodeType.ACCOUNT), ("x", NodeType.DEVICE)], [])

    def test_device_use_infers_device_endpoint(self):
        g = build_graph([("a", NodeType.ACCOUNT)], [("a", "d", EdgeType.DEVICE_USE)])
        assert g.node_type("d") is NodeType.DEVICE
        g2 = build_graph([], [("u", "m", EdgeType.DEVICE_USE)])
        assert g2.node_type("u") is NodeType.ACCOUNT
        assert g2.node_type("m") is NodeType.DEVICE

    def test_parallel_edges_kept(self):
        g = make_graph([("a", "b"), ("a", "b")])
        assert g.num_edges == 2
        assert g.degree("a") == 2

    def test_negative_weight_rejected(self):
        with pytest.raises(SchemaError):
            build_graph([], [("a", "b", EdgeType.FRIENDSHIP, -1.0)])


class TestParsing:
    def test_node_file_round(self, tmp_path):
        p = tmp_path / "nodes.tsv"
        p.write_text("a\taccount\nd\tdevice\n")
        rows = parse_node_file(str(p))
        assert rows == [("a", NodeType.ACCOUNT), ("d", NodeType.DEVICE)]

    def test_edge_default_weight(self):
        rows = parse_edge_file("a\tb\tfriendship\n")
        assert rows[0][3] == 1.0

    def test_malformed_row_reports_line_number(self):
        with pytest.raises(ParseError) as err:
            parse_node_file("a\taccount\nbroken row\n")
        assert err.value.line == 2

    def test_bad_edge_type_reports_line(self):
        with pytest.raises(ParseError) as err:
            parse_edge_file("a\tb\tnonsense\n")
        assert err.value.line == 1

    def test_serialization_round_trip_bit_exact(self, tmp_path):
        g = build_graph(
            [("a", NodeType.ACCOUNT), ("d", NodeType.DEVICE), ("b", NodeType.ACCOUNT)],
            [("b", "a", EdgeType.TRANSACTION, 2.5),
             ("a", "d", EdgeType.DEVICE_USE),
             ("a", "b", EdgeType.FRIENDSHIP)])
        n1, e1 = tmp_path / "n1.tsv", tmp_path / "e1.tsv"
        save_graph(g, n1, e1)
        g2 = load_graph(str(n1), str(e1))
        n2, e2 = tmp_path / "n2.tsv", tmp_path / "e2.tsv"
        save_graph(g2, n2, e2)
        assert n1.read_bytes() == n2.read_bytes()
        assert e1.read_bytes() == e2.read_bytes()


class TestRemoveIsolated:
    def test_zero_degree_keeps_connected_nodes(self):
        g = make_graph([("a", "b")], nodes=["a", "b", "c"])
        out = remove_isolated(g, IsolationPolicy.ZERO_DEGREE)
        assert sorted(out.node_ids) == ["a", "b"]
        assert out.num_edges == 1

    def test_no_shared_device_example(self):
        g = build_graph(
            [("A1", NodeType.ACCOUNT), ("A2", NodeType.ACCOUNT),
             ("A3", NodeType.ACCOUNT), ("D1", NodeType.DEVICE),
             ("D2", NodeType.DEVICE)],
            [("A1", "D1", EdgeType.DEVICE_USE), ("A2", "D1", EdgeType.DEVICE_USE),
             ("A3", "D2", EdgeType.DEVICE_USE)],
            kind=GraphKind.DEVICE_SHARING)
        out = remove_isolated(g, IsolationPolicy.NO_SHARED_DEVICE)
        assert sorted(out.node_ids) == ["A1", "A2", "D1"]

    def test_empty_graph_both_policies(self):
        g = build_graph([], [], kind=GraphKind.DEVICE_SHARING)
        for policy in IsolationPolicy:
            out = remove_isolated(g, policy)
            assert out.num_nodes == 0
            assert out.num_edges == 0

    def test_no_shared_device_requires_device_sharing_kind(self):
        g = make_graph([("a", "b")], kind=GraphKind.FRIENDSHIP)
        with pytest.raises(UsageError):
            remove_isolated(g, IsolationPolicy.NO_SHARED_DEVICE)

    def test_input_graph_unchanged(self):
        g = make_graph([("a", "b")], nodes=["a", "b", "c"])
        remove_isolated(g, IsolationPolicy.ZERO_DEGREE)
        assert g.num_nodes == 3

    def test_zero_degree_idempotent(self):
        g = make_graph([("a", "b"), ("c", "d")], nodes=["a", "b", "c", "d", "e"])
        once = remove_isolated(g, IsolationPolicy.ZERO_DEGREE)
        twice = remove_isolated(once, IsolationPolicy.ZERO_DEGREE)
        assert once == twice

    def test_no_shared_device_idempotent(self):
        g = build_graph(
            [("A1", NodeType.ACCOUNT), ("A2", NodeType.ACCOUNT),
             ("A3", NodeType.ACCOUNT), ("D1", NodeType.DEVICE),
             ("D2", NodeType.DEVICE), ("D3", NodeType.DEVICE)],
            [("A1", "D1", EdgeType.DEVICE_USE), ("A2", "D1", EdgeType.DEVICE_USE),
             ("A2", "D2", EdgeType.DEVICE_USE), ("A3", "D3", EdgeType.DEVICE_USE)],
            kind=GraphKind.DEVICE_SHARING)
        once = remove_isolated(g, IsolationPolicy.NO_SHARED_DEVICE)
        twice = remove_isolated(once, IsolationPolicy.NO_SHARED_DEVICE)
        assert once == twice

    def test_account_without_devices_removed_under_no_shared_device(self):
        # mixed graph: background friendships carry no device-sharing signal
        g = build_graph(
            [("A1", NodeType.ACCOUNT), ("A2", NodeType.ACCOUNT),
             ("A3", NodeType.ACCOUNT), ("D1", NodeType.DEVICE)],
            [("A1", "D1", EdgeType.DEVICE_USE), ("A2", "D1", EdgeType.DEVICE_USE),
             ("A3", "A1", EdgeType.FRIENDSHIP)],
            kind=GraphKind.DEVICE_SHARING)
        out = remove_isolated(g, IsolationPolicy.NO_SHARED_DEVICE)
        assert sorted(out.node_ids) == ["A1", "A2", "D1"]


class TestNeighbors:
    def test_path_hops(self):
        g = make_graph([("a", "b"), ("b", "c")])
        assert neighbors(g, "a", 1) == {"b"}
        assert neighbors(g, "a", 2) == {"c"}

    def test_triangle_hop_two_empty(self):
        g = make_graph([("a", "b"), ("b", "c"), ("a", "c")])
        assert neighbors(g, "a", 2) == set()

    def test_unknown_node_raises_lookup(self):
        g = make_graph([("a", "b")])
        with pytest.raises(LookupError):
            neighbors(g, "zz", 1)

    def test_hop_below_one_rejected(self):
        g = make_graph([("a", "b")])
        with pytest.raises(UsageError):
            neighbors(g, "a", 0)


class TestConnectedComponents:
    def test_triangle_plus_edge(self):
        g = make_graph([("a", "b"), ("b", "c"), ("a", "c"), ("d", "e")])
        cmap = connected_components(g)
        assert cmap["a"].index == 0 and cmap["a"].size == 3
        assert cmap["d"].index == 1 and cmap["d"].size == 2

    def test_single_node(self):
        g = make_graph([], nodes=["only"])
        cmap = connected_components(g)
        assert cmap["only"].index == 0
        assert cmap["only"].size == 1

    def test_ten_node_path(self):
        names = [f"n{i}" for i in range(10)]
        g = make_graph(list(zip(names, names[1:])))
        cmap = connected_components(g)
        assert all(cmap[n].size == 10 for n in names)

    def test_index_order_follows_smallest_id(self):
        g = make_graph([("z1", "z2"), ("a1", "a2")])
        cmap = connected_components(g)
        assert cmap["a1"].index == 0
        assert cmap["z1"].index == 1


small_graphs = st.lists(
    st.tuples(st.integers(0, 7), st.integers(0, 7)), min_size=0, max_size=14)


@given(small_graphs)
@settings(max_examples=60, deadline=None)
def test_component_sizes_sum_to_node_count(pairs):
    edges = [(f"n{a}", f"n{b}") for a, b in pairs if a != b]
    nodes = [f"n{i}" for i in range(8)]
    g = make_graph(edges, nodes=nodes)
    cmap = connected_components(g)
    assert sum(sizes := cmap.sizes().values()) == g.num_nodes
    assert len(sizes) >= 1


@given(small_graphs, st.integers(0, 7))
@settings(max_examples=60, deadline=None)
def test_hop_rings_disjoint_and_cover_component(pairs, start):
    edges = [(f"n{a}", f"n{b}") for a, b in pairs if a != b]
    nodes = [f"n{i}" for i in range(8)]
    g = make_graph(edges, nodes=nodes)
    origin = f"n{start}"
    rings = [neighbors(g, origin, h) for h in range(1, 9)]
    seen = {origin}
    for ring in rings:
        assert not (ring & seen)
        seen |= ring
    component = {nid for nid, entry in connected_components(g).items()
                 if entry.index == connected_components(g)[origin].index}
    assert seen == component


@given(small_graphs)
@settings(max_examples=40, deadline=None)
def test_zero_degree_removal_idempotent(pairs):
    edges = [(f"n{a}", f"n{b}") for a, b in pairs if a != b]
    nodes = [f"n{i}" for i in range(8)]
    g = make_graph(edges, nodes=nodes)
    once = remove_isolated(g, IsolationPolicy.ZERO_DEGREE)
    assert once == remove_isolated(once, IsolationPolicy.ZERO_DEGREE)


def test_require_no_zero_degree_names_offender():
    g = make_graph([("a", "b")], nodes=["a", "b", "lonely"])
    with pytest.raises(ContractError, match="lonely"):
        require_no_zero_degree(g)
