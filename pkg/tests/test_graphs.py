import json
import math

import numpy as np
import pytest

from qgraph.graphs import (
    Edge,
    MetricGraph,
    SwitchDescriptor,
    edge_switch,
    graph_from_dict,
    graph_to_dict,
    load_graph,
    save_graph,
    transfer_length,
    validate,
)
from qgraph.presets import preset

from conftest import random_k4


def test_validate_preset_clean():
    for name in ("goe_a", "goe_b", "gue"):
        assert validate(preset(name).graph) == []


def test_validate_zero_length_edge():
    g = MetricGraph(vertices=(0, 1), edges=(Edge(1, 0, 1, 0.0),))
    violations = validate(g)
    assert len(violations) == 1
    assert "edge 1" in violations[0]


def test_validate_disconnected():
    g = MetricGraph(
        vertices=(0, 1, 2, 3),
        edges=(Edge(1, 0, 1, 1.0), Edge(2, 2, 3, 1.0)),
    )
    assert any("not connected" in v for v in validate(g))


def test_validate_isolated_vertex():
    g = MetricGraph(vertices=(0, 1, 2), edges=(Edge(1, 0, 1, 1.0),))
    violations = validate(g)
    assert any("vertex 2" in v for v in violations)


def test_edge_switch_goe_a_cables():
    # cables 3 and 5 meeting at vertex a swap their far endpoints
    g = preset("goe_a").graph
    sw = SwitchDescriptor(pivot=0, edge_a=3, edge_b=5)
    out = edge_switch(g, sw)
    e3, e5 = out.edge_by_id(3), out.edge_by_id(5)
    assert e3.length == 0.170 and e5.length == 0.243
    assert {e3.u, e3.v} == {0, 2}
    assert {e5.u, e5.v} == {0, 1}
    assert out.total_length == g.total_length


def test_edge_switch_at_vertex_b():
    # cables 2 and 3 keep their connectivity in vertex b
    g = preset("goe_b").graph
    sw = SwitchDescriptor(pivot=1, edge_a=3, edge_b=2)
    out = edge_switch(g, sw)
    e2, e3 = out.edge_by_id(2), out.edge_by_id(3)
    assert 1 in (e2.u, e2.v) and 1 in (e3.u, e3.v)
    assert {e2.u, e2.v} == {0, 1}  # edge 2 now runs b-a
    assert {e3.u, e3.v} == {1, 2}  # edge 3 now runs b-c


def test_edge_switch_parallel_edges_isomorphic():
    g = MetricGraph(
        vertices=(0, 1),
        edges=(Edge(1, 0, 1, 0.4), Edge(2, 0, 1, 0.7)),
    )
    out = edge_switch(g, SwitchDescriptor(pivot=0, edge_a=1, edge_b=2))
    assert out.canonical_edges() == g.canonical_edges()


def test_edge_switch_involution(rng):
    for _ in range(20):
        g = random_k4(rng, phase_scale=1.0)
        sw = SwitchDescriptor(pivot=0, edge_a=1, edge_b=2)
        twice = edge_switch(edge_switch(g, sw), sw)
        assert twice.canonical_edges() == g.canonical_edges()


def test_edge_switch_preserves_degree_sequence():
    g = preset("goe_a").graph
    out = edge_switch(g, SwitchDescriptor(pivot=0, edge_a=3, edge_b=5))
    for v in g.vertices:
        assert out.degree(v) == g.degree(v)


def test_edge_switch_rejects_bad_descriptor():
    g = preset("goe_a").graph
    with pytest.raises(ValueError):
        edge_switch(g, SwitchDescriptor(pivot=0, edge_a=3, edge_b=3))
    with pytest.raises(ValueError):
        edge_switch(g, SwitchDescriptor(pivot=0, edge_a=3, edge_b=2))  # 2 not at a
    gl = MetricGraph(
        vertices=(0, 1),
        edges=(Edge(1, 0, 0, 0.3), Edge(2, 0, 1, 0.5), Edge(3, 0, 1, 0.4)),
    )
    with pytest.raises(ValueError):
        edge_switch(gl, SwitchDescriptor(pivot=0, edge_a=1, edge_b=2))  # loop at pivot


def test_edge_switch_reanchors_phases():
    # stored direction of edge 2 points into the pivot; its pivot-to-far
    # phase is the negated stored value and must survive the switch
    g = MetricGraph(
        vertices=(0, 1, 2),
        edges=(Edge(1, 0, 1, 0.5, 0.3), Edge(2, 2, 0, 0.7, 0.9), Edge(3, 1, 2, 0.4)),
    )
    out = edge_switch(g, SwitchDescriptor(pivot=0, edge_a=1, edge_b=2))
    e1, e2 = out.edge_by_id(1), out.edge_by_id(2)
    assert (e1.u, e1.v, e1.phase_per_m) == (0, 2, 0.3)
    assert (e2.u, e2.v, e2.phase_per_m) == (0, 1, -0.9)


def test_transfer_length_paper_step():
    g = preset("goe_a").graph
    out = transfer_length(g, from_edge=2, to_edge=1, delta=0.005)
    assert out.edge_by_id(1).length == pytest.approx(0.702, abs=1e-12)
    assert out.edge_by_id(2).length == pytest.approx(0.607, abs=1e-12)
    assert out.total_length == g.total_length


def test_transfer_length_identity_and_errors():
    g = preset("goe_a").graph
    assert transfer_length(g, 2, 1, 0.0) is g
    with pytest.raises(ValueError):
        transfer_length(g, 2, 1, g.edge_by_id(2).length)
    with pytest.raises(ValueError):
        transfer_length(g, 2, 1, -0.1)


def test_transfer_preserves_total_bit_for_bit(rng):
    for _ in range(200):
        g = random_k4(rng)
        ids = [e.id for e in g.edges]
        a, b = rng.choice(ids, size=2, replace=False)
        delta = float(rng.uniform(0.0, 0.9) * g.edge_by_id(int(a)).length)
        out = transfer_length(g, int(a), int(b), delta)
        assert out.total_length == g.total_length


def test_graph_json_roundtrip(tmp_path, rng):
    g = random_k4(rng, phase_scale=2.0)
    path = tmp_path / "g.json"
    save_graph(g, path)
    back = load_graph(path)
    assert back.canonical_edges() == g.canonical_edges()
    for e_in, e_out in zip(g.edges, back.edges):
        assert e_in.length == e_out.length  # exact, full float precision
        assert e_in.phase_per_m == e_out.phase_per_m


def test_graph_file_schema_fields(tmp_path):
    g = preset("goe_a").graph
    path = tmp_path / "g.json"
    save_graph(g, path)
    data = json.loads(path.read_text())
    assert data["version"] == 1
    assert set(data) == {"version", "vertices", "edges", "metadata"}
    assert set(data["edges"][0]) == {"id", "u", "v", "length_m", "phase_per_m"}


def test_graph_from_dict_rejects_bad_version():
    with pytest.raises(ValueError):
        graph_from_dict({"version": 99, "vertices": [], "edges": []})


def test_preset_goe_a_numbers():
    p = preset("goe_a")
    g = p.graph
    assert g.total_length == pytest.approx(2.248, abs=1e-12)
    assert g.edge_by_id(1).length == 0.697
    assert g.edge_by_id(2).length == 0.612
    assert g.edge_by_id(3).length == 0.170
    assert g.edge_by_id(5).length == 0.243
    assert p.sweep.step_count == 10
    assert p.sweep.step_delta == 0.005
    assert p.sweep.switch == SwitchDescriptor(pivot=0, edge_a=3, edge_b=5)


def test_preset_goe_b_numbers():
    p = preset("goe_b")
    assert p.graph.total_length == pytest.approx(2.248, abs=1e-12)
    assert p.graph.edge_by_id(2).length == 0.327
    assert p.graph.edge_by_id(3).length == 0.170
    assert p.sweep.switch.pivot == 1


def test_preset_gue_numbers():
    p = preset("gue")
    assert p.graph.total_length == pytest.approx(2.918, abs=1e-12)
    assert p.graph.edge_by_id(2).length == 0.327
    assert p.graph.edge_by_id(3).length == 0.170
    assert p.sweep.step_count == 7
    assert all(e.phase_per_m != 0.0 for e in p.graph.edges)


def test_preset_unknown_name():
    with pytest.raises(ValueError):
        preset("gse")
