import pytest

from stringnet.geometry import SquareTorus, build_brickwork, gate_spans


def test_gate_spans_offsets():
    assert gate_spans(8, 0, 2) == [0, 2, 4, 6]
    assert gate_spans(8, 1, 2) == [1, 3, 5]  # end sites pass through
    assert gate_spans(8, 0, 4) == [0, 4]
    assert gate_spans(8, 1, 4) == [2]


def test_brickwork_bookkeeping():
    patch = build_brickwork(4, 3)
    assert len(patch.gates) == 5  # 2 + 1 + 2
    assert patch.n_edges == 4 + 2 * 5
    assert patch.n_faces == 5 + 5
    # a passthrough edge survives the odd layer: site 0's live edge after
    # layer 0 is consumed only in layer 2
    g0 = patch.gate_at(0, 0)
    g2 = patch.gate_at(2, 0)
    assert g0.out_edges[0] == g2.in_edges[0]
    # every face pair of an edge is consistent with its creating gate
    for g in patch.gates:
        left, mid_in, right, mid_out = g.faces
        e0, e1 = g.out_edges
        assert patch.edge_faces[e0] == (left, mid_out)
        assert patch.edge_faces[e1] == (mid_out, right)
    layout = patch.layout()
    assert layout[g0.vid] == (0, 0)


def test_brickwork_rejects_bad_width():
    with pytest.raises(ValueError):
        build_brickwork(5, 2)
    with pytest.raises(ValueError):
        build_brickwork(6, 2, arity=4)


def test_torus_legs_and_plaquettes():
    t = SquareTorus(2, 2)
    assert t.n_edges == 8
    a, b, c, d = t.vertex_legs(0, 0)
    assert c == t.h_edge(0, 0) and d == t.v_edge(0, 0)
    assert a == t.h_edge(1, 0)  # wraps
    # plaquette support is the 12 edges around its four corners
    assert len(t.plaquette_support(0, 0)) <= 12
    t3 = SquareTorus(3, 3)
    assert len(t3.plaquette_support(0, 0)) == 12
    # every edge shows up in exactly two vertex leg tuples
    seen = {}
    for legs in t.all_vertex_legs():
        for e in legs:
            seen[e] = seen.get(e, 0) + 1
    assert all(v == 2 for v in seen.values())


def test_torus_face_pairs_are_consistent():
    t = SquareTorus(3, 2)
    # each edge's face pair must appear among its adjacent plaquettes
    for e in range(t.n_edges):
        fp, fm = t.edge_face_pair(e)
        assert 0 <= fp < t.W * t.H and 0 <= fm < t.W * t.H
    # cut edge lists
    assert len(t.vertical_cut_edges()) == t.H
    assert len(t.horizontal_cut_edges()) == t.W
