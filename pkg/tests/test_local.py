from fractions import Fraction
from itertools import combinations_with_replacement, permutations

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from invring.graph_core import Graph, complete_graph, is_isomorphic, parse_edge_list, subgraph_count
from invring.linalg_exact import matvec, transpose
from invring.local import (
    PRINTED_ARRAY,
    PRINTED_D1,
    PRINTED_D12,
    PRINTED_E1,
    PRINTED_E1_INV,
    PRINTED_E12,
    PRINTED_P12,
    LocalGraph,
    LocalParamTensor,
    ProductOutsidePoset,
    build_local_posets,
    custom_local_poset,
    degree_sequence_tensor,
    extract_tensor,
    finitely_generated_check,
    glue,
    local_canonical,
    local_eval,
    local_product_coeffs,
    local_sufficient_check,
    neighborhood_sums,
    product_terms,
    reconstruct_restricted,
    restore_global,
    sequence_orbit,
    tensor_consistency_check,
    tensor_from_array,
    unconnected_recursion,
)

from conftest import poset

CUBE = parse_edge_list("01 12 23 30 45 56 67 74 04 15 26 37")


def L(edges, fixed):
    return LocalGraph(parse_edge_list(edges), tuple(fixed))


@pytest.fixture(scope="module")
def seq():
    return build_local_posets(1, 3)


@pytest.fixture(scope="module")
def cseq():
    return build_local_posets(1, 3, connected=True)


def small_graphs(max_degree=3):
    return [h for h in poset(5) if h.edges and max(len(a) for a in h.adjacency().values()) <= max_degree]


# ---------------------------------------------------------------------------
# local graphs and evaluation


def test_fixed_points_are_ordered_and_distinct():
    with pytest.raises(TypeError):
        LocalGraph(Graph([(0, 1)]), [0])
    with pytest.raises(ValueError):
        LocalGraph(Graph([(0, 1)]), (0, 0))
    g = L("01 02 12", (0, 1))
    assert g.interior == Graph([(0, 1)])
    assert g.stripped == parse_edge_list("02 12")


def test_local_eval_examples():
    star = parse_edge_list("45 46 47")
    assert local_eval(L("12 13", (1,)), star, (4,)) == 3
    assert local_eval(L("12 13", (1,)), star, (5,)) == 0
    with pytest.raises(ValueError):
        local_eval(L("12", (1,)), star, (4, 5))


def test_degree_and_two_paths_at_a_vertex(E5):
    edge, cherry = L("01", (0,)), L("01 02", (0,))
    for h in E5:
        for v in h.vertices:
            d = local_eval(edge, h, (v,))
            assert d == len(h.adjacency()[v])
            assert local_eval(cherry, h, (v,)) == (d * d - d) // 2


def test_restore_examples(E4):
    edge = L("01", (0,))
    assert sequence_orbit(edge) == 2
    K4 = complete_graph(4)
    assert restore_global(edge, K4) == 2 * 6
    cherry = L("01 02", (0,))
    assert sequence_orbit(cherry) == 1
    assert restore_global(cherry, K4) == 12 == subgraph_count(cherry.base, K4)


def test_restore_modes_on_e4(E4):
    for g in E4:
        if not g.edges:
            continue
        for k in (1, 2):
            for S in permutations(g.vertices, k):
                lg = LocalGraph(g, S)
                for h in E4:
                    I = subgraph_count(g, h)
                    assert restore_global(lg, h, "i") == sequence_orbit(lg) * I
                    assert restore_global(lg, h, "ii") == I


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 33), st.permutations(list(range(5))), st.integers(1, 3), st.data())
def test_local_canonical_is_relabelling_invariant(i, perm, k, data):
    g = poset(5)[i]
    verts = list(range(5))
    S = tuple(data.draw(st.permutations(verts))[:k])
    a = LocalGraph(g, S)
    m = dict(enumerate(perm))
    b = LocalGraph(g.relabel(m), tuple(m[x] for x in S))
    assert a.key == b.key
    c = local_canonical(a)
    assert c.fixed == tuple(range(k)) and c.key == a.key


# ---------------------------------------------------------------------------
# the trivalent radius-1 posets


def test_trivalent_poset_sizes(seq):
    assert [len(p) for p in seq.levels] == [7, 4, 2, 1]
    assert seq.depth == 4


def test_e1_matrices(seq):
    E1 = seq.level(1)
    assert E1.transform == PRINTED_E1
    assert E1.inverse == PRINTED_E1_INV
    assert seq.scaling(1) == PRINTED_D1


def test_level1_sums(seq):
    zhat = seq.target(1, [9, 14, 1, 4, 2, 0, 0])
    assert zhat == [2, 1, 1, 2, 2, 0, 0]
    assert sum(zhat) == 8


def test_level2_against_printed_matrices(seq):
    E12 = seq.level(2)
    # the K4 member has no parent in the 3 x 3 printed restriction
    keep = [t for t in range(len(E12)) if len(E12[t]) < 6]
    R = E12.restrict(keep)
    assert R.transform == PRINTED_E12
    P = seq.projector(2)
    assert [P[t] for t in keep] == PRINTED_P12
    assert [seq.scaling(2)[t] for t in keep] == PRINTED_D12


def test_level2_target(seq):
    z8 = seq.level(1).unit(4)
    target = seq.target(2, z8)
    assert target[:2] == [1, 2] and not any(target[2:])


def test_reconstructible(seq):
    ok, witness = seq.is_reconstructible()
    assert ok and witness is None


def test_connected_family(cseq):
    assert [len(p) for p in cseq.levels] == [4, 3, 2, 1]
    for lvl in cseq.levels:
        for g in lvl:
            assert g.is_s_connected() or g.k == len(g.vertices)


def test_radius_two_needs_hosts():
    with pytest.raises(ValueError):
        build_local_posets(2, 3)
    seq2 = build_local_posets(2, 3, hosts=[CUBE])
    t = extract_tensor(CUBE, seq2, depth=2)
    assert tensor_consistency_check(t, complete=False).passed


# ---------------------------------------------------------------------------
# sufficiency and unconnected invariants


def test_local_sufficient_check(cseq):
    P = cseq.level(1)
    for t in range(len(P)):
        res = local_sufficient_check(P.unit(t), P)
        assert res.status == "graphic"
        assert res.multiplicities == [int(i == t) for i in range(len(P))]
    m = [2, 0, 1, 0]
    z = matvec(transpose(P.transform), m)
    res = local_sufficient_check(z, P)
    assert res.multiplicities == m
    assert P.vector(res.witness.base, res.witness.fixed) == z
    neg = matvec(transpose(P.transform), [1, -1, 0, 0])
    assert local_sufficient_check(neg, P).status == "inconclusive"


def test_unconnected_recursion(cseq):
    C = cseq.level(1)
    assert unconnected_recursion({1: 1}, {1: 1}, C) == 1
    assert unconnected_recursion({0: 2}, {0: 3}, C) == 3
    for target, host in (({0: 1, 1: 1}, {1: 2, 2: 1}), ({0: 2}, {1: 1, 3: 1}), ({1: 2}, {2: 2})):
        t = glue([(C[i], m) for i, m in target.items()], 1)
        h = glue([(C[i], m) for i, m in host.items()], 1)
        assert unconnected_recursion(target, host, C) == local_eval(t, h.base, h.fixed)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 3), st.integers(0, 3), st.integers(0, 3))
def test_additivity_over_glued_pieces(gi, ai, bi, k):
    cseq = build_local_posets(1, 3, connected=True)
    C = cseq.level(1)
    g, A, B = C[gi], C[ai], C[bi]
    both = glue([(A, 1), (B, 1)], 1)
    S = (0,)
    lhs = local_eval(g, both.base, S)
    rhs = local_eval(g, local_canonical(A).base, S) + local_eval(g, local_canonical(B).base, S)
    assert lhs == rhs


@pytest.mark.parametrize("a,b", [
    (L("01", (0,)), L("01", (0,))),
    (L("01 12", (0,)), L("01", (0,))),
    (L("02", (0, 1)), L("13", (0, 1))),
    (L("02 12", (0, 1)), L("03", (0, 1))),
])
def test_unconnected_values_from_connected_ones(a, b, E5):
    """The glued union of two S-connected graphs via the product relation."""
    terms = product_terms(a, b)
    P = custom_local_poset(terms)
    c = local_product_coeffs(a, b, P)
    u = glue([(a, 1), (b, 1)], a.k)
    ui = P.position(u)
    assert c[ui] > 0
    for g in P:
        assert g.is_s_connected() or g.key == u.key
    for h in E5[::2]:
        for T in permutations(range(5), a.k):
            rest = a_val = local_eval(a, h, T) * local_eval(b, h, T)
            rest -= sum(ci * local_eval(g, h, T) for i, (ci, g) in enumerate(zip(c, P)) if i != ui)
            assert Fraction(rest, c[ui]) == local_eval(u, h, T)
            assert a_val >= 0


# ---------------------------------------------------------------------------
# tensors


def test_array_example_rejected(seq):
    t = tensor_from_array(PRINTED_ARRAY, seq)
    rep = tensor_consistency_check(t)
    assert rep.status == "fail" and rep.failure["level"] == 3
    assert tensor_consistency_check(t, complete=False).passed
    rec = reconstruct_restricted(t)
    assert not rec and rec.report.failure["level"] == 3


def test_cube_roundtrip(seq):
    t = extract_tensor(CUBE, seq)
    assert tensor_consistency_check(t).passed
    g = reconstruct_restricted(t)
    assert g and is_isomorphic(g, CUBE)
    back = LocalParamTensor.from_json(t.to_json(), seq)
    assert back.nodes == t.nodes and tuple(back.z) == tuple(t.z)


def test_single_edge_reconstructs(seq):
    h = parse_edge_list("01")
    g = reconstruct_restricted(extract_tensor(h, seq, depth=2))
    assert g == h


def test_empty_tensor_passes(seq):
    t = LocalParamTensor(seq, "restricted", {1: {}}, (0,) * 7, ())
    assert tensor_consistency_check(t).passed


def test_extracted_tensors_pass(seq):
    for h in small_graphs():
        t = extract_tensor(h, seq)
        assert tensor_consistency_check(t, complete=False).passed
        assert tensor_consistency_check(extract_tensor(h, seq, mode="general"), complete=False).passed
        g = reconstruct_restricted(t)
        assert g and is_isomorphic(g, h)


def test_level1_sums_of_extracted_tensor(seq):
    t = extract_tensor(CUBE, seq)
    for row in neighborhood_sums(t, 1):
        assert all(x == 0 for x in row["residual"])
    assert sum(row["target"][0] for row in neighborhood_sums(t, 1)) >= 0


def test_conjugate_perturbation_fails(seq):
    t = extract_tensor(parse_edge_list("01 12 23"), seq)
    node = (0, 1)
    t.nodes[2][node] = 1 + (t.nodes[2][node] % len(seq.level(2)))
    rep = tensor_consistency_check(t, complete=False)
    assert rep.status == "fail" and rep.failure["level"] == 2


def test_constraint_only_completion_can_be_non_graphic(seq):
    """Eight trivalent vertices: certification rejects completions that reassemble wrongly."""
    star = seq.level(1).position(L("01 02 03", (0,))) + 1
    t = LocalParamTensor(seq, "restricted", {1: {(i,): star for i in range(8)}}, None, tuple(range(8)))
    rep = tensor_consistency_check(t, budget=200000, certify=True)
    assert rep.status in ("pass", "fail", "budget exhausted")
    if rep.passed:
        assert rep.certified and extract_tensor(rep.witness, seq, depth=1).nodes[1] == t.nodes[1]


def test_budget_exhaustion_is_distinct(seq):
    t = LocalParamTensor(seq, "restricted", {1: {(i,): 4 for i in range(8)}}, None, tuple(range(8)))
    rep = tensor_consistency_check(t, budget=3)
    assert rep.status == "budget exhausted"


def test_degree_sequences_match_classical_test():
    for n in range(1, 7):
        for ds in combinations_with_replacement(range(n), n):
            ds = sorted(ds, reverse=True)
            rep = finitely_generated_check(degree_sequence_tensor(ds), complete=True)
            assert rep.status != "budget exhausted"
            assert rep.passed == nx.is_graphical(ds), ds


def test_connected_family_roundtrip(cseq):
    for h in small_graphs():
        t = extract_tensor(h, cseq, mode="general")
        assert finitely_generated_check(t).passed


def test_connected_perturbation_fails(cseq):
    t = extract_tensor(parse_edge_list("01 12 23"), cseq, mode="general")
    node = (1, 2)
    vec = list(t.nodes[2][node])
    vec[0] += 1
    t.nodes[2][node] = tuple(vec)
    assert not finitely_generated_check(t).passed


# ---------------------------------------------------------------------------
# products


def test_vertex_edge_square():
    a = L("01", (0,))
    P = custom_local_poset([a, L("01 02", (0,))])
    assert local_product_coeffs(a, a, P) == [1, 2]


def test_product_with_empty_factor():
    a = L("01", (0,))
    e = LocalGraph(Graph(), (0,))
    P = custom_local_poset([a])
    assert local_product_coeffs(a, e, P) == [1]


def test_disjoint_fixed_points_on_k5():
    a, b = L("05", (0,)), L("16", (1,))
    P = custom_local_poset(product_terms(a, b))
    c = local_product_coeffs(a, b, P)
    K5 = complete_graph(5)
    for T in permutations(range(5), 2):
        lhs = local_eval(a, K5, T[:1]) * local_eval(b, K5, T[1:])
        assert lhs == sum(ci * local_eval(g, K5, T) for ci, g in zip(c, P))


def test_product_outside_poset():
    a = L("01", (0,))
    with pytest.raises(ProductOutsidePoset):
        local_product_coeffs(a, a, custom_local_poset([a]))
