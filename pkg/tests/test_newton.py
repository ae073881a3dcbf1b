from fractions import Fraction
from itertools import combinations
from math import comb

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from invring.graph_core import N_SYMBOL, Graph, complement_count, complete_graph, parse_edge_list, subgraph_count
from invring.newton import (
    ConversionTables,
    SigmaExpression,
    b_eval,
    b_from_h,
    d_coeff,
    d_coeff_recursive,
    elem_sym_prefix,
    h_eval,
    h_support,
    is_valid_index,
    kbar_expansion,
    lift_sigma_inequality,
    load_syzygies,
    omega,
    sigma_etable,
    sigma_eval,
    sigma_from_b,
    sigma_from_h,
    sigma_from_h_coeffs,
    sigma_indices,
    syzygy_check,
)

from conftest import graphs, poset

n = N_SYMBOL


def all_indices(vmax):
    return [(e, v) for v in range(vmax + 1) for e in range(comb(v, 2) + 1) if is_valid_index(e, v)]


# ---------------------------------------------------------------------------
# brute-force oracles, independent of the package's helpers


def oracle_sigma(h: Graph, e: int, v: int) -> int:
    if e == 0:
        return int(v == 0)
    return sum(1 for sub in combinations(sorted(h.edges), e)
               if len({x for ed in sub for x in ed}) == v)


def oracle_h(h: Graph, nn: int, e: int, v: int) -> int:
    verts = set(range(nn)) | set(h.vertices)
    return sum(sum(1 for a, b in h.edges if a in S and b in S) ** e
               for S in map(set, combinations(sorted(verts), v)))


def test_omega():
    assert [omega(x) for x in (0, 1, 2, 3, 4, 6, 7)] == [0, 2, 3, 3, 4, 4, 5]
    with pytest.raises(ValueError):
        omega(-1)


def test_elem_sym_prefix():
    assert elem_sym_prefix(2, 3) == 11
    assert elem_sym_prefix(0, 7) == 1
    assert elem_sym_prefix(4, 3) == 0
    x = sympy.Symbol("x")
    poly = sympy.Poly(sympy.prod([1 + j * x for j in range(1, 6)]), x)
    assert [elem_sym_prefix(a, 5) for a in range(6)] == [int(poly.coeff_monomial(x ** a)) for a in range(6)]


def test_evaluations_on_triangle():
    K3 = complete_graph(3)
    assert sigma_eval(K3, 2, 3) == 3
    assert h_eval(K3, 3, 2, 3) == 9
    assert b_eval(K3, 3, 2, 3) == 3
    assert sigma_eval(complete_graph(4), 6, 4) == 1
    assert sigma_eval(Graph(), 0, 0) == 1
    with pytest.raises(ValueError):
        sigma_eval(K3, 4, 3)


@settings(max_examples=40, deadline=None)
@given(graphs(6))
def test_sigma_and_h_against_oracles(h):
    nn = max(6, h.cv)
    for e, v in all_indices(5):
        assert sigma_eval(h, e, v) == oracle_sigma(h, e, v)
    for e, v in [(1, 2), (1, 3), (2, 3), (3, 4), (2, 5)]:
        assert h_eval(h, nn, e, v) == oracle_h(h, nn, e, v)


def test_d_coefficients():
    assert d_coeff(0, 5) == 1
    assert sympy.expand(d_coeff(1, 4) + (n - 3)) == 0
    for i in range(6):
        for v in range(i, 8):
            assert sympy.expand(d_coeff(i, v) - d_coeff_recursive(i, v)) == 0
            assert d_coeff(i, v, 9) == Fraction(int(d_coeff(i, v).subs(n, 9)))


def test_sign_identity_used_in_the_b_to_sigma_step():
    for i in range(1, 12):
        assert (-1) ** i == sum((-1) ** (i - j + 1) * comb(i, j) for j in range(1, i + 1))


def test_composite_map_on_e5(E5):
    idx = all_indices(5)
    supp = h_support(idx)
    for g in E5:
        hv = {k: h_eval(g, 5, *k) for k in supp}
        s = sigma_from_h(hv, 5, idx)
        assert all(s[k] == sigma_eval(g, *k) for k in idx)


def test_composite_map_on_e6_sampled(E6):
    idx = all_indices(6)
    supp = h_support(idx)
    tables = ConversionTables(6, tuple(idx))
    for g in E6[::5]:
        hv = {k: h_eval(g, 6, *k) for k in supp}
        s = tables.apply(hv)
        assert all(s[k] == sigma_eval(g, *k) for k in idx)


def test_factor_maps_compose(E5):
    idx = all_indices(5)
    supp = h_support(idx)
    b_idx = sorted({(e, w) for e, v in idx for w in range(omega(e), v + 1)})
    for g in E5[::4]:
        hv = {k: h_eval(g, 6, *k) for k in supp}
        bv = b_from_h(hv, b_idx)
        assert all(bv[k] == b_eval(g, 6, *k) for k in b_idx)
        assert sigma_from_b(bv, 6, idx) == sigma_from_h(hv, 6, idx)
        for e in range(1, 7):
            w = omega(e)
            assert sigma_eval(g, e, w) == b_eval(g, 6, e, w)


def test_binomial_split(E5):
    """sigma_e^v = b_e^v - sum_{w<v} C(n-w, v-w) sigma_e^w."""
    nn = 7
    for g in E5[::3]:
        for e, v in all_indices(5):
            if e == 0:
                continue
            rest = sum(comb(nn - w, v - w) * sigma_eval(g, e, w)
                       for w in range(omega(e), v))
            assert sigma_eval(g, e, v) == b_eval(g, nn, e, v) - rest


def test_symbolic_and_numeric_coefficients_agree():
    for e, v in all_indices(5):
        sym = sigma_from_h_coeffs(e, v)
        num = sigma_from_h_coeffs(e, v, 8)
        assert {k: Fraction(str(c.subs(n, 8))) for k, c in sym.items()} == \
            {k: c for k, c in num.items()}


# ---------------------------------------------------------------------------
# independent sets


def test_kbar3_h_form():
    ex = kbar_expansion(3)
    h = ex.h_terms
    assert sympy.expand(h[(1, 2)] - (2 - n)) == 0
    assert h[(1, 3)] == sympy.Rational(-5, 6)
    assert h[(2, 3)] == 1
    assert h[(3, 3)] == sympy.Rational(-1, 6)
    assert sympy.expand(ex.constant - n * (n - 1) * (n - 2) / 6) == 0


def test_kbar4_h_form():
    h = kbar_expansion(4).h_terms
    printed = [sympy.Rational(*r) for r in
               ((-29, 20), (203, 90), (-49, 48), (35, 144), (-7, 240), (1, 720))]
    got = [h[(f, 4)] for f in range(1, 7)]
    assert got == printed
    assert sympy.expand(h[(1, 2)] + (n - 3) * (n - 2) / 2) == 0


@pytest.mark.parametrize("k", [3, 4, 5])
def test_kbar_matches_complement_count(k, E5):
    for nn in (5, 6):
        if nn < k:
            continue
        ex = kbar_expansion(k).substitute(nn)
        for g in E5:
            hv = {key: h_eval(g, nn, *key) for key in ex.h_terms}
            sv = {key: sigma_eval(g, *key) for key in ex.sigma_terms}
            direct = complement_count(complete_graph(k), g, nn)
            assert ex.evaluate_h(hv) == direct == ex.evaluate_sigma(sv)


def test_kbar_rejects_small_k():
    with pytest.raises(ValueError):
        kbar_expansion(1)


# ---------------------------------------------------------------------------
# syzygies


def test_bundled_syzygies_parse():
    exprs = load_syzygies()
    assert len(exprs) == 13
    for ex in exprs:
        assert SigmaExpression.parse(str(ex)) == ex


def test_syzygies_vanish_on_e6(E6):
    res = syzygy_check(load_syzygies(), E6)
    assert all(r.passed for r in res)


def test_edge_square_syzygy(E6):
    ex = SigmaExpression.parse("-s(1,2)*s(1,2) + 2*s(2,4) + 2*s(2,3) + s(1,2)")
    assert syzygy_check([ex], E6)[0].passed


def test_wrong_expression_gets_witnesses(E5):
    ex = SigmaExpression.parse("s(1,2)*s(1,2) - s(1,2)")
    res = syzygy_check([ex], E5)[0]
    assert not res.passed and res.witnesses
    g, val = res.witnesses[0]
    m = len(g)
    assert val == m * m - m


def test_zero_expression():
    assert syzygy_check([SigmaExpression.parse("0")], poset(4))[0].passed


@pytest.mark.parametrize("bad", ["s(1,2)*", "2*s(4,3)", "s(1,2)+q"])
def test_parse_errors(bad):
    with pytest.raises(ValueError):
        SigmaExpression.parse(bad)


@pytest.mark.extended
def test_syzygies_vanish_on_e8():
    res = syzygy_check(load_syzygies(), poset(8))
    assert all(r.passed for r in res)


# ---------------------------------------------------------------------------
# the sigma table


def test_sigma_table(E4):
    cols, rows = sigma_etable(E4)
    assert cols[:3] == [(1, 2), (2, 3), (3, 3)]
    assert cols == sigma_indices(4)
    assert rows[0] == [0] * len(cols)
    K3 = rows[E4.find("12 13 23")]
    assert K3[:3] == [3, 3, 1]
    assert [r[0] for r in rows] == [len(g) for g in E4]


def test_lift_sigma_inequality(E4, E6):
    cols = sigma_indices(4)
    # triangles are at most a third of the 2-paths: 3 s(3,3) - s(2,3) <= 0
    c = [0] * len(cols)
    c[cols.index((3, 3))] = 3
    c[cols.index((2, 3))] = -1
    lifted = lift_sigma_inequality(c, E4, 6)
    for g in E6:
        assert sum(a * sigma_eval(g, *k) for a, k in zip(lifted, cols)) <= 0
