from fractions import Fraction
from itertools import combinations, product
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from invring.constraints import (
    ALL_FAMILIES,
    INTEGRAL,
    LINEAR,
    NONNEG,
    PRINTED_E4_L,
    PRINTED_E4_U,
    PRODUCTS,
    ConstraintSystem,
    InvalidInequality,
    enumerate_r_graphic,
    format_enumerator,
    lift_inequality,
    raja3_bounds,
    raja3_curve,
    scaling_matrix,
    triangular_bounds,
    validate_bound_matrices,
    weakly_graphic_check,
)
from invring.gposet import etransform, evaluate_vector, printed_alignment, permute_matrix, permute_vector
from invring.graph_core import Graph, complete_graph, parse_edge_list, subgraph_count

from conftest import graphs, poset


def test_scaling_matrix(E4):
    D = permute_vector(list(scaling_matrix(E4, 6).entries), printed_alignment(E4))
    # the triangle a12a13a23 has cv = 3, so its entry is C(3, 1)
    assert D == [15, 6, 1, 3, 1, 1, 3, 1, 1, 1, 1]
    assert list(scaling_matrix(E4, 4).entries) == [1] * 11
    with pytest.raises(ValueError):
        scaling_matrix(E4, 3)


def test_lifting_identity(E4, E6):
    """Summing I(g) over the 4-vertex induced subgraphs of h gives D I(g)(h)."""
    D = scaling_matrix(E4, 6)
    for h in E6[::7]:
        verts = range(6)
        sums = [0] * len(E4)
        for S in combinations(verts, 4):
            a = Graph(e for e in h.edges if e[0] in S and e[1] in S)
            for i, g in enumerate(E4):
                sums[i] += subgraph_count(g, a)
        assert sums == [d * subgraph_count(g, h) for d, g in zip(D.entries, E4)]


def test_lift_inequality_rejects_invalid(E4):
    perm = printed_alignment(E4)
    c = [0] * 11
    # -1 + 2 I(a12) - I(a12 a13) <= 0 fails on a single edge
    for k, v in ((0, -1), (1, 2), (3, -1)):
        c[perm[k]] = v
    with pytest.raises(InvalidInequality) as exc:
        lift_inequality(c, E4, 6)
    assert exc.value.witness == parse_edge_list("01")


def test_lift_inequality_zero_and_valid(E4, E6):
    assert lift_inequality([0] * 11, E4, 6) == [0] * 11
    # 3 I(triangle) <= I(a12 a13) holds on every 4-vertex graph
    c = [0] * 11
    c[E4.find("12 13 23")] = 3
    c[E4.find("12 13")] = -1
    lifted = lift_inequality(c, E4, 6)
    for h in E6:
        z = evaluate_vector(E4, h, 6).values
        assert sum(a * x for a, x in zip(lifted, z)) <= 0


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=11, max_size=11))
def test_accepted_lifts_are_sound(c):
    p = poset(4)
    try:
        lifted = lift_inequality(c, p, 6)
    except InvalidInequality:
        return
    for h in poset(6)[::5]:
        z = evaluate_vector(p, h, 6).values
        assert sum(a * x for a, x in zip(lifted, z)) <= 0


def test_necessity_e4_up_to_e6(E4):
    for n in (4, 5, 6):
        system = ConstraintSystem(E4, n)
        for h in poset(n):
            assert weakly_graphic_check(evaluate_vector(E4, h, n), E4, n, system=system).passed


def test_necessity_e5_sampled(E5):
    system = ConstraintSystem(E5, 7)
    for h in poset(6)[::9]:
        assert weakly_graphic_check(evaluate_vector(E5, h, 7), E5, 7, system=system).passed


def test_check_reports_families(E4):
    z = [1] + [0] * 10
    assert weakly_graphic_check(z, E4, 6).passed
    bad = [1, 1, 5] + [0] * 8
    rep = weakly_graphic_check(bad, E4, 6)
    assert not rep.passed and not rep.flags[PRODUCTS]
    assert rep.violations[PRODUCTS]
    frac = [1, Fraction(1, 2)] + [0] * 9
    assert not weakly_graphic_check(frac, E4, 6).flags[INTEGRAL]
    with pytest.raises(ValueError):
        weakly_graphic_check([1, 2], E4, 6)


def test_orthogonal_parameters_sum(E4, E6):
    system = ConstraintSystem(E4, 6)
    for h in E6:
        zh = system.orthogonal(evaluate_vector(E4, h, 6).values)
        assert sum(zh) == comb(6, 4) and min(zh) >= 0


def test_triangular_bounds_contain_actual_values(E4):
    B = triangular_bounds(E4, 6)
    for h in poset(6)[::3]:
        z = evaluate_vector(E4, h, 6).values
        for i in range(1, len(z)):
            assert B.lower(i, z) <= z[i] <= B.upper(i, z)


def test_literal_bound_forms_at_n_equals_r(E4):
    B = triangular_bounds(E4, 4)
    rows = etransform(E4).rows()
    assert all(not B.literal_lower_failures(x) for x in rows)
    # the upper form D z <= C(n, r) - U z is not valid as stated: it fails on K4
    assert B.literal_upper_failures(rows[-1])


def test_printed_bound_matrices(E4):
    rows = permute_matrix(etransform(E4).rows(), printed_alignment(E4))
    assert validate_bound_matrices(rows, PRINTED_E4_L, PRINTED_E4_U)[0]
    twice = [[2 * int(i == j) for j in range(11)] for i in range(11)]
    ok, wit = validate_bound_matrices(rows, twice, PRINTED_E4_U)
    assert not ok and wit[0][2] == "lower"


def test_raja3_tight_at_k5():
    lo, hi = raja3_bounds(5, 10)
    assert lo == hi == 30 == subgraph_count(parse_edge_list("12 13"), complete_graph(5))
    lo, hi = raja3_bounds(6, 0)
    assert lo <= 0 <= hi
    with pytest.raises(ValueError):
        raja3_bounds(4, 2)


def test_raja3_holds_on_e6(E6):
    g3 = parse_edge_list("12 13")
    for h in E6:
        lo, hi = raja3_bounds(6, len(h))
        assert lo <= subgraph_count(g3, h) <= hi


def test_raja3_curve_monotone_envelope():
    for z1, lo, hi in raja3_curve(7):
        assert lo <= hi


def test_raja3_implied_by_enumeration():
    p = poset(4)
    g3 = p.find("12 13")
    for z in enumerate_r_graphic(p, 5):
        lo, hi = raja3_bounds(5, z[1])
        assert lo <= z[g3] <= hi


def test_enumeration_at_n_equals_r_gives_rows(E4):
    got = sorted(z.values for z in enumerate_r_graphic(E4, 4))
    assert got == sorted(tuple(r) for r in etransform(E4).rows())


@pytest.mark.parametrize("n", [4, 5, 6])
def test_enumeration_complete_for_linear_family(n):
    """Brute force over a box: exactly the vectors with zhat >= 0 are emitted."""
    p = poset(3)
    system = ConstraintSystem(p, n)
    fams = {NONNEG, INTEGRAL, LINEAR}
    got = {z.values for z in enumerate_r_graphic(p, n, None, fams, system=system)}
    # z = D^-1 E^T zhat with zhat >= 0 summing to C(n, 3) bounds each coordinate
    E = etransform(p).rows()
    top = [max(E[k][i] for k in range(4)) * comb(n, 3) // system.D[i] for i in range(4)]
    expected = set()
    for z in product(*[range(t + 1) for t in top[1:]]):
        z = (1,) + z
        if min(system.orthogonal(z)) >= 0:
            expected.add(z)
    assert got == expected
    graphic = {evaluate_vector(p, h, n).values for h in poset(n)}
    with_products = {z.values for z in enumerate_r_graphic(p, n, system=system)}
    assert graphic <= with_products <= got


@settings(max_examples=10, deadline=None)
@given(st.sets(st.sampled_from(sorted(ALL_FAMILIES - {INTEGRAL, LINEAR})), max_size=2))
def test_fewer_families_accept_more(drop):
    p = poset(4)
    full = {z.values for z in enumerate_r_graphic(p, 5, {1: 4})}
    fams = ALL_FAMILIES - drop
    more = {z.values for z in enumerate_r_graphic(p, 5, {1: 4}, fams)}
    assert full <= more


def test_format_enumerator():
    assert format_enumerator({0: 1, 2: 2, 21: 1}) == "1 + 2*x^2 + x^21"
    assert format_enumerator({1: 3}) == "3*x"


@pytest.mark.parametrize("area", ["integral", "sum over points"])
def test_bound_fitting_lp_on_e5(area, E5):
    """Best quadratic bounds of I(a12 a13) in the edge count over E(5)."""
    from invring.linalg_exact import lp_min
    g3 = parse_edge_list("12 13")
    pts = sorted({(len(h), subgraph_count(g3, h)) for h in E5})
    if area == "integral":
        obj = [-50, Fraction(-1000, 3)]
    else:
        obj = [-sum(z for z, _ in pts), -sum(z * z for z, _ in pts)]
    lo = lp_min(obj, [[z, z * z] for z, _ in pts], [t for _, t in pts])
    up = lp_min([-c for c in obj], [[-z, -z * z] for z, _ in pts], [-t for _, t in pts])
    for (a, b), sign in ((lo.x, 1), (up.x, -1)):
        assert all(sign * (a * z + b * z * z - t) <= 0 for z, t in pts)
    assert lo.x == [-1, Fraction(2, 5)] and up.x == [Fraction(1, 2), Fraction(1, 4)]
    for z in range(11):
        assert raja3_bounds(5, z) == (lo.x[0] * z + lo.x[1] * z * z, up.x[0] * z + up.x[1] * z * z)
