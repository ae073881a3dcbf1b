"""G-posets of graphs, E-transforms and the product formula.

A G-poset here is an ordered list of isomorphism classes.  Its E-transform
has entries ``e[i][j] = I(g_j)(g_i)`` and is lower unitriangular because the
order refines subgraph containment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial, gcd
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from sympy.utilities.iterables import partitions

from .graph_core import (
    Code,
    Graph,
    canonical_form,
    enumerate_graphs,
    format_edge_list,
    graph_sort_key,
    parse_edge_list,
    subgraph_count,
)
from .linalg_exact import matmul, rat_inverse


@dataclass(frozen=True)
class GPoset:
    graphs: Tuple[Graph, ...]
    kind: str                      # "full", "bounded" or "custom"
    n: int
    d: Optional[int] = None
    index: Dict[Code, int] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if not self.index:
            self.index.update({canonical_form(g).code: i for i, g in enumerate(self.graphs)})

    def __len__(self) -> int:
        return len(self.graphs)

    def __getitem__(self, i: int) -> Graph:
        return self.graphs[i]

    def __iter__(self):
        return iter(self.graphs)

    def position(self, g: Graph) -> int:
        """Index of the class of ``g``; KeyError when absent."""
        return self.index[canonical_form(g).code]

    def find(self, text: str) -> int:
        return self.position(parse_edge_list(text))

    def __contains__(self, g: Graph) -> bool:
        return canonical_form(g).code in self.index

    @property
    def cvs(self) -> List[int]:
        return [g.cv for g in self.graphs]

    @property
    def sizes(self) -> List[int]:
        return [len(g) for g in self.graphs]

    def labels(self) -> List[str]:
        return [format_edge_list(g) or "0" for g in self.graphs]

    def is_complete(self) -> bool:
        """Every subgraph of a member is a member."""
        if self.kind in ("full", "bounded"):
            return True
        for g in self.graphs:
            for a in enumerate_graphs(g.cv, len(g)):
                if a not in self and subgraph_count(a, g):
                    return False
        return True


def build_gposet(n: int, d: Optional[int] = None) -> GPoset:
    """E(n) or E(n, d), ordered by (edge count, cv, canonical edge sequence)."""
    gs = tuple(enumerate_graphs(n, d))
    return GPoset(gs, "full" if d is None else "bounded", n, d)


def custom_gposet(graphs: Sequence[Graph], n: Optional[int] = None) -> GPoset:
    """Poset from an explicit list, sorted into containment compatible order."""
    seen: Dict[Code, Graph] = {}
    for g in graphs:
        seen.setdefault(canonical_form(g).code, Graph(canonical_form(g).code))
    gs = sorted(seen.values(), key=graph_sort_key)
    if not gs or gs[0].edges:
        gs.insert(0, Graph())
    n = max(g.cv for g in gs) if n is None else n
    return GPoset(tuple(gs), "custom", n)


# ---------------------------------------------------------------------------
# E-transform


@dataclass(frozen=True)
class ETransform:
    entries: Tuple[Tuple[int, ...], ...]
    poset: GPoset

    def __getitem__(self, ij: Tuple[int, int]) -> int:
        return self.entries[ij[0]][ij[1]]

    def rows(self) -> List[List[int]]:
        return [list(r) for r in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


def etransform(p: GPoset) -> ETransform:
    if len(p) == 0:
        raise ValueError("empty poset")
    m = len(p)
    rows = []
    for i in range(m):
        gi = p[i]
        rows.append(tuple(subgraph_count(p[j], gi) if j <= i else 0 for j in range(m)))
    for i in range(m):
        for j in range(i + 1, m):
            if subgraph_count(p[j], p[i]):
                raise ValueError("poset order is not containment compatible")
    return ETransform(tuple(rows), p)


def sign_inverse(E: ETransform) -> List[List[int]]:
    """b_ij = (-1)^(|g_i| - |g_j|) e_ij."""
    sz = E.poset.sizes
    return [[(-1) ** ((sz[i] - sz[j]) % 2) * E.entries[i][j] for j in range(len(E))]
            for i in range(len(E))]


def etransform_inverse(E: ETransform) -> List[List[Fraction]]:
    """Exact inverse; the signed formula is used (and checked) on complete posets."""
    if E.poset.is_complete():
        B = sign_inverse(E)
        prod = matmul(E.rows(), B)
        m = len(E)
        if any(prod[i][j] != int(i == j) for i in range(m) for j in range(m)):
            raise ArithmeticError("signed inverse failed on a complete poset")
        return [[Fraction(x) for x in r] for r in B]
    return rat_inverse(E.rows())


# ---------------------------------------------------------------------------
# product formula


def product_domain(p: GPoset, i: int, j: int) -> bool:
    cv = p.cvs
    ok = cv[i] + cv[j] <= p.n
    if p.d is not None:
        ok = ok and p.sizes[i] + p.sizes[j] <= p.d
    return ok


def product_coeffs(p: GPoset, i: int, j: int, E: Optional[ETransform] = None) -> List[int]:
    """c_ij^k with I(g_i) I(g_j) = sum_k c_ij^k I(g_k)."""
    if not product_domain(p, i, j):
        raise ValueError(f"pair ({i}, {j}) is outside the validity domain of the poset")
    E = E or etransform(p)
    sz = p.sizes
    e = E.entries
    m = len(p)
    prod = [e[h][i] * e[h][j] for h in range(m)]
    return [sum((-1) ** ((sz[k] - sz[h]) % 2) * e[k][h] * prod[h] for h in range(k + 1))
            for k in range(m)]


def product_pairs(p: GPoset, max_edges: Optional[int] = None) -> List[Tuple[int, int]]:
    """Pairs i <= j (both nonempty) inside the validity domain."""
    sz = p.sizes
    out = []
    for i in range(1, len(p)):
        for j in range(i, len(p)):
            if not product_domain(p, i, j):
                continue
            if max_edges is not None and sz[i] + sz[j] > max_edges:
                continue
            out.append((i, j))
    return out


# ---------------------------------------------------------------------------
# invariant vectors


@dataclass(frozen=True)
class InvariantVector:
    values: Tuple[int, ...]
    ambient_n: int

    def __post_init__(self):
        if self.values and self.values[0] != 1:
            raise ValueError("value at the empty graph must be 1")

    def __getitem__(self, i: int) -> int:
        return self.values[i]

    def __len__(self) -> int:
        return len(self.values)

    def tolist(self) -> List[int]:
        return list(self.values)


def evaluate_vector(p: GPoset, h: Graph, n: Optional[int] = None) -> InvariantVector:
    n = h.cv if n is None else n
    if h.cv > n:
        raise ValueError("graph has more connected vertices than n")
    return InvariantVector(tuple(subgraph_count(g, h) for g in p), n)


# ---------------------------------------------------------------------------
# counting classes


def _pair_cycles(part: Mapping[int, int]) -> int:
    """Cycles of a vertex permutation of cycle type ``part`` acting on pairs."""
    total = 0
    items = sorted(part.items())
    for k, j in items:
        total += j * (k // 2) + k * comb(j, 2)
    for a in range(len(items)):
        for b in range(a + 1, len(items)):
            (r, jr), (s, js) = items[a], items[b]
            total += gcd(r, s) * jr * js
    return total


def count_graphs(n: int) -> int:
    """Isomorphism classes of simple graphs on ``n`` vertices (cycle index)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return 1
    total = 0
    for part in partitions(n):
        size = factorial(n)
        for k, j in part.items():
            size //= k ** j * factorial(j)
        total += size * 2 ** _pair_cycles(part)
    q, r = divmod(total, factorial(n))
    assert r == 0
    return q


# ---------------------------------------------------------------------------
# disjoint cycles and the characteristic polynomial


def cycle_etransform(a: Mapping[int, int], b: Mapping[int, int]) -> int:
    """prod_i C(m_i, n_i) for cycle multiplicity profiles ``a`` (n) and ``b`` (m).

    Counts sub-unions of whole components.  This is the subgraph count when
    every cycle of ``a`` has length at least 3.
    """
    out = 1
    for length, k in a.items():
        out *= comb(b.get(length, 0), k)
    return out


def disjoint_cycles(profile: Mapping[int, int]) -> Graph:
    """Disjoint union of cycles; length 2 means a single edge."""
    edges = []
    base = 0
    for length in sorted(profile):
        for _ in range(profile[length]):
            if length == 2:
                edges.append((base, base + 1))
            else:
                edges.extend((base + t, base + (t + 1) % length) for t in range(length))
            base += length
    return Graph(edges)


def _linear_profiles(v: int) -> List[Dict[int, int]]:
    """Cycle profiles (parts >= 2) covering exactly ``v`` vertices."""
    out = []
    for part in partitions(v):
        if 1 in part:
            continue
        out.append(dict(part))
    return out


def charpoly_via_invariants(h: Graph, n: int, monic: bool = False) -> List[int]:
    """Coefficients c_0..c_n of det(A - zI), lowest degree first.

    With ``monic`` the coefficients are those of det(zI - A) instead.

    Each v-vertex linear subgraph (disjoint edges and cycles of length >= 3)
    contributes (-1)^(components) 2^(cycles >= 3) to the coefficient of
    z^(n-v) in det(zI - A); subgraph counts supply the multiplicities.
    """
    if h.cv > n:
        raise ValueError("graph has more connected vertices than n")
    a = [0] * (n + 1)      # det(zI - A) = sum_v a[v] z^(n-v)
    a[0] = 1
    for v in range(2, n + 1):
        if v > h.cv:
            break
        for prof in _linear_profiles(v):
            cnt = subgraph_count(disjoint_cycles(prof), h)
            if not cnt:
                continue
            comps = sum(prof.values())
            cycles = sum(k for length, k in prof.items() if length >= 3)
            a[v] += (-1) ** comps * 2 ** cycles * cnt
    sign = 1 if monic else (-1) ** n
    coeffs = [0] * (n + 1)
    for v in range(n + 1):
        coeffs[n - v] = sign * a[v]
    return coeffs


# ---------------------------------------------------------------------------
# alignment with the printed E(4) example and serialisation

# Row/column order of the printed E(4) matrix.  The listed names swap the
# path a12a23a34 with the star and the 4-cycle with the paw relative to it.
PRINTED_E4_MATRIX_ORDER = (
    "", "12", "12 34", "12 13", "12 13 14", "12 23 34", "12 13 23",
    "12 23 24 34", "12 23 34 14", "12 23 34 14 13", "12 23 34 14 13 24",
)
PRINTED_E4_LISTED_ORDER = (
    "", "12", "12 34", "12 13", "12 23 34", "12 13 14", "12 13 23",
    "12 23 34 14", "12 23 24 34", "12 23 34 14 13", "12 23 34 14 13 24",
)

PRINTED_E4_MATRIX = (
    (1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (1, 2, 1, 0, 0, 0, 0, 0, 0, 0, 0),
    (1, 2, 0, 1, 0, 0, 0, 0, 0, 0, 0),
    (1, 3, 0, 3, 1, 0, 0, 0, 0, 0, 0),
    (1, 3, 1, 2, 0, 1, 0, 0, 0, 0, 0),
    (1, 3, 0, 3, 0, 0, 1, 0, 0, 0, 0),
    (1, 4, 1, 5, 1, 2, 1, 1, 0, 0, 0),
    (1, 4, 2, 4, 0, 4, 0, 0, 1, 0, 0),
    (1, 5, 2, 8, 2, 6, 2, 4, 1, 1, 0),
    (1, 6, 3, 12, 4, 12, 4, 12, 3, 6, 1),
)


def alignment(p: GPoset, names: Sequence[str]) -> List[int]:
    """Positions in ``p`` of the graphs named in ``names`` (edge-list text)."""
    return [p.position(parse_edge_list(s)) for s in names]


def printed_alignment(p: GPoset) -> List[int]:
    return alignment(p, PRINTED_E4_MATRIX_ORDER)


def permute_matrix(M: Sequence[Sequence], perm: Sequence[int]) -> List[list]:
    return [[M[i][j] for j in perm] for i in perm]


def permute_vector(v: Sequence, perm: Sequence[int]) -> list:
    return [v[i] for i in perm]


def unpermute_vector(v: Sequence, perm: Sequence[int], size: int) -> list:
    out = [0] * size
    for k, i in enumerate(perm):
        out[i] = v[k]
    return out


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return str(x)


def matrix_to_text(M: Sequence[Sequence]) -> str:
    cells = [[_fmt(x) for x in r] for r in M]
    if not cells:
        return ""
    w = max(len(c) for r in cells for c in r)
    return "\n".join(" ".join(c.rjust(w) for c in r) for r in cells) + "\n"


def matrix_to_json(M: Sequence[Sequence], labels: Sequence[str]) -> str:
    def cell(x):
        if isinstance(x, Fraction) and x.denominator != 1:
            return _fmt(x)
        return int(x)

    return json.dumps({"labels": list(labels), "rows": [[cell(x) for x in r] for r in M]})


def matrix_from_json(text: str) -> Tuple[List[str], List[List[Fraction]]]:
    obj = json.loads(text)
    return obj["labels"], [[Fraction(str(x)) for x in r] for r in obj["rows"]]
