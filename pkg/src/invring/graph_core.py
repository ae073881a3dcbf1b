"""Simple graphs as edge sets, canonical labelling and subgraph counting.

A graph is identified with its set of edges.  Isolated vertices carry no
identity, so the empty edge set is the single graph with no connected
vertices.  Vertex labels are arbitrary nonnegative integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb, factorial
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import sympy

Edge = Tuple[int, int]
Code = Tuple[Edge, ...]


def _norm_edge(e: Sequence[int]) -> Edge:
    a, b = int(e[0]), int(e[1])
    if a == b:
        raise ValueError(f"self-loop at vertex {a}")
    if a < 0 or b < 0:
        raise ValueError("vertex labels must be nonnegative")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class Graph:
    """Finite simple graph given by its edge set."""

    edges: frozenset = field(default_factory=frozenset)

    def __init__(self, edges: Iterable[Sequence[int]] = ()):
        object.__setattr__(self, "edges", frozenset(_norm_edge(e) for e in edges))

    @property
    def vertices(self) -> Tuple[int, ...]:
        return tuple(sorted({v for e in self.edges for v in e}))

    @property
    def cv(self) -> int:
        return len({v for e in self.edges for v in e})

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def __len__(self) -> int:
        return len(self.edges)

    def adjacency(self) -> Dict[int, set]:
        adj: Dict[int, set] = {}
        for a, b in self.edges:
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
        return adj

    def components(self) -> List["Graph"]:
        adj = self.adjacency()
        seen: set = set()
        out = []
        for start in sorted(adj):
            if start in seen:
                continue
            stack, comp = [start], {start}
            while stack:
                u = stack.pop()
                for w in adj[u]:
                    if w not in comp:
                        comp.add(w)
                        stack.append(w)
            seen |= comp
            out.append(Graph(e for e in self.edges if e[0] in comp))
        return out

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def relabel(self, mapping: Dict[int, int]) -> "Graph":
        return Graph((mapping[a], mapping[b]) for a, b in self.edges)

    def sorted_edges(self) -> Code:
        return tuple(sorted(self.edges))

    def union(self, other: "Graph") -> "Graph":
        return Graph(self.edges | other.edges)

    def disjoint_union(self, other: "Graph") -> "Graph":
        shift = (max(self.vertices) + 1) if self.edges else 0
        return Graph(list(self.edges) + [(a + shift, b + shift) for a, b in other.edges])

    def __repr__(self) -> str:
        return f"Graph({format_edge_list(self)!r})"


# ---------------------------------------------------------------------------
# canonical form


@dataclass(frozen=True, order=True)
class CanonicalForm:
    """Canonical edge sequence on vertices 0..cv-1 plus the automorphism order."""

    code: Code
    automorphism_order: int = field(compare=False)

    @property
    def cv(self) -> int:
        return (max(v for e in self.code for v in e) + 1) if self.code else 0

    def graph(self) -> Graph:
        return Graph(self.code)


def _refine(n: int, adj: List[List[int]], colors: List[int]) -> List[int]:
    """Colour refinement.  Returned colours are ranks, so the result is label free."""
    ncol = len(set(colors))
    while True:
        sig = [(colors[v], tuple(sorted(colors[w] for w in adj[v]))) for v in range(n)]
        ranks = {s: i for i, s in enumerate(sorted(set(sig)))}
        new = [ranks[s] for s in sig]
        if len(ranks) == ncol:
            return new
        colors, ncol = new, len(ranks)


def _ir_search(n: int, adj: List[List[int]], edges: List[Edge],
               colors: List[int]) -> Tuple[Code, int]:
    """Minimum relabelled edge tuple over all leaves of the individualisation tree.

    The automorphism group acts freely on the leaves and two leaves give the
    same relabelled graph exactly when they differ by an automorphism, so the
    number of leaves reaching the minimum is |Aut|.
    """
    best: Optional[Code] = None
    hits = 0
    stack = [_refine(n, adj, colors)]
    while stack:
        col = stack.pop()
        if len(set(col)) == n:
            code = tuple(sorted(tuple(sorted((col[a], col[b]))) for a, b in edges))
            if best is None or code < best:
                best, hits = code, 1
            elif code == best:
                hits += 1
            continue
        counts: Dict[int, int] = {}
        for c in col:
            counts[c] = counts.get(c, 0) + 1
        target = min(c for c, k in counts.items() if k > 1)
        for v in range(n):
            if col[v] == target:
                stack.append(_refine(n, adj, [2 * c + (0 if (u == v or c != target) else 1)
                                              for u, c in enumerate(col)]))
    return best if best is not None else (), hits


def _connected_form(code: Code) -> Tuple[Code, int]:
    verts = sorted({v for e in code for v in e})
    idx = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    adj: List[List[int]] = [[] for _ in range(n)]
    edges = []
    for a, b in code:
        adj[idx[a]].append(idx[b])
        adj[idx[b]].append(idx[a])
        edges.append((idx[a], idx[b]))
    return _ir_search(n, adj, edges, [0] * n)


@lru_cache(maxsize=None)
def _canonical_from_code(code: Code) -> CanonicalForm:
    g = Graph(code)
    comps = g.components()
    if len(comps) <= 1:
        c, aut = _connected_form(code) if code else ((), 1)
        return CanonicalForm(c, aut)
    forms = sorted((_canonical_from_code(h.sorted_edges()) for h in comps),
                   key=lambda f: (f.cv, len(f.code), f.code))
    out: List[Edge] = []
    shift, aut = 0, 1
    mult: Dict[Code, int] = {}
    for f in forms:
        out.extend((a + shift, b + shift) for a, b in f.code)
        shift += f.cv
        aut *= f.automorphism_order
        mult[f.code] = mult.get(f.code, 0) + 1
    for k in mult.values():
        aut *= factorial(k)
    return CanonicalForm(tuple(out), aut)


def canonical_form(g: Graph) -> CanonicalForm:
    """Canonical form of ``g``; equal for isomorphic graphs only."""
    return _canonical_from_code(g.sorted_edges())


def canonical_graph(g: Graph) -> Graph:
    return Graph(canonical_form(g).code)


def automorphism_order(g: Graph) -> int:
    return canonical_form(g).automorphism_order


def is_isomorphic(g: Graph, h: Graph) -> bool:
    return canonical_form(g).code == canonical_form(h).code


# ---------------------------------------------------------------------------
# subgraph counting


def _embedding_order(g: Graph) -> List[int]:
    adj = g.adjacency()
    order: List[int] = []
    placed: set = set()
    remaining = set(adj)
    while remaining:
        # next vertex: most neighbours already placed, then highest degree
        v = max(remaining, key=lambda u: (len(adj[u] & placed), len(adj[u]), -u))
        order.append(v)
        placed.add(v)
        remaining.discard(v)
    return order


def count_embeddings(g: Graph, h: Graph, fixed: Optional[Dict[int, int]] = None) -> int:
    """Injective maps V(g) -> V(h) sending edges to edges.

    ``fixed`` pins some vertices of ``g`` (which may be isolated in ``g``) to
    vertices of ``h``.
    """
    fixed = dict(fixed or {})
    gadj = g.adjacency()
    for v in fixed:
        gadj.setdefault(v, set())
    hadj = h.adjacency()
    for t in fixed.values():
        hadj.setdefault(t, set())
    if len(set(fixed.values())) != len(fixed):
        return 0
    for v, t in fixed.items():
        if len(gadj[v]) > len(hadj[t]):
            return 0
    for a, b in g.edges:
        if a in fixed and b in fixed and fixed[b] not in hadj[fixed[a]]:
            return 0
    free = Graph(e for e in g.edges if not (e[0] in fixed and e[1] in fixed))
    order = [v for v in _embedding_order(free) if v not in fixed]
    if not order:
        return 1
    hverts = sorted(hadj)
    hdeg = {v: len(hadj[v]) for v in hverts}
    back = [[w for w in gadj[v] if w in fixed or w in order[:i]] for i, v in enumerate(order)]
    need = [len(gadj[v]) for v in order]
    assign = dict(fixed)
    used = set(fixed.values())

    def rec(i: int) -> int:
        if i == len(order):
            return 1
        nbrs = back[i]
        if nbrs:
            cand = hadj[assign[nbrs[0]]]
            cand = [t for t in cand if t not in used
                    and all(t in hadj[assign[w]] for w in nbrs[1:])]
        else:
            cand = [t for t in hverts if t not in used]
        total = 0
        for t in cand:
            if hdeg[t] < need[i]:
                continue
            assign[order[i]] = t
            used.add(t)
            total += rec(i + 1)
            used.discard(t)
        assign.pop(order[i], None)
        return total

    return rec(0)


@lru_cache(maxsize=1 << 18)
def _count_codes(gcode: Code, hcode: Code) -> int:
    g, h = Graph(gcode), Graph(hcode)
    aut = _canonical_from_code(gcode).automorphism_order
    emb = count_embeddings(g, h)
    q, r = divmod(emb, aut)
    if r:
        raise ArithmeticError("embedding count not divisible by |Aut(g)|")
    return q


def subgraph_count(g: Graph, h: Graph) -> int:
    """I(g)(h): number of edge subsets of ``h`` forming a copy of ``g``."""
    if not g.edges:
        return 1
    if len(g.edges) > len(h.edges) or g.cv > h.cv:
        return 0
    return _count_codes(canonical_form(g).code, canonical_form(h).code)


def brute_force_subgraph_count(g: Graph, h: Graph) -> int:
    """Reference count over all edge subsets of ``h`` of the right size."""
    target = canonical_form(g).code
    k = len(g.edges)
    return sum(1 for sub in combinations(sorted(h.edges), k)
               if canonical_form(Graph(sub)).code == target)


# ---------------------------------------------------------------------------
# enumeration


def graph_sort_key(g: Graph) -> Tuple[int, int, Code]:
    cf = canonical_form(g)
    return (len(cf.code), cf.cv, cf.code)


def enumerate_graphs(n: int, d: Optional[int] = None) -> List[Graph]:
    """One canonical representative per class with cv <= n (and <= d edges).

    Grown level by level by adding one edge to every representative of the
    previous level.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    max_edges = comb(n, 2) if d is None else min(d, comb(n, 2))
    level = {(): Graph()}
    out = [Graph()]
    for _ in range(max_edges):
        nxt: Dict[Code, Graph] = {}
        for code, g in level.items():
            cv = g.cv
            present = set(code)
            cands = [(a, b) for a, b in combinations(range(cv), 2) if (a, b) not in present]
            if cv < n:
                cands += [(a, cv) for a in range(cv)]
            if cv + 1 < n:
                cands.append((cv, cv + 1))
            for e in cands:
                c = canonical_form(Graph(code + (e,))).code
                if c not in nxt:
                    nxt[c] = Graph(c)
        if not nxt:
            break
        level = nxt
        out.extend(level.values())
    out.sort(key=graph_sort_key)
    return out


# ---------------------------------------------------------------------------
# complements

N_SYMBOL = sympy.Symbol("n")


def _falling_ratio(n, lo: int, hi: int):
    """(n-lo)!/(n-hi)! for lo <= hi, as a product."""
    out = sympy.Integer(1)
    for j in range(lo, hi):
        out *= (n - j)
    return out


def complement_expand(g: Graph, n=N_SYMBOL) -> Dict[Graph, sympy.Expr]:
    """Expansion of I(complement of g) in the basic invariants of subgraphs of g.

    Coefficient of ``a`` is (-1)^|a| I(a)(g) |Stab(a)| / |Stab(g)| with the
    stabilisers taken in the symmetric group on ``n`` points.  With ``n`` a
    symbol the coefficients are polynomials in ``n``.
    """
    if not g.edges:
        raise ValueError("g must have at least one edge")
    if isinstance(n, int) and n < g.cv:
        raise ValueError(f"n={n} is smaller than cv(g)={g.cv}")
    gform = canonical_form(g)
    out: Dict[Graph, sympy.Expr] = {}
    for a in enumerate_graphs(g.cv, len(g.edges)):
        cnt = subgraph_count(a, g)
        if cnt == 0:
            continue
        ratio = sympy.Rational(automorphism_order(a), gform.automorphism_order)
        coef = (-1) ** len(a) * cnt * ratio * _falling_ratio(n, a.cv, gform.cv)
        out[a] = sympy.expand(coef)
    return out


def complement_count(g: Graph, h: Graph, n: int) -> int:
    """Copies of ``g`` in the complement of ``h`` inside K_n, counted directly."""
    verts = set(range(n)) | set(h.vertices)
    if len(verts) > n:
        raise ValueError("h has more than n vertices")
    verts = sorted(verts)
    comp = Graph(e for e in combinations(verts, 2) if e not in h.edges)
    return subgraph_count(g, comp)


def complete_graph(k: int) -> Graph:
    return Graph(combinations(range(k), 2))


def cycle_graph(k: int) -> Graph:
    return Graph((i, (i + 1) % k) for i in range(k))


def path_graph(edges: int) -> Graph:
    return Graph((i, i + 1) for i in range(edges))


def star_graph(leaves: int) -> Graph:
    return Graph((0, i) for i in range(1, leaves + 1))


# ---------------------------------------------------------------------------
# text formats


def parse_edge_list(text: str) -> Graph:
    """Parse ``"12 23 34"`` (single digit labels) or ``"1-2 2-3 10-11"``."""
    edges = []
    for tok in text.replace(",", " ").split():
        if tok in ("0", "empty", "-"):
            continue
        if "-" in tok:
            a, b = tok.split("-", 1)
        elif len(tok) == 2 and tok.isdigit():
            a, b = tok[0], tok[1]
        else:
            raise ValueError(f"cannot parse edge token {tok!r}")
        edges.append((int(a), int(b)))
    return Graph(edges)


def format_edge_list(g: Graph) -> str:
    if not g.edges:
        return ""
    es = g.sorted_edges()
    if all(b < 10 for _, b in es):
        return " ".join(f"{a}{b}" for a, b in es)
    return " ".join(f"{a}-{b}" for a, b in es)


def to_graph6(g: Graph, n: Optional[int] = None) -> str:
    import networkx as nx

    verts = g.vertices
    n = (max(verts) + 1 if verts else 0) if n is None else n
    if verts and max(verts) >= n:
        raise ValueError("vertex label exceeds ambient vertex count")
    nxg = nx.Graph()
    nxg.add_nodes_from(range(n))
    nxg.add_edges_from(g.edges)
    return nx.to_graph6_bytes(nxg, header=False).decode().strip()


def from_graph6(text: str) -> Tuple[Graph, int]:
    import networkx as nx

    nxg = nx.from_graph6_bytes(text.strip().encode())
    return Graph(nxg.edges()), nxg.number_of_nodes()


def parse_graph(text: str) -> Graph:
    """Edge list if it looks like one, graph6 otherwise."""
    t = text.strip()
    if not t or all(ch.isdigit() or ch in " -,\t" for ch in t):
        return parse_edge_list(t)
    return from_graph6(t)[0]


def iter_subsets(h: Graph, k: int) -> Iterator[Graph]:
    for sub in combinations(sorted(h.edges), k):
        yield Graph(sub)
