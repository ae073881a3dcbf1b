"""Local invariants: subgraph counts with fixed points.

A local graph is a graph together with an ordered sequence of fixed points.
I_S(g) evaluated at a sequence T of a host counts the copies of g in the host
sending S onto T pointwise.  This module builds the local G-posets obtained by
intersecting radius-r neighbourhoods, checks the neighbourhood-sum and
conjugate equations on tensors of local parameters, reconstructs graphs from
such tensors and computes local product coefficients.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations, product
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .graph_core import Graph, _ir_search, count_embeddings, format_edge_list, subgraph_count
from .gposet import GPoset, etransform
from .linalg_exact import matvec, rat_inverse, transpose

Node = Tuple[int, ...]
LocalKey = Tuple[int, Tuple[Tuple[int, int], ...]]


# ---------------------------------------------------------------------------
# local graphs


@dataclass(frozen=True)
class LocalGraph:
    """A graph with an ordered sequence of distinct fixed points."""

    base: Graph
    fixed: Tuple[int, ...]

    def __post_init__(self):
        if not isinstance(self.fixed, tuple):
            raise TypeError("fixed points must be an ordered tuple")
        if len(set(self.fixed)) != len(self.fixed):
            raise ValueError("fixed points must be distinct")

    @property
    def k(self) -> int:
        return len(self.fixed)

    @property
    def vertices(self) -> Tuple[int, ...]:
        return tuple(sorted(set(self.base.vertices) | set(self.fixed)))

    @property
    def free(self) -> Tuple[int, ...]:
        fs = set(self.fixed)
        return tuple(v for v in self.vertices if v not in fs)

    @property
    def interior(self) -> Graph:
        fs = set(self.fixed)
        return Graph(e for e in self.base.edges if e[0] in fs and e[1] in fs)

    @property
    def stripped(self) -> Graph:
        """Internal edges among the fixed points removed."""
        fs = set(self.fixed)
        return Graph(e for e in self.base.edges if not (e[0] in fs and e[1] in fs))

    @property
    def without_fixed(self) -> Graph:
        fs = set(self.fixed)
        return Graph(e for e in self.base.edges if e[0] not in fs and e[1] not in fs)

    @property
    def key(self) -> LocalKey:
        return _local_form(self.base.sorted_edges(), self.fixed)[0]

    @property
    def stab_order(self) -> int:
        """Automorphisms of the base fixing every fixed point."""
        return _local_form(self.base.sorted_edges(), self.fixed)[1]

    def __len__(self) -> int:
        return len(self.base)

    def with_fixed(self, fixed: Sequence[int]) -> "LocalGraph":
        return LocalGraph(self.base, tuple(fixed))

    def permuted(self, positions: Sequence[int]) -> "LocalGraph":
        """Fixed sequence (S[p] for p in positions)."""
        return LocalGraph(self.base, tuple(self.fixed[p] for p in positions))

    def s_components(self) -> List["LocalGraph"]:
        """Pieces of the stripped graph joined away from the fixed points."""
        rest = self.without_fixed.adjacency()
        stripped = self.stripped
        seen: set = set()
        out = []
        for v in self.free:
            if v in seen:
                continue
            comp, stack = {v}, [v]
            while stack:
                u = stack.pop()
                for w in rest.get(u, ()):
                    if w not in comp:
                        comp.add(w)
                        stack.append(w)
            seen |= comp
            edges = [e for e in stripped.edges if (e[0] in comp or e[1] in comp)]
            out.append(LocalGraph(Graph(edges), self.fixed))
        return out

    def is_s_connected(self) -> bool:
        return len(self.free) > 0 and len(self.s_components()) == 1 and not self.interior.edges

    def label(self) -> str:
        return f"{format_edge_list(self.base) or '{}'} @ {','.join(map(str, self.fixed))}"


@lru_cache(maxsize=None)
def _local_form(code, fixed: Tuple[int, ...]) -> Tuple[LocalKey, int]:
    verts = sorted({v for e in code for v in e} | set(fixed))
    idx = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    adj: List[List[int]] = [[] for _ in range(n)]
    edges = []
    for a, b in code:
        adj[idx[a]].append(idx[b])
        adj[idx[b]].append(idx[a])
        edges.append((idx[a], idx[b]))
    colors = [0] * n
    for pos, f in enumerate(fixed):
        colors[idx[f]] = pos + 1
    if n == 0:
        return (0, ()), 1
    c, hits = _ir_search(n, adj, edges, colors)
    return (n, c), hits


def local_canonical(g: LocalGraph) -> LocalGraph:
    """Representative with fixed points 0..k-1 and free vertices k, k+1, ..."""
    n, code = g.key
    k = g.k
    nfree = n - k
    # the canonical code puts free vertices first and fixed points after them
    relabel = {v: (v - nfree if v >= nfree else v + k) for v in range(n)}
    return LocalGraph(Graph((relabel[a], relabel[b]) for a, b in code), tuple(range(k)))


def local_eval(g: LocalGraph, h: Graph, T: Sequence[int]) -> int:
    """I_S(g) of ``h`` at the vertices ``T``."""
    T = tuple(T)
    if len(T) != g.k:
        raise ValueError("target sequence has the wrong length")
    if len(set(T)) != len(T):
        raise ValueError("target vertices must be distinct")
    emb = count_embeddings(g.base, h, dict(zip(g.fixed, T)))
    q, r = divmod(emb, g.stab_order)
    if r:
        raise ArithmeticError("embedding count not divisible by the stabiliser")
    return q


def sequence_orbit(g: LocalGraph) -> int:
    """|Orb_{Aut(g)}(S)|: number of images of the fixed sequence."""
    return LocalGraph(g.base, ()).stab_order // g.stab_order


def restore_global(g: LocalGraph, h: Graph, mode: str = "i", n: Optional[int] = None) -> int:
    """Recover the global count from local counts over all target sequences.

    Mode "i" returns the plain sum over ordered sequences, which equals
    |Orb(S)| I(g)(h).  Mode "ii" counts each coset of sequences once and
    equals I(g)(h).
    """
    base_verts = set(g.base.vertices)
    if any(f not in base_verts for f in g.fixed):
        raise ValueError("restoration needs fixed points incident to edges")
    verts = sorted(set(h.vertices) | set(range(n or 0)))
    total = sum(local_eval(g, h, T) for T in permutations(verts, g.k))
    if mode == "i":
        return total
    if mode == "ii":
        q, r = divmod(total, sequence_orbit(g))
        if r:
            raise ArithmeticError("coset sum not integral")
        return q
    raise ValueError("mode must be 'i' or 'ii'")


# ---------------------------------------------------------------------------
# local G-posets


def _local_sort_key(g: LocalGraph):
    n, code = g.key
    return (len(code), n, code)


class LocalPoset:
    """Ordered local graphs with a common number of fixed points."""

    def __init__(self, members: Iterable[LocalGraph], k: Optional[int] = None,
                 meta: Optional[dict] = None, sort: bool = True):
        ms: Dict[LocalKey, LocalGraph] = {}
        for g in members:
            c = local_canonical(g)
            ms.setdefault(c.key, c)
        mem = list(ms.values())
        if sort:
            mem.sort(key=_local_sort_key)
        if k is None:
            k = mem[0].k if mem else 0
        if any(g.k != k for g in mem):
            raise ValueError("members must share the number of fixed points")
        self.members: Tuple[LocalGraph, ...] = tuple(mem)
        self.k = k
        self.meta = dict(meta or {})
        self.index: Dict[LocalKey, int] = {g.key: i for i, g in enumerate(mem)}
        self.transform: List[List[int]] = [
            [local_eval(gj, gi.base, gi.fixed) if j <= i or not sort else 0
             for j, gj in enumerate(mem)] for i, gi in enumerate(mem)]
        if sort:
            for i, gi in enumerate(mem):
                for j in range(i + 1, len(mem)):
                    if local_eval(mem[j], gi.base, gi.fixed):
                        raise ValueError("order is not compatible with containment")
        self._inverse = None

    def __len__(self) -> int:
        return len(self.members)

    def __getitem__(self, i: int) -> LocalGraph:
        return self.members[i]

    def __iter__(self):
        return iter(self.members)

    def position(self, g: LocalGraph) -> int:
        """Index of the class of ``g``; -1 when it is not a member."""
        return self.index.get(g.key, -1)

    @property
    def inverse(self) -> List[List[Fraction]]:
        if self._inverse is None:
            self._inverse = rat_inverse(self.transform)
        return self._inverse

    def restrict(self, keep: Sequence[int]) -> "LocalPoset":
        return LocalPoset([self.members[i] for i in keep], self.k, self.meta)

    def vector(self, h: Graph, T: Sequence[int]) -> List[int]:
        return [local_eval(g, h, T) for g in self.members]

    def unit(self, t: int) -> List[int]:
        """z paired with the unit vector e_t: row t of the transform."""
        return list(self.transform[t])

    def labels(self) -> List[str]:
        return [g.label() for g in self.members]


def custom_local_poset(graphs: Iterable[LocalGraph], meta: Optional[dict] = None) -> LocalPoset:
    return LocalPoset(graphs, meta=meta)


def neighbourhood_intersection(h: Graph, S: Sequence[int], radius: int = 1) -> Optional[LocalGraph]:
    """Component through S of the graph induced on the intersection of balls.

    None when the fixed points do not all lie in one component with an edge.
    """
    adj = h.adjacency()
    common: Optional[set] = None
    for s in S:
        ball, frontier = {s}, {s}
        for _ in range(radius):
            frontier = {w for u in frontier for w in adj.get(u, ())} - ball
            ball |= frontier
        common = ball if common is None else common & ball
    if not common or any(s not in common for s in S):
        return None
    comp, stack = {S[0]}, [S[0]]
    while stack:
        u = stack.pop()
        for w in adj.get(u, ()):
            if w in common and w not in comp:
                comp.add(w)
                stack.append(w)
    if any(s not in comp for s in S):
        return None
    edges = [e for e in h.edges if e[0] in comp and e[1] in comp]
    if not edges:
        return None
    return LocalGraph(Graph(edges), tuple(S))


def _rooted_neighbourhoods(degree: int) -> List[LocalGraph]:
    """All radius-1 neighbourhoods of vertex 0 with maximum degree ``degree``."""
    out = []
    for t in range(1, degree + 1):
        nbrs = list(range(1, t + 1))
        pairs = list(combinations(nbrs, 2))
        for mask in range(1 << len(pairs)):
            chosen = [p for i, p in enumerate(pairs) if mask >> i & 1]
            deg = {v: 1 for v in nbrs}
            for a, b in chosen:
                deg[a] += 1
                deg[b] += 1
            if max(deg.values()) > degree:
                continue
            out.append(LocalGraph(Graph([(0, v) for v in nbrs] + chosen), (0,)))
    return out


def _children(g: LocalGraph) -> List[LocalGraph]:
    """Radius-1 intersections X*(S, v) for the free vertices v of g."""
    out = []
    for v in g.free:
        x = neighbourhood_intersection(g.base, g.fixed + (v,), 1)
        if x is not None:
            out.append(x)
    return out


def _connected_members(levels: List[List[LocalGraph]]) -> List[List[LocalGraph]]:
    out = []
    for mem in levels:
        pieces: List[LocalGraph] = []
        for g in mem:
            pieces.extend(g.s_components())
            if g.interior.edges:
                pieces.append(LocalGraph(g.interior, g.fixed))
        out.append(pieces)
    return out


@dataclass
class LocalPosetSequence:
    """E_1, E_{1,2}, ... with the data needed by the neighbourhood sums."""

    levels: List[LocalPoset]
    radius: int = 1
    degree: Optional[int] = None
    connected: bool = False

    @property
    def depth(self) -> int:
        """Number of non-empty levels; the next level is empty."""
        return sum(1 for p in self.levels if len(p))

    def level(self, k: int) -> LocalPoset:
        return self.levels[k - 1]

    def projector(self, k: int) -> List[List[int]]:
        """P_k: coordinates of E_{1..k-1} to E_{1..k} by forgetting the last point."""
        if k < 2:
            raise ValueError("projectors start at level 2")
        lo, hi = self.level(k - 1), self.level(k)
        P = [[0] * len(lo) for _ in range(len(hi))]
        for t, g in enumerate(hi):
            u = lo.position(g.with_fixed(g.fixed[:-1]))
            if u >= 0:
                P[t][u] = 1
        return P

    def scaling(self, k: int, n: Optional[int] = None) -> List[int]:
        """D_k: orbit sizes of the k-th fixed point under the stabiliser of the others."""
        out = []
        for g in self.level(k):
            last = g.fixed[-1]
            if last not in g.base.vertices:
                if n is None:
                    raise ValueError("an isolated fixed point needs the ambient n")
                out.append(n - len(g.vertices) + 1)
                continue
            out.append(g.with_fixed(g.fixed[:-1]).stab_order // g.stab_order)
        return out

    def target(self, k: int, z_parent: Sequence, n: Optional[int] = None,
               paired: bool = True) -> List[Fraction]:
        """(E_k^-1)^T D_k P_k z_parent, or D_k P_k z_parent when not paired.

        For k = 1 ``z_parent`` is the global vector over E_1.
        """
        D = self.scaling(k, n)
        if k == 1:
            pz = list(z_parent)
        else:
            pz = matvec(self.projector(k), z_parent)
        dz = [Fraction(d) * x for d, x in zip(D, pz)]
        if not paired:
            return dz
        return matvec(transpose(self.level(k).inverse), dz)

    def constrained(self, k: int, paired: bool = True) -> List[bool]:
        """Coordinates fixed by the level-k sums.

        Unpaired sums say nothing about members whose parent graph is not in
        the previous level (a zero row of P_k).
        """
        if paired or k == 1:
            return [True] * len(self.level(k))
        return [any(row) for row in self.projector(k)]

    def sums_closed(self, k: int) -> bool:
        """Whether every level-k member forgets to a level k-1 member.

        Host-built families of larger radius usually are not, and their
        neighbourhood sums carry no information.
        """
        return k == 1 or all(any(row) for row in self.projector(k))

    def conjugate_index(self, k: int, t: int, positions: Sequence[int]) -> int:
        return self.level(k).position(self.level(k)[t].permuted(positions))

    def is_reconstructible(self) -> Tuple[bool, Optional[Tuple[int, int, int]]]:
        """Each member must be told apart by the multiset of its children.

        Returns (ok, (level, i, j)) with a colliding pair when not ok.
        """
        for k in range(1, len(self.levels)):
            lo, hi = self.level(k), self.level(k + 1)
            seen: Dict[Tuple, int] = {}
            for i, g in enumerate(lo):
                kids = tuple(sorted(hi.position(x) for x in _children(g)))
                if kids in seen:
                    return False, (k, seen[kids], i)
                seen[kids] = i
        return True, None


def build_local_posets(radius: int = 1, degree: Optional[int] = 3, depth: Optional[int] = None,
                       connected: bool = False,
                       hosts: Optional[Sequence[Graph]] = None) -> LocalPosetSequence:
    """The intersection posets E_1, E_{1,2}, ... of radius-r neighbourhoods.

    Radius 1 with a degree bound is built by closure from the rooted
    neighbourhoods.  Other radii need an explicit list of host graphs whose
    neighbourhood intersections are collected.
    """
    raw: List[List[LocalGraph]] = []
    if hosts is None:
        if radius != 1 or degree is None:
            raise ValueError("only radius 1 with a degree bound is built by closure; pass hosts")
        level = [local_canonical(g) for g in _rooted_neighbourhoods(degree)]
        while level and (depth is None or len(raw) < depth):
            uniq = {g.key: g for g in level}
            raw.append(list(uniq.values()))
            level = [local_canonical(x) for g in raw[-1] for x in _children(g)]
    else:
        for h in hosts:
            if degree is not None and any(len(a) > degree for a in h.adjacency().values()):
                raise ValueError("host exceeds the degree bound")
        k = 1
        verts = {id(h): h.vertices for h in hosts}
        while depth is None or k <= depth:
            found: Dict[LocalKey, LocalGraph] = {}
            for h in hosts:
                for S in permutations(verts[id(h)], k):
                    x = neighbourhood_intersection(h, S, radius)
                    if x is not None:
                        c = local_canonical(x)
                        found.setdefault(c.key, c)
            if not found:
                break
            raw.append(list(found.values()))
            k += 1
    if connected:
        raw = _connected_members(raw)
    meta = {"radius": radius, "degree": degree, "connected": connected}
    return LocalPosetSequence([LocalPoset(m, k + 1, meta) for k, m in enumerate(raw)],
                              radius, degree, connected)


# ---------------------------------------------------------------------------
# sufficiency and unconnected invariants


def glue(parts: Sequence[Tuple[LocalGraph, int]], k: Optional[int] = None) -> LocalGraph:
    """Union of multiplicity-weighted copies sharing the fixed points 0..k-1."""
    if k is None:
        k = parts[0][0].k if parts else 0
    edges = []
    nxt = k
    for g, m in parts:
        c = local_canonical(g)
        for _ in range(m):
            ren = {i: i for i in range(k)}
            for v in c.free:
                ren[v] = nxt
                nxt += 1
            edges.extend((ren[a], ren[b]) for a, b in c.base.edges)
    return LocalGraph(Graph(edges), tuple(range(k)))


@dataclass
class SufficiencyResult:
    status: str                      # "graphic" or "inconclusive"
    multiplicities: List[Fraction]
    witness: Optional[LocalGraph] = None


def local_sufficient_check(z: Sequence[int], P: LocalPoset) -> SufficiencyResult:
    """m = (E^T)^-1 z; nonnegative integral m yields the glued witness."""
    if len(z) != len(P):
        raise ValueError("vector does not match the poset")
    m = matvec(transpose(P.inverse), z)
    if all(x >= 0 and x.denominator == 1 for x in m):
        w = glue([(g, int(x)) for g, x in zip(P, m)], P.k)
        return SufficiencyResult("graphic", m, w)
    return SufficiencyResult("inconclusive", m)


def global_sufficient_check(z: Sequence[int], p: GPoset) -> Tuple[str, List[Fraction], Optional[Graph]]:
    """The unrooted case over a poset of connected graphs."""
    if not all(g.is_connected for g in p if len(g)):
        raise ValueError("members must be connected")
    E = etransform(p)
    m = matvec(transpose(rat_inverse(E.entries)), z)
    if any(x < 0 or x.denominator != 1 for x in m):
        return "inconclusive", m, None
    out = Graph()
    for g, x in zip(p, m):
        for _ in range(int(x)):
            out = out.disjoint_union(g)
    return "graphic", m, out


def unconnected_recursion(target: Mapping[int, int], host: Mapping[int, int], C: LocalPoset) -> int:
    """I(glued target)(glued host) reduced to connected hosts one component at a time."""
    k = C.k
    tkey = tuple(sorted((i, m) for i, m in target.items() if m))
    hkey = tuple(sorted((i, m) for i, m in host.items() if m))

    @lru_cache(maxsize=None)
    def piece(p: Tuple[Tuple[int, int], ...], j: int) -> int:
        g = glue([(C[i], m) for i, m in p], k)
        return local_eval(g, C[j].base, C[j].fixed)

    @lru_cache(maxsize=None)
    def rec(t: Tuple[Tuple[int, int], ...], hh: Tuple[Tuple[int, int], ...]) -> int:
        if not t:
            return 1
        if not hh:
            return 0
        j, mj = hh[0]
        rest = tuple((i, m) for i, m in ((j, mj - 1),) + hh[1:] if m)
        total = 0
        for ps in product(*[range(m + 1) for _, m in t]):
            p = tuple((i, x) for (i, _), x in zip(t, ps) if x)
            c = piece(p, j) if p else 1
            if not c:
                continue
            left = tuple((i, m - x) for (i, m), x in zip(t, ps) if m - x)
            total += c * rec(left, rest)
        return total

    return rec(tkey, hkey)


# ---------------------------------------------------------------------------
# tensors of local parameters


@dataclass
class LocalParamTensor:
    """Sparse local parameters keyed by ordered vertex sequences.

    In restricted mode a node stores the 1-based member index of its type
    (absent nodes are 0).  In general mode a node stores the vector z(S).
    """

    seq: LocalPosetSequence
    mode: str = "restricted"
    nodes: Dict[int, Dict[Node, object]] = field(default_factory=dict)
    z: Optional[Tuple] = None
    vertices: Optional[Tuple[int, ...]] = None

    def level_nodes(self, k: int) -> Dict[Node, object]:
        return self.nodes.get(k, {})

    def zhat(self, node: Node) -> int:
        return self.nodes.get(len(node), {}).get(tuple(node), 0)

    def value(self, node: Node) -> List[int]:
        k = len(node)
        P = self.seq.level(k)
        raw = self.nodes.get(k, {}).get(tuple(node))
        if self.mode == "restricted":
            return P.unit(raw - 1) if raw else [0] * len(P)
        return list(raw) if raw is not None else [0] * len(P)

    @property
    def all_vertices(self) -> Tuple[int, ...]:
        if self.vertices is not None:
            return self.vertices
        return tuple(sorted({v for lvl in self.nodes.values() for nd in lvl for v in nd}))

    def to_json(self) -> str:
        def enc(x):
            return x if isinstance(x, int) else [str(v) for v in x]
        return json.dumps({
            "mode": self.mode,
            "z": None if self.z is None else [str(x) for x in self.z],
            "vertices": None if self.vertices is None else list(self.vertices),
            "levels": {str(k): {",".join(map(str, nd)): enc(x) for nd, x in lvl.items()}
                       for k, lvl in sorted(self.nodes.items())},
        })

    @classmethod
    def from_json(cls, text: str, seq: LocalPosetSequence) -> "LocalParamTensor":
        d = json.loads(text)
        mode = d.get("mode", "restricted")

        def dec(x):
            return int(x) if not isinstance(x, list) else tuple(int(Fraction(v)) for v in x)
        nodes = {int(k): {tuple(int(v) for v in nd.split(",")): dec(x) for nd, x in lvl.items()}
                 for k, lvl in d.get("levels", {}).items()}
        z = None if d.get("z") is None else tuple(Fraction(x) for x in d["z"])
        verts = None if d.get("vertices") is None else tuple(d["vertices"])
        return cls(seq, mode, nodes, z, verts)


def extract_tensor(h: Graph, seq: LocalPosetSequence, depth: Optional[int] = None,
                   mode: str = "restricted") -> LocalParamTensor:
    """Local parameters of an actual graph.

    Restricted mode records the type of every neighbourhood intersection and
    raises when a type is missing from the posets.  General mode evaluates the
    member invariants directly.
    """
    depth = min(depth or seq.depth, seq.depth)
    verts = h.vertices
    nodes: Dict[int, Dict[Node, object]] = {}
    if mode == "restricted":
        frontier: List[Node] = [()]
        for k in range(1, depth + 1):
            P = seq.level(k)
            lvl: Dict[Node, object] = {}
            nxt = []
            for S in frontier:
                for v in verts:
                    if v in S:
                        continue
                    T = S + (v,)
                    x = neighbourhood_intersection(h, T, seq.radius)
                    if x is None:
                        continue
                    t = P.position(x)
                    if t < 0:
                        raise ValueError(f"neighbourhood at {T} is not a member: {x.label()}")
                    lvl[T] = t + 1
                    nxt.append(T)
            nodes[k] = lvl
            frontier = nxt
    elif mode == "general":
        for k in range(1, depth + 1):
            P = seq.level(k)
            lvl = {}
            for T in permutations(verts, k):
                vec = tuple(P.vector(h, T))
                if any(vec):
                    lvl[T] = vec
            nodes[k] = lvl
    else:
        raise ValueError("mode must be 'restricted' or 'general'")
    z = tuple(subgraph_count(g.base, h) for g in seq.level(1))
    return LocalParamTensor(seq, mode, nodes, z, tuple(verts))


@dataclass
class CheckReport:
    status: str                                   # "pass", "fail" or "budget exhausted"
    failure: Optional[dict] = None
    completed: Optional[Dict[int, Dict[Node, object]]] = None
    n: Optional[int] = None
    certified: Optional[bool] = None
    witness: Optional[Graph] = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> str:
        return json.dumps({"status": self.status, "failure": self.failure, "n": self.n,
                           "certified": self.certified,
                           "witness": None if self.witness is None else format_edge_list(self.witness)},
                          default=str)


class _Budget:
    def __init__(self, limit: Optional[int]):
        self.limit = limit
        self.used = 0

    def tick(self):
        self.used += 1
        if self.limit is not None and self.used > self.limit:
            raise _BudgetExhausted()


class _BudgetExhausted(Exception):
    pass


def _fail(level: int, node, constraint: str, detail) -> CheckReport:
    return CheckReport("fail", {"level": level, "node": node, "constraint": constraint,
                                "detail": detail})


def _vec_eq(a: Sequence, b: Sequence, mask: Optional[Sequence[bool]] = None) -> bool:
    mask = mask or [True] * len(a)
    return all(Fraction(x) == Fraction(y) for x, y, m in zip(a, b, mask) if m)


def _node_vector(t: LocalParamTensor, nodes: Dict[int, Dict[Node, object]], node: Node) -> List:
    k = len(node)
    raw = nodes.get(k, {}).get(node)
    P = t.seq.level(k)
    if t.mode == "restricted":
        return P.unit(raw - 1) if raw else [0] * len(P)
    return list(raw) if raw is not None else [0] * len(P)


def _conjugate_failures(t: LocalParamTensor, k: int, lvl: Dict[Node, object]):
    P = t.seq.level(k)
    for node in sorted(lvl):
        raw = lvl[node]
        for pi in permutations(range(k)):
            other = tuple(node[p] for p in pi)
            if t.mode == "restricted":
                want = t.seq.conjugate_index(k, raw - 1, pi) + 1
                got = lvl.get(other, 0)
            else:
                inv = [0] * k
                for m, p in enumerate(pi):
                    inv[p] = m
                want = tuple(raw[t.seq.conjugate_index(k, s, inv)] for s in range(len(P)))
                got = tuple(lvl.get(other, (0,) * len(P)))
                if not any(want):
                    want = got if not any(got) else want
            if want != got:
                return node, other, want, got
    return None


def _sum_failure(t: LocalParamTensor, k: int, nodes: Dict[int, Dict[Node, object]],
                 n: Optional[int], paired: bool):
    """First parent at level k-1 whose children do not sum to the target."""
    lvl = nodes.get(k, {})
    P = t.seq.level(k)
    sums: Dict[Node, List] = {}
    for node, raw in lvl.items():
        parent = node[:-1]
        vec = [0] * len(P)
        if t.mode == "restricted":
            vec[raw - 1] = 1
        else:
            vec = list(raw)
        acc = sums.setdefault(parent, [0] * len(P))
        for i, x in enumerate(vec):
            acc[i] += x
    parents = set(sums) | set(nodes.get(k - 1, {}))
    for parent in sorted(parents):
        if k - 1 >= 1 and parent not in nodes.get(k - 1, {}):
            return parent, "children of a zero parent", sums[parent]
        zp = _node_vector(t, nodes, parent) if k > 1 else None
        if zp is not None and not any(zp):
            continue
        want = t.seq.target(k, zp, n, paired)
        got = sums.get(parent, [0] * len(P))
        if not _vec_eq(want, got, t.seq.constrained(k, paired)):
            return parent, want, got
    return None


def neighborhood_sums(t: LocalParamTensor, k: int, n: Optional[int] = None) -> List[dict]:
    """Residuals of the level-k neighbourhood sums at every parent node."""
    out = []
    lvl = t.level_nodes(k)
    P = t.seq.level(k)
    paired = t.mode == "restricted"
    parents = sorted(t.level_nodes(k - 1)) if k > 1 else [()]
    for parent in parents:
        zp = t.value(parent) if k > 1 else list(t.z)
        want = t.seq.target(k, zp, n, paired)
        got = [0] * len(P)
        for node, raw in lvl.items():
            if node[:-1] != parent:
                continue
            vec = t.value(node) if not paired else P.unit(raw - 1)
            if paired:
                got[raw - 1] += 1
            else:
                got = [a + b for a, b in zip(got, vec)]
        out.append({"node": parent, "target": want, "sum": got,
                    "residual": [Fraction(a) - Fraction(b) for a, b in zip(got, want)]})
    return out


def _ambient_n(t: LocalParamTensor) -> Optional[int]:
    if t.z is not None:
        try:
            y = t.seq.target(1, t.z, None, paired=True)
            s = sum(y)
            if s.denominator == 1:
                return int(s)
        except ValueError:
            pass
    if t.vertices is not None:
        return len(t.vertices)
    return None


def _complete_level(t: LocalParamTensor, k: int, nodes: Dict[int, Dict[Node, object]],
                    verts: Sequence[int], n: Optional[int], budget: _Budget,
                    caps: Optional[List[int]] = None) -> Iterator[Dict[Node, object]]:
    """All level-k assignments satisfying the sums and conjugate equations."""
    P = t.seq.level(k)
    r = len(P)
    paired = t.mode == "restricted"
    parents = nodes.get(k - 1, {})
    mask = t.seq.constrained(k, paired)
    if not t.seq.sums_closed(k):
        mask = [False] * r
    targets: Dict[Node, List[Fraction]] = {}
    for S in parents:
        want = t.seq.target(k, _node_vector(t, nodes, S), n, paired)
        if any(m and (x < 0 or x.denominator != 1) for x, m in zip(want, mask)):
            return
        targets[S] = [int(x) if m else 0 for x, m in zip(want, mask)]
    parent_sets = {frozenset(S) for S in parents}
    units = [U for U in combinations(sorted(verts), k)
             if all(frozenset(U[:i] + U[i + 1:]) in parent_sets for i in range(k))]
    perms = list(permutations(range(k)))
    if paired:
        domain: List = list(range(1, r + 1))
    else:
        top = max((max(v) for v in targets.values()), default=0)
        # members made of fixed points only are indicators
        cap = caps or [top if g.free else min(top, 1) for g in P]
        inv = P.inverse
        domain = []
        for vec in product(*[range(c + 1) for c in cap]):
            if not any(vec):
                continue
            m = matvec(transpose(inv), vec)
            if all(x >= 0 for x in m):
                domain.append(vec)
    last: Dict[Node, int] = {}
    for idx, U in enumerate(units):
        for pi in perms:
            last[tuple(U[p] for p in pi)[:-1]] = idx
    closing: Dict[int, List[Node]] = {}
    for S, idx in last.items():
        closing.setdefault(idx, []).append(S)
    for S in targets:
        if S not in last and any(x for x, m in zip(targets[S], mask) if m):
            return
    counts = {S: [0] * r for S in targets}
    assign: Dict[Node, object] = {}

    def contributions(U, val):
        out = []
        for pi in perms:
            node = tuple(U[p] for p in pi)
            if paired:
                c = t.seq.conjugate_index(k, val - 1, pi)
                if c < 0:
                    return None
                out.append((node, c + 1, c))
            else:
                invp = [0] * k
                for m, p in enumerate(pi):
                    invp[p] = m
                idxs = [t.seq.conjugate_index(k, s, invp) for s in range(r)]
                if min(idxs) < 0:
                    return None
                vec = tuple(val[i] for i in idxs)
                out.append((node, vec, None))
        return out

    def apply(contrib, sign):
        for node, v, c in contrib:
            S = node[:-1]
            if S not in counts:
                return False
            if paired:
                counts[S][c] += sign
            else:
                for i, x in enumerate(v):
                    counts[S][i] += sign * x
        return True

    def ok_partial(contrib) -> bool:
        for node, _, _ in contrib:
            S = node[:-1]
            if S not in counts or any(m and a > b for a, b, m in zip(counts[S], targets[S], mask)):
                return False
        return True

    def rec(idx: int) -> Iterator[Dict[Node, object]]:
        budget.tick()
        if idx == len(units):
            yield dict(assign)
            return
        U = units[idx]
        for val in [None] + domain:
            contrib = contributions(U, val) if val is not None else []
            if contrib is None:
                continue
            if not apply(contrib, 1):
                apply(contrib, -1)
                continue
            good = ok_partial(contrib) and all(
                _vec_eq(counts[S], targets[S], mask) for S in closing.get(idx, ()) if S in targets)
            if good:
                for node, v, _ in contrib:
                    assign[node] = v
                yield from rec(idx + 1)
                for node, _, _ in contrib:
                    del assign[node]
            apply(contrib, -1)

    yield from rec(0)


def _check_given(t: LocalParamTensor, n: Optional[int]) -> Optional[CheckReport]:
    paired = t.mode == "restricted"
    if t.z is not None:
        y = t.seq.target(1, t.z, n, paired)
        got = [0] * len(t.seq.level(1))
        for raw in t.level_nodes(1).values():
            if paired:
                got[raw - 1] += 1
            else:
                got = [a + b for a, b in zip(got, raw)]
        if not _vec_eq(y, got):
            return _fail(1, (), "neighbourhood sum", {"target": y, "sum": got})
    for k in sorted(t.nodes):
        lvl = t.nodes[k]
        if k > t.seq.depth:
            if lvl:
                return _fail(k, next(iter(lvl)), "level beyond the poset sequence", None)
            continue
        if not paired:
            P = t.seq.level(k)
            inv_t = transpose(P.inverse)
            for node, vec in sorted(lvl.items()):
                if any(x < 0 or Fraction(x).denominator != 1 for x in vec):
                    return _fail(k, node, "nonnegative integers", vec)
                if any(x < 0 for x in matvec(inv_t, vec)):
                    return _fail(k, node, "(E^-1)^T z >= 0", vec)
                for s, g in enumerate(P):
                    if not g.free and vec[s] > 1:
                        return _fail(k, node, "interior indicator", vec)
        bad = _conjugate_failures(t, k, lvl)
        if bad:
            return _fail(k, bad[0], "conjugate equation",
                         {"conjugate": bad[1], "expected": bad[2], "found": bad[3]})
        if k >= 2 and t.seq.sums_closed(k):
            bad = _sum_failure(t, k, t.nodes, n, paired)
            if bad:
                return _fail(k, bad[0], "neighbourhood sum", {"target": bad[1], "sum": bad[2]})
    return None


def _solutions(t: LocalParamTensor, n: Optional[int], budget: _Budget,
               caps: Optional[List[int]] = None) -> Iterator[Dict[int, Dict[Node, object]]]:
    """Completions of the missing levels below the deepest given one."""
    given = [k for k in sorted(t.nodes) if k <= t.seq.depth]
    start = (max(given) if given else 0) + 1
    verts = t.all_vertices
    if start == 1:
        raise ValueError("level 1 must be given")

    def rec(k: int, nodes: Dict[int, Dict[Node, object]]):
        if k > t.seq.depth or not nodes.get(k - 1):
            yield nodes
            return
        for lvl in _complete_level(t, k, nodes, verts, n, budget, caps):
            nxt = dict(nodes)
            nxt[k] = lvl
            yield from rec(k + 1, nxt)

    yield from rec(start, {k: dict(v) for k, v in t.nodes.items()})


def _assemble(t: LocalParamTensor, sol: Dict[int, Dict[Node, object]], e: int) -> Optional[Graph]:
    """Graph read off z_1(i, j), kept only when its own tensor equals ``t``."""
    P2 = t.seq.level(2)
    edges = {tuple(sorted(node)) for node, raw in sol.get(2, {}).items()
             if P2.unit(raw - 1)[e] == 1}
    g = Graph(edges)
    try:
        back = extract_tensor(g, t.seq)
    except ValueError:
        return None
    if any(back.nodes.get(k, {}) != t.nodes.get(k, {}) for k in t.nodes):
        return None
    if t.z is not None and tuple(back.z) != tuple(t.z):
        return None
    return g


def tensor_consistency_check(t: LocalParamTensor, budget: Optional[int] = 100000,
                             complete: bool = True, certify: bool = False) -> CheckReport:
    """Neighbourhood sums and conjugate equations, completing missing levels.

    Missing levels are searched for; "budget exhausted" is distinct from
    "fail".  The first violated constraint is reported in a fixed scan order.
    The equations alone can admit completions whose adjacency has a different
    tensor, so with ``certify`` a pass also needs a completion that
    reassembles into a graph with exactly this tensor; that graph is returned
    as the witness.
    """
    n = _ambient_n(t)
    bad = _check_given(t, n)
    if bad:
        bad.n = n
        return bad
    if not complete:
        return CheckReport("pass", None, t.nodes, n)
    e = _edge_index(t.seq) if certify else -1
    b = _Budget(budget)
    given = max((k for k in t.nodes if t.nodes[k]), default=0)
    found = None
    try:
        for sol in _solutions(t, n, b):
            if not certify:
                return CheckReport("pass", None, sol, n)
            found = found or sol
            g = _assemble(t, sol, e)
            if g is not None:
                return CheckReport("pass", None, sol, n, True, g)
    except _BudgetExhausted:
        return CheckReport("budget exhausted", {"used": b.used}, None, n)
    if found is not None:
        return CheckReport("fail", {"level": given + 1, "node": None,
                                    "constraint": "completions satisfy the equations but none "
                                                  "reassembles into a graph with this tensor",
                                    "detail": None}, found, n, False)
    return CheckReport("fail", {"level": given + 1, "node": None,
                                "constraint": "no completion satisfies the neighbourhood sums "
                                              "and conjugate equations", "detail": None}, None, n)


@dataclass
class ReconstructionFailure:
    report: CheckReport

    def __bool__(self) -> bool:
        return False


def _edge_index(seq: LocalPosetSequence) -> int:
    P = seq.level(2)
    edge = LocalGraph(Graph([(0, 1)]), (0, 1))
    i = P.position(edge)
    if i < 0:
        raise ValueError("the pair poset has no single edge member")
    return i


def reconstruct_restricted(t: LocalParamTensor, budget: Optional[int] = 100000):
    """Graph whose adjacency is z_1(i, j) of a consistent completion of ``t``.

    Returns the graph, or a ReconstructionFailure carrying the report.
    """
    if t.mode != "restricted":
        raise ValueError("restricted tensors only")
    rep = tensor_consistency_check(t, budget, complete=True, certify=True)
    if rep.passed:
        return rep.witness
    return ReconstructionFailure(rep)


def finitely_generated_check(t: LocalParamTensor, budget: Optional[int] = 100000,
                             complete: bool = False, caps: Optional[Dict[int, List[int]]] = None
                             ) -> CheckReport:
    """Connected-parameter conditions: sums D P z, positivity and conjugates.

    With ``complete`` the missing levels are searched for.  The verdict is
    "pass" only as far as the neighbourhoods are generated by the connected
    members; otherwise it is necessary-only.
    """
    if t.mode != "general":
        raise ValueError("connected-parameter tensors are in general mode")
    n = _ambient_n_general(t)
    if t.z is not None and any(Fraction(x).denominator != 1 for x in t.z):
        return _fail(0, (), "integral global vector", t.z)
    bad = _check_given(t, n)
    if bad:
        bad.n = n
        return bad
    if not complete:
        return CheckReport("pass", None, t.nodes, n)
    b = _Budget(budget)
    try:
        for sol in _solutions(t, n, b, None):
            return CheckReport("pass", None, sol, n)
    except _BudgetExhausted:
        return CheckReport("budget exhausted", {"used": b.used}, None, n)
    given = max((k for k in t.nodes if t.nodes[k]), default=0)
    rep = _fail(given + 1, None, "no completion", None)
    rep.n = n
    return rep


def _ambient_n_general(t: LocalParamTensor) -> Optional[int]:
    if t.vertices is not None:
        return len(t.vertices)
    return None


def degree_sequence_tensor(degrees: Sequence[int]) -> LocalParamTensor:
    """Level-1 connected parameters for E_1 = {a12}: the degrees."""
    seq = LocalPosetSequence([
        custom_local_poset([LocalGraph(Graph([(0, 1)]), (0,))]),
        custom_local_poset([LocalGraph(Graph([(0, 1)]), (0, 1))]),
    ], radius=1, degree=None, connected=True)
    nodes = {1: {(i,): (d,) for i, d in enumerate(degrees) if d}}
    return LocalParamTensor(seq, "general", nodes, (Fraction(sum(degrees), 2),),
                            tuple(range(len(degrees))))


# ---------------------------------------------------------------------------
# local products


def product_terms(a: LocalGraph, b: LocalGraph) -> List[LocalGraph]:
    """Every union of a copy of ``a`` at A and a copy of ``b`` at B.

    Fixed points are identified by label; the joint sequence is A followed
    by the labels of B not in A.
    """
    F = a.fixed + tuple(x for x in b.fixed if x not in a.fixed)
    afree = [v for v in a.vertices if v not in a.fixed]
    bfree = [v for v in b.vertices if v not in b.fixed]
    big = max(F + tuple(a.vertices) + tuple(b.vertices), default=0) + 1
    out: Dict[LocalKey, LocalGraph] = {}
    a_slots = [x for x in F if x not in a.fixed]
    for amap in _injections(afree, a_slots, big):
        aimg = set(amap.values())
        used_new = sorted(x for x in aimg if x >= big)
        b_slots = [x for x in F if x not in b.fixed] + used_new
        for bmap in _injections(bfree, b_slots, big + len(afree)):
            ren_a = {**{x: x for x in a.fixed}, **amap}
            ren_b = {**{x: x for x in b.fixed}, **bmap}
            edges = {tuple(sorted((ren_a[u], ren_a[v]))) for u, v in a.base.edges}
            edges |= {tuple(sorted((ren_b[u], ren_b[v]))) for u, v in b.base.edges}
            g = LocalGraph(Graph(edges), F)
            out.setdefault(g.key, g)
    return list(out.values())


def _injections(src: Sequence[int], slots: Sequence[int], fresh: int) -> Iterator[Dict[int, int]]:
    """Injective maps of ``src`` into ``slots`` or brand new labels."""
    def rec(i: int, cur: Dict[int, int], taken: set, nxt: int):
        if i == len(src):
            yield dict(cur)
            return
        for s in slots:
            if s not in taken:
                cur[src[i]] = s
                taken.add(s)
                yield from rec(i + 1, cur, taken, nxt)
                taken.discard(s)
        cur[src[i]] = nxt
        yield from rec(i + 1, cur, taken, nxt + 1)
        del cur[src[i]]

    yield from rec(0, {}, set(), fresh)


class ProductOutsidePoset(ValueError):
    def __init__(self, term: LocalGraph):
        super().__init__(f"product term {term.label()} is not in the poset")
        self.term = term


def local_product_coeffs(a: LocalGraph, b: LocalGraph, P: LocalPoset) -> List[int]:
    """c with I_A(a) I_B(b) = sum_g c_g I_{A u B}(g), c = E^-1 p."""
    F = a.fixed + tuple(x for x in b.fixed if x not in a.fixed)
    if P.k != len(F):
        raise ValueError("poset has the wrong number of fixed points")
    for term in product_terms(a, b):
        if len(term) and P.position(term) < 0:
            raise ProductOutsidePoset(term)
    pos = {x: i for i, x in enumerate(F)}
    p = []
    for g in P:
        ta = tuple(g.fixed[pos[x]] for x in a.fixed)
        tb = tuple(g.fixed[pos[x]] for x in b.fixed)
        va = local_eval(a, g.base, ta) if len(a) else 1
        vb = local_eval(b, g.base, tb) if len(b) else 1
        p.append(va * vb)
    c = matvec(P.inverse, p)
    if any(x.denominator != 1 or x < 0 for x in c):
        raise ArithmeticError("product coefficients are not nonnegative integers")
    return [int(x) for x in c]


# ---------------------------------------------------------------------------
# reference data for the trivalent radius-1 family

PRINTED_E1 = [
    [1, 0, 0, 0, 0, 0, 0],
    [2, 1, 0, 0, 0, 0, 0],
    [2, 1, 1, 0, 0, 0, 0],
    [3, 3, 0, 1, 0, 0, 0],
    [3, 3, 1, 1, 1, 0, 0],
    [3, 3, 2, 1, 2, 1, 0],
    [3, 3, 3, 1, 3, 3, 1],
]
PRINTED_E1_INV = [
    [1, 0, 0, 0, 0, 0, 0],
    [-2, 1, 0, 0, 0, 0, 0],
    [0, -1, 1, 0, 0, 0, 0],
    [3, -3, 0, 1, 0, 0, 0],
    [0, 1, -1, -1, 1, 0, 0],
    [0, 0, 0, 1, -2, 1, 0],
    [0, 0, 0, -1, 3, -3, 1],
]
PRINTED_E12 = [[1, 0, 0], [1, 1, 0], [1, 2, 1]]
PRINTED_P12 = [
    [1, 0, 0, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 1, 0],
]
PRINTED_D1 = [2, 1, 3, 1, 1, 2, 4]
PRINTED_D12 = [1, 2, 1]
# the 4x4 array of types from the non-graphic example (1-based member indices,
# diagonal = level 1, off-diagonal = level 2)
PRINTED_ARRAY = [
    [3, 2, 0, 2],
    [2, 3, 2, 0],
    [0, 2, 3, 2],
    [2, 0, 2, 3],
]


def tensor_from_array(Z: Sequence[Sequence[int]], seq: LocalPosetSequence) -> LocalParamTensor:
    """Restricted tensor with level 1 on the diagonal and level 2 off it."""
    n = len(Z)
    nodes: Dict[int, Dict[Node, object]] = {1: {}, 2: {}}
    for i in range(n):
        if Z[i][i]:
            nodes[1][(i,)] = Z[i][i]
        for j in range(n):
            if i != j and Z[i][j]:
                nodes[2][(i, j)] = Z[i][j]
    return LocalParamTensor(seq, "restricted", nodes, None, tuple(range(n)))
