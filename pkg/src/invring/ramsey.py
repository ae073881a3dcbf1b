"""Ramsey invariant I(K_k) + I(complement K_k) over E(r) and its integer zeros.

The invariant is linear in the basic invariants of E(r) (the f-vector).  A
vector can be a zero only if every orthogonal parameter with a positive
weight vanishes, which together with the linearised product equalities cuts
the search down to integer points of a small polyhedron.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as cartesian
from math import comb
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .constraints import (
    ALL_FAMILIES,
    LINEAR,
    PRODUCTS,
    ConstraintSystem,
    weakly_graphic_check,
)
from .gposet import GPoset, build_gposet
from .graph_core import Graph, complement_count, complete_graph, subgraph_count
from .linalg_exact import (
    Polyhedron,
    integer_points,
    integer_points_dive,
    inverse_image,
    kernel_zbasis,
    lp_min,
    rounded_interior_point,
    transpose,
)


@dataclass(frozen=True)
class RamseyCoefficients:
    f: Tuple[int, ...]
    k: int
    n: int
    r: int

    def value(self, z: Sequence[int]) -> int:
        return sum(a * b for a, b in zip(self.f, z))


def ramsey_f_vector(p: GPoset, n: int, k: int) -> RamseyCoefficients:
    """f with f^T z = I(K_k) + I(complement of K_k) on n-vertex graphs."""
    r = p.n
    if r < k:
        raise ValueError(f"poset E({r}) cannot express cliques of size {k}")
    if n < r:
        raise ValueError("n must be at least r")
    f = []
    for g in p:
        cv, e = g.cv, len(g)
        if cv > k:
            f.append(0)
            continue
        val = (-1) ** e * comb(n - cv, k - cv)
        if cv == k and e == comb(k, 2):
            val += 1
        f.append(val)
    return RamseyCoefficients(tuple(f), k, n, r)


def ramsey_value(h: Graph, n: int, k: int) -> int:
    """Cliques plus independent sets of size k, counted directly."""
    K = complete_graph(k)
    return subgraph_count(K, h) + complement_count(K, h, n)


# ---------------------------------------------------------------------------
# LP bound curves


def _linearised_products(system: ConstraintSystem, known: Dict[int, int]):
    """Product rows with a known factor as (row, rhs): row . z = rhs."""
    out = []
    for i, j, c in system.products:
        if i not in known and j not in known:
            continue
        row = [Fraction(-x) for x in c]
        rhs = Fraction(0)
        if i in known and j in known:
            rhs -= known[i] * known[j]
        elif i in known:
            row[j] += known[i]
        else:
            row[i] += known[j]
        out.append((row, rhs))
    return out


def lp_lower_bound(system: ConstraintSystem, rc: RamseyCoefficients, z1: int,
                   families: Iterable[str] = (LINEAR,)):
    """Exact LP minimum of f^T z at a fixed edge count, or None if infeasible."""
    families = set(families)
    m = len(system)
    A: List[List[Fraction]] = []
    b: List[Fraction] = []
    if LINEAR in families:
        for row in system.G:
            A.append([-Fraction(x) for x in row])
            b.append(Fraction(0))
    eq = [[Fraction(int(t == 0)) for t in range(m)], [Fraction(int(t == 1)) for t in range(m)]]
    beq = [Fraction(1), Fraction(z1)]
    if PRODUCTS in families:
        for row, rhs in _linearised_products(system, {0: 1, 1: z1}):
            eq.append(row)
            beq.append(rhs)
    res = lp_min([Fraction(x) for x in rc.f], A, b, eq, beq, nonneg=True)
    if res.status == "infeasible":
        return None
    if res.status == "unbounded":
        raise ValueError("LP unbounded; add constraint families")
    return res.value


def lp_lower_bound_curve(p: GPoset, n: int, k: int, z1_range: Optional[Iterable[int]] = None,
                         families: Iterable[str] = (LINEAR,)
                         ) -> List[Tuple[int, Optional[Fraction]]]:
    """(z1, minimum of the Ramsey invariant) for each z1; None marks infeasible."""
    system = ConstraintSystem(p, n)
    rc = ramsey_f_vector(p, n, k)
    z1_range = range(comb(n, 2) + 1) if z1_range is None else z1_range
    return [(z1, lp_lower_bound(system, rc, z1, families)) for z1 in z1_range]


# ---------------------------------------------------------------------------
# integer pipeline


@dataclass
class PipelineState:
    """Matrices of one pass of the zero search for a fixed assignment."""

    zset: List[int]                    # indices with a_i != 0
    a: List[Fraction]
    assigned: List[int]
    free: List[int]
    perm: List[int]                    # assigned first, then free
    G_star: List[List[int]]
    G_l: List[List[int]]
    P: List[List[int]] = field(default_factory=list)
    p: List[int] = field(default_factory=list)
    H_star: List[List[int]] = field(default_factory=list)
    h_star: List[int] = field(default_factory=list)
    H_l: List[List[int]] = field(default_factory=list)
    h_l: List[int] = field(default_factory=list)
    V: List[List[int]] = field(default_factory=list)
    z0: Optional[List[int]] = None


@dataclass
class ZeroSearchResult:
    status: str                        # "zero_found" or "bound_certified"
    zeros: List[List[int]]
    n: int
    k: int
    r: int
    z1_values: List[int]
    complete: bool = True

    def to_json(self) -> str:
        return json.dumps({"status": self.status, "zeros": self.zeros, "n": self.n,
                           "k": self.k, "r": self.r, "z1_values": self.z1_values,
                           "complete": self.complete})

    @property
    def message(self) -> str:
        if self.status == "bound_certified":
            return f"r({self.k}) <= {self.n}"
        return f"{len(self.zeros)} zero(s) found"


def _as_int_matrix(M: Sequence[Sequence]) -> List[List[int]]:
    out = []
    for row in M:
        r = []
        for x in row:
            x = Fraction(x)
            if x.denominator != 1:
                raise ValueError("expected an integer matrix")
            r.append(int(x))
        out.append(r)
    return out


class RamseyPipeline:
    """Search for r-graphic zeros of the Ramsey invariant."""

    def __init__(self, p: GPoset, n: int, k: int):
        self.p, self.n, self.k, self.r = p, n, k, p.n
        self.system = ConstraintSystem(p, n)
        self.rc = ramsey_f_vector(p, n, k)
        m = len(p)
        G = _as_int_matrix(self.system.G)
        E = self.system.E.entries
        D = self.system.D.entries
        # a = f^T G^{-1} with G^{-1} = D^{-1} E^T
        self.a = [sum(Fraction(self.rc.f[t] * E[i][t], D[t]) for t in range(m)) for i in range(m)]
        if any(x < 0 for x in self.a):
            raise ArithmeticError("negative weight in the orthogonal coordinates")
        self.zset = [i for i in range(m) if self.a[i] != 0]
        half = self.r // 2
        self.assigned = [j for j in range(m) if self.p[j].cv <= half]
        self.free = [j for j in range(m) if j not in self.assigned]
        self.G = G
        zs = set(self.zset)
        self.G_star = [G[i] for i in self.zset]
        self.G_l = [G[i] for i in range(m) if i not in zs]

    # -- one assignment ---------------------------------------------------

    def state_for(self, za: Dict[int, int]) -> PipelineState:
        m = len(self.p)
        st = PipelineState(self.zset, self.a, self.assigned, self.free,
                           self.assigned + self.free, self.G_star, self.G_l)
        P, pvec = [], []
        for i, j, c in self.system.products:
            if i not in za and j not in za:
                continue
            row = [-x for x in c]
            const = 0
            if i in za and j in za:
                const = za[i] * za[j]
            elif i in za:
                row[j] += za[i]
            else:
                row[i] += za[j]
            P.append(row)
            pvec.append(const)
        st.P, st.p = P, pvec
        K = self.G_star + P
        kp = [0] * len(self.G_star) + pvec
        st.H_star = [[row[j] for j in self.free] for row in K]
        st.h_star = [kp[t] + sum(K[t][j] * za[j] for j in self.assigned) for t in range(len(K))]
        st.H_l = [[row[j] for j in self.free] for row in self.G_l]
        st.h_l = [sum(row[j] * za[j] for j in self.assigned) for row in self.G_l]
        nf = len(self.free)
        if st.H_star:
            st.z0 = inverse_image(st.H_star, st.h_star)
            V = kernel_zbasis(st.H_star)
        else:
            st.z0 = [0] * nf
            V = [[int(a == b) for b in range(nf)] for a in range(nf)]
        st.V = V
        return st

    def polyhedron(self, st: PipelineState) -> Tuple[Polyhedron, List[List[int]]]:
        Vcols = transpose(st.V) if st.V and st.V[0] else []
        d = len(Vcols)
        Vrows = st.V if d else [[] for _ in self.free]
        HlV = [[sum(h * Vrows[t][c] for t, h in enumerate(row)) for c in range(d)] for row in st.H_l]
        Hlz0 = [sum(h * x for h, x in zip(row, st.z0)) + hl for row, hl in zip(st.H_l, st.h_l)]
        B = [list(r) for r in Vrows] + HlV
        h = list(st.z0) + Hlz0
        return Polyhedron([[Fraction(x) for x in r] for r in B], [Fraction(x) for x in h], dim=d), Vrows

    def zeros_for(self, za: Dict[int, int], limit: Optional[int] = None) -> List[List[int]]:
        st = self.state_for(za)
        if st.z0 is None:
            return []
        P, Vrows = self.polyhedron(st)
        out = []
        if not P.dim:
            points = [[]] if all(x >= 0 for x in P.h) else []
        elif limit is None:
            points = integer_points(P)
        else:
            # only a few zeros are wanted: look deep inside the polyhedron first
            points = _first_points(P)
        for c in points:
            zf = [z + sum(v * x for v, x in zip(row, c)) for z, row in zip(st.z0, Vrows)]
            z = [0] * len(self.p)
            for j in self.assigned:
                z[j] = za[j]
            for j, v in zip(self.free, zf):
                z[j] = v
            if self.rc.value(z) != 0:
                raise ArithmeticError("pipeline produced a vector with nonzero invariant")
            out.append(z)
            if limit is not None and len(out) >= limit:
                break
        return out

    # -- assignments --------------------------------------------------------

    def assigned_ranges(self, z1: int) -> List[Tuple[int, int]]:
        """LP ranges for the assigned variables beyond z_0 and z_1."""
        m = len(self.p)
        A = [[-Fraction(x) for x in row] for row in self.system.G]
        b = [Fraction(0)] * m
        eq = [[Fraction(int(t == 0)) for t in range(m)], [Fraction(int(t == 1)) for t in range(m)]]
        beq = [Fraction(1), Fraction(z1)]
        for row in self.G_star:
            eq.append([Fraction(x) for x in row])
            beq.append(Fraction(0))
        out = []
        for j in self.assigned:
            if j in (0, 1):
                continue
            c = [Fraction(int(t == j)) for t in range(m)]
            lo = lp_min(c, A, b, eq, beq, nonneg=True)
            if lo.status != "optimal":
                return []
            hi = lp_min([-x for x in c], A, b, eq, beq, nonneg=True)
            out.append((-(-lo.value.numerator // lo.value.denominator),
                        (-hi.value).numerator // (-hi.value).denominator))
        return out

    def assignments(self, z1: int) -> Iterator[Dict[int, int]]:
        rest = [j for j in self.assigned if j not in (0, 1)]
        if rest:
            ranges = self.assigned_ranges(z1)
            if len(ranges) != len(rest):
                return
            for vals in cartesian(*[range(a, b + 1) for a, b in ranges]):
                za = {0: 1, 1: z1}
                za.update(zip(rest, vals))
                yield za
        else:
            yield {0: 1, 1: z1}


def _first_points(P: Polyhedron) -> Iterator[List[int]]:
    seen = set()
    c = rounded_interior_point(P)
    if c is not None:
        seen.add(tuple(c))
        yield c
    for c in integer_points_dive(P):
        if tuple(c) not in seen:
            yield c


def _worker(args):
    p_n, p_d, n, k, za, limit = args
    pipe = RamseyPipeline(build_gposet(p_n, p_d), n, k)
    return za, pipe.zeros_for(za, limit)


def find_r_graphic_zeros(p: GPoset, n: int, k: int, z1: Optional[int] = None,
                         sweep: bool = False, limit: Optional[int] = None,
                         state_file: Optional[str] = None, workers: int = 1,
                         verify: bool = True) -> ZeroSearchResult:
    """All r-graphic zeros of the Ramsey invariant for the configured z1 values.

    By default z1 = floor(C(n,2)/2); ``sweep`` runs every z1 in [0, C(n,2)].
    A certificate is only claimed for the z1 values actually searched.
    ``state_file`` records finished assignments so a long run can resume.
    """
    pipe = RamseyPipeline(p, n, k)
    if sweep:
        z1s = list(range(comb(n, 2) + 1))
    else:
        z1s = [comb(n, 2) // 2 if z1 is None else z1]
    done: Dict[str, List[List[int]]] = {}
    if state_file and os.path.exists(state_file):
        with open(state_file) as fh:
            saved = json.load(fh)
        if (saved.get("n"), saved.get("k"), saved.get("r")) == (n, k, p.n):
            done = saved.get("done", {})

    def key(za):
        return ",".join(f"{j}:{za[j]}" for j in sorted(za))

    def save():
        if state_file:
            tmp = state_file + ".tmp"
            with open(tmp, "w") as fh:
                json.dump({"n": n, "k": k, "r": p.n, "done": done}, fh)
            os.replace(tmp, state_file)

    todo = [za for z in z1s for za in pipe.assignments(z) if key(za) not in done]
    zeros: List[List[int]] = [z for v in done.values() for z in v]
    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            jobs = [(p.n, p.d, n, k, za, limit) for za in todo]
            for za, found in ex.map(_worker, jobs):
                done[key(za)] = found
                zeros.extend(found)
                save()
    else:
        for za in todo:
            found = pipe.zeros_for(za, limit)
            done[key(za)] = found
            zeros.extend(found)
            save()
            if limit is not None and len(zeros) >= limit:
                break
    zeros = sorted({tuple(z) for z in zeros})
    zeros = [list(z) for z in zeros]
    if verify:
        for z in zeros:
            rep = weakly_graphic_check(z, p, n, system=pipe.system)
            if not rep.passed:
                raise ArithmeticError(f"reported zero fails the constraints: {rep.violations}")
    status = "zero_found" if zeros else "bound_certified"
    return ZeroSearchResult(status, zeros, n, k, p.n, z1s)
