"""Necessary constraints on invariant vectors of large graphs.

Invariants of E(r) evaluated on an n-vertex graph satisfy three families of
constraints: nonnegative integrality, the linear system (E^-1)^T D z >= 0 and
the product equalities.  This module checks them, derives triangular bounds
from them and enumerates the integer vectors they admit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, comb, floor, gcd as _gcd
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from .gposet import (
    ETransform,
    GPoset,
    InvariantVector,
    etransform,
    etransform_inverse,
    product_coeffs,
    product_pairs,
)
from .graph_core import Graph, format_edge_list
from .linalg_exact import Polyhedron, integer_points

NONNEG = "nonnegativity"
INTEGRAL = "integrality"
LINEAR = "linear"
PRODUCTS = "products"
ALL_FAMILIES: FrozenSet[str] = frozenset({NONNEG, INTEGRAL, LINEAR, PRODUCTS})


class InvalidInequality(ValueError):
    def __init__(self, witness: Graph, value):
        super().__init__(f"inequality fails on {format_edge_list(witness) or 'empty graph'} "
                         f"(value {value})")
        self.witness = witness
        self.value = value


@dataclass(frozen=True)
class DiagScaling:
    entries: Tuple[int, ...]
    n: int
    r: int

    def __getitem__(self, i: int) -> int:
        return self.entries[i]

    def __len__(self) -> int:
        return len(self.entries)


def scaling_matrix(p: GPoset, n: int) -> DiagScaling:
    """D = diag(C(n - cv(g_i), r - cv(g_i)))."""
    r = p.n
    if n < r:
        raise ValueError(f"n={n} must be at least r={r}")
    return DiagScaling(tuple(comb(n - c, r - c) for c in p.cvs), n, r)


def lift_inequality(c: Sequence, p: GPoset, n: int, check: bool = True,
                    E: Optional[ETransform] = None) -> List[Fraction]:
    """Lift ``c x <= 0`` from E(r) to E(n); returns the coefficients c D.

    With ``check`` the inequality is first evaluated on every member of the
    poset and InvalidInequality names a failing graph.
    """
    c = [Fraction(x) for x in c]
    if len(c) != len(p):
        raise ValueError("coefficient vector does not match the poset")
    if check:
        E = E or etransform(p)
        for i, row in enumerate(E.entries):
            val = sum(a * x for a, x in zip(c, row))
            if val > 0:
                raise InvalidInequality(p[i], val)
    D = scaling_matrix(p, n)
    return [a * d for a, d in zip(c, D.entries)]


# ---------------------------------------------------------------------------
# the constraint system


@dataclass
class ConstraintReport:
    flags: Dict[str, bool]
    violations: Dict[str, list] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    def to_json(self) -> str:
        return json.dumps({"pass": self.passed, "flags": self.flags,
                           "violations": self.violations}, default=str)


class ConstraintSystem:
    """E, its inverse, D, G = (E^-1)^T D and the product rows for E(r) inside E(n)."""

    def __init__(self, p: GPoset, n: int, product_max_edges: Optional[int] = None):
        self.p = p
        self.n = n
        self.r = p.n
        self.E = etransform(p)
        self.B = etransform_inverse(self.E)          # rows of E^-1
        self.D = scaling_matrix(p, n)
        m = len(p)
        # G[i][k] = b_ki D_k
        self.G = [[self.B[k][i] * self.D[k] for k in range(m)] for i in range(m)]
        self.products: List[Tuple[int, int, List[int]]] = [
            (i, j, product_coeffs(p, i, j, self.E))
            for i, j in product_pairs(p, product_max_edges)
        ]

    def __len__(self) -> int:
        return len(self.p)

    def orthogonal(self, z: Sequence[int]) -> List[Fraction]:
        """zhat = (E^-1)^T D z."""
        return [sum(g * x for g, x in zip(row, z)) for row in self.G]

    def product_residual(self, z: Sequence[int], i: int, j: int, c: Sequence[int]) -> int:
        return z[i] * z[j] - sum(ck * zk for ck, zk in zip(c, z) if ck)

    def check(self, z: Sequence, families: Iterable[str] = ALL_FAMILIES) -> ConstraintReport:
        families = set(families)
        if len(z) != len(self.p):
            raise ValueError(f"vector of length {len(z)} does not match poset of size {len(self.p)}")
        flags: Dict[str, bool] = {}
        viol: Dict[str, list] = {}
        if INTEGRAL in families:
            bad = [i for i, x in enumerate(z) if Fraction(x).denominator != 1]
            bad += [0] if z[0] != 1 else []
            flags[INTEGRAL], viol[INTEGRAL] = not bad, bad
        if NONNEG in families:
            bad = [i for i, x in enumerate(z) if x < 0]
            flags[NONNEG], viol[NONNEG] = not bad, bad
        if LINEAR in families:
            zh = self.orthogonal(z)
            bad = [i for i, x in enumerate(zh) if x < 0]
            flags[LINEAR], viol[LINEAR] = not bad, bad
        if PRODUCTS in families:
            bad = [(i, j) for i, j, c in self.products if self.product_residual(z, i, j, c)]
            flags[PRODUCTS], viol[PRODUCTS] = not bad, bad
        return ConstraintReport(flags, {k: v for k, v in viol.items() if v})


def weakly_graphic_check(z, p: GPoset, n: int, families: Iterable[str] = ALL_FAMILIES,
                         system: Optional[ConstraintSystem] = None) -> ConstraintReport:
    """Evaluate the selected constraint families on ``z``."""
    values = z.values if isinstance(z, InvariantVector) else z
    system = system or ConstraintSystem(p, n)
    return system.check(values, families)


# ---------------------------------------------------------------------------
# triangular bounds


def strict_upper_ones(m: int) -> List[List[int]]:
    return [[int(j > i) for j in range(m)] for i in range(m)]


@dataclass
class BoundSystem:
    """Matrices L = ((E^-1)^T - I) D, U = T (E^-1)^T D and T.

    Since zhat = D z + L z, the lower bound reads D z >= -L z, and since the
    tail sums of zhat are at most C(n, r), the upper bound reads
    D z <= C(n, r) - (U + L) z.  ``lower``/``upper`` evaluate these for one
    coordinate given the coordinates above it.
    """

    L: List[List[Fraction]]
    U: List[List[Fraction]]
    T: List[List[int]]
    D: DiagScaling
    n: int
    total: int
    poset: GPoset

    def lower(self, i: int, z: Sequence[int]) -> int:
        """Least admissible z_i given z_{i+1..N}."""
        rest = sum(self.L[i][k] * z[k] for k in range(i + 1, len(z)))
        return max(0, ceil(-rest / self.D[i]))

    def upper(self, i: int, z: Sequence[int]) -> int:
        """Largest admissible z_i given z_{i+1..N}."""
        rest = sum((self.U[i][k] + self.L[i][k]) * z[k] for k in range(i + 1, len(z)))
        return floor((self.total - rest) / self.D[i])

    def literal_lower_failures(self, z: Sequence[int]) -> List[int]:
        """Rows where L z <= D z fails."""
        Lz = [sum(a * x for a, x in zip(row, z)) for row in self.L]
        return [i for i in range(len(z)) if Lz[i] > self.D[i] * z[i]]

    def literal_upper_failures(self, z: Sequence[int]) -> List[int]:
        """Rows where D z <= C(n, r) - U z fails."""
        Uz = [sum(a * x for a, x in zip(row, z)) for row in self.U]
        return [i for i in range(len(z)) if self.D[i] * z[i] > self.total - Uz[i]]


def triangular_bounds(p: GPoset, n: int, system: Optional[ConstraintSystem] = None) -> BoundSystem:
    system = system or ConstraintSystem(p, n)
    m = len(p)
    G = system.G
    D = system.D
    L = [[G[i][k] - (D[k] if i == k else 0) for k in range(m)] for i in range(m)]
    T = strict_upper_ones(m)
    U = [[sum(T[i][t] * G[t][k] for t in range(m)) for k in range(m)] for i in range(m)]
    return BoundSystem(L, U, T, D, n, comb(n, p.n), p)


def validate_bound_matrices(rows: Sequence[Sequence[int]], L: Sequence[Sequence],
                            U: Sequence[Sequence], skip_zero_rows: bool = True
                            ) -> Tuple[bool, List[Tuple[int, int, str]]]:
    """Check (L x)_i <= x_i <= (U x)_i for every vector ``x`` in ``rows``.

    A row of L or U that is identically zero states no bound and is skipped
    when ``skip_zero_rows`` is set.  Witnesses are (vector index, row, side).
    """
    wit = []
    for a, x in enumerate(rows):
        for i in range(len(x)):
            lrow, urow = L[i], U[i]
            if not (skip_zero_rows and not any(lrow)):
                if sum(Fraction(c) * v for c, v in zip(lrow, x)) > x[i]:
                    wit.append((a, i, "lower"))
            if not (skip_zero_rows and not any(urow)):
                if sum(Fraction(c) * v for c, v in zip(urow, x)) < x[i]:
                    wit.append((a, i, "upper"))
    return not wit, wit


def _parse_rows(text: str) -> List[List[Fraction]]:
    return [[Fraction(t) for t in line.split()] for line in text.strip().splitlines()]


# LP-fitted bound matrices for E(4), rows and columns in the printed matrix
# order (see gposet.PRINTED_E4_MATRIX_ORDER).
PRINTED_E4_L = _parse_rows("""
0 0 0 0 0 0 0 0 0 0 0
0 0 0 0 0 0 0 0 0 0 0
0 0 0 0 0 0 0 0 0 0 0
-3 2 -1 0 0 0 0 0 0 0 0
0 -2/3 0 2/3 0 0 0 0 0 0 0
0 -1 2 1/2 3/2 0 0 0 0 0 0
0 0 0 -1/3 1 1/3 0 0 0 0 0
-4/5 4/5 -4/5 -1 7/5 4/5 7/5 0 0 0 0
0 0 -1/3 0 -1/2 1/3 0 1/6 0 0 0
0 -1/3 2/3 2/3 -1 -1 -1 7/6 4/3 0 0
0 0 0 0 0 0 0 -1/12 0 1/3 0
""")

PRINTED_E4_U = _parse_rows("""
0 0 0 0 0 0 0 0 0 0 0
6 0 0 0 0 0 0 0 0 0 0
0 1/2 0 0 0 0 0 0 0 0 0
0 1 2 0 0 0 0 0 0 0 0
0 0 0 1/3 0 0 0 0 0 0 0
12/11 -12/11 16/11 12/11 0 0 0 0 0 0 0
0 1/3 -2/3 0 1 0 0 0 0 0 0
0 2/3 0 -4/3 2 2/3 2 0 0 0 0
0 0 0 1/4 -3/4 0 -3/4 1/2 0 0 0
0 0 0 1/6 -1/2 -1/3 -1/2 5/6 2/3 0 0
0 0 0 0 0 1/12 0 -1/6 -1/3 1/2 0
""")


# ---------------------------------------------------------------------------
# closed form bounds on the number of 2-paths


def raja3_bounds(n: int, z1) -> Tuple[Fraction, Fraction]:
    """Lower and upper bounds on I(a12 a13) from the edge count, n >= 5."""
    if n < 5:
        raise ValueError("the bounds need n >= 5")
    z1 = Fraction(z1)
    c3 = comb(n - 2, 3)
    lower = (-(3 * c3 + 2 * (n - 4)) * z1 + 2 * (n - 4) * z1 ** 2) / (comb(n - 3, 2) + 4 * (n - 4))
    upper = (Fraction(n - 4, 2) * z1 ** 2 + (Fraction(3, 2) * c3 - Fraction(n - 4, 2)) * z1) \
        / (comb(n - 3, 2) + n - 4)
    return lower, upper


def raja3_curve(n: int, z1_values: Optional[Iterable[int]] = None) -> List[Tuple[int, Fraction, Fraction]]:
    z1_values = range(comb(n, 2) + 1) if z1_values is None else z1_values
    return [(z, *raja3_bounds(n, z)) for z in z1_values]


# ---------------------------------------------------------------------------
# enumeration


def _product_index(system: ConstraintSystem):
    """For every product row the smallest index it involves."""
    out: Dict[int, list] = {}
    for i, j, c in system.products:
        low = min([i, j] + [k for k, ck in enumerate(c) if ck])
        out.setdefault(low, []).append((i, j, c))
    return out


def _integer_rows(rows: Sequence[Sequence[Fraction]]) -> Tuple[List[List[int]], int]:
    den = 1
    for row in rows:
        for x in row:
            den = den * Fraction(x).denominator // _gcd(den, Fraction(x).denominator)
    return [[int(Fraction(x) * den) for x in row] for row in rows], den


def _enumerate_triangular(system: ConstraintSystem, families, fixed: Dict[int, int],
                          ) -> Iterator[List[int]]:
    m = len(system.p)
    G, den = _integer_rows(system.G)
    D = [d * den for d in system.D.entries]
    total = comb(system.n, system.p.n) * den
    # lower: D_i z_i >= -sum_{k>i} G[i][k] z_k
    low_terms = [[(k, G[i][k]) for k in range(i + 1, m) if G[i][k]] for i in range(m)]
    # upper: D_i z_i <= total - sum_{k>i} (sum_{t>=i} G[t][k]) z_k
    up_terms = []
    for i in range(m):
        terms = []
        for k in range(i + 1, m):
            c = sum(G[t][k] for t in range(i, k + 1))
            if c:
                terms.append((k, c))
        up_terms.append(terms)
    by_low = _product_index(system) if PRODUCTS in families else {}
    z = [0] * m
    z[0] = 1

    def rec(i: int) -> Iterator[List[int]]:
        if i == 0:
            if LINEAR in families and sum(g * x for g, x in zip(G[0], z)) < 0:
                return
            if all(not system.product_residual(z, a, b, c) for a, b, c in by_low.get(0, ())):
                yield z[:]
            return
        d = D[i]
        rest = sum(c * z[k] for k, c in low_terms[i])
        lo = max(0, -((rest) // d))
        hi = (total - sum(c * z[k] for k, c in up_terms[i])) // d
        if i in fixed:
            lo, hi = max(lo, fixed[i]), min(hi, fixed[i])
        checks = by_low.get(i, ())
        for v in range(lo, hi + 1):
            z[i] = v
            if all(not system.product_residual(z, a, b, c) for a, b, c in checks):
                yield from rec(i - 1)
        z[i] = 0

    yield from rec(m - 1)


def _enumerate_graded(system: ConstraintSystem, families, fixed: Dict[int, int]
                      ) -> Iterator[List[int]]:
    """Level by level in edge count; products of total size s are linear in level s."""
    p = system.p
    m = len(p)
    sizes = p.sizes
    levels: Dict[int, List[int]] = {}
    for k in range(1, m):
        levels.setdefault(sizes[k], []).append(k)
    by_level: Dict[int, list] = {}
    for i, j, c in system.products:
        by_level.setdefault(sizes[i] + sizes[j], []).append((i, j, c))
    order = sorted(levels)
    z = [0] * m
    z[0] = 1

    def level_points(s: int) -> Iterator[List[int]]:
        vars_ = levels[s]
        pos = {k: t for t, k in enumerate(vars_)}
        nv = len(vars_)
        B: List[List[int]] = []
        h: List[int] = []
        hi: List[Optional[int]] = [None] * nv
        lo = [0] * nv
        for t, k in enumerate(vars_):
            if k in fixed:
                lo[t] = hi[t] = fixed[k]
        for i, j, c in by_level.get(s, ()):
            row = [0] * nv
            rhs = z[i] * z[j]
            for k, ck in enumerate(c):
                if not ck:
                    continue
                if k in pos:
                    row[pos[k]] += ck
                else:
                    rhs -= ck * z[k]
            if not any(row):
                if rhs:
                    return
                continue
            B.append(row)
            h.append(-rhs)
            B.append([-a for a in row])
            h.append(rhs)
            if all(a >= 0 for a in row):
                if rhs < 0:
                    return
                for t, a in enumerate(row):
                    if a > 0:
                        cap = rhs // a
                        hi[t] = cap if hi[t] is None else min(hi[t], cap)
        if any(x is None for x in hi):
            raise ValueError(f"level {s} is unbounded under the selected families; fix more variables")
        if any(a > b for a, b in zip(lo, hi)):
            return
        P = Polyhedron([[Fraction(a) for a in r] for r in B], [Fraction(x) for x in h],
                       lower=lo, upper=hi, dim=nv)
        yield from integer_points(P)

    def rec(t: int) -> Iterator[List[int]]:
        if t == len(order):
            if LINEAR in families and any(x < 0 for x in system.orthogonal(z)):
                return
            yield z[:]
            return
        s = order[t]
        for pt in level_points(s):
            for k, v in zip(levels[s], pt):
                z[k] = v
            yield from rec(t + 1)
        for k in levels[s]:
            z[k] = 0

    yield from rec(0)


def enumerate_r_graphic(p: GPoset, n: int, fixed: Optional[Dict[int, int]] = None,
                        families: Iterable[str] = ALL_FAMILIES,
                        product_max_edges: Optional[int] = None,
                        system: Optional[ConstraintSystem] = None) -> Iterator[InvariantVector]:
    """Integer vectors (z_0 = 1) satisfying the selected constraint families.

    With the linear family the loop runs from z_N down to z_1 inside the
    triangular bounds; otherwise it runs level by level in edge count, where
    the product equalities become linear.  ``fixed`` maps poset positions to
    prescribed values.
    """
    families = set(families) | {INTEGRAL}
    fixed = dict(fixed or {})
    if n < p.n:
        raise ValueError("n must be at least r")
    system = system or ConstraintSystem(p, n, product_max_edges)
    if LINEAR in families:
        gen = _enumerate_triangular(system, families, fixed)
    elif PRODUCTS in families and NONNEG in families:
        gen = _enumerate_graded(system, families, fixed)
    else:
        raise ValueError("selected families do not bound the enumeration")
    for z in gen:
        yield InvariantVector(tuple(z), n)


def distribution(values: Iterable[int]) -> Dict[int, int]:
    out: Dict[int, int] = {}
    for v in values:
        out[v] = out.get(v, 0) + 1
    return dict(sorted(out.items()))


def format_enumerator(dist: Dict[int, int]) -> str:
    """Enumerator polynomial in ``c*x^i`` notation."""
    terms = []
    for i, c in sorted(dist.items()):
        if i == 0:
            terms.append(str(c))
        else:
            coef = "" if c == 1 else f"{c}*"
            terms.append(f"{coef}x^{i}" if i > 1 else f"{coef}x")
    return " + ".join(terms) if terms else "0"
