"""Exact integer and rational linear algebra.

Hermite normal form, integer kernels, integer inverse images, LLL, an exact
simplex method and integer point enumeration in bounded polyhedra.  Matrices
are plain lists of rows holding ``int`` or ``Fraction`` entries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import floor, ceil, gcd
from typing import Iterator, List, Optional, Sequence, Tuple

IntMatrix = List[List[int]]
RatMatrix = List[List[Fraction]]


def identity(n: int) -> IntMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def transpose(M: Sequence[Sequence]) -> list:
    return [list(r) for r in zip(*M)] if M else []


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> list:
    Bt = transpose(B)
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def matvec(A: Sequence[Sequence], x: Sequence) -> list:
    return [sum(a * b for a, b in zip(row, x)) for row in A]


def det(M: Sequence[Sequence]) -> Fraction:
    """Determinant by Gaussian elimination over the rationals."""
    A = [[Fraction(x) for x in r] for r in M]
    n = len(A)
    d = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            A[c], A[p] = A[p], A[c]
            d = -d
        d *= A[c][c]
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            if f:
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return d


def rat_inverse(M: Sequence[Sequence]) -> RatMatrix:
    """Inverse over the rationals by Gauss-Jordan elimination."""
    n = len(M)
    A = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)]
         for i, r in enumerate(M)]
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c] != 0), None)
        if p is None:
            raise ZeroDivisionError("matrix is singular")
        A[c], A[p] = A[p], A[c]
        piv = A[c][c]
        A[c] = [x / piv for x in A[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return [row[n:] for row in A]


# ---------------------------------------------------------------------------
# Hermite normal form


def hnf(M: Sequence[Sequence[int]]) -> Tuple[IntMatrix, IntMatrix]:
    """Row Hermite normal form ``H = U M`` with ``U`` unimodular.

    ``H`` is in row echelon form, pivots are positive and entries above a
    pivot lie in ``[0, pivot)``.  Zero rows come last.
    """
    m = len(M)
    ncols = len(M[0]) if m else 0
    H = [[int(x) for x in r] for r in M]
    U = identity(m)
    row = 0
    for col in range(ncols):
        if row >= m:
            break
        # Euclid on column col among rows row..m-1
        while True:
            nz = [r for r in range(row, m) if H[r][col] != 0]
            if not nz:
                break
            p = min(nz, key=lambda r: abs(H[r][col]))
            H[row], H[p] = H[p], H[row]
            U[row], U[p] = U[p], U[row]
            done = True
            for r in range(row + 1, m):
                if H[r][col]:
                    q = H[r][col] // H[row][col]
                    H[r] = [a - q * b for a, b in zip(H[r], H[row])]
                    U[r] = [a - q * b for a, b in zip(U[r], U[row])]
                    if H[r][col]:
                        done = False
            if done:
                break
        if H[row][col] == 0:
            continue
        if H[row][col] < 0:
            H[row] = [-a for a in H[row]]
            U[row] = [-a for a in U[row]]
        piv = H[row][col]
        for r in range(row):
            q = H[r][col] // piv
            if q:
                H[r] = [a - q * b for a, b in zip(H[r], H[row])]
                U[r] = [a - q * b for a, b in zip(U[r], U[row])]
        row += 1
    return H, U


def _rank_rows(H: IntMatrix) -> int:
    return sum(1 for r in H if any(r))


def kernel_zbasis(M: Sequence[Sequence[int]], reduce: bool = True,
                  ncols: Optional[int] = None) -> IntMatrix:
    """Columns generating the integer kernel {x : M x = 0}.

    Obtained from the HNF of the transpose: rows of the transform hitting zero
    rows of the HNF span the kernel lattice.  Optionally LLL reduced.
    """
    n = len(M[0]) if M else (ncols or 0)
    if not M:
        return identity(n)
    H, U = hnf(transpose(M))
    rank = _rank_rows(H)
    basis = [U[i] for i in range(rank, n)]
    if reduce and basis:
        basis = lll(basis)
    return transpose(basis) if basis else [[] for _ in range(n)]


def kernel_columns(V: IntMatrix) -> List[List[int]]:
    return transpose(V) if V and V[0] else []


def inverse_image(H: Sequence[Sequence[int]], h: Sequence[int]) -> Optional[List[int]]:
    """Integer ``z`` with ``H z + h = 0``, or None when there is none."""
    m = len(H)
    if m == 0:
        return []
    n = len(H[0])
    b = [-int(x) for x in h]
    T, W = hnf(transpose(H))        # W H^T = T, so H W^T = T^T
    rank = _rank_rows(T)
    y = [0] * n
    for k in range(rank):
        pc = next(j for j in range(m) if T[k][j] != 0)
        rest = sum(T[kk][pc] * y[kk] for kk in range(k))
        num = b[pc] - rest
        if num % T[k][pc]:
            return None
        y[k] = num // T[k][pc]
    for j in range(m):
        if sum(T[k][j] * y[k] for k in range(rank)) != b[j]:
            return None
    z = [sum(W[k][i] * y[k] for k in range(n)) for i in range(n)]
    return z


# ---------------------------------------------------------------------------
# LLL


def lll(B: Sequence[Sequence[int]], delta: Fraction = Fraction(3, 4)) -> IntMatrix:
    """LLL reduction of the rows of ``B`` (assumed linearly independent)."""
    b = [[int(x) for x in r] for r in B]
    n = len(b)
    if n == 0:
        return b

    def dot(u, v):
        return sum(x * y for x, y in zip(u, v))

    def gso():
        bs: List[List[Fraction]] = []
        mu = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            v = [Fraction(x) for x in b[i]]
            for j in range(i):
                mu[i][j] = Fraction(dot(b[i], bs[j])) / dot(bs[j], bs[j])
                v = [x - mu[i][j] * y for x, y in zip(v, bs[j])]
            bs.append(v)
        return bs, mu

    bs, mu = gso()
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                bs, mu = gso()
        if dot(bs[k], bs[k]) >= (delta - mu[k][k - 1] ** 2) * dot(bs[k - 1], bs[k - 1]):
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            bs, mu = gso()
            k = max(k - 1, 1)
    return b


# ---------------------------------------------------------------------------
# exact simplex


@dataclass
class LPResult:
    status: str                      # "optimal", "infeasible", "unbounded"
    value: Optional[Fraction] = None
    x: Optional[List[Fraction]] = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _simplex_standard(c: List[Fraction], A: List[List[Fraction]], b: List[Fraction]) -> LPResult:
    """min c x  s.t.  A x = b, x >= 0, with b >= 0.  Two phases, Bland's rule."""
    m, n = len(A), len(c)
    # phase one tableau with artificials n..n+m-1
    T = [A[i][:] + [Fraction(int(i == j)) for j in range(m)] + [b[i]] for i in range(m)]
    basis = [n + i for i in range(m)]
    width = n + m

    def pivot(r: int, col: int) -> None:
        pv = T[r][col]
        T[r] = [x / pv for x in T[r]]
        for i in range(m):
            if i != r and T[i][col] != 0:
                f = T[i][col]
                T[i] = [x - f * y for x, y in zip(T[i], T[r])]
        basis[r] = col

    def run(cost: List[Fraction], allowed: int) -> str:
        while True:
            # reduced costs
            red = None
            for j in range(allowed):
                if j in basis:
                    continue
                rc = cost[j] - sum(cost[basis[i]] * T[i][j] for i in range(m))
                if rc < 0:
                    red = j
                    break
            if red is None:
                return "optimal"
            best_r, best = None, None
            for i in range(m):
                if T[i][red] > 0:
                    ratio = T[i][-1] / T[i][red]
                    if best is None or ratio < best or (ratio == best and basis[i] < basis[best_r]):
                        best_r, best = i, ratio
            if best_r is None:
                return "unbounded"
            pivot(best_r, red)

    cost1 = [Fraction(0)] * n + [Fraction(1)] * m
    run(cost1, width)
    if sum(T[i][-1] for i in range(m) if basis[i] >= n) != 0:
        return LPResult("infeasible")
    # drive artificials out of the basis
    for i in range(m):
        if basis[i] >= n:
            col = next((j for j in range(n) if T[i][j] != 0), None)
            if col is not None:
                pivot(i, col)
    keep = [i for i in range(m) if basis[i] < n]
    T = [T[i] for i in keep]
    basis = [basis[i] for i in keep]
    m = len(T)
    T = [r[:n] + [r[-1]] for r in T]
    status = run(c, n)
    if status == "unbounded":
        return LPResult("unbounded")
    x = [Fraction(0)] * n
    for i in range(m):
        x[basis[i]] = T[i][-1]
    return LPResult("optimal", sum(ci * xi for ci, xi in zip(c, x)), x)


def lp_min(c: Sequence, A: Sequence[Sequence] = (), b: Sequence = (),
           A_eq: Sequence[Sequence] = (), b_eq: Sequence = (),
           nonneg: bool = False) -> LPResult:
    """Exact minimum of ``c x`` subject to ``A x <= b`` and ``A_eq x = b_eq``.

    Variables are free unless ``nonneg`` is set.
    """
    nv = len(c)
    F = Fraction
    cols = nv if nonneg else 2 * nv

    def expand(row):
        row = [F(v) for v in row]
        return row if nonneg else row + [-v for v in row]

    rows: List[List[Fraction]] = []
    rhs: List[Fraction] = []
    nslack = len(A)
    for i, (row, bi) in enumerate(zip(A, b)):
        rows.append(expand(row) + [F(int(i == j)) for j in range(nslack)])
        rhs.append(F(bi))
    for row, bi in zip(A_eq, b_eq):
        rows.append(expand(row) + [F(0)] * nslack)
        rhs.append(F(bi))
    for i in range(len(rows)):
        if rhs[i] < 0:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]
    cost = expand(c) + [F(0)] * nslack
    res = _simplex_standard(cost, rows, rhs)
    if not res.optimal:
        return res
    y = res.x[:cols]
    x = y if nonneg else [p - q for p, q in zip(y[:nv], y[nv:])]
    return LPResult("optimal", sum(F(ci) * xi for ci, xi in zip(c, x)), x)


# ---------------------------------------------------------------------------
# integer points


@dataclass
class Polyhedron:
    """{c : B c + h >= 0}, optionally with per-coordinate integer bounds."""

    B: List[List[Fraction]]
    h: List[Fraction]
    lower: Optional[List[Optional[int]]] = None
    upper: Optional[List[Optional[int]]] = None
    dim: int = field(default=-1)

    def __post_init__(self):
        if len(self.B) != len(self.h):
            raise ValueError("B and h have different lengths")
        if self.dim < 0:
            self.dim = len(self.B[0]) if self.B else len(self.lower or self.upper or [])

    def contains(self, c: Sequence[int]) -> bool:
        return all(sum(Fraction(a) * x for a, x in zip(row, c)) + hi >= 0
                   for row, hi in zip(self.B, self.h))


def _int_rows(B, h) -> Tuple[List[List[int]], List[int]]:
    out_B, out_h = [], []
    for row, hi in zip(B, h):
        fr = [Fraction(x) for x in row] + [Fraction(hi)]
        den = 1
        for x in fr:
            den = den * x.denominator // gcd(den, x.denominator)
        ints = [int(x * den) for x in fr]
        out_B.append(ints[:-1])
        out_h.append(ints[-1])
    return out_B, out_h


def box_bounds(P: Polyhedron) -> Tuple[List[int], List[int]]:
    """Integer box containing P: given bounds tightened by LP where missing."""
    d = P.dim
    lo = list(P.lower) if P.lower else [None] * d
    hi = list(P.upper) if P.upper else [None] * d
    A = [[-Fraction(x) for x in row] for row in P.B]
    b = [Fraction(x) for x in P.h]
    for j in range(d):
        if lo[j] is not None:
            A.append([Fraction(-int(k == j)) for k in range(d)])
            b.append(Fraction(-lo[j]))
        if hi[j] is not None:
            A.append([Fraction(int(k == j)) for k in range(d)])
            b.append(Fraction(hi[j]))
    for j in range(d):
        for sign, store in ((1, lo), (-1, hi)):
            if store[j] is not None:
                continue
            c = [Fraction(sign * int(k == j)) for k in range(d)]
            res = lp_min(c, A, b)
            if res.status == "infeasible":
                return [0] * d, [-1] * d
            if res.status == "unbounded":
                raise ValueError(f"polyhedron unbounded in coordinate {j}")
            store[j] = ceil(res.value) if sign == 1 else floor(-res.value)
    return lo, hi


def integer_points(P: Polyhedron, order: Optional[Sequence[int]] = None,
                   first_range: Optional[Tuple[int, int]] = None) -> Iterator[List[int]]:
    """All integer points of a bounded polyhedron, each exactly once.

    Depth first over coordinates in ``order`` (default: natural order) with
    interval propagation from the constraints.  ``first_range`` restricts the
    first branching coordinate, which lets callers split the work.
    """
    d = P.dim
    if d == 0:
        if all(hi >= 0 for hi in P.h):
            yield []
        return
    lo, hi = box_bounds(P)
    if any(a > b for a, b in zip(lo, hi)):
        return
    order = list(order) if order is not None else list(range(d))
    B, h = _int_rows(P.B, P.h)
    m = len(B)
    # per level: contribution of unassigned coordinates, max possible
    x = [0] * d
    # rows touching each level
    involv = [[i for i in range(m) if B[i][order[k]] != 0] for k in range(d)]

    # precompute tail maxima per row and level
    tail = [[0] * (d + 1) for _ in range(m)]
    for i in range(m):
        for k in range(d - 1, -1, -1):
            j = order[k]
            a = B[i][j]
            tail[i][k] = tail[i][k + 1] + (a * hi[j] if a > 0 else a * lo[j])
    partial = [hh for hh in h]   # h + assigned contributions

    def rec(k: int) -> Iterator[List[int]]:
        j = order[k]
        a_lo, a_hi = lo[j], hi[j]
        if k == 0 and first_range is not None:
            a_lo, a_hi = max(a_lo, first_range[0]), min(a_hi, first_range[1])
        for i in involv[k]:
            a = B[i][j]
            # a*x_j >= -(partial + tail after k)
            rhs = -(partial[i] + tail[i][k + 1])
            if a > 0:
                a_lo = max(a_lo, -((-rhs) // a))
            else:
                a_hi = min(a_hi, rhs // a)
            if a_lo > a_hi:
                return
        for v in range(a_lo, a_hi + 1):
            x[j] = v
            for i in involv[k]:
                partial[i] += B[i][j] * v
            if k + 1 == d:
                if all(p >= 0 for p in partial):
                    yield x[:]
            else:
                yield from rec(k + 1)
            for i in involv[k]:
                partial[i] -= B[i][j] * v

    yield from rec(0)


def _all_rows(P: Polyhedron) -> Tuple[List[List[Fraction]], List[Fraction]]:
    """Rows of P with the per-coordinate bounds written as constraints."""
    d = P.dim
    B = [[Fraction(x) for x in row] for row in P.B]
    h = [Fraction(x) for x in P.h]
    for j in range(d):
        unit = [Fraction(int(k == j)) for k in range(d)]
        if P.lower and P.lower[j] is not None:
            B.append(unit)
            h.append(Fraction(-P.lower[j]))
        if P.upper and P.upper[j] is not None:
            B.append([-x for x in unit])
            h.append(Fraction(P.upper[j]))
    return B, h


def rounded_interior_point(P: Polyhedron) -> Optional[List[int]]:
    """An integer point found by rounding a deep interior point, or None.

    Maximises t subject to B c + h >= t w with w_i = sum_j |B_ij| / 2.  When
    t >= 1 every constraint has enough slack that rounding each coordinate
    of the optimum to the nearest integer stays inside P.
    """
    d = P.dim
    if d == 0:
        return [] if all(x >= 0 for x in P.h) else None
    A, b = [], []
    for row, hi in zip(*_all_rows(P)):
        w = sum(abs(x) for x in row) / 2
        A.append([-x for x in row] + [w])
        b.append(hi)
    A.append([Fraction(0)] * d + [Fraction(1)])
    b.append(Fraction(1))
    res = lp_min([Fraction(0)] * d + [Fraction(-1)], A, b)
    if res.status != "optimal" or -res.value < 1:
        return None
    c = [floor(x + Fraction(1, 2)) for x in res.x[:d]]
    B, h = _all_rows(P)
    ok = all(sum(a * v for a, v in zip(row, c)) + hi >= 0 for row, hi in zip(B, h))
    return c if ok else None


def _center_out(lo: int, hi: int, mid: Fraction) -> Iterator[int]:
    m = min(max(floor(mid + Fraction(1, 2)), lo), hi)
    yield m
    step = 1
    while m - step >= lo or m + step <= hi:
        if m + step <= hi:
            yield m + step
        if m - step >= lo:
            yield m - step
        step += 1


def integer_points_dive(P: Polyhedron) -> Iterator[List[int]]:
    """Integer points of a bounded polyhedron, deepest first.

    Each coordinate in turn gets its exact LP range given the earlier ones,
    and values are tried from the middle of that range outwards.  Every
    point is still produced exactly once, so this is a complete enumeration
    in a different order; it reaches a first point quickly when the
    polyhedron is wide.
    """
    d = P.dim
    B, h = _all_rows(P)
    x: List[int] = []

    def rec(k: int) -> Iterator[List[int]]:
        rest_h = [hi + sum(row[j] * x[j] for j in range(k)) for row, hi in zip(B, h)]
        if k == d:
            if all(v >= 0 for v in rest_h):
                yield list(x)
            return
        A = [[-row[j] for j in range(k, d)] for row in B]
        ends = []
        for sign in (1, -1):
            res = lp_min([Fraction(sign * int(j == k)) for j in range(k, d)], A, rest_h)
            if res.status == "infeasible":
                return
            if res.status == "unbounded":
                raise ValueError(f"polyhedron unbounded in coordinate {k}")
            ends.append(res.value if sign == 1 else -res.value)
        lo, hi = ceil(ends[0]), floor(ends[1])
        for v in _center_out(lo, hi, (ends[0] + ends[1]) / 2):
            x.append(v)
            yield from rec(k + 1)
            x.pop()

    yield from rec(0)


def grid_scan(P: Polyhedron, lo: Sequence[int], hi: Sequence[int]) -> List[List[int]]:
    """Brute-force reference for integer_points."""
    from itertools import product

    return [list(p) for p in product(*[range(a, b + 1) for a, b in zip(lo, hi)])
            if P.contains(p)]
