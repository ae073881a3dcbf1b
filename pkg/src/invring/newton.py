"""Clique counts, power sums and the counts sigma(e, v).

sigma_e^v(h) is the number of e-edge subgraphs of h spanning exactly v
vertices.  h_e^v sums (induced edge count)^e over v-vertex subsets and b_e^v
sums C(induced edge count, e) over the same subsets.  The three families are
related by exact rational linear maps whose coefficients are polynomials in
the number of vertices n; this module evaluates all three by brute force,
builds the maps, expands I(complement of K_k) and checks polynomial
identities among the sigma counts.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from itertools import combinations
from math import comb, factorial, isqrt
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import sympy

from .constraints import InvalidInequality
from .gposet import GPoset
from .graph_core import N_SYMBOL, Graph, enumerate_graphs, format_edge_list, subgraph_count

SigmaIndex = Tuple[int, int]          # (e, v)


def omega(x: int) -> int:
    """Fewest vertices that can carry ``x`` edges; omega(0) = 0."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0:
        return 0
    v = (1 + isqrt(1 + 8 * x)) // 2
    while v * (v - 1) // 2 < x:
        v += 1
    while v > 1 and (v - 1) * (v - 2) // 2 >= x:
        v -= 1
    return v


def is_valid_index(e: int, v: int) -> bool:
    return e >= 0 and v >= 0 and omega(e) <= v and e <= v * (v - 1) // 2


def _check_index(e: int, v: int) -> None:
    if not is_valid_index(e, v):
        raise ValueError(f"invalid sigma index (e={e}, v={v})")


@lru_cache(maxsize=None)
def elem_sym_prefix(a: int, b: int) -> int:
    """Elementary symmetric polynomial of degree a in 1, ..., b."""
    if a == 0:
        return 1
    if a < 0 or a > b:
        return 0
    return b * elem_sym_prefix(a - 1, b - 1) + elem_sym_prefix(a, b - 1)


# ---------------------------------------------------------------------------
# brute force evaluation


@lru_cache(maxsize=None)
def _classes(e: int, v: int) -> Tuple[Graph, ...]:
    return tuple(g for g in enumerate_graphs(v, e) if len(g) == e and g.cv == v)


def sigma_eval(h: Graph, e: int, v: int) -> int:
    """Number of e-edge subgraphs of ``h`` with exactly v connected vertices."""
    _check_index(e, v)
    if e == 0:
        return 1 if v == 0 else 0
    if e > len(h) or v > h.cv:
        return 0
    return sum(subgraph_count(a, h) for a in _classes(e, v))


def _induced_counts(h: Graph, n: int, v: int) -> Dict[int, int]:
    """Histogram of induced edge counts over the v-subsets of an n-set."""
    if h.cv > n:
        raise ValueError(f"graph has {h.cv} connected vertices, more than n={n}")
    label = {x: i for i, x in enumerate(h.vertices)}
    edges = [(label[a], label[b]) for a, b in h.edges]
    hist: Dict[int, int] = {}
    k = h.cv
    # only the part of a subset inside the support matters
    for s in range(0, min(v, k) + 1):
        rest = comb(n - k, v - s)
        if rest == 0:
            continue
        for sub in combinations(range(k), s):
            ss = set(sub)
            m = sum(1 for a, b in edges if a in ss and b in ss)
            hist[m] = hist.get(m, 0) + rest
    return hist


def h_eval(h: Graph, n: int, e: int, v: int) -> int:
    """Sum over v-vertex subsets of the n vertices of (induced edges)^e."""
    return sum(c * m ** e for m, c in _induced_counts(h, n, v).items())


def b_eval(h: Graph, n: int, e: int, v: int) -> int:
    """Sum over v-vertex subsets of C(induced edges, e)."""
    return sum(c * comb(m, e) for m, c in _induced_counts(h, n, v).items())


# ---------------------------------------------------------------------------
# conversion coefficients


def _symbolic(n) -> bool:
    return isinstance(n, sympy.Basic)


def _one(n):
    return sympy.Integer(1) if _symbolic(n) else Fraction(1)


def _binom(x, j: int, n):
    """C(x, j) as a polynomial in x (x may involve the symbol n)."""
    out = _one(n)
    for t in range(j):
        out *= (x - t)
    out /= factorial(j)
    return sympy.expand(out) if _symbolic(n) else out


def d_coeff(i: int, v: int, n=N_SYMBOL):
    """d_i^v = (-1)^i / i! * prod_{j=1..i} (n - v + j)."""
    out = _one(n) * (-1) ** i / factorial(i)
    for j in range(1, i + 1):
        out *= (n - v + j)
    return sympy.expand(out) if _symbolic(n) else out


def d_coeff_recursive(i: int, v: int, n=N_SYMBOL):
    """The same numbers from d_i^v = -sum_j C(n-v+j, j) d_{i-j}^{v-j}."""
    if i == 0:
        return _one(n)
    out = sum((_binom(n - v + j, j, n) * d_coeff_recursive(i - j, v - j, n)
               for j in range(1, i + 1)), _one(n) * 0)
    return sympy.expand(-out) if _symbolic(n) else -out


def _stirling_row(e: int) -> List[Tuple[int, Fraction]]:
    """Pairs (f, coefficient) with C(x, e) = sum coefficient * x^f."""
    if e == 0:
        return [(0, Fraction(1))]
    return [(f, Fraction((-1) ** (e - f) * elem_sym_prefix(e - f, e - 1), factorial(e)))
            for f in range(1, e + 1)]


def _need(values: Mapping[SigmaIndex, object], key: SigmaIndex, what: str):
    try:
        return values[key]
    except KeyError:
        raise ValueError(f"missing {what} value for index {key}") from None


def b_from_h(h_values: Mapping[SigmaIndex, object], indices: Iterable[SigmaIndex]) -> Dict[SigmaIndex, object]:
    """b_e^v = sum_f (-1)^(e-f) sigma_{e-f}([e-1]) / e! * h_f^v."""
    out = {}
    for e, v in indices:
        out[(e, v)] = sum((c * _need(h_values, (f, v), "h") for f, c in _stirling_row(e)),
                          Fraction(0))
    return out


def sigma_from_b(b_values: Mapping[SigmaIndex, object], n, indices: Iterable[SigmaIndex]) -> Dict[SigmaIndex, object]:
    """sigma_e^v = sum_{w=omega(e)..v} d_{v-w}^v b_e^w."""
    out = {}
    for e, v in indices:
        _check_index(e, v)
        total = _one(n) * 0
        for w in range(omega(e), v + 1):
            total += d_coeff(v - w, v, n) * _need(b_values, (e, w), "b")
        out[(e, v)] = sympy.expand(total) if _symbolic(n) else total
    return out


def sigma_from_h_coeffs(e: int, v: int, n=N_SYMBOL) -> Dict[SigmaIndex, object]:
    """Row of the composite map: sigma_e^v as a combination of the h_f^w."""
    _check_index(e, v)
    row: Dict[SigmaIndex, object] = {}
    for w in range(omega(e), v + 1):
        d = d_coeff(v - w, v, n)
        for f, c in _stirling_row(e):
            term = d * (sympy.Rational(c.numerator, c.denominator) if _symbolic(n) else c)
            row[(f, w)] = row.get((f, w), 0) + term
    if _symbolic(n):
        row = {k: sympy.expand(x) for k, x in row.items()}
    return {k: x for k, x in row.items() if x != 0}


def sigma_from_h(h_values: Mapping[SigmaIndex, object], n, indices: Iterable[SigmaIndex]) -> Dict[SigmaIndex, object]:
    """Composite map sigma <- h for the requested indices."""
    out = {}
    for e, v in indices:
        row = sigma_from_h_coeffs(e, v, n)
        total = sum((c * _need(h_values, k, "h") for k, c in row.items()), _one(n) * 0)
        out[(e, v)] = sympy.expand(total) if _symbolic(n) else total
    return out


def h_support(indices: Iterable[SigmaIndex]) -> List[SigmaIndex]:
    """Indices (f, w) of the h-values that the composite map reads."""
    need = set()
    for e, v in indices:
        for w in range(omega(e), v + 1):
            for f, _ in _stirling_row(e):
                need.add((f, w))
    return sorted(need, key=lambda t: (t[1], t[0]))


@dataclass
class ConversionTables:
    """The three maps for a fixed set of sigma indices, keyed by index."""
    n: object
    indices: Tuple[SigmaIndex, ...]
    sigma_h: Dict[SigmaIndex, Dict[SigmaIndex, object]] = field(default_factory=dict)

    def __post_init__(self):
        for e, v in self.indices:
            self.sigma_h[(e, v)] = sigma_from_h_coeffs(e, v, self.n)

    def apply(self, h_values: Mapping[SigmaIndex, object]) -> Dict[SigmaIndex, object]:
        return {k: sum((c * _need(h_values, j, "h") for j, c in row.items()), _one(self.n) * 0)
                for k, row in self.sigma_h.items()}

    def to_json(self) -> str:
        def key(t):
            return f"{t[0]},{t[1]}"
        return json.dumps({key(k): {key(j): str(c) for j, c in row.items()}
                           for k, row in self.sigma_h.items()}, indent=1)


def sigma_indices(r: int) -> List[SigmaIndex]:
    """Column order (v, e) lexicographic: s(1,2), s(2,3), s(3,3), s(2,4), ..."""
    return [(e, v) for v in range(2, r + 1)
            for e in range(max(1, (v + 1) // 2), v * (v - 1) // 2 + 1)]


# ---------------------------------------------------------------------------
# independent sets


@dataclass
class KbarExpansion:
    k: int
    n: object
    constant: object
    sigma_terms: Dict[SigmaIndex, object]
    h_terms: Dict[SigmaIndex, object]

    def evaluate_sigma(self, values: Mapping[SigmaIndex, object]):
        return self.constant + sum(c * _need(values, k, "sigma") for k, c in self.sigma_terms.items())

    def evaluate_h(self, values: Mapping[SigmaIndex, object]):
        return self.constant + sum(c * _need(values, k, "h") for k, c in self.h_terms.items())

    def substitute(self, n: int) -> "KbarExpansion":
        def sub(x):
            x = sympy.sympify(x).subs(N_SYMBOL, n)
            return Fraction(int(x.p), int(x.q))
        return KbarExpansion(self.k, n, sub(self.constant),
                             {k: sub(c) for k, c in self.sigma_terms.items()},
                             {k: sub(c) for k, c in self.h_terms.items()})

    def format_sigma(self) -> str:
        return _format_terms(self.constant, self.sigma_terms, "s")

    def format_h(self) -> str:
        return _format_terms(self.constant, self.h_terms, "h")

    def to_json(self) -> str:
        def key(t):
            return f"{t[0]},{t[1]}"
        return json.dumps({"k": self.k, "constant": str(self.constant),
                           "sigma": {key(k): str(c) for k, c in self.sigma_terms.items()},
                           "h": {key(k): str(c) for k, c in self.h_terms.items()}}, indent=1)


def _format_terms(constant, terms: Mapping[SigmaIndex, object], sym: str) -> str:
    parts = [str(sympy.factor(constant)) if _symbolic(constant) else str(constant)]
    for (e, v), c in sorted(terms.items(), key=lambda t: (t[0][1], t[0][0])):
        name = f"s_{e}^{v}" if sym == "s" else f"h_{{{e},{v}}}"
        cs = str(sympy.factor(c)) if _symbolic(c) else str(c)
        parts.append(f"({cs})*{name}")
    return " + ".join(parts)


def kbar_expansion(k: int, n=N_SYMBOL) -> KbarExpansion:
    """I(complement of K_k) in sigma-terms and in h-terms.

    C(n,k) + sum_{v=2..k} sum_e (-1)^e C(n-v, k-v) sigma_e^v, then each
    sigma rewritten through the composite map.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    sym = _symbolic(n)
    if not sym and n < k:
        raise ValueError("n must be at least k")
    constant = _binom(n, k, n)
    sigma_terms: Dict[SigmaIndex, object] = {}
    for v in range(2, k + 1):
        c = _binom(n - v, k - v, n)
        for e in range((v + 1) // 2, v * (v - 1) // 2 + 1):
            sigma_terms[(e, v)] = (-1) ** e * c
    h_terms: Dict[SigmaIndex, object] = {}
    for (e, v), c in sigma_terms.items():
        for key, x in sigma_from_h_coeffs(e, v, n).items():
            h_terms[key] = h_terms.get(key, 0) + c * x
    if sym:
        h_terms = {key: sympy.factor(sympy.expand(x)) for key, x in h_terms.items()}
    h_terms = {key: x for key, x in h_terms.items() if x != 0}
    return KbarExpansion(k, n, constant, sigma_terms, h_terms)


# ---------------------------------------------------------------------------
# polynomial identities in the sigma counts


_TERM = re.compile(r"([+-]?)([^+-]+)")
_FACTOR = re.compile(r"s\((\d+),(\d+)\)$")


@dataclass(frozen=True)
class SigmaExpression:
    """Sum of rational coefficients times products of sigma counts."""
    terms: Tuple[Tuple[Tuple[SigmaIndex, ...], Fraction], ...]

    @classmethod
    def from_terms(cls, pairs: Iterable[Tuple[Sequence[SigmaIndex], object]]) -> "SigmaExpression":
        merged: Dict[Tuple[SigmaIndex, ...], Fraction] = {}
        for mono, c in pairs:
            key = tuple(sorted(tuple(x) for x in mono))
            for e, v in key:
                _check_index(e, v)
            merged[key] = merged.get(key, Fraction(0)) + Fraction(c)
        return cls(tuple(sorted((k, c) for k, c in merged.items() if c != 0)))

    @classmethod
    def parse(cls, text: str) -> "SigmaExpression":
        body = re.sub(r"\s+", "", text)
        if body.endswith("=0"):
            body = body[:-2]
        if not body or body == "0":
            return cls(())
        pairs = []
        pos = 0
        for m in _TERM.finditer(body):
            if m.start() != pos:
                raise ValueError(f"cannot parse near {body[pos:]!r}")
            pos = m.end()
            sign = -1 if m.group(1) == "-" else 1
            coef = Fraction(sign)
            mono = []
            for factor in m.group(2).split("*"):
                fm = _FACTOR.match(factor)
                if fm:
                    mono.append((int(fm.group(1)), int(fm.group(2))))
                else:
                    try:
                        coef *= Fraction(factor)
                    except ValueError:
                        raise ValueError(f"bad factor {factor!r}") from None
            pairs.append((mono, coef))
        if pos != len(body):
            raise ValueError(f"cannot parse near {body[pos:]!r}")
        return cls.from_terms(pairs)

    @property
    def indices(self) -> List[SigmaIndex]:
        return sorted({x for mono, _ in self.terms for x in mono})

    def evaluate(self, values: Mapping[SigmaIndex, object]):
        total = Fraction(0)
        for mono, c in self.terms:
            t = c
            for x in mono:
                t *= _need(values, x, "sigma")
            total += t
        return total

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for mono, c in self.terms:
            body = "*".join(f"s({e},{v})" for e, v in mono) or "1"
            sign = "-" if c < 0 else "+"
            out.append(f"{sign} {abs(c)} * {body}")
        s = " ".join(out)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]


def load_syzygies(path: Optional[str] = None) -> List[SigmaExpression]:
    """Read one expression per non-comment line (bundled list by default)."""
    if path is None:
        text = resources.files("invring").joinpath("data/syzygies.txt").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return [SigmaExpression.parse(line) for line in text.splitlines()
            if line.strip() and not line.lstrip().startswith("#")]


def sigma_values(h: Graph, indices: Iterable[SigmaIndex]) -> Dict[SigmaIndex, int]:
    return {(e, v): sigma_eval(h, e, v) for e, v in indices}


@dataclass
class SyzygyResult:
    index: int
    expression: SigmaExpression
    passed: bool
    witnesses: List[Tuple[Graph, Fraction]]

    def as_dict(self) -> dict:
        return {"index": self.index, "expression": str(self.expression), "pass": self.passed,
                "witnesses": [{"graph": format_edge_list(g), "value": str(x)}
                              for g, x in self.witnesses]}


def syzygy_check(exprs: Sequence[SigmaExpression], p: Iterable[Graph],
                 max_witnesses: int = 3) -> List[SyzygyResult]:
    """Evaluate each expression on every graph; any nonzero value is a witness."""
    exprs = list(exprs)
    need = sorted({x for ex in exprs for x in ex.indices})
    results = [SyzygyResult(i, ex, True, []) for i, ex in enumerate(exprs)]
    for g in p:
        vals = sigma_values(g, need)
        for res in results:
            x = res.expression.evaluate(vals)
            if x != 0:
                res.passed = False
                if len(res.witnesses) < max_witnesses:
                    res.witnesses.append((g, x))
    return results


# ---------------------------------------------------------------------------
# the sigma evaluation table


def sigma_etable(p: GPoset) -> Tuple[List[SigmaIndex], List[List[int]]]:
    """Rows: members of p; columns: sigma_indices(r) for r = p.n."""
    cols = sigma_indices(p.n)
    return cols, [[sigma_eval(g, e, v) for e, v in cols] for g in p]


def sigma_scaling(r: int, n: int) -> List[int]:
    """C(n - v, r - v) per column of the table."""
    if n < r:
        raise ValueError(f"n={n} must be at least r={r}")
    return [comb(n - v, r - v) for _, v in sigma_indices(r)]


def lift_sigma_inequality(c: Sequence, p: GPoset, n: int, check: bool = True) -> List[Fraction]:
    """Lift ``c . sigma <= 0`` from E(r) to graphs on n vertices."""
    cols, rows = sigma_etable(p) if check else (sigma_indices(p.n), [])
    c = [Fraction(x) for x in c]
    if len(c) != len(cols):
        raise ValueError("coefficient vector does not match the sigma columns")
    for g, row in zip(p, rows):
        val = sum(a * x for a, x in zip(c, row))
        if val > 0:
            raise InvalidInequality(g, val)
    return [a * d for a, d in zip(c, sigma_scaling(p.n, n))]
