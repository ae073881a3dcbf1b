"""Command line interface: ``invring <subcommand> ...``.

Exit status 0 means success or pass, 2 means a check failed or zeros were
found (the payload says which) and 1 means a usage or internal error.
All numbers are printed exactly.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from math import comb
from typing import Dict, Iterable, List, Optional, Sequence

from .constraints import ALL_FAMILIES, enumerate_r_graphic, raja3_curve, weakly_graphic_check
from .gposet import (
    build_gposet,
    charpoly_via_invariants,
    count_graphs,
    etransform,
    etransform_inverse,
    evaluate_vector,
    printed_alignment,
    permute_matrix,
)
from .graph_core import format_edge_list, from_graph6, parse_edge_list, to_graph6
from .newton import (
    ConversionTables,
    kbar_expansion,
    load_syzygies,
    sigma_indices,
    syzygy_check,
)
from .ramsey import find_r_graphic_zeros, lp_lower_bound_curve

WORKERS_ENV = "INVRING_WORKERS"
CURVE_HEADER = ["z1", "lower_num", "lower_den", "upper_num", "upper_den"]

EXIT_OK, EXIT_ERROR, EXIT_FLAGGED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# input and output helpers


def _exact(x):
    """JSON-safe exact number: int, or "p/q" for proper fractions."""
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return x


def _fmt(x) -> str:
    return str(_exact(x))


def _read_graph(text: str):
    """Graph and vertex count from edge-list or graph6 text."""
    t = text.strip()
    if not t or all(ch.isdigit() or ch in " -,\t" for ch in t):
        g = parse_edge_list(t)
        return g, (max(g.vertices) + 1 if g.edges else 0)
    try:
        return from_graph6(t)
    except Exception as exc:
        raise UsageError(f"malformed graph input {t!r}: {exc}") from None


def _graph_arg(args) -> str:
    if getattr(args, "graph", None) is not None:
        return args.graph
    if getattr(args, "input", None):
        with open(args.input) as fh:
            return fh.read()
    raise UsageError("a graph is required (--graph or --input)")


def _parse_vector(text: str) -> List[Fraction]:
    try:
        return [Fraction(tok) for tok in text.replace(",", " ").replace("[", " ").replace("]", " ").split()]
    except ValueError as exc:
        raise UsageError(f"malformed vector: {exc}") from None


def _families(text: Optional[str]) -> frozenset:
    if not text:
        return ALL_FAMILIES
    fams = frozenset(s.strip() for s in text.split(",") if s.strip())
    unknown = fams - ALL_FAMILIES
    if unknown:
        raise UsageError(f"unknown constraint families {sorted(unknown)}; "
                         f"choose from {sorted(ALL_FAMILIES)}")
    return fams


def _workers(args) -> int:
    if args.workers is not None:
        w = args.workers
    else:
        try:
            w = int(os.environ.get(WORKERS_ENV, "1"))
        except ValueError:
            raise UsageError(f"{WORKERS_ENV} must be an integer") from None
    if w < 1:
        raise UsageError("worker count must be positive")
    return w


def _out(line: str = ""):
    sys.stdout.write(line + "\n")


def _json(obj):
    _out(json.dumps(obj, default=_exact))


def _rows_text(M: Sequence[Sequence]) -> None:
    for row in M:
        _out(" ".join(_fmt(x) for x in row))


def _rows_csv(M: Sequence[Sequence], header: Optional[Sequence[str]] = None) -> None:
    w = csv.writer(sys.stdout, lineterminator="\n")
    if header is not None:
        w.writerow(header)
    for row in M:
        w.writerow([_fmt(x) for x in row])


def _curve_rows(rows: Iterable[tuple]) -> None:
    """CSV with numerator/denominator columns; empty cells where a side is absent."""
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(CURVE_HEADER)
    for z1, lo, hi in rows:
        cells = [str(z1)]
        for x in (lo, hi):
            if x is None:
                cells += ["", ""]
            else:
                x = Fraction(x)
                cells += [str(x.numerator), str(x.denominator)]
        w.writerow(cells)


def _z1_range(args, n: int) -> range:
    lo = 0 if args.z1_min is None else args.z1_min
    hi = comb(n, 2) if args.z1_max is None else args.z1_max
    return range(lo, hi + 1)


# ---------------------------------------------------------------------------
# subcommands


def cmd_poset(args) -> int:
    p = build_gposet(args.r, args.d)
    fmt = args.format or "text"
    if fmt == "json":
        _json({"r": args.r, "d": args.d, "size": len(p),
               "graphs": [{"index": i, "edges": len(g), "cv": g.cv, "label": format_edge_list(g)}
                          for i, g in enumerate(p)]})
    elif fmt == "csv":
        _rows_csv([[i, len(g), g.cv, format_edge_list(g)] for i, g in enumerate(p)],
                  ["index", "edges", "cv", "label"])
    elif fmt == "graph6":
        for g in p:
            _out(to_graph6(g, g.cv))
    else:
        for i, g in enumerate(p):
            _out(f"{i} {len(g)} {g.cv} {format_edge_list(g) or '0'}")
    return EXIT_OK


def cmd_etransform(args) -> int:
    p = build_gposet(args.n, args.d)
    E = etransform(p)
    M: List[list] = [list(r) for r in E.entries]
    labels = p.labels()
    if args.inverse:
        M = etransform_inverse(E)
    if args.align_printed:
        if args.n != 4 or args.d is not None:
            raise UsageError("--align-printed is only defined for E(4)")
        perm = printed_alignment(p)
        M = permute_matrix(M, perm)
        labels = [labels[i] for i in perm]
    fmt = args.format or "text"
    if fmt == "json":
        _json({"labels": labels, "rows": [[_exact(x) for x in r] for r in M]})
    elif fmt == "csv":
        _rows_csv(M, labels)
    else:
        _rows_text(M)
    return EXIT_OK


def cmd_check(args) -> int:
    p = build_gposet(args.r, args.d)
    fams = _families(args.families)
    if args.vector is not None:
        z = _parse_vector(args.vector)
        if len(z) != len(p):
            raise UsageError(f"vector has {len(z)} entries but E({args.r}) has {len(p)} members")
        source = {"vector": [_exact(x) for x in z]}
    else:
        g, nv = _read_graph(_graph_arg(args))
        if g.cv > args.n:
            raise UsageError(f"graph has {g.cv} connected vertices but n = {args.n}")
        z = evaluate_vector(p, g, args.n).tolist()
        source = {"graph": format_edge_list(g), "vector": z}
    rep = weakly_graphic_check(z, p, args.n, fams)
    _json({"r": args.r, "n": args.n, "families": sorted(fams), **source,
           "pass": rep.passed, "flags": rep.flags,
           "violations": {k: [list(x) if isinstance(x, tuple) else x for x in v]
                          for k, v in rep.violations.items()}})
    return EXIT_OK if rep.passed else EXIT_FLAGGED


def _enumerate_chunk(job):
    r, d, n, fixed, fams, limit = job
    p = build_gposet(r, d)
    out = []
    for z in enumerate_r_graphic(p, n, fixed, fams):
        out.append(z.tolist())
        if limit is not None and len(out) >= limit:
            break
    return out


def cmd_enumerate(args) -> int:
    p = build_gposet(args.r, args.d)
    fams = _families(args.families)
    fixed: Dict[int, int] = {}
    for item in args.fix or []:
        try:
            i, v = item.split("=")
            fixed[int(i)] = int(v)
        except ValueError:
            raise UsageError(f"--fix expects INDEX=VALUE, got {item!r}") from None
    if args.z1 is not None:
        fixed[1] = args.z1
    for i in fixed:
        if not 0 <= i < len(p):
            raise UsageError(f"index {i} outside E({args.r}) of size {len(p)}")
    # partition by z1 so that serial and parallel runs emit the same order
    z1s = [fixed[1]] if 1 in fixed else list(range(comb(args.n, 2) + 1))
    jobs = [(args.r, args.d, args.n, {**fixed, 1: z1}, fams, args.limit) for z1 in z1s]
    workers = _workers(args)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            chunks = list(ex.map(_enumerate_chunk, jobs))
    else:
        chunks = [_enumerate_chunk(j) for j in jobs]
    vectors = [z for c in chunks for z in c]
    if args.limit is not None:
        vectors = vectors[:args.limit]
    if args.distribution is not None:
        from .constraints import distribution, format_enumerator
        k = args.distribution
        if not 0 <= k < len(p):
            raise UsageError(f"index {k} outside E({args.r})")
        dist = distribution(z[k] for z in vectors)
        if (args.format or "json") == "text":
            _out(format_enumerator(dist))
        else:
            _json({"index": k, "label": format_edge_list(p[k]), "count": len(vectors),
                   "distribution": {str(a): b for a, b in dist.items()},
                   "enumerator": format_enumerator(dist)})
        return EXIT_OK
    fmt = args.format or "ndjson"
    if fmt == "json":
        _json({"r": args.r, "n": args.n, "count": len(vectors), "vectors": vectors})
    elif fmt == "csv":
        _rows_csv(vectors, p.labels())
    else:
        for z in vectors:
            _json(z)
    return EXIT_OK


def cmd_ramsey_bound(args) -> int:
    p = build_gposet(args.r, args.d)
    fams = _families(args.families or "linear")
    rows = lp_lower_bound_curve(p, args.n, args.k, _z1_range(args, args.n), fams)
    _curve_rows((z1, lo, None) for z1, lo in rows)
    return EXIT_OK


def cmd_ramsey_zeros(args) -> int:
    p = build_gposet(args.r, args.d)
    res = find_r_graphic_zeros(p, args.n, args.k, z1=args.z1, sweep=args.z1 is None,
                               limit=args.limit, state_file=args.resume,
                               workers=_workers(args))
    if (args.format or "json") == "ndjson":
        for z in res.zeros:
            _json(z)
    else:
        _json({"status": res.status, "message": res.message, "r": res.r, "n": res.n,
               "k": res.k, "z1_values": res.z1_values, "zeros": res.zeros})
    return EXIT_OK if res.status == "bound_certified" else EXIT_FLAGGED


def cmd_newton_expand(args) -> int:
    ex = kbar_expansion(args.k) if args.n is None else kbar_expansion(args.k).substitute(args.n)
    if (args.format or "text") == "json":
        _out(json.dumps(json.loads(ex.to_json())))
    elif args.basis == "sigma":
        _out(ex.format_sigma())
    else:
        _out(ex.format_h())
    return EXIT_OK


def cmd_newton_syzygy(args) -> int:
    exprs = load_syzygies(args.file)
    if args.graph is not None or args.input:
        g, _ = _read_graph(_graph_arg(args))
        graphs = [g]
    else:
        graphs = build_gposet(args.n)
    results = syzygy_check(exprs, graphs)
    ok = all(r.passed for r in results)
    _json({"pass": ok, "graphs": len(graphs), "results": [r.as_dict() for r in results]})
    return EXIT_OK if ok else EXIT_FLAGGED


def cmd_newton_convert(args) -> int:
    from .graph_core import N_SYMBOL
    tables = ConversionTables(N_SYMBOL if args.n is None else args.n, tuple(sigma_indices(args.r)))
    _out(json.dumps(json.loads(tables.to_json())))
    return EXIT_OK


def _local_tensor(args):
    from .local import LocalParamTensor, build_local_posets, degree_sequence_tensor, extract_tensor

    if args.degrees is not None:
        try:
            degs = [int(x) for x in args.degrees.replace(",", " ").split()]
        except ValueError:
            raise UsageError("--degrees expects integers") from None
        return degree_sequence_tensor(degs)
    if args.tensor is not None:
        with open(args.tensor) as fh:
            text = fh.read()
        try:
            meta = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"malformed tensor JSON: {exc}") from None
        seq = build_local_posets(meta.get("radius", args.radius), meta.get("degree", args.degree),
                                 connected=meta.get("connected", args.connected))
        return LocalParamTensor.from_json(text, seq)
    g, _ = _read_graph(_graph_arg(args))
    seq = build_local_posets(args.radius, args.degree, connected=args.connected,
                             hosts=None if args.radius == 1 else [g])
    return extract_tensor(g, seq, mode=args.mode)


def _local_status(rep) -> int:
    if rep.status == "budget exhausted":
        sys.stderr.write(f"search budget exhausted after {rep.failure['used']} steps\n")
        return EXIT_ERROR
    return EXIT_OK if rep.passed else EXIT_FLAGGED


def cmd_local_check(args) -> int:
    from .local import finitely_generated_check, tensor_consistency_check

    t = _local_tensor(args)
    if t.mode == "general":
        rep = finitely_generated_check(t, args.budget, complete=args.complete)
    else:
        rep = tensor_consistency_check(t, args.budget, complete=args.complete,
                                       certify=args.certify)
    _out(rep.to_json())
    return _local_status(rep)


def cmd_local_reconstruct(args) -> int:
    from .local import reconstruct_restricted

    t = _local_tensor(args)
    if t.mode != "restricted":
        raise UsageError("reconstruction needs a restricted tensor")
    g = reconstruct_restricted(t, args.budget)
    if not g:
        _out(g.report.to_json())
        return _local_status(g.report)
    if (args.format or "text") == "graph6":
        _out(to_graph6(g, max(g.vertices) + 1 if g.edges else 0))
    elif args.format == "json":
        _json({"status": "pass", "graph": format_edge_list(g)})
    else:
        _out(format_edge_list(g))
    return EXIT_OK


def cmd_count(args) -> int:
    _out(str(count_graphs(args.n)))
    return EXIT_OK


def cmd_charpoly(args) -> int:
    g, nv = _read_graph(_graph_arg(args))
    n = nv if args.n is None else args.n
    if g.cv > n:
        raise UsageError(f"graph has {g.cv} connected vertices but n = {n}")
    c = charpoly_via_invariants(g, n, monic=args.monic)
    if (args.format or "text") == "json":
        _json({"n": n, "monic": args.monic, "coefficients": c})
    else:
        _out(" ".join(map(str, c)))
    return EXIT_OK


def cmd_curve(args) -> int:
    if args.n < 5:
        raise UsageError("the 2-path bounds need n >= 5")
    _curve_rows(raja3_curve(args.n, _z1_range(args, args.n)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_poset_args(sp, r_name="--r", required=True):
    sp.add_argument(r_name, type=int, required=required, dest=r_name.lstrip("-"),
                    help="vertex bound of the poset E(r)")
    sp.add_argument("--d", type=int, default=None, help="edge bound, E(r, d)")


def _add_format(sp, choices):
    sp.add_argument("--format", choices=choices, default=None)


def _add_graph_input(sp, required=False):
    grp = sp.add_mutually_exclusive_group(required=required)
    grp.add_argument("--graph", help="edge list ('12 23') or graph6")
    grp.add_argument("--input", help="file holding the graph")
    return grp


def _add_z1_range(sp):
    sp.add_argument("--z1-min", type=int, default=None)
    sp.add_argument("--z1-max", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="invring", description="Exact computations with subgraph-counting invariants.")
    ap.add_argument("--workers", type=int, default=None,
                    help=f"parallel workers (default ${WORKERS_ENV} or 1)")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("poset", help="list the members of E(r) or E(r, d)")
    _add_poset_args(sp)
    _add_format(sp, ["text", "json", "csv", "graph6"])
    sp.set_defaults(func=cmd_poset)

    sp = sub.add_parser("etransform", help="E-transform of E(n)")
    _add_poset_args(sp, "--n")
    sp.add_argument("--align-printed", action="store_true",
                    help="reorder rows and columns to the classic printed E(4) order")
    sp.add_argument("--inverse", action="store_true")
    _add_format(sp, ["text", "json", "csv"])
    sp.set_defaults(func=cmd_etransform)

    sp = sub.add_parser("check", help="weakly graphic check of a vector or graph")
    _add_poset_args(sp)
    sp.add_argument("--n", type=int, required=True, help="ambient vertex count")
    grp = _add_graph_input(sp)
    grp.add_argument("--vector", help="comma separated invariant vector in poset order")
    sp.add_argument("--families", help="comma separated constraint families")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("enumerate", help="integer vectors passing the constraints")
    _add_poset_args(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--z1", type=int, default=None, help="fix the edge count")
    sp.add_argument("--fix", action="append", metavar="INDEX=VALUE")
    sp.add_argument("--families", help="comma separated constraint families")
    sp.add_argument("--limit", type=int, default=None)
    sp.add_argument("--distribution", type=int, default=None, metavar="INDEX",
                    help="report the value distribution of one coordinate")
    _add_format(sp, ["ndjson", "json", "csv", "text"])
    sp.set_defaults(func=cmd_enumerate)

    rp = sub.add_parser("ramsey", help="Ramsey invariant bounds and zeros")
    rsub = rp.add_subparsers(dest="ramsey_command", required=True, parser_class=_Parser)
    for name, func in (("bound", cmd_ramsey_bound), ("zeros", cmd_ramsey_zeros)):
        sp = rsub.add_parser(name)
        _add_poset_args(sp)
        sp.add_argument("--n", type=int, required=True)
        sp.add_argument("--k", type=int, required=True)
        sp.set_defaults(func=func)
        if name == "bound":
            sp.add_argument("--families", help="default: linear")
            _add_z1_range(sp)
        else:
            sp.add_argument("--z1", type=int, default=None,
                            help="search one edge count (default: every edge count)")
            sp.add_argument("--limit", type=int, default=None)
            sp.add_argument("--resume", metavar="STATE_FILE", default=None)
            _add_format(sp, ["json", "ndjson"])

    npar = sub.add_parser("newton", help="sigma parameters and the Newton relations")
    nsub = npar.add_subparsers(dest="newton_command", required=True, parser_class=_Parser)
    sp = nsub.add_parser("expand", help="I(complement K_k) in sigma or h parameters")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--n", type=int, default=None, help="substitute n (default symbolic)")
    sp.add_argument("--basis", choices=["sigma", "h"], default="h")
    _add_format(sp, ["text", "json"])
    sp.set_defaults(func=cmd_newton_expand)
    sp = nsub.add_parser("syzygy", help="evaluate syzygies on E(n) or one graph")
    sp.add_argument("--file", default=None, help="expression file (default: bundled list)")
    sp.add_argument("--n", type=int, default=6)
    _add_graph_input(sp)
    sp.set_defaults(func=cmd_newton_syzygy)
    sp = nsub.add_parser("convert", help="sigma-from-h coefficient tables")
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--n", type=int, default=None)
    sp.set_defaults(func=cmd_newton_convert)

    lp = sub.add_parser("local", help="local parameter tensors")
    lsub = lp.add_subparsers(dest="local_command", required=True, parser_class=_Parser)
    for name, func in (("check", cmd_local_check), ("reconstruct", cmd_local_reconstruct)):
        sp = lsub.add_parser(name)
        grp = _add_graph_input(sp)
        grp.add_argument("--tensor", help="tensor JSON file")
        grp.add_argument("--degrees", help="degree sequence (connected level-1 tensor)")
        sp.add_argument("--radius", type=int, default=1)
        sp.add_argument("--degree", type=int, default=3)
        sp.add_argument("--connected", action="store_true")
        sp.add_argument("--mode", choices=["restricted", "general"], default="restricted")
        sp.add_argument("--budget", type=int, default=100000)
        sp.set_defaults(func=func)
        if name == "check":
            sp.add_argument("--no-complete", dest="complete", action="store_false",
                            help="check the given levels only")
            sp.add_argument("--certify", action="store_true",
                            help="require a completion that reassembles into a graph")
        else:
            _add_format(sp, ["text", "json", "graph6"])

    sp = sub.add_parser("count", help="number of graphs on n vertices up to isomorphism")
    sp.add_argument("--n", type=int, required=True)
    sp.set_defaults(func=cmd_count)

    sp = sub.add_parser("charpoly", help="characteristic polynomial from subgraph counts")
    _add_graph_input(sp, required=True)
    sp.add_argument("--n", type=int, default=None, help="vertex count (default: from input)")
    sp.add_argument("--monic", action="store_true", help="det(zI - A) instead of det(A - zI)")
    _add_format(sp, ["text", "json"])
    sp.set_defaults(func=cmd_charpoly)

    sp = sub.add_parser("curve", help="CSV of the 2-path bounds against the edge count")
    sp.add_argument("--n", type=int, required=True)
    _add_z1_range(sp)
    sp.set_defaults(func=cmd_curve)
    return ap


def _validate(args) -> None:
    for name in ("r", "n", "k", "d", "limit", "budget"):
        v = getattr(args, name, None)
        if isinstance(v, int) and v < 0:
            raise UsageError(f"--{name} must be nonnegative")
    if getattr(args, "k", None) is not None and getattr(args, "r", None) is not None:
        if args.k > args.r:
            raise UsageError(f"E({args.r}) cannot express cliques of size {args.k}")
    if getattr(args, "r", None) is not None and isinstance(getattr(args, "n", None), int) \
            and args.command in ("check", "enumerate", "ramsey") and args.n < args.r:
        raise UsageError(f"n = {args.n} is smaller than r = {args.r}")


def run(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        _validate(args)
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"invring: error: {exc}\n")
        return EXIT_ERROR
    except (ValueError, KeyError, ArithmeticError, OSError) as exc:
        sys.stderr.write(f"invring {args.command}: {type(exc).__name__}: {exc}\n")
        return EXIT_ERROR


def main(argv: Optional[Sequence[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
