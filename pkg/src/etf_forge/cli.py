"""Command line entry point: ``etf-forge <command> ...``.

Every command prints ``key: value`` lines, a ``seconds:`` line and a final
``VERDICT:`` line. Exit codes: 0 pass/consistent, 1 fail/unit ideal,
2 usage or input error, 3 budget exceeded.

Commands that produce a matrix or a polynomial system write it to ``-o``;
when that is standard output the report goes to standard error so the
payload stays pipeable.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from etf_forge import catalog, frames, sysgen
from etf_forge.errors import BudgetExceeded, EtfForgeError
from etf_forge.exactpoly import MonomialOrder, format_poly, parse_system
from etf_forge.groebner import ComputeBudget, buchberger, ideal_membership
from etf_forge.matfile import parse_matrix_file, read_text, write_matrix_file

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3
VERDICT_CODES = {
    "PASS": EXIT_PASS,
    "CONSISTENT": EXIT_PASS,
    "FAIL": EXIT_FAIL,
    "UNIT_IDEAL": EXIT_FAIL,
    "ERROR": EXIT_USAGE,
    "BUDGET_EXCEEDED": EXIT_BUDGET,
}

__all__ = ["main", "dispatch", "parse_matrix_file"]


def thread_count() -> int:
    value = os.environ.get("ETF_FORGE_THREADS")
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            pass
    return os.cpu_count() or 1


class RunReport:
    def __init__(self, command: str, stream=None):
        self.command = command
        self.lines = [("command", command)]
        self.stream = stream or sys.stdout
        self.start = time.monotonic()

    def add(self, key: str, value) -> None:
        if isinstance(value, bool):
            value = str(value).lower()
        elif isinstance(value, float):
            value = f"{value:.15g}"
        self.lines.append((key, value))

    def finish(self, verdict: str) -> int:
        out = self.stream
        for key, value in self.lines:
            out.write(f"{key}: {value}\n")
        out.write(f"seconds: {time.monotonic() - self.start:.3f}\n")
        out.write(f"VERDICT: {verdict}\n")
        out.flush()
        return VERDICT_CODES[verdict]


def _complex(text: str) -> complex:
    try:
        re_, im_ = text.split(",")
        return complex(float(re_), float(im_))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected RE,IM, got {text!r}") from None


def _positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _payload_report(command: str, output: str) -> RunReport:
    return RunReport(command, sys.stderr if output == "-" else sys.stdout)


# -- commands ----------------------------------------------------------------


def cmd_welch(args) -> int:
    rep = RunReport("welch")
    rep.add("n", args.n)
    rep.add("m", args.m)
    rep.add("alpha", frames.welch_bound(args.n, args.m))
    exact = sysgen.rational_alpha(args.n, args.m)
    rep.add("alpha_rational", exact is not None)
    if exact is not None:
        rep.add("alpha_exact", exact)
    return rep.finish("PASS")


def cmd_range(args) -> int:
    rep = RunReport("range")
    rep.add("m", args.m)
    r = frames.nonexistence_range(args.m)
    rep.add("empty", len(r) == 0)
    rep.add("lower", r.start)
    rep.add("upper", r.stop - 1)
    return rep.finish("PASS")


def cmd_check(args) -> int:
    G = parse_matrix_file(args.file)
    p = frames.FrameParams.of(args.n, args.m)
    report = frames.check_etf_gram(G, p, args.tol)
    rep = RunReport("check")
    rep.add("n", p.n)
    rep.add("m", p.m)
    rep.add("alpha", p.alpha)
    rep.add("tol", args.tol)
    for line in report.lines():
        key, value = line.split(": ", 1)
        rep.add(key, value.lower() if value in ("True", "False") else value)
    return rep.finish("PASS" if report.passed else "FAIL")


def cmd_naimark(args) -> int:
    G = parse_matrix_file(args.file)
    p = frames.FrameParams.of(args.n, args.m)
    comp, q = frames.naimark_complement(G, p, args.tol)
    write_matrix_file(args.output, comp, [f"naimark complement: n={q.n} m={q.m}"])
    rep = _payload_report("naimark", args.output)
    rep.add("n", q.n)
    rep.add("m", q.m)
    rep.add("alpha", q.alpha)
    rep.add("complement_passes", frames.check_etf_gram(comp, q, args.tol).passed)
    rep.add("output", args.output)
    return rep.finish("PASS")


def cmd_subgram(args) -> int:
    H = parse_matrix_file(args.file)
    p = frames.FrameParams.of(args.n, args.m)
    rep = RunReport("subgram-test")
    rep.add("n", p.n)
    rep.add("m", p.m)
    rep.add("r", args.r)
    rank_ok = frames.subgram_rank_test(H, p, args.r, args.rank_tol)
    analytic_ok = frames.subgram_analytic_test(H, p, args.r, args.tol)
    rep.add("rank", frames.numerical_rank(p.m * (H @ H) - p.n * H, args.rank_tol))
    rep.add("rank_test", rank_ok)
    rep.add("analytic_test", analytic_ok)
    ok = rank_ok and analytic_ok
    if args.r == 2:
        triples = frames.haagerup_triple_test(H, p)
        worst = max((t.lhs_residual for t in triples), default=0.0)
        triple_ok = worst <= args.triple_tol
        rep.add("triple_max_residual", worst)
        rep.add("triple_test", triple_ok)
        ok = ok and triple_ok
    return rep.finish("PASS" if ok else "FAIL")


def cmd_equiv(args) -> int:
    A = parse_matrix_file(args.file1)
    B = parse_matrix_file(args.file2)
    found = frames.find_equivalence(A, B, args.tol)
    rep = RunReport("equiv")
    rep.add("size", A.shape[0])
    rep.add("equivalent", found is not None)
    if found is not None:
        rep.add("permutation", " ".join(str(i) for i in found[0]))
    return rep.finish("PASS" if found is not None else "FAIL")


def cmd_gen_system(args) -> int:
    system = sysgen.generate_system(args.n, args.m, alpha_reduce=not args.no_alpha_reduce)
    text = sysgen.export(system, args.dialect)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w") as fh:
            fh.write(text)
        rep = RunReport("gen-system")
        eqs, nv = system.counts()
        rep.add("n", args.n)
        rep.add("m", args.m)
        rep.add("equations", eqs)
        rep.add("variables", nv)
        rep.add("output", args.output)
        return rep.finish("PASS")
    return EXIT_PASS


def _export_after_budget(prefix, vars, polys, rep):
    header = f"exported after budget exhaustion; vars={len(vars)} eqs={len(polys)}"
    stub = sysgen.PolySystem(0, 0, False, vars, [(p, "input") for p in polys])
    for dialect, ext in (("maple", "mpl"), ("magma", "magma")):
        path = f"{prefix}.{ext}"
        with open(path, "w") as fh:
            fh.write(sysgen.export(stub, dialect, header=header))
        rep.add(f"export_{dialect}", path)


def _run_groebner(command, args, members_text=None):
    text = read_text(args.system)
    vars, polys = parse_system(text)
    order = MonomialOrder.parse(args.order)
    budget = ComputeBudget(max_seconds=args.max_seconds)
    rep = RunReport(command)
    rep.add("order", order.value)
    rep.add("variables", " ".join(vars.names))
    rep.add("generators", len(polys))
    try:
        gb = buchberger(polys, order, budget)
    except BudgetExceeded as exc:
        for key, value in exc.stats.items():
            rep.add("elapsed" if key == "seconds" else key, value)
        stem = "etf_system" if args.system == "-" else os.path.splitext(os.path.basename(args.system))[0]
        prefix = args.export_prefix or f"{stem}.budget"
        _export_after_budget(prefix, vars, polys, rep)
        return None, rep, vars
    for key in ("pairs_processed", "pairs_pruned", "reductions_to_zero", "basis_size"):
        rep.add(key, gb.stats.get(key, 0))
    return gb, rep, vars


def cmd_groebner(args) -> int:
    gb, rep, vars = _run_groebner("groebner", args)
    if gb is None:
        return rep.finish("BUDGET_EXCEEDED")
    for g in gb.basis:
        sys.stdout.write(format_poly(g, gb.order) + "\n")
    if args.member:
        _, members = parse_system(read_text(args.member), vars)
        for i, f in enumerate(members, start=1):
            rep.add(f"member_{i}", ideal_membership(f, gb))
    if not gb.is_unit_ideal:
        rep.add("dimension", _dimension(gb))
    return rep.finish("UNIT_IDEAL" if gb.is_unit_ideal else "CONSISTENT")


def _dimension(gb):
    from etf_forge.groebner import staircase_dimension_hint

    return staircase_dimension_hint(gb) if gb.basis else "positiveDimensional"


def cmd_member(args) -> int:
    gb, rep, vars = _run_groebner("member", args)
    if gb is None:
        return rep.finish("BUDGET_EXCEEDED")
    _, members = parse_system(read_text(args.polys), vars)
    results = [ideal_membership(f, gb) for f in members]
    for i, ok in enumerate(results, start=1):
        rep.add(f"member_{i}", ok)
    return rep.finish("PASS" if all(results) else "FAIL")


def cmd_catalog(args) -> int:
    fam = catalog.FAMILIES[args.name]
    if fam.arity == 0 and args.param is not None and args.name != "h9_negated_block":
        raise EtfForgeError(f"--param is not accepted by {args.name}")
    M = fam(args.param)
    comments = [f"catalog {args.name}"]
    if args.param is not None:
        comments.append(f"param {args.param.real!r},{args.param.imag!r}")
    write_matrix_file(args.output, M, comments)
    rep = _payload_report("catalog", args.output)
    rep.add("name", args.name)
    rep.add("size", M.shape[0])
    if fam.params is not None:
        p = frames.FrameParams.of(*fam.params)
        report = frames.check_etf_gram(M, p, 1e-9)
        rep.add("n", p.n)
        rep.add("m", p.m)
        rep.add("etf_check", report.passed)
    rep.add("output", args.output)
    return rep.finish("PASS")


def cmd_search_73(args) -> int:
    sols = catalog.enumerate_73_solutions()
    rep = RunReport("search-73")
    rep.add("candidates", 4**6)
    rep.add("solutions", len(sols))
    same = catalog.all_pairwise_equivalent(sols, workers=thread_count())
    rep.add("pairwise_equivalent", same)
    return rep.finish("PASS" if len(sols) == 120 and same else "FAIL")


def cmd_search_83(args) -> int:
    rep = RunReport("search-83")
    try:
        H = catalog.near_miss_83_search(ComputeBudget(max_seconds=args.max_seconds))
    except BudgetExceeded as exc:
        for key, value in exc.stats.items():
            rep.add("elapsed" if key == "seconds" else key, value)
        return rep.finish("BUDGET_EXCEEDED")
    p = frames.FrameParams.of(8, 3)
    alpha = p.alpha
    for i in range(1, 6):
        for j in range(i + 1, 6):
            z = H[i, j] / alpha
            rep.add(f"x_{i + 1}_{j + 1}", f"{z.real:.16e},{z.imag:.16e}")
    rep.add("rank", frames.numerical_rank(H))
    rep.add("modulus_error", frames.off_diagonal_modulus_error(H, alpha))
    rep.add("rank_condition", "pass" if frames.subgram_rank_test(H, p, 2) else "fail")
    triples = frames.haagerup_triple_test(H, p)
    rep.add("triple_max_residual", max(t.lhs_residual for t in triples))
    rep.add("triple_condition", "pass" if frames.passes_triple_test(H, p) else "fail")
    if args.output:
        write_matrix_file(args.output, H, ["near miss (8,3) configuration"])
        rep.add("output", args.output)
    return rep.finish("PASS")


def cmd_count_extensions(args) -> int:
    ext = catalog.row_extensions(args.scenario)
    rep = RunReport("count-extensions")
    rep.add("scenario", args.scenario)
    rep.add("count", ext.reported)
    rep.add("candidate_rows", len(ext.rows))
    rep.add("classes", len(ext.classes))
    return rep.finish("PASS")


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="etf-forge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def nm(p):
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--m", type=int, required=True)

    p = sub.add_parser("welch", help="Welch bound angle")
    p.add_argument("n", type=int)
    p.add_argument("m", type=int)
    p.set_defaults(func=cmd_welch)

    p = sub.add_parser("range", help="n-range excluded by the Naimark bound")
    p.add_argument("m", type=int)
    p.set_defaults(func=cmd_range)

    p = sub.add_parser("check", help="check an ETF Gram matrix")
    p.add_argument("file")
    nm(p)
    p.add_argument("--tol", type=float, default=frames.DEFAULT_TOL)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("naimark", help="Naimark complement of an ETF Gram matrix")
    p.add_argument("file")
    nm(p)
    p.add_argument("--tol", type=float, default=frames.DEFAULT_TOL)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_naimark)

    p = sub.add_parser("subgram-test", help="necessary conditions on a sub-Gram matrix")
    p.add_argument("file")
    nm(p)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--tol", type=float, default=frames.DEFAULT_TOL)
    p.add_argument("--rank-tol", type=float, default=frames.RANK_TOL)
    p.add_argument("--triple-tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_subgram)

    p = sub.add_parser("equiv", help="decide equivalence of two Gram matrices")
    p.add_argument("file1")
    p.add_argument("file2")
    p.add_argument("--tol", type=float, default=frames.RANK_TOL)
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("gen-system", help="generate the polynomial system for (N, M)")
    p.add_argument("n", type=int)
    p.add_argument("m", type=int)
    p.add_argument("--dialect", choices=("plain", "maple", "magma"), default="plain")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--no-alpha-reduce", action="store_true")
    p.set_defaults(func=cmd_gen_system)

    for name, func, help_ in (
        ("groebner", cmd_groebner, "reduced Groebner basis of a system file"),
        ("member", cmd_member, "ideal membership of polynomials in a system's ideal"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("system")
        if name == "member":
            p.add_argument("polys")
        p.add_argument("--order", choices=("lex", "grevlex"), default="grevlex")
        p.add_argument("--max-seconds", type=_positive_int, default=600)
        p.add_argument("--export-prefix", default=None)
        if name == "groebner":
            p.add_argument("--member", default=None)
        p.set_defaults(func=func)

    p = sub.add_parser("catalog", help="write a catalog matrix")
    p.add_argument("name", choices=sorted(catalog.FAMILIES))
    p.add_argument("--param", type=_complex, default=None)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("search-73", help="enumerate the (7,3) sub-Gram solutions")
    p.set_defaults(func=cmd_search_73)

    p = sub.add_parser("search-83", help="search the (8,3) near-miss configuration")
    p.add_argument("--max-seconds", type=_positive_int, default=60)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_search_83)

    p = sub.add_parser("count-extensions", help="row-extension counts for order 9")
    p.add_argument("scenario", choices=catalog.SCENARIOS)
    p.set_defaults(func=cmd_count_extensions)
    return parser


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        return args.func(args)
    except (EtfForgeError, OSError, ValueError) as exc:
        rep = RunReport(args.command, sys.stdout)
        rep.add("error", f"{type(exc).__name__}: {exc}")
        return rep.finish("ERROR")


def main(argv=None) -> None:
    np.set_printoptions(precision=17)
    sys.exit(dispatch(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
