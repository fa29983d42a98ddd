"""One test per acceptance criterion; each prints a single PASS/FAIL line."""

import cmath
import itertools
import math
import random
import time

import numpy as np

from conftest import ACCEPTANCE_LINES
from etf_forge import catalog
from etf_forge.errors import BudgetExceeded
from etf_forge.exactpoly import MonomialOrder, MultiPoly, VarTable, parse_poly, parse_system
from etf_forge.frames import (
    FrameParams,
    check_etf_gram,
    dephase,
    haagerup_identity,
    haagerup_triple_test,
    naimark_complement,
    numerical_rank,
    off_diagonal_modulus_error,
    passes_triple_test,
    subgram_analytic_test,
    subgram_rank_test,
)
from etf_forge.groebner import (
    ComputeBudget,
    buchberger,
    ideal_membership,
    normal_form,
    s_polynomial,
    staircase_dimension_hint,
)
from etf_forge.sysgen import assignment_from_gram, evaluate_at_solution, export, generate_system


def record(number, ok, detail):
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_1_system_sizes():
    expected = {(5, 3): (5, 3), (6, 3): (27, 5), (7, 3): (147, 8), (8, 3): (667, 12)}
    t = time.monotonic()
    got = {nm: generate_system(*nm).counts() for nm in expected}
    secs = time.monotonic() - t
    record(1, got == expected and secs < 10, f"counts {got}, {secs:.2f}s (limit 10s)")


def test_criterion_2_53_nonexistence():
    t = time.monotonic()
    sys53 = generate_system(5, 3)
    gb = buchberger(sys53.polys, budget=ComputeBudget(max_seconds=10))
    listed = [
        parse_poly(p, sys53.vars)
        for p in (
            "6*al^2 - 1",
            "3*x_2_3^4 + 58*x_2_3^3*al + 18*x_2_3^2 + 58*x_2_3*al + 3",
            "-22*x_2_3^3*al - 9*x_2_3^2 - 36*x_2_3*al - 3",
            "-3*x_2_3^3 - 36*x_2_3^2*al - 9*x_2_3 - 22*al",
            "x_2_3*u - 1",
        )
    ]
    gb_listed = buchberger(listed, budget=ComputeBudget(max_seconds=10))
    secs = time.monotonic() - t
    ok = gb.is_unit_ideal and gb_listed.is_unit_ideal and secs < 10
    record(2, ok, f"generated unit={gb.is_unit_ideal}, listed unit={gb_listed.is_unit_ideal}, {secs:.2f}s")


def test_criterion_3_73_enumeration():
    t = time.monotonic()
    sols = catalog.enumerate_73_solutions()
    same = catalog.all_pairwise_equivalent(sols)
    secs = time.monotonic() - t
    record(3, len(sols) == 120 and same and secs < 300, f"{len(sols)} solutions, all equivalent={same}, {secs:.1f}s")


def test_criterion_4_family_sweep():
    rng = np.random.default_rng(2024)
    worst_etf, worst_had, worst_spec = 0.0, 0.0, 0.0
    for theta in rng.uniform(0, 2 * np.pi, 20):
        a = cmath.exp(1j * theta)
        for G, nm in ((catalog.g6_family(a), (6, 3)), (catalog.g9_family(a), (9, 3))):
            rep = check_etf_gram(G, FrameParams.of(*nm), 1e-9)
            assert rep.passed
            worst_etf = max(worst_etf, rep.max_residual)
        H = catalog.h9_family(a)
        worst_had = max(worst_had, np.max(np.abs(H @ H.conj().T - 9 * np.eye(9))))
        ev = np.sort(np.linalg.eigvalsh(H))
        worst_spec = max(worst_spec, np.max(np.abs(ev - np.array([-3] * 3 + [3] * 6))))
    ok = worst_etf <= 1e-9 and worst_had <= 1e-9 and worst_spec <= 1e-8
    record(4, ok, f"max ETF residual {worst_etf:.1e}, HH*-9I {worst_had:.1e}, spectrum {worst_spec:.1e}")


def test_criterion_5_end_to_end():
    r6 = evaluate_at_solution(
        generate_system(6, 3), assignment_from_gram(dephase(catalog.g6_family(cmath.exp(1j * math.pi / 5))), 6)
    )
    point9 = assignment_from_gram(dephase(catalog.g9_family(1j)), 9)
    r9 = evaluate_at_solution(generate_system(9, 3), point9)
    record(5, r6 <= 1e-9 and r9 <= 1e-9, f"(6,3) residual {r6:.1e}, (9,3) residual {r9:.1e}")


def test_criterion_6_near_miss_discrimination():
    p53 = FrameParams.of(5, 3)
    H53 = catalog.near_miss_53()
    res53 = max(t.lhs_residual for t in haagerup_triple_test(H53, p53))
    ok53 = subgram_analytic_test(H53, p53, 2) and res53 > 1e-3
    p83 = FrameParams.of(8, 3)
    H83 = catalog.near_miss_83_search(ComputeBudget(max_seconds=120))
    mod_err = off_diagonal_modulus_error(H83, math.sqrt(5 / 21))
    ok83 = (
        numerical_rank(H83) == 3
        and mod_err <= 1e-9
        and not subgram_rank_test(H83, p83, 2)
        and not passes_triple_test(H83, p83)
    )
    record(
        6,
        ok53 and ok83,
        f"(5,3) triple residual {res53:.4f}; (8,3) rank {numerical_rank(H83)}, modulus error {mod_err:.1e}, "
        "fails rank and triple tests",
    )


def test_criterion_7_naimark():
    worst = 0.0
    for name, (G, p) in catalog.catalog_etfs().items():
        comp, q = naimark_complement(G, p)
        back, _ = naimark_complement(comp, q)
        worst = max(worst, np.max(np.abs(back - G)))
    J, q = naimark_complement(catalog.g4_simplex(), FrameParams.of(4, 3))
    simplex_ok = np.allclose(J, np.ones((4, 4)), atol=1e-12) and (q.n, q.m) == (4, 1)
    record(7, worst <= 1e-12 and simplex_ok, f"involution error {worst:.1e}, simplex -> J4 (4,1): {simplex_ok}")


def test_criterion_8_haagerup_identity():
    rng = np.random.default_rng(8)
    worst_diff, worst_imag = 0.0, 0.0
    for _ in range(1000):
        vals = np.exp(2j * np.pi * rng.random(6))
        lhs, rhs = haagerup_identity(*vals)
        worst_diff = max(worst_diff, abs(lhs - rhs))
        worst_imag = max(worst_imag, abs(lhs.imag))
    record(8, worst_diff <= 1e-10 and worst_imag <= 1e-10, f"max |lhs-rhs| {worst_diff:.1e}, max |Im lhs| {worst_imag:.1e}")


def test_criterion_9_row_extensions():
    counts, times = {}, {}
    for scenario in catalog.SCENARIOS:
        t = time.monotonic()
        counts[scenario] = catalog.count_row_extensions(scenario)
        times[scenario] = time.monotonic() - t
    single_class = len(catalog.row_extensions("cubicOnly").classes) == 1
    ok = counts == {"genericA": 4, "aMinusOne": 5, "cubicOnly": 12} and single_class
    ok = ok and max(times.values()) < 120
    record(9, ok, f"counts {counts}, cubicOnly single class={single_class}, slowest {max(times.values()):.2f}s")


def test_criterion_10_large_runs_substitute(tmp_path):
    sys83 = generate_system(8, 3)
    dialects_ok = True
    for dialect in ("maple", "magma"):
        body = [l.strip().rstrip(",") for l in export(sys83, dialect).splitlines() if l.startswith("  ")]
        dialects_ok &= [parse_poly(l, sys83.vars) for l in body] == list(sys83.polys)
    vt, parsed = parse_system(export(sys83, "plain"))
    roundtrip = vt == sys83.vars and parsed == sys83.polys and len(parsed) == 667
    rng = np.random.default_rng(10)
    alpha = math.sqrt(5 / 21)
    nonzero = 0
    for _ in range(100):
        point = {n: complex(np.exp(2j * np.pi * rng.random())) for n in vt.names if n.startswith("x_")}
        point["al"] = alpha
        if evaluate_at_solution(sys83, point) > 1e-6:
            nonzero += 1
    # stretch goals: (6,3) membership of the quintic and dimension hints
    sys63 = generate_system(6, 3)
    gb63 = buchberger(sys63.polys, budget=ComputeBudget(max_seconds=1800))
    x24 = MultiPoly.variable(sys63.vars, "x_2_4")
    x34 = MultiPoly.variable(sys63.vars, "x_3_4")
    quintic = (x24**2 - 1) * (x34**2 - 1) * (x24 + x34)
    member = ideal_membership(quintic, gb63)
    dim63 = staircase_dimension_hint(gb63)
    sys73 = generate_system(7, 3)
    try:
        gb73 = buchberger(sys73.polys, budget=ComputeBudget(max_seconds=60))
        dim73 = staircase_dimension_hint(gb73)
    except BudgetExceeded:
        # the accepted outcome routes to the export path
        (tmp_path / "s73.mpl").write_text(export(sys73, "maple"))
        (tmp_path / "s73.magma").write_text(export(sys73, "magma"))
        dim73 = "BUDGET_EXCEEDED (exported)"
    ok = dialects_ok and roundtrip and nonzero == 100 and member and dim63 == "positiveDimensional"
    ok = ok and dim73 in ("zeroDimensional", "BUDGET_EXCEEDED (exported)")
    record(
        10,
        ok,
        f"(8,3) exported in 3 dialects, round-trip={roundtrip}, nonzero residual at {nonzero}/100 points; "
        f"(6,3) quintic member={member}, hint={dim63}; (7,3) hint={dim73}",
    )


def _random_ideal(rng, vt):
    polys = []
    for _ in range(rng.randint(2, 3)):
        terms = {}
        for _ in range(rng.randint(2, 4)):
            exps = [0] * len(vt)
            for _ in range(rng.randint(0, 3)):
                exps[rng.randrange(len(vt))] += 1
            terms[tuple(exps)] = rng.choice([-3, -2, -1, 1, 2, 3])
        p = MultiPoly(vt, terms)
        if not p.is_zero():
            polys.append(p)
    return polys


def test_criterion_11_canonicity():
    rng = random.Random(11)
    vt = VarTable(["z", "y", "x"])
    ideals, all_same, criterion = 0, True, True
    while ideals < 10:
        F = _random_ideal(rng, vt)
        if not F:
            continue
        try:
            base = buchberger(F, MonomialOrder.GREVLEX, ComputeBudget(max_seconds=30)).basis
        except BudgetExceeded:
            continue
        ideals += 1
        for p, q in itertools.combinations(base, 2):
            criterion &= normal_form(s_polynomial(p, q), base).is_zero()
        for _ in range(50):
            G = list(F)
            rng.shuffle(G)
            all_same &= buchberger(G).basis == base
    record(11, all_same and criterion, f"{ideals} ideals x 50 shuffles identical={all_same}, S-pairs reduce to 0={criterion}")
