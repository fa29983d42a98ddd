"""Buchberger's algorithm over Q.

Internally polynomials are kept as ``{exponents: int}`` dicts with primitive
integer coefficients; reduction is fraction-free (both sides are scaled by
integers instead of dividing). Pairs are selected by the normal strategy and
pruned with the Gebauer-Moeller installation of Buchberger's two criteria.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Sequence

from etf_forge.errors import BudgetExceeded, UnitIdeal, VarTableMismatch, ZeroPolynomial
from etf_forge.exactpoly import MonomialOrder, MultiPoly, VarTable


@dataclass(frozen=True)
class ComputeBudget:
    max_seconds: float = 600
    max_basis_size: int = 100_000
    max_total_degree: int = 1_000

    def __post_init__(self):
        if min(self.max_seconds, self.max_basis_size, self.max_total_degree) <= 0:
            raise ValueError("budget limits must be positive")


@dataclass
class GroebnerBasis:
    basis: list[MultiPoly]
    order: MonomialOrder
    vars: VarTable
    is_unit_ideal: bool
    stats: dict = field(default_factory=dict)

    def __iter__(self):
        return iter(self.basis)

    def __len__(self):
        return len(self.basis)

    def leading_monomials(self):
        return [g.leading_monomial(self.order) for g in self.basis]


# -- integer polynomial helpers ---------------------------------------------


def _divides(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def _coprime(a, b) -> bool:
    return all(not (x and y) for x, y in zip(a, b))


def _to_int(p: MultiPoly, with_multiplier: bool = False):
    den = reduce(lambda a, b: a * b // math.gcd(a, b), (c.denominator for c in p.terms.values()), 1)
    out = {e: int(c * den) for e, c in p.terms.items()}
    return (out, den) if with_multiplier else out


def _primitive(f: dict, key) -> dict:
    if not f:
        return f
    g = abs(reduce(math.gcd, f.values()))
    if f[max(f, key=key)] < 0:
        g = -g
    if g == 1:
        return f
    return {e: c // g for e, c in f.items()}


class _Poly:
    """Integer polynomial with cached leading data."""

    __slots__ = ("terms", "lm", "lc")

    def __init__(self, terms: dict, key):
        self.terms = terms
        self.lm = max(terms, key=key)
        self.lc = terms[self.lm]


class _Deadline(Exception):
    pass


def _reduce(f: dict, divisors: Sequence[_Poly], key, full: bool = True, deadline: float | None = None):
    """Fraction-free multivariate division.

    Returns ``(r, scale)`` with ``r / scale`` the exact remainder of ``f``.
    Divisors are tried in list order; the largest reducible term goes first.
    With ``full=False`` only the head is reduced.
    """
    f = dict(f)
    rem: dict = {}
    scale = Fraction(1)
    steps = 0
    while f:
        m = max(f, key=key)
        c = f[m]
        for g in divisors:
            if _divides(g.lm, m):
                q = tuple(x - y for x, y in zip(m, g.lm))
                d = math.gcd(c, g.lc)
                a, b = g.lc // d, c // d
                if a != 1:
                    if a < 0:
                        a, b = -a, -b
                    f = {e: v * a for e, v in f.items()}
                    rem = {e: v * a for e, v in rem.items()}
                    scale *= a
                for e, v in g.terms.items():
                    t = tuple(x + y for x, y in zip(e, q))
                    s = f.get(t, 0) - b * v
                    if s:
                        f[t] = s
                    else:
                        f.pop(t, None)
                steps += 1
                if deadline is not None and steps % 64 == 0 and time.monotonic() > deadline:
                    raise _Deadline
                if steps % 16 == 0:
                    cont = reduce(math.gcd, list(f.values()) + list(rem.values()), 0)
                    if cont > 1:
                        f = {e: v // cont for e, v in f.items()}
                        rem = {e: v // cont for e, v in rem.items()}
                        scale /= cont
                break
        else:
            if not full:
                rem.update(f)
                break
            rem[m] = c
            del f[m]
    cont = reduce(math.gcd, rem.values(), 0)
    if cont > 1:
        rem = {e: v // cont for e, v in rem.items()}
        scale /= cont
    return rem, scale


def _spoly(p: _Poly, q: _Poly) -> dict:
    lcm = _lcm(p.lm, q.lm)
    sp_ = tuple(x - y for x, y in zip(lcm, p.lm))
    sq = tuple(x - y for x, y in zip(lcm, q.lm))
    d = math.gcd(p.lc, q.lc)
    a, b = q.lc // d, p.lc // d
    out: dict = {}
    for e, v in p.terms.items():
        t = tuple(x + y for x, y in zip(e, sp_))
        out[t] = out.get(t, 0) + a * v
    for e, v in q.terms.items():
        t = tuple(x + y for x, y in zip(e, sq))
        s = out.get(t, 0) - b * v
        if s:
            out[t] = s
        else:
            out.pop(t, None)
    return {e: v for e, v in out.items() if v}


def _from_int(vars: VarTable, f: dict, scale=1) -> MultiPoly:
    return MultiPoly(vars, {e: Fraction(v) / scale for e, v in f.items()})


def _common_vars(polys) -> VarTable:
    polys = list(polys)
    vt = polys[0].vars
    for p in polys[1:]:
        if p.vars != vt:
            raise VarTableMismatch(f"{p.vars} vs {vt}")
    return vt


# -- public operations -------------------------------------------------------


def s_polynomial(p: MultiPoly, q: MultiPoly, order=MonomialOrder.GREVLEX) -> MultiPoly:
    """``(L/lt(p))*p - (L/lt(q))*q`` with ``L`` the lcm of the leading monomials."""
    order = MonomialOrder.parse(order)
    _common_vars([p, q])
    if p.is_zero() or q.is_zero():
        raise ZeroPolynomial("S-polynomial of the zero polynomial")
    lp, lq = p.leading_monomial(order), q.leading_monomial(order)
    lcm = _lcm(lp, lq)
    left = p.shift(tuple(x - y for x, y in zip(lcm, lp))).scale(1 / p.terms[lp])
    right = q.shift(tuple(x - y for x, y in zip(lcm, lq))).scale(1 / q.terms[lq])
    return left - right


def normal_form(f: MultiPoly, G: Sequence[MultiPoly], order=MonomialOrder.GREVLEX) -> MultiPoly:
    """Remainder of ``f`` on division by ``G`` (exact, not rescaled)."""
    order = MonomialOrder.parse(order)
    if not G:
        raise ValueError("empty divisor list")
    vt = _common_vars([f, *G])
    key = order.key
    divisors = []
    for g in G:
        if g.is_zero():
            raise ZeroPolynomial("zero divisor")
        divisors.append(_Poly(_to_int(g), key))
    if f.is_zero():
        return f
    fi, den = _to_int(f, with_multiplier=True)
    rem, scale = _reduce(fi, divisors, key)
    return _from_int(vt, rem, scale * den)


def _is_unit(basis) -> bool:
    return len(basis) == 1 and not any(basis[0].lm)


def _interreduce(polys: list[_Poly], key, deadline: float | None = None) -> list[_Poly]:
    polys = sorted(polys, key=lambda p: key(p.lm))
    minimal = []
    for i, p in enumerate(polys):
        if any(_divides(q.lm, p.lm) for j, q in enumerate(polys) if j != i and (q.lm != p.lm or j < i)):
            continue
        minimal.append(p)
    out = []
    for i, p in enumerate(minimal):
        others = minimal[:i] + minimal[i + 1 :]
        r, _ = _reduce(p.terms, others, key, deadline=deadline)
        out.append(_Poly(_primitive(r, key), key))
    out.sort(key=lambda p: key(p.lm), reverse=True)
    return out


def buchberger(F: Sequence[MultiPoly], order=MonomialOrder.GREVLEX, budget: ComputeBudget | None = None) -> GroebnerBasis:
    """Reduced Groebner basis of the ideal generated by ``F``.

    Every element is primitive with integer coefficients and a positive
    leading coefficient; the list is sorted by decreasing leading monomial.
    Raises :class:`BudgetExceeded` when ``budget`` runs out.
    """
    order = MonomialOrder.parse(order)
    budget = budget or ComputeBudget()
    if not F:
        raise ValueError("need at least one generator")
    vt = _common_vars(F)
    key = order.key
    start = time.monotonic()
    stats = {"pairs_processed": 0, "pairs_pruned": 0, "reductions_to_zero": 0, "basis_size": 0}

    polys: list[_Poly] = []
    for f in F:
        if not f.is_zero():
            polys.append(_Poly(_primitive(_to_int(f), key), key))

    def finish(basis):
        stats["basis_size"] = len(basis)
        stats["seconds"] = time.monotonic() - start
        out = [_from_int(vt, p.terms) for p in basis]
        return GroebnerBasis(out, order, vt, _is_unit(basis), stats)

    if not polys:
        return finish([])
    unit = _Poly({(0,) * len(vt): 1}, key)
    if any(not any(p.lm) for p in polys):
        return finish([unit])

    basis: list[_Poly] = []  # every polynomial ever added
    active: list[int] = []  # indices of the current (non-redundant) basis
    pairs: list[tuple[int, int]] = []

    def lcm_of(i, j):
        return _lcm(basis[i].lm, basis[j].lm)

    def update(h: int):
        # Gebauer-Moeller: prune new pairs by the chain criterion, drop
        # coprime ones, then drop old pairs that h makes redundant
        nonlocal active, pairs
        hl = basis[h].lm
        cands = [(g, _lcm(hl, basis[g].lm)) for g in active]
        kept = []
        for idx, (g, l) in enumerate(cands):
            if not _coprime(hl, basis[g].lm):
                later = cands[idx + 1 :]
                if any(_divides(l2, l) for _, l2 in later) or any(_divides(l2, l) for _, l2 in kept):
                    stats["pairs_pruned"] += 1
                    continue
            kept.append((g, l))
        new_pairs = []
        for g, _ in kept:
            if _coprime(hl, basis[g].lm):
                stats["pairs_pruned"] += 1
            else:
                new_pairs.append((g, h))
        old = []
        for i, j in pairs:
            l = lcm_of(i, j)
            if _divides(hl, l) and _lcm(basis[i].lm, hl) != l and _lcm(basis[j].lm, hl) != l:
                stats["pairs_pruned"] += 1
                continue
            old.append((i, j))
        pairs = old + new_pairs
        active = [g for g in active if not _divides(hl, basis[g].lm)] + [h]

    deadline = start + budget.max_seconds

    def out_of_time():
        stats["basis_size"] = len(active)
        stats["seconds"] = time.monotonic() - start
        return BudgetExceeded(f"time budget of {budget.max_seconds}s exceeded", **stats)

    for p in polys:
        if time.monotonic() > deadline:
            raise out_of_time()
        basis.append(p)
        update(len(basis) - 1)

    while pairs:
        if time.monotonic() > deadline:
            raise out_of_time()
        # normal strategy: smallest lcm first, index pair breaks ties
        best = min(
            range(len(pairs)),
            key=lambda t: (sum(lcm_of(*pairs[t])), key(lcm_of(*pairs[t])), pairs[t]),
        )
        i, j = pairs.pop(best)
        stats["pairs_processed"] += 1
        s = _spoly(basis[i], basis[j])
        if not s:
            stats["reductions_to_zero"] += 1
            continue
        try:
            r, _ = _reduce(s, [basis[g] for g in active], key, deadline=deadline)
        except _Deadline:
            raise out_of_time() from None
        if not r:
            stats["reductions_to_zero"] += 1
            continue
        r = _primitive(r, key)
        h = _Poly(r, key)
        if not any(h.lm):
            return finish([unit])
        if sum(h.lm) > budget.max_total_degree:
            stats["basis_size"] = len(active)
            raise BudgetExceeded(f"degree {sum(h.lm)} exceeds budget", **stats)
        basis.append(h)
        update(len(basis) - 1)
        if len(active) > budget.max_basis_size:
            stats["basis_size"] = len(active)
            raise BudgetExceeded(f"basis size exceeds {budget.max_basis_size}", **stats)

    try:
        return finish(_interreduce([basis[g] for g in active], key, deadline))
    except _Deadline:
        raise out_of_time() from None


def ideal_membership(f: MultiPoly, gb: GroebnerBasis) -> bool:
    if f.vars != gb.vars:
        raise VarTableMismatch(f"{f.vars} vs {gb.vars}")
    if f.is_zero():
        return True
    if gb.is_unit_ideal:
        return True
    if not gb.basis:
        return False
    return normal_form(f, gb.basis, gb.order).is_zero()


def staircase_dimension_hint(gb: GroebnerBasis) -> str:
    """``"zeroDimensional"`` iff every variable has a pure power among the leading monomials."""
    if gb.is_unit_ideal:
        raise UnitIdeal("the unit ideal has no staircase")
    nvars = len(gb.vars)
    pure = set()
    for lm in gb.leading_monomials():
        support = [i for i, e in enumerate(lm) if e]
        if len(support) == 1:
            pure.add(support[0])
    return "zeroDimensional" if len(pure) == nvars else "positiveDimensional"


def is_groebner(G: Sequence[MultiPoly], order=MonomialOrder.GREVLEX) -> bool:
    """Buchberger's criterion: every S-polynomial reduces to zero."""
    order = MonomialOrder.parse(order)
    G = [g for g in G if not g.is_zero()]
    for i in range(len(G)):
        for j in range(i + 1, len(G)):
            if not normal_form(s_polynomial(G[i], G[j], order), G, order).is_zero():
                return False
    return True


def is_reduced(G: Sequence[MultiPoly], order=MonomialOrder.GREVLEX) -> bool:
    order = MonomialOrder.parse(order)
    lms = [g.leading_monomial(order) for g in G]
    for i, g in enumerate(G):
        for j, lm in enumerate(lms):
            if i != j and any(_divides(lm, e) for e in g.terms):
                return False
    return True


def same_ideal(F1: Sequence[MultiPoly], F2: Sequence[MultiPoly], order=MonomialOrder.GREVLEX, budget=None) -> bool:
    """Mutual membership test via the reduced bases of both generating sets."""
    g1 = buchberger(F1, order, budget)
    g2 = buchberger(F2, order, budget)
    return all(ideal_membership(f, g2) for f in F1) and all(ideal_membership(f, g1) for f in F2)
