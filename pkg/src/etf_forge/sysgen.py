"""Polynomial systems whose common zeros contain the dephased sub-Gram matrices.

For an ``(n, m)`` frame the leading ``(n-2) x (n-2)`` block of a dephased Gram
matrix is written symbolically as::

    h[i][i] = 1,  h[0][i] = h[i][0] = alpha,
    h[i][j] = alpha * x_i_j,  h[j][i] = alpha / x_i_j    (1 <= i < j, 0-based)

with variable names using 1-based indices (``x_2_3`` is ``h[1][2]``). The
generated equations, in emission order, are

============= ==================================================
tag           content
============= ==================================================
alphaRelation ``m(n-1) al^2 - (n-m)`` (only when alpha is irrational)
rankMinor     all ``(m+1) x (m+1)`` minors of ``H``
frameMinor    all ``3 x 3`` minors of ``m H^2 - n H``
haagerup      the triple identity for every ``i < j < k``
haagerupConj  the same identities after ``x -> 1/x``
nonzero       ``u * prod(x) - 1``
============= ==================================================

Entries with ``1/x`` are handled as Laurent polynomials and every equation is
cleared by the smallest monomial, then made primitive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Mapping

from etf_forge.errors import AlphaIsRational, BadParams, NonMonomialDenominator, UnassignedVariable
from etf_forge.exactpoly import MonomialOrder, MultiPoly, VarTable, evaluate, format_poly, reduce_mod

TAGS = ("alphaRelation", "rankMinor", "frameMinor", "haagerup", "haagerupConj", "nonzero")


class Laurent:
    """Laurent polynomial over Q: exponent tuples may be negative."""

    __slots__ = ("vars", "terms")

    def __init__(self, vars: VarTable, terms=None):
        self.vars = vars
        self.terms = {e: c for e, c in (terms or {}).items() if c}

    @classmethod
    def const(cls, vars, c):
        return cls(vars, {(0,) * len(vars): c})

    @classmethod
    def mono(cls, vars, exps, c=1):
        return cls(vars, {tuple(exps): c})

    @classmethod
    def from_poly(cls, p: MultiPoly) -> "Laurent":
        return cls(p.vars, dict(p.terms))

    def __add__(self, other):
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return Laurent(self.vars, out)

    def __neg__(self):
        return Laurent(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Laurent):
            c = other
            return Laurent(self.vars, {e: v * c for e, v in self.terms.items()})
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Laurent(self.vars, out)

    __rmul__ = __mul__

    def invert_vars(self, indices) -> "Laurent":
        """Substitute ``x -> 1/x`` for the variables at ``indices``."""
        idx = set(indices)
        return Laurent(
            self.vars,
            {tuple(-a if i in idx else a for i, a in enumerate(e)): c for e, c in self.terms.items()},
        )

    def is_zero(self) -> bool:
        return not self.terms


def clear_denominators(p, order: MonomialOrder = MonomialOrder.GREVLEX) -> MultiPoly:
    """Multiply by the smallest monomial that removes negative exponents.

    ``p`` is a :class:`Laurent` or a ``(numerator, denominator)`` pair of
    :class:`MultiPoly` whose denominator is a single term. The result is
    primitive with integer coefficients.
    """
    if isinstance(p, tuple):
        num, den = p
        if len(den.terms) != 1:
            raise NonMonomialDenominator(f"denominator {den} is not a monomial")
        (dexp, dc), = den.terms.items()
        p = Laurent(
            num.vars,
            {tuple(a - b for a, b in zip(e, dexp)): c / dc for e, c in num.terms.items()},
        )
    if p.is_zero():
        return MultiPoly.zero(p.vars)
    nv = len(p.vars)
    shift = [max(0, -min(e[i] for e in p.terms)) for i in range(nv)]
    terms = {tuple(a + s for a, s in zip(e, shift)): c for e, c in p.terms.items()}
    return MultiPoly(p.vars, terms).primitive(order)


def _det(mat, rows, cols, zero):
    """Laplace expansion along the first row, memoised on column subsets."""
    memo = {}

    def rec(r, cs):
        if r == len(rows):
            return None  # empty product marker
        key = (r, cs)
        if key in memo:
            return memo[key]
        total = zero
        sign = 1
        for pos, c in enumerate(cs):
            entry = mat[rows[r]][c]
            if not entry.is_zero():
                sub = rec(r + 1, cs[:pos] + cs[pos + 1 :])
                term = entry if sub is None else entry * sub
                total = total + (term if sign > 0 else -term)
            sign = -sign
        memo[key] = total
        return total

    out = rec(0, tuple(cols))
    return zero if out is None else out


def rational_alpha(n: int, m: int) -> Fraction | None:
    """Exact alpha_{n,m} when it is rational, else ``None``."""
    num, den = n - m, m * (n - 1)
    g = math.gcd(num, den)
    num, den = num // g, den // g
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


def x_names(n: int) -> list[str]:
    size = n - 2
    return [f"x_{i}_{j}" for i in range(2, size + 1) for j in range(i + 1, size + 1)]


def expected_counts(n: int, m: int) -> tuple[int, int]:
    """(#equations, #variables) by the closed-form count."""
    c = math.comb
    eqs = 2 + c(n - 2, m + 1) ** 2 + c(n - 2, 3) ** 2 + 2 * c(n - 2, 3)
    nvars = 2 + c(n - 3, 2) if n >= 3 else 2
    if rational_alpha(n, m) is not None:
        eqs, nvars = eqs - 1, nvars - 1
    return eqs, nvars


@dataclass
class PolySystem:
    n: int
    m: int
    alpha_rational: bool
    vars: VarTable
    equations: list  # list[tuple[MultiPoly, str]]
    alpha_reduced: bool = True

    @property
    def polys(self) -> list[MultiPoly]:
        return [p for p, _ in self.equations]

    def counts(self) -> tuple[int, int]:
        return len(self.equations), len(self.vars)

    def header(self) -> str:
        eqs, nv = self.counts()
        kind = "rational" if self.alpha_rational else "irrational"
        return f"n={self.n} m={self.m} eqs={eqs} vars={nv} alpha={kind}"


def symbolic_subgram(n: int, vars: VarTable, alpha) -> list[list[Laurent]]:
    """The ``(n-2) x (n-2)`` symbolic dephased sub-Gram as Laurent entries."""
    size = n - 2
    one = Laurent.const(vars, 1)
    H = [[Laurent(vars) for _ in range(size)] for _ in range(size)]
    for i in range(size):
        H[i][i] = one
    for i in range(1, size):
        H[0][i] = alpha
        H[i][0] = alpha
    nv = len(vars)
    for i in range(1, size):
        for j in range(i + 1, size):
            k = vars.index(f"x_{i + 1}_{j + 1}")
            e = [0] * nv
            e[k] = 1
            xk = Laurent.mono(vars, e)
            e[k] = -1
            xinv = Laurent.mono(vars, e)
            H[i][j] = alpha * xk
            H[j][i] = alpha * xinv
    return H


def _matmul(A, B, zero):
    size = len(A)
    out = []
    for i in range(size):
        row = []
        for j in range(size):
            acc = zero
            for k in range(size):
                if not A[i][k].is_zero() and not B[k][j].is_zero():
                    acc = acc + A[i][k] * B[k][j]
            row.append(acc)
        out.append(row)
    return out


def _lin(a, A, b, B):
    return [[x * a + y * b for x, y in zip(ra, rb)] for ra, rb in zip(A, B)]


def _reduce_laurent(p: Laurent, vars: VarTable, value: Fraction) -> Laurent:
    # al^2 -> value on Laurent terms (al never has negative exponents)
    if "al" not in vars:
        return p
    i = vars.index("al")
    out: dict = {}
    for e, c in p.terms.items():
        k = e[i]
        if k >= 2:
            c = c * value ** (k // 2)
            e = e[:i] + (k % 2,) + e[i + 1 :]
        out[e] = out.get(e, 0) + c
    return Laurent(vars, out)


def generate_system(n: int, m: int, alpha_reduce: bool = True) -> PolySystem:
    if m < 2 or n < m + 1 or n - 2 < 1:
        raise BadParams(f"need m >= 2, n >= m + 1, n >= 3; got n={n}, m={m}")
    exact = rational_alpha(n, m)
    names = ([] if exact is not None else ["al"]) + x_names(n) + ["u"]
    vt = VarTable(names)
    alpha2 = Fraction(n - m, m * (n - 1))
    if exact is not None:
        alpha = Laurent.const(vt, exact)
    else:
        alpha = Laurent.mono(vt, [1 if v == "al" else 0 for v in names])
    zero = Laurent(vt)
    xidx = [vt.index(v) for v in x_names(n)]

    def red(expr: Laurent) -> Laurent:
        # reducing intermediate entries commutes with the final reduction
        if alpha_reduce and exact is None:
            return _reduce_laurent(expr, vt, alpha2)
        return expr

    def finish(expr: Laurent) -> MultiPoly:
        return clear_denominators(red(expr))

    equations = []
    if exact is None:
        rel = MultiPoly(vt, {tuple(2 if v == "al" else 0 for v in names): m * (n - 1), (0,) * len(vt): -(n - m)})
        equations.append((rel.primitive(), "alphaRelation"))

    size = n - 2
    H = symbolic_subgram(n, vt, alpha)
    for rows in combinations(range(size), m + 1):
        for cols in combinations(range(size), m + 1):
            equations.append((finish(_det(H, rows, cols, zero)), "rankMinor"))

    H2 = [[red(e) for e in row] for row in _matmul(H, H, zero)]
    K = _lin(m, H2, -n, H)
    for rows in combinations(range(size), 3):
        for cols in combinations(range(size), 3):
            equations.append((finish(_det(K, rows, cols, zero)), "frameMinor"))

    # S = n H - m H^2 is m times the Haagerup quantities; the identity is
    # multiplied through by m^3. conj(S_ij) is S_ji formally.
    S = _lin(n, H, -m, H2)
    a2 = red(alpha * alpha)
    four_a4 = red(a2 * a2) * (4 * m * m)
    triples = []
    for i, j, k in combinations(range(size), 3):
        sym = red(S[i][j] * S[j][i] + S[j][k] * S[k][j] + S[k][i] * S[i][k]) - four_a4
        triples.append(red(S[i][j] * S[j][k]) * S[k][i] - red(a2 * sym) * m)
    for t in triples:
        equations.append((finish(t), "haagerup"))
    for t in triples:
        equations.append((finish(t.invert_vars(xidx)), "haagerupConj"))

    e = [0] * len(vt)
    for k in xidx:
        e[k] = 1
    e[vt.index("u")] = 1
    nonzero = MultiPoly(vt, {tuple(e): 1, (0,) * len(vt): -1})
    equations.append((nonzero.primitive(), "nonzero"))
    return PolySystem(n, m, exact is not None, vt, equations, alpha_reduce)


def reduce_alpha(p: MultiPoly, n: int, m: int) -> MultiPoly:
    """Reduce ``p`` modulo ``m(n-1) al^2 - (n-m)``."""
    if rational_alpha(n, m) is not None or "al" not in p.vars:
        raise AlphaIsRational(f"alpha_{{{n},{m}}} is rational; it is substituted at generation")
    vt = p.vars
    rel = MultiPoly(vt, {tuple(2 if v == "al" else 0 for v in vt): m * (n - 1), (0,) * len(vt): -(n - m)})
    return reduce_mod(p, rel, "al")


def evaluate_at_solution(sys: PolySystem, assignment: Mapping[str, complex]) -> float:
    """Largest ``|p(assignment)|`` over all equations.

    ``u`` is derived as ``1 / prod(x)`` when not given.
    """
    point = dict(assignment)
    if "u" not in point:
        prod = 1 + 0j
        for name in sys.vars:
            if name.startswith("x_"):
                if name not in point:
                    raise UnassignedVariable(f"no value for {name!r}")
                prod *= complex(point[name])
        point["u"] = 1 / prod
    return max((abs(evaluate(p, point)) for p in sys.polys), default=0.0)


def assignment_from_gram(G, n: int) -> dict:
    """Read ``al`` and every ``x_i_j`` off a dephased Gram (or sub-Gram) matrix."""
    alpha = abs(G[0][1])
    point = {"al": alpha}
    size = n - 2
    for i in range(1, size):
        for j in range(i + 1, size):
            point[f"x_{i + 1}_{j + 1}"] = complex(G[i][j]) / alpha
    return point


def export(sys: PolySystem, dialect: str = "plain", header: str | None = None) -> str:
    """Render the system as text; output is byte-stable for fixed input."""
    head = sys.header() if header is None else header
    names = list(sys.vars.names)
    polys = [format_poly(p) for p in sys.polys]
    if dialect == "plain":
        lines = [f"# {head}", "# vars: " + " ".join(names)]
        lines += polys
    elif dialect == "maple":
        lines = [f"# {head}", "vars := [" + ", ".join(names) + "]:", "F := ["]
        lines += [f"  {p}," for p in polys[:-1]] + [f"  {polys[-1]}"] if polys else []
        lines.append("]:")
    elif dialect == "magma":
        lines = [
            f"// {head}",
            "Q := RationalField();",
            f"R<{','.join(names)}> := PolynomialRing(Q, {len(names)}, \"grevlex\");",
            "I := ideal<R |",
        ]
        lines += [f"  {p}," for p in polys[:-1]] + [f"  {polys[-1]}"] if polys else []
        lines.append(">;")
    else:
        raise ValueError(f"unknown dialect {dialect!r}")
    return "\n".join(lines) + "\n"
