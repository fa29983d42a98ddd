"""Sparse multivariate polynomials with exact rational coefficients.

A :class:`MultiPoly` maps exponent tuples to nonzero :class:`fractions.Fraction`
coefficients. The positions of the exponent tuple are fixed by a
:class:`VarTable`; two polynomials can only be combined when they share the
same table.

Polynomials are treated as immutable values. Arithmetic is available through
the usual operators as well as the module-level :func:`add` and :func:`mul`.
"""

from __future__ import annotations

import math
import re
from enum import Enum
from fractions import Fraction
from functools import reduce
from typing import Iterable, Mapping

from etf_forge.errors import (
    BadRelationShape,
    ExponentOverflow,
    PolynomialSyntaxError,
    UnassignedVariable,
    VarTableMismatch,
)

MAX_EXPONENT = 2**32 - 1

Monomial = tuple  # tuple[int, ...], one exponent per variable


class VarTable:
    """Ordered, immutable collection of variable names.

    The last name is the largest variable for every monomial order.
    """

    __slots__ = ("names", "_index")

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        for name in names:
            if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", name):
                raise ValueError(f"invalid variable name {name!r}")
        self.names = names
        self._index = {name: i for i, name in enumerate(names)}

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnassignedVariable(f"unknown variable {name!r}") from None

    def __contains__(self, name) -> bool:
        return name in self._index

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __eq__(self, other) -> bool:
        return isinstance(other, VarTable) and self.names == other.names

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"VarTable({list(self.names)!r})"


class MonomialOrder(Enum):
    LEX = "lex"
    GREVLEX = "grevlex"

    def key(self, exps: Monomial):
        """Sort key: a larger key means a larger monomial."""
        if self is MonomialOrder.LEX:
            return tuple(reversed(exps))
        return (sum(exps), tuple(-e for e in exps))

    @classmethod
    def parse(cls, name) -> "MonomialOrder":
        if isinstance(name, cls):
            return name
        return cls(str(name).lower())


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, float):
        raise TypeError("floating coefficients are not allowed in MultiPoly")
    return Fraction(c)


def _check_exps(exps: Monomial) -> Monomial:
    for e in exps:
        if e < 0:
            raise ValueError(f"negative exponent in {exps}")
        if e > MAX_EXPONENT:
            raise ExponentOverflow(f"exponent {e} exceeds {MAX_EXPONENT}")
    return exps


class MultiPoly:
    """Polynomial over Q in the variables of a :class:`VarTable`."""

    __slots__ = ("vars", "terms")

    def __init__(self, vars: VarTable, terms: Mapping[Monomial, object] | None = None):
        self.vars = vars
        clean = {}
        nvars = len(vars)
        for exps, c in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != nvars:
                raise ValueError(f"monomial {exps} does not match {vars}")
            c = _frac(c)
            if c:
                clean[_check_exps(exps)] = c
        self.terms = clean

    @classmethod
    def _raw(cls, vars: VarTable, terms: dict) -> "MultiPoly":
        # trusted constructor: terms already clean
        p = object.__new__(cls)
        p.vars = vars
        p.terms = terms
        return p

    @classmethod
    def zero(cls, vars: VarTable) -> "MultiPoly":
        return cls._raw(vars, {})

    @classmethod
    def constant(cls, vars: VarTable, c) -> "MultiPoly":
        c = _frac(c)
        return cls._raw(vars, {(0,) * len(vars): c} if c else {})

    @classmethod
    def variable(cls, vars: VarTable, name: str, power: int = 1) -> "MultiPoly":
        exps = [0] * len(vars)
        exps[vars.index(name)] = power
        return cls._raw(vars, {_check_exps(tuple(exps)): Fraction(1)})

    @classmethod
    def monomial(cls, vars: VarTable, exps: Monomial, coeff=1) -> "MultiPoly":
        return cls(vars, {tuple(exps): coeff})

    # -- inspection ------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> Fraction:
        return self.terms.get((0,) * len(self.vars), Fraction(0))

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree(self, name: str) -> int:
        i = self.vars.index(name)
        return max((e[i] for e in self.terms), default=-1)

    def variables_used(self) -> list[str]:
        used = set()
        for exps in self.terms:
            used.update(i for i, e in enumerate(exps) if e)
        return [self.vars.names[i] for i in sorted(used)]

    def sorted_terms(self, order: MonomialOrder = MonomialOrder.GREVLEX):
        """Terms as ``(exps, coeff)`` pairs, largest monomial first."""
        return sorted(self.terms.items(), key=lambda t: order.key(t[0]), reverse=True)

    def leading_monomial(self, order: MonomialOrder = MonomialOrder.GREVLEX) -> Monomial:
        if not self.terms:
            raise ValueError("zero polynomial has no leading monomial")
        return max(self.terms, key=order.key)

    def leading_coefficient(self, order: MonomialOrder = MonomialOrder.GREVLEX) -> Fraction:
        return self.terms[self.leading_monomial(order)]

    # -- arithmetic ------------------------------------------------------

    def _check(self, other: "MultiPoly"):
        if self.vars != other.vars:
            raise VarTableMismatch(f"{self.vars} vs {other.vars}")

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return MultiPoly.constant(self.vars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for exps, c in other.terms.items():
            s = out.get(exps, 0) + c
            if s:
                out[exps] = s
            else:
                out.pop(exps, None)
        return MultiPoly._raw(self.vars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly._raw(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                out[exps] = out.get(exps, 0) + c1 * c2
        for exps in out:
            _check_exps(exps)
        return MultiPoly._raw(self.vars, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("power must be a non-negative integer")
        result = MultiPoly.constant(self.vars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def scale(self, c) -> "MultiPoly":
        c = _frac(c)
        if not c:
            return MultiPoly.zero(self.vars)
        return MultiPoly._raw(self.vars, {e: v * c for e, v in self.terms.items()})

    def shift(self, exps: Monomial) -> "MultiPoly":
        """Multiply by the monomial with exponent vector ``exps``."""
        return MultiPoly._raw(
            self.vars,
            {_check_exps(tuple(a + b for a, b in zip(e, exps))): c for e, c in self.terms.items()},
        )

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.constant(self.vars, other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.vars == other.vars and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.vars, frozenset(self.terms.items())))

    # -- normalisation ---------------------------------------------------

    def content(self) -> Fraction:
        """Positive rational c with ``self / c`` primitive with integer coefficients."""
        if not self.terms:
            return Fraction(0)
        nums = [c.numerator for c in self.terms.values()]
        dens = [c.denominator for c in self.terms.values()]
        g = reduce(math.gcd, nums)
        lcm = reduce(lambda a, b: a * b // math.gcd(a, b), dens)
        return Fraction(abs(g), lcm)

    def primitive(self, order: MonomialOrder = MonomialOrder.GREVLEX) -> "MultiPoly":
        """Integer coefficients with gcd 1 and a positive leading coefficient."""
        if not self.terms:
            return self
        c = self.content()
        if self.leading_coefficient(order) < 0:
            c = -c
        return self.scale(1 / c)

    # -- substitution and evaluation -------------------------------------

    def substitute(self, values: Mapping[str, object]) -> "MultiPoly":
        """Replace the named variables by exact rational values."""
        idx = {self.vars.index(k): _frac(v) for k, v in values.items()}
        out: dict = {}
        for exps, c in self.terms.items():
            for i, v in idx.items():
                if exps[i]:
                    c = c * v ** exps[i]
            if not c:
                continue
            new = tuple(0 if i in idx else e for i, e in enumerate(exps))
            out[new] = out.get(new, 0) + c
        return MultiPoly._raw(self.vars, {e: c for e, c in out.items() if c})

    def evaluate(self, point: Mapping[str, complex]) -> complex:
        return evaluate(self, point)

    # -- text ------------------------------------------------------------

    def __str__(self) -> str:
        return format_poly(self)

    def __repr__(self) -> str:
        return f"MultiPoly({format_poly(self)!r})"


def add(p: MultiPoly, q: MultiPoly) -> MultiPoly:
    p._check(q)
    return p + q


def mul(p: MultiPoly, q: MultiPoly) -> MultiPoly:
    p._check(q)
    return p * q


def reduce_mod(p: MultiPoly, rel: MultiPoly, var: str) -> MultiPoly:
    """Reduce ``p`` modulo a relation ``c*var^2 - d``.

    The result has degree below two in ``var`` and is congruent to ``p``
    modulo the ideal generated by ``rel``.
    """
    p._check(rel)
    i = rel.vars.index(var)
    square = tuple(2 if j == i else 0 for j in range(len(rel.vars)))
    const = (0,) * len(rel.vars)
    if set(rel.terms) - {square, const} or square not in rel.terms:
        raise BadRelationShape(f"expected c*{var}^2 - d, got {rel}")
    value = -rel.terms.get(const, Fraction(0)) / rel.terms[square]
    out: dict = {}
    for exps, c in p.terms.items():
        k = exps[i]
        if k >= 2:
            c = c * value ** (k // 2)
            if not c:
                continue
            exps = exps[:i] + (k % 2,) + exps[i + 1 :]
        out[exps] = out.get(exps, 0) + c
    return MultiPoly._raw(p.vars, {e: c for e, c in out.items() if c})


def evaluate(p: MultiPoly, point: Mapping[str, complex]) -> complex:
    """Evaluate in double precision complex arithmetic."""
    values = []
    used = set()
    for exps in p.terms:
        used.update(i for i, e in enumerate(exps) if e)
    for i, name in enumerate(p.vars.names):
        if i in used and name not in point:
            raise UnassignedVariable(f"no value for {name!r}")
        values.append(complex(point[name]) if i in used else 0j)
    total = 0j
    for exps, c in p.terms.items():
        t = complex(float(c))
        for v, e in zip(values, exps):
            if e:
                t *= v**e
        total += t
    return total


# -- text grammar -----------------------------------------------------------


def _format_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_poly(p: MultiPoly, order: MonomialOrder = MonomialOrder.GREVLEX) -> str:
    """Render ``p`` in the plain grammar, e.g. ``3*x_2_3^4 - 58*x_2_3*al + 3``.

    Unit coefficients in front of a monomial are omitted; factors appear
    largest variable first.
    """
    if p.is_zero():
        return "0"
    parts = []
    for k, (exps, c) in enumerate(p.sorted_terms(order)):
        factors = []
        for name, e in reversed(list(zip(p.vars.names, exps))):
            if e == 1:
                factors.append(name)
            elif e:
                factors.append(f"{name}^{e}")
        mag = abs(c)
        if not factors:
            body = _format_coeff(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = "*".join([_format_coeff(mag)] + factors)
        if k == 0:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append(("- " if c < 0 else "+ ") + body)
    return " ".join(parts)


_TERM_RE = re.compile(r"\s*([+-])?\s*([^+-]+)")
_FACTOR_RE = re.compile(r"^(?:(\d+)(?:/(\d+))?|([A-Za-z][A-Za-z0-9_]*)(?:\^(\d+))?)$")


def parse_poly(text: str, vars: VarTable) -> MultiPoly:
    text = text.strip()
    if not text:
        raise PolynomialSyntaxError("empty polynomial")
    pos = 0
    out: dict = {}
    nvars = len(vars)
    while pos < len(text):
        m = _TERM_RE.match(text, pos)
        if not m or (m.group(1) is None and pos > 0):
            raise PolynomialSyntaxError(f"cannot parse {text[pos:]!r}")
        pos = m.end()
        sign = -1 if m.group(1) == "-" else 1
        coeff = Fraction(sign)
        exps = [0] * nvars
        for factor in m.group(2).strip().split("*"):
            f = _FACTOR_RE.match(factor.strip())
            if not f:
                raise PolynomialSyntaxError(f"bad factor {factor!r} in {text!r}")
            if f.group(1) is not None:
                coeff *= Fraction(int(f.group(1)), int(f.group(2) or 1))
            else:
                if f.group(3) not in vars:
                    raise PolynomialSyntaxError(f"unknown variable {f.group(3)!r}")
                exps[vars.index(f.group(3))] += int(f.group(4) or 1)
        key = _check_exps(tuple(exps))
        out[key] = out.get(key, 0) + coeff
    return MultiPoly._raw(vars, {e: c for e, c in out.items() if c})


def _name_sort_key(name: str):
    if name == "al":
        return (0, ())
    if name == "u":
        return (2, ())
    m = re.fullmatch(r"x((?:_\d+)+)", name)
    if m:
        return (1, (0,) + tuple(int(t) for t in m.group(1).split("_")[1:]))
    return (1, (1,), name)


def default_var_order(names: Iterable[str]) -> list[str]:
    """``al`` first, then ``x_i_j`` by index, other names alphabetically, ``u`` last."""
    return sorted(set(names), key=_name_sort_key)


def parse_system(text: str, vars: VarTable | None = None) -> tuple[VarTable, list[MultiPoly]]:
    """Parse one polynomial per line; ``#`` starts a comment line.

    A comment ``# vars: a b c`` fixes the variable table. Otherwise the
    variables found in the text are ordered by :func:`default_var_order`.
    """
    lines = []
    declared = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = re.match(r"#\s*vars\s*:(.*)$", line)
            if m and declared is None:
                declared = m.group(1).split()
            continue
        lines.append(line)
    if vars is None:
        if declared is not None:
            vars = VarTable(declared)
        else:
            found = re.findall(r"[A-Za-z][A-Za-z0-9_]*", "\n".join(lines))
            vars = VarTable(default_var_order(found))
    return vars, [parse_poly(line, vars) for line in lines]


def format_system(polys: Iterable[MultiPoly], vars: VarTable, header: Iterable[str] = ()) -> str:
    out = [f"# {h}" for h in header]
    out.append("# vars: " + " ".join(vars.names))
    out.extend(format_poly(p) for p in polys)
    return "\n".join(out) + "\n"
