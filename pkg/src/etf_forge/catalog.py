"""Explicit Gram matrices, Hadamard families and the searches behind them.

Constructors return complex ``numpy`` arrays. Parameters written ``a`` must
be unimodular.
"""

from __future__ import annotations

import cmath
import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from typing import Callable

import numpy as np
from scipy.optimize import least_squares

from etf_forge.errors import BadScenario, BudgetExceeded, ExtensionNotFound, NotUnimodular, SearchExhausted
from etf_forge.frames import (
    FrameParams,
    as_matrix,
    equivalent,
    numerical_rank,
    passes_triple_test,
    welch_bound,
)

OMEGA = complex(-0.5, math.sqrt(3) / 2)
OMEGA_POWERS = (1 + 0j, OMEGA, OMEGA * OMEGA)

# 7,3 x-values: roots of 16 + 6v^2 + 5v^4 + 6v^6 + 16v^8
A73 = complex(-math.sqrt(2) / 4, math.sqrt(14) / 4)
# near-miss (5,3) parameter
A53 = complex(-math.sqrt(6) / 9, 5 * math.sqrt(3) / 9)
# generic unimodular value for the row-extension counts; avoids roots of unity of small order
GENERIC_A = cmath.exp(0.8391j)

OCTIC_83_FIRST = (625, 0, 1020, 0, 806, 0, 1020, 0, 625)
OCTIC_83_SECOND = (15625, 0, -39780, 0, 52406, 0, -39780, 0, 15625)


def _unimodular(a, tol: float = 1e-12) -> complex:
    a = complex(a)
    if abs(abs(a) - 1) > tol:
        raise NotUnimodular(f"|a| = {abs(a)}, expected 1")
    return a


def g4_simplex() -> np.ndarray:
    """Regular simplex in R^3: (4/3) I - (1/3) J."""
    return (4 / 3) * np.eye(4, dtype=complex) - np.ones((4, 4), dtype=complex) / 3


def g6_family(a) -> np.ndarray:
    a = _unimodular(a)
    ab = a.conjugate()
    s = math.sqrt(5)
    G = np.array(
        [
            [s, 1, 1, 1, 1, 1],
            [1, s, a, -a, -1, 1],
            [1, ab, s, 1, -ab, -1],
            [1, -ab, 1, s, ab, -1],
            [1, -1, -a, a, s, 1],
            [1, 1, -1, -1, 1, s],
        ],
        dtype=complex,
    )
    return G / s


def h9_family(a) -> np.ndarray:
    """Self-adjoint complex Hadamard matrix of order 9 with unit diagonal."""
    a = _unimodular(a)
    ab = a.conjugate()
    w, w2 = OMEGA, OMEGA * OMEGA
    H = np.array(
        [
            [1, 1, 1, 1, 1, 1, 1, 1, 1],
            [1, 1, 1, w, w, w, w2, w2, w2],
            [1, 1, 1, w2, w2, w2, w, w, w],
            [1, w2, w, 1, w2, w, a, a * w2, a * w],
            [1, w2, w, w, 1, w2, a * w2, a * w, a],
            [1, w2, w, w2, w, 1, a * w, a, a * w2],
            [1, w, w2, ab, ab * w, ab * w2, 1, w, w2],
            [1, w, w2, ab * w, ab * w2, ab, w2, 1, w],
            [1, w, w2, ab * w2, ab, ab * w, w, w2, 1],
        ],
        dtype=complex,
    )
    # mirror the upper triangle so H equals H* bit for bit
    upper = np.triu(H, 1)
    return upper + upper.conj().T + np.diag(H.diagonal().real).astype(complex)


def g9_family(a) -> np.ndarray:
    return (3 * np.eye(9) - h9_family(a)) / 2


def h9_negated_block(a=1) -> np.ndarray:
    """``h9_family(a)`` with its lower right 3x3 block negated."""
    H = h9_family(a)
    H[6:, 6:] *= -1
    return H


def near_miss_53() -> np.ndarray:
    s = math.sqrt(6)
    a = A53
    H = np.array([[s, 1, 1], [1, s, a], [1, 1 / a, s]], dtype=complex)
    return H / s


# -- (7,3) -------------------------------------------------------------------


def _subgram(size: int, alpha: float, pairs, values) -> np.ndarray:
    H = np.eye(size, dtype=complex)
    H[0, 1:] = alpha
    H[1:, 0] = alpha
    for (i, j), v in zip(pairs, values):
        H[i, j] = alpha * v
        H[j, i] = alpha * np.conj(v)
    return H


def _entry_key(H):
    return tuple(np.round(np.concatenate([H.real.ravel(), H.imag.ravel()]), 9))


def enumerate_73_solutions(tol: float = 1e-8) -> list[np.ndarray]:
    """All 5x5 dephased (7,3) sub-Grams with entries alpha * {a, conj a, a^3, conj a^3}.

    Each of the 4^6 assignments is kept when rank(H) <= 3,
    rank(3H^2 - 7H) <= 2 and every triple residual is at most ``tol``.
    """
    p = FrameParams.of(7, 3)
    values = [A73, A73.conjugate(), A73**3, A73.conjugate() ** 3]
    pairs = [(i, j) for i in range(1, 5) for j in range(i + 1, 5)]
    out = []
    for combo in itertools.product(values, repeat=len(pairs)):
        H = _subgram(5, p.alpha, pairs, combo)
        if numerical_rank(H) > 3:
            continue
        if numerical_rank(p.m * (H @ H) - p.n * H) > 2:
            continue
        if passes_triple_test(H, p, tol):
            out.append(H)
    out.sort(key=_entry_key)
    return out


def all_pairwise_equivalent(mats, tol: float = 1e-8, workers: int = 1) -> bool:
    pairs = list(itertools.combinations(mats, 2))
    if workers <= 1:
        return all(equivalent(A, B, tol) for A, B in pairs)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return all(pool.map(lambda ab: equivalent(ab[0], ab[1], tol), pairs))


def _u2(params):
    theta, psi, chi, gamma = params
    c, s = math.cos(theta), math.sin(theta)
    return cmath.exp(1j * gamma) * np.array(
        [[cmath.exp(1j * psi) * c, cmath.exp(1j * chi) * s], [-cmath.exp(-1j * chi) * s, cmath.exp(-1j * psi) * c]]
    )


def _u2_grid(steps: int) -> np.ndarray:
    t = np.linspace(0, math.pi / 2, steps)
    ph = np.linspace(0, 2 * math.pi, steps, endpoint=False)
    theta, psi, chi, gamma = np.meshgrid(t, ph, ph, ph, indexing="ij")
    return np.stack([theta.ravel(), psi.ravel(), chi.ravel(), gamma.ravel()], axis=1)


def _extension_residuals(C, B, alpha):
    def res(params):
        V = C @ _u2(params)
        inner = B.conj().T @ V  # (5, 2)
        out = [np.abs(np.linalg.norm(V, axis=0)) - 1, (np.abs(inner) - alpha).ravel(), [abs(np.vdot(V[:, 0], V[:, 1])) - alpha]]
        return np.concatenate(out)

    return res


def g7_unique(grid_steps: int = 20) -> np.ndarray:
    """Full 7x7 Gram matrix extending the first enumerated 5x5 sub-Gram.

    ``H = B* B`` with ``B`` of three rows, ``M = (7/3) I - B B* = C C*`` of
    rank two, and the last two frame vectors are the columns of ``C U`` for a
    2x2 unitary ``U`` found by grid search and least-squares polishing.
    """
    p = FrameParams.of(7, 3)
    H = enumerate_73_solutions()[0]
    lam, V = np.linalg.eigh(H)
    top = np.argsort(lam)[::-1][:3]
    B = np.sqrt(np.clip(lam[top], 0, None))[:, None] * V[:, top].conj().T  # 3x5, H = B* B
    M = (p.n / p.m) * np.eye(3) - B @ B.conj().T
    mu, W = np.linalg.eigh(M)
    keep = np.argsort(mu)[::-1][:2]
    C = W[:, keep] * np.sqrt(np.clip(mu[keep], 0, None))[None, :]
    res = _extension_residuals(C, B, p.alpha)

    # vectorised coarse grid
    grid = _u2_grid(grid_steps)
    theta, psi, chi, gamma = grid.T
    c, s = np.cos(theta), np.sin(theta)
    g = np.exp(1j * gamma)
    U = np.empty((len(grid), 2, 2), dtype=complex)
    U[:, 0, 0] = g * np.exp(1j * psi) * c
    U[:, 0, 1] = g * np.exp(1j * chi) * s
    U[:, 1, 0] = -g * np.exp(-1j * chi) * s
    U[:, 1, 1] = g * np.exp(-1j * psi) * c
    Vs = np.einsum("ik,nkj->nij", C, U)
    inner = np.einsum("ki,nkj->nij", B.conj(), Vs)
    cost = (
        np.sum((np.linalg.norm(Vs, axis=1) - 1) ** 2, axis=1)
        + np.sum((np.abs(inner) - p.alpha) ** 2, axis=(1, 2))
        + (np.abs(np.einsum("nk,nk->n", Vs[:, :, 0].conj(), Vs[:, :, 1])) - p.alpha) ** 2
    )
    for idx in np.argsort(cost)[:50]:
        fit = least_squares(res, grid[idx], xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if np.max(np.abs(fit.fun)) <= 1e-10:
            F = np.concatenate([B, C @ _u2(fit.x)], axis=1)
            F /= np.linalg.norm(F, axis=0)[None, :]
            G = F.conj().T @ F
            G[np.diag_indices(7)] = 1
            return G
    raise ExtensionNotFound("no 2x2 unitary completes the (7,3) sub-Gram")


# -- (8,3) near miss ----------------------------------------------------------


def octic_roots(coeffs) -> np.ndarray:
    """Roots of a polynomial given by ascending coefficients, sorted by angle."""
    r = np.roots(list(coeffs)[::-1])
    return r[np.argsort(np.angle(r))]


def near_miss_83_search(budget=None) -> np.ndarray:
    """Six equiangular lines at the (8,3) angle spanning a rank-3 space.

    ``x_2_3 ... x_4_6`` run over roots of the first octic and ``x_5_6`` over
    roots of the second; columns are completed one at a time and a branch
    is cut as soon as a completed 4x4 minor is not ~0.
    """
    max_seconds = getattr(budget, "max_seconds", 60.0)
    start = time.monotonic()
    alpha = welch_bound(8, 3)
    first, second = octic_roots(OCTIC_83_FIRST), octic_roots(OCTIC_83_SECOND)
    H = np.eye(6, dtype=complex)
    H[0, 1:] = alpha
    H[1:, 0] = alpha
    visited = 0

    def minors_vanish(k):
        # only minors touching the newest index k
        for rows in itertools.combinations(range(k + 1), 4):
            for cols in itertools.combinations(range(k + 1), 4):
                if (k in rows or k in cols) and abs(np.linalg.det(H[np.ix_(rows, cols)])) > 1e-6:
                    return False
        return True

    def rec(k) -> bool:
        nonlocal visited
        if k == 6:
            return True
        rows = list(range(1, k))
        pools = [second if (i, k) == (4, 5) else first for i in rows]
        for choice in itertools.product(*pools):
            visited += 1
            if visited % 256 == 0 and time.monotonic() - start > max_seconds:
                raise BudgetExceeded("near-miss search ran out of time", visited=visited)
            for i, v in zip(rows, choice):
                H[i, k] = alpha * v
                H[k, i] = alpha * np.conj(v)
            if k >= 3 and not minors_vanish(k):
                continue
            if rec(k + 1):
                return True
        for i in rows:
            H[i, k] = H[k, i] = 0
        return False

    if not rec(2):
        raise SearchExhausted("no rank-3 configuration among the octic roots")
    if numerical_rank(H) != 3:
        raise SearchExhausted("search result does not have rank 3")
    return H.copy()


def near_miss_83() -> np.ndarray:
    """The cached result of :func:`near_miss_83_search`."""
    from etf_forge.matfile import parse_matrix_text

    text = resources.files("etf_forge").joinpath("data/near_miss_83.txt").read_text()
    return parse_matrix_text(text)


# -- order 9 row extensions ---------------------------------------------------

SCENARIOS = ("genericA", "aMinusOne", "cubicOnly")


@dataclass
class RowExtensions:
    scenario: str
    rows: list  # candidate rows as tuples of complex
    classes: list  # one representative per class
    reported: int


def _orthogonal(row, given, tol):
    r = np.asarray(row)
    return all(abs(np.vdot(g, r)) <= tol for g in given)


def _stabilizer(given, columns):
    """Permutations of ``columns`` that leave every given row unchanged.

    Columns with identical entries in all given rows may be shuffled freely.
    """
    groups: dict = {}
    for c in columns:
        sig = tuple((round(g[c].real, 9), round(g[c].imag, 9)) for g in given)
        groups.setdefault(sig, []).append(c)
    blocks = list(groups.values())
    out = []
    for parts in itertools.product(*(itertools.permutations(b) for b in blocks)):
        mapping = {}
        for block, part in zip(blocks, parts):
            mapping.update(zip(block, part))
        out.append(tuple(mapping[c] for c in columns))
    return out


def _classes(rows, columns, perms):
    reps, seen = [], set()
    for r in rows:
        images = []
        for perm in perms:
            img = list(r)
            for c, p in zip(columns, perm):
                img[c] = r[p]
            images.append(tuple(np.round(np.array(img), 9)))
        key = min(images, key=lambda t: [(z.real, z.imag) for z in t])
        if key not in seen:
            seen.add(key)
            reps.append(r)
    return reps


def row_extensions(scenario: str, tol: float = 1e-8) -> RowExtensions:
    """Candidate next rows of a normalised self-adjoint Hadamard matrix of order 9.

    ``genericA`` and ``aMinusOne`` extend ``[1...1]`` and
    ``[1, 1, a, a w, a w^2, w, w, w^2, w^2]`` by a third row whose first
    three entries ``(1, conj a, 1)`` are forced by self-adjointness; the rest
    is a rearrangement of the second row with ``a`` replaced by ``conj a``.
    ``cubicOnly`` extends the first three rows of ``h9_family(1)`` by a row
    of cube roots of unity. Classes are taken under those permutations of
    the free columns that fix every given row.
    """
    w, w2 = OMEGA, OMEGA * OMEGA
    if scenario in ("genericA", "aMinusOne"):
        a = GENERIC_A if scenario == "genericA" else -1 + 0j
        ab = a.conjugate()
        given = [np.ones(9, dtype=complex), np.array([1, 1, a, a * w, a * w2, w, w, w2, w2])]
        fixed = [1, ab, 1]
        pool = [ab * w, ab * w2, w, w, w2, w2]
        candidates = {tuple(fixed) + perm for perm in itertools.permutations(pool)}
        free = [5, 6, 7, 8]
    elif scenario == "cubicOnly":
        H = h9_family(1)
        given = [H[0], H[1], H[2]]
        fixed = [1, w2, w, 1]
        candidates = {tuple(fixed) + tail for tail in itertools.product(OMEGA_POWERS, repeat=5)}
        free = list(range(9))
    else:
        raise BadScenario(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")
    rows = sorted(
        {tuple(np.round(np.array(c), 12)) for c in candidates if _orthogonal(c, given, tol)},
        key=lambda t: [(z.real, z.imag) for z in t],
    )
    perms = _stabilizer(given, free)
    classes = _classes(rows, free, perms)
    reported = len(classes) if scenario == "aMinusOne" else len(rows)
    return RowExtensions(scenario, rows, classes, reported)


def count_row_extensions(scenario: str) -> int:
    """4 for ``genericA``, 5 for ``aMinusOne``, 12 for ``cubicOnly``.

    ``genericA`` and ``cubicOnly`` count distinct rows (each set forms a
    single class); ``aMinusOne`` counts classes up to permuting the last four
    columns.
    """
    return row_extensions(scenario).reported


# -- registry ----------------------------------------------------------------


@dataclass(frozen=True)
class FamilyHandle:
    name: str
    build: Callable
    arity: int
    params: tuple | None  # (n, m) when the matrix is an ETF Gram

    def __call__(self, a=None):
        if self.arity == 0:
            if a is not None and self.name != "h9_negated_block":
                raise ValueError(f"{self.name} takes no parameter")
            return self.build() if a is None else self.build(a)
        return self.build(1 if a is None else a)


FAMILIES = {
    "g4_simplex": FamilyHandle("g4_simplex", g4_simplex, 0, (4, 3)),
    "g6_family": FamilyHandle("g6_family", g6_family, 1, (6, 3)),
    "g7_unique": FamilyHandle("g7_unique", g7_unique, 0, (7, 3)),
    "h9_family": FamilyHandle("h9_family", h9_family, 1, None),
    "g9_family": FamilyHandle("g9_family", g9_family, 1, (9, 3)),
    "near_miss_53": FamilyHandle("near_miss_53", near_miss_53, 0, None),
    "near_miss_83": FamilyHandle("near_miss_83", near_miss_83, 0, None),
    "h9_negated_block": FamilyHandle("h9_negated_block", h9_negated_block, 0, None),
}


def catalog_etfs(a=1j) -> dict:
    """Every catalog ETF Gram keyed by name, with its ``(n, m)``."""
    out = {}
    for name, fam in FAMILIES.items():
        if fam.params is not None:
            out[name] = (fam(a) if fam.arity else fam(), FrameParams.of(*fam.params))
    return out


def unit_check(H) -> float:
    """Largest deviation of |h_ij| from 1."""
    return float(np.max(np.abs(np.abs(as_matrix(H)) - 1)))
