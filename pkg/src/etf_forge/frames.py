"""Numeric conditions on Gram matrices of equiangular tight frames.

Matrices are plain complex ``numpy`` arrays. Every predicate takes an
explicit tolerance; rank decisions count singular values below
``tol * sigma_max`` as zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from etf_forge.errors import (
    BadModulus,
    BadParams,
    BadSize,
    BadSubgram,
    MTooSmall,
    NEqualsM,
    NonUnitColumns,
    NotAnEtf,
    NotRankOne,
    NotUnimodular,
    SizeMismatch,
    TooLarge,
    ZeroFirstRowEntry,
)

DEFAULT_TOL = 1e-10
RANK_TOL = 1e-8


def welch_bound(n: int, m: int) -> float:
    """Common angle sqrt((n-m) / (m(n-1))) of an equiangular (n, m) frame."""
    if m < 1 or n < m or n <= 1:
        raise BadParams(f"need n >= m >= 1 and n > 1, got n={n}, m={m}")
    return math.sqrt((n - m) / (m * (n - 1)))


@dataclass(frozen=True)
class FrameParams:
    n: int
    m: int
    alpha: float

    def __post_init__(self):
        if self.m < 1 or self.n < self.m:
            raise BadParams(f"need n >= m >= 1, got n={self.n}, m={self.m}")
        if self.alpha < 0:
            raise BadParams("alpha must be non-negative")
        if abs(self.m * (self.n - 1) * self.alpha**2 - (self.n - self.m)) > 1e-12 * max(1, self.n):
            raise BadParams(f"alpha={self.alpha} is not the Welch bound for ({self.n}, {self.m})")

    @classmethod
    def of(cls, n: int, m: int) -> "FrameParams":
        return cls(n, m, welch_bound(n, m))


def as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2:
        raise SizeMismatch(f"expected a matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def is_self_adjoint(A, tol: float = DEFAULT_TOL) -> bool:
    A = as_matrix(A)
    return A.shape[0] == A.shape[1] and bool(np.max(np.abs(A - A.conj().T), initial=0) <= tol)


def has_unit_diagonal(A, tol: float = DEFAULT_TOL) -> bool:
    return bool(np.max(np.abs(np.diag(as_matrix(A)) - 1), initial=0) <= tol)


def off_diagonal(A) -> np.ndarray:
    A = as_matrix(A)
    return A[~np.eye(A.shape[0], dtype=bool)]


def off_diagonal_modulus_error(A, alpha: float) -> float:
    return float(np.max(np.abs(np.abs(off_diagonal(A)) - alpha), initial=0))


def numerical_rank(A, tol: float = RANK_TOL) -> int:
    s = np.linalg.svd(as_matrix(A), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def gram_from_frame(F, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``F* F`` for a frame whose columns are unit vectors."""
    F = as_matrix(F)
    norms = np.linalg.norm(F, axis=0)
    if np.any(np.abs(norms - 1) > tol):
        raise NonUnitColumns(f"column norms {norms}")
    return F.conj().T @ F


@dataclass
class EtfReport:
    self_adjoint: bool
    unit_diagonal: bool
    equiangular: bool
    frame_condition: bool
    residuals: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.self_adjoint and self.unit_diagonal and self.equiangular and self.frame_condition

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def lines(self) -> list[str]:
        out = []
        for flag in ("self_adjoint", "unit_diagonal", "equiangular", "frame_condition"):
            out.append(f"{flag}: {getattr(self, flag)}")
            out.append(f"{flag}_residual: {self.residuals[flag]:.3e}")
        return out


def check_etf_gram(G, p: FrameParams, tol: float = DEFAULT_TOL) -> EtfReport:
    G = as_matrix(G)
    if G.shape != (p.n, p.n):
        raise SizeMismatch(f"expected {p.n}x{p.n}, got {G.shape}")
    res = {
        "self_adjoint": float(np.max(np.abs(G - G.conj().T))),
        "unit_diagonal": float(np.max(np.abs(np.diag(G) - 1))),
        "equiangular": off_diagonal_modulus_error(G, p.alpha),
        "frame_condition": float(np.max(np.abs(p.m * (G @ G) - p.n * G))),
    }
    return EtfReport(*(res[k] <= tol for k in res), residuals=res)


def naimark_complement(G, p: FrameParams, tol: float = DEFAULT_TOL):
    """``((nI - mG) / (n - m), (n, n - m))``."""
    if p.n == p.m:
        raise NEqualsM("no complement when n == m")
    report = check_etf_gram(G, p, tol)
    if not report.passed:
        raise NotAnEtf(f"input fails the ETF check: {report.residuals}")
    G = as_matrix(G)
    comp = (p.n * np.eye(p.n) - p.m * G) / (p.n - p.m)
    return comp, FrameParams.of(p.n, p.n - p.m)


def nonexistence_range(m: int) -> range:
    """Values of n for which no (n, m) frame exists by the Naimark bound."""
    if m < 3:
        raise MTooSmall("the bound needs m >= 3")
    d = 1 + 4 * m
    r = math.isqrt(d)
    if r * r == d:
        ceil = (1 + 2 * m + r) // 2
    else:
        ceil = (1 + 2 * m + r) // 2 + 1
    return range(m + 2, ceil)


def extend_subgram(H, p: FrameParams, tol: float = RANK_TOL) -> np.ndarray:
    """Rebuild the full Gram matrix from its leading (n-1) x (n-1) block.

    The missing column ``v`` solves ``n H - m H^2 = m v v*``; its global
    phase is fixed by making ``v[0]`` positive.
    """
    H = as_matrix(H)
    size = p.n - 1
    if H.shape != (size, size):
        raise BadSubgram(f"expected {size}x{size}, got {H.shape}")
    if not (is_self_adjoint(H, tol) and has_unit_diagonal(H, tol)):
        raise BadSubgram("sub-Gram must be self-adjoint with unit diagonal")
    if off_diagonal_modulus_error(H, p.alpha) > tol:
        raise BadSubgram(f"off-diagonal moduli differ from alpha={p.alpha}")
    R = p.n * H - p.m * (H @ H)
    j = int(np.argmax(np.linalg.norm(R, axis=0)))
    if R[j, j].real <= tol:
        raise NotRankOne("n H - m H^2 vanishes")
    v = R[:, j] / math.sqrt(p.m * R[j, j].real)
    if abs(v[0]) > tol:
        v = v * (abs(v[0]) / v[0])
    if np.max(np.abs(R - p.m * np.outer(v, v.conj()))) > tol * max(1.0, float(np.max(np.abs(R)))):
        raise NotRankOne("n H - m H^2 is not of rank one")
    if np.max(np.abs(np.abs(v) - p.alpha)) > tol:
        raise BadModulus(f"recovered column has moduli {np.abs(v)}, expected {p.alpha}")
    G = np.empty((p.n, p.n), dtype=complex)
    G[:size, :size] = H
    G[:size, size] = v
    G[size, :size] = v.conj()
    G[size, size] = 1
    return G


def _check_subgram_size(H, p: FrameParams, r: int) -> np.ndarray:
    H = as_matrix(H)
    if not 2 <= r <= p.n - 2 or H.shape != (p.n - r, p.n - r):
        raise BadSize(f"need a {p.n - r}x{p.n - r} block with 2 <= r <= n-2, got {H.shape}, r={r}")
    return H


def subgram_rank_test(H, p: FrameParams, r: int, tol: float = RANK_TOL) -> bool:
    """rank(m H^2 - n H) <= r."""
    H = _check_subgram_size(H, p, r)
    return numerical_rank(p.m * (H @ H) - p.n * H, tol) <= r


def subgram_analytic_test(H, p: FrameParams, r: int, tol: float = DEFAULT_TOL) -> bool:
    """|n/m h_ij - sum_k h_ik conj(h_jk)| <= r alpha^2 for every i < j."""
    H = _check_subgram_size(H, p, r)
    S = (p.n / p.m) * H - H @ H.conj().T
    iu = np.triu_indices(H.shape[0], 1)
    return bool(np.all(np.abs(S[iu]) <= r * p.alpha**2 + tol))


def haagerup_identity(x1, x2, y1, y2, z1, z2, tol: float = 1e-12):
    """Both sides of Haagerup's identity for six unimodular numbers.

    Returns ``(lhs, rhs)``: the triple product (complex) and the real
    expression ``|a|^2 + |b|^2 + |c|^2 - 4``.
    """
    values = [complex(v) for v in (x1, x2, y1, y2, z1, z2)]
    if any(abs(abs(v) - 1) > tol for v in values):
        raise NotUnimodular(f"inputs must have modulus 1: {values}")
    x1, x2, y1, y2, z1, z2 = values
    a = x1 * y1.conjugate() + x2 * y2.conjugate()
    b = y1 * z1.conjugate() + y2 * z2.conjugate()
    c = z1 * x1.conjugate() + z2 * x2.conjugate()
    lhs = a * b * c
    rhs = abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2 - 4
    return lhs, rhs


@dataclass(frozen=True)
class TripleResiduals:
    i: int
    j: int
    k: int
    sigma: complex
    delta: complex
    psi: complex
    lhs_residual: float


def haagerup_triple_test(H, p: FrameParams) -> list[TripleResiduals]:
    """Residuals of the triple condition for every i < j < k of an (n-2) block.

    Use :func:`passes_triple_test` for the verdict.
    """
    H = as_matrix(H)
    if H.shape != (p.n - 2, p.n - 2):
        raise BadSize(f"expected {p.n - 2}x{p.n - 2}, got {H.shape}")
    S = (p.n / p.m) * H - H @ H.conj().T
    a2 = p.alpha**2
    out = []
    for i, j, k in combinations(range(H.shape[0]), 3):
        sigma, delta, psi = S[i, j], S[j, k], S[k, i]
        lhs = sigma * delta * psi - a2 * (abs(sigma) ** 2 + abs(delta) ** 2 + abs(psi) ** 2 - 4 * a2**2)
        out.append(TripleResiduals(i, j, k, complex(sigma), complex(delta), complex(psi), float(abs(lhs))))
    return out


def passes_triple_test(H, p: FrameParams, tol: float = 1e-9) -> bool:
    return all(t.lhs_residual <= tol for t in haagerup_triple_test(H, p))


def dephase(G, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``D G D*`` with the first row and column made positive real."""
    G = as_matrix(G)
    first = G[0, 1:]
    if np.any(np.abs(first) <= tol):
        raise ZeroFirstRowEntry("first row has a zero off-diagonal entry")
    d = np.concatenate([[1.0 + 0j], first / np.abs(first)])
    out = d[:, None] * G * d.conj()[None, :]
    out[0, 1:] = np.abs(first)
    out[1:, 0] = np.abs(first)
    return out


def _bfs_order(B, tol):
    n = B.shape[0]
    seen, order = set(), []
    for root in range(n):
        if root in seen:
            continue
        seen.add(root)
        queue = [root]
        while queue:
            v = queue.pop(0)
            order.append(v)
            for w in range(n):
                if w not in seen and abs(B[v, w]) > tol:
                    seen.add(w)
                    queue.append(w)
    return order


def find_equivalence(G1, G2, tol: float = RANK_TOL):
    """Search for ``(perm, phases)`` with ``G2[i, j] = d_i conj(d_j) G1[perm[i], perm[j]]``.

    Returns ``None`` when the matrices are not equivalent.
    """
    A, B = as_matrix(G1), as_matrix(G2)
    if A.shape != B.shape or A.shape[0] != A.shape[1]:
        raise SizeMismatch(f"{A.shape} vs {B.shape}")
    n = A.shape[0]
    if n > 10:
        raise TooLarge("equivalence search is limited to n <= 10")
    absA, absB = np.abs(A), np.abs(B)
    # rows can only be matched when their modulus multisets agree
    sigA = [np.sort(absA[i]) for i in range(n)]
    sigB = [np.sort(absB[i]) for i in range(n)]
    compatible = [
        [c for c in range(n) if abs(A[c, c] - B[i, i]) <= tol and np.max(np.abs(sigA[c] - sigB[i])) <= tol]
        for i in range(n)
    ]
    order = _bfs_order(B, tol)
    perm = [-1] * n
    phase = [0j] * n
    used = [False] * n
    placed: list[int] = []

    def extend(depth: int) -> bool:
        if depth == n:
            return True
        pos = order[depth]
        for c in compatible[pos]:
            if used[c]:
                continue
            d = 1 + 0j
            for q in placed:
                if absB[pos, q] > tol:
                    a = A[c, perm[q]]
                    if abs(a) <= tol:
                        break
                    d = B[pos, q] * phase[q] / a
                    d /= abs(d)
                    break
            ok = True
            for q in placed:
                if abs(B[pos, q] - d * phase[q].conjugate() * A[c, perm[q]]) > tol:
                    ok = False
                    break
            if not ok:
                continue
            perm[pos], phase[pos], used[c] = c, d, True
            placed.append(pos)
            if extend(depth + 1):
                return True
            placed.pop()
            used[c] = False
        return False

    if extend(0):
        return perm, np.array(phase)
    return None


def equivalent(G1, G2, tol: float = RANK_TOL) -> bool:
    """Whether ``G2 = P D G1 D* P^T`` for a permutation P and unitary diagonal D."""
    return find_equivalence(G1, G2, tol) is not None
