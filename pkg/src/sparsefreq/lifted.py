"""Structured-matrix primitives for the lifted low-rank variable: Toeplitz
construction/projection, Hankel construction, singular-value soft
thresholding, and rank-capped PSD projection.

Generator indexing: a length 2n-1 vector g holds the diagonals of an n x n
Toeplitz matrix, g[d] for d = -(n-1)..(n-1) stored at position d + n - 1,
and the induced matrix is T[j, k] = g[k - j].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla


@dataclass(frozen=True)
class ToeplitzGen:
    """Diagonal generator of a Toeplitz matrix (the u vector)."""

    gen: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gen, dtype=complex)
        object.__setattr__(self, "gen", g)
        if g.ndim != 1 or len(g) % 2 == 0:
            raise ValueError("generator must be a 1-d vector of odd length")

    @property
    def order(self) -> int:
        return (len(self.gen) + 1) // 2

    def __getitem__(self, d: int) -> complex:
        n = self.order
        if not -n < d < n:
            raise IndexError("diagonal offset out of range")
        return self.gen[d + n - 1]

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.allclose(self.gen, self.gen[::-1].conj(), atol=tol))

    def hermitianized(self) -> "ToeplitzGen":
        """Nearest Hermitian generator (Frobenius projection)."""
        return ToeplitzGen((self.gen + self.gen[::-1].conj()) / 2)


def toeplitz_from_gen(gen) -> np.ndarray:
    """Materialize the dense Toeplitz matrix T[j, k] = gen[k - j]."""
    g = gen.gen if isinstance(gen, ToeplitzGen) else np.asarray(gen, dtype=complex)
    if g.ndim != 1 or len(g) % 2 == 0:
        raise ValueError("generator must be a 1-d vector of odd length")
    n = (len(g) + 1) // 2
    col = g[n - 1::-1]   # g[0], g[-1], ..., g[-(n-1)]
    row = g[n - 1:]      # g[0], g[1], ..., g[n-1]
    return sla.toeplitz(col, row)


def toeplitz_project(M: np.ndarray, hermitian: bool = False) -> ToeplitzGen:
    """Average each diagonal of M: the Frobenius projection onto the Toeplitz
    subspace. With hermitian=True additionally projects onto Hermitian
    generators (g[-d] = conj(g[d]))."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("input must be square")
    n = M.shape[0]
    g = np.empty(2 * n - 1, dtype=complex)
    for d in range(-(n - 1), n):
        g[d + n - 1] = M.diagonal(d).mean()
    out = ToeplitzGen(g)
    return out.hermitianized() if hermitian else out


def toeplitz_frobenius_norm(gen, diff=None) -> float:
    """Frobenius norm of the induced Toeplitz matrix (or of the difference of
    two generators' matrices) without materializing it."""
    g = gen.gen if isinstance(gen, ToeplitzGen) else np.asarray(gen)
    if diff is not None:
        d = diff.gen if isinstance(diff, ToeplitzGen) else np.asarray(diff)
        g = g - d
    n = (len(g) + 1) // 2
    counts = n - np.abs(np.arange(-(n - 1), n))
    return float(np.sqrt(np.sum(counts * np.abs(g) ** 2)))


def hankel_from_signal(x) -> np.ndarray:
    """Near-square Hankel matrix W[j, k] = x[j + k] with p = ceil((L+1)/2) rows."""
    x = np.asarray(x, dtype=complex)
    if x.ndim != 1 or len(x) < 3:
        raise ValueError("signal too short for subspace method")
    L = len(x)
    p = (L + 2) // 2  # ceil((L+1)/2)
    return sla.hankel(x[:p], x[p - 1:])


def svd_soft_threshold(M: np.ndarray, tau: float, hermitian: bool = False):
    """Soft-threshold the singular values of M by tau.

    Returns (thresholded matrix, surviving rank). The surviving rank counts
    singular values strictly greater than tau. With hermitian=True the SVD is
    computed through an eigendecomposition (identical result, faster).
    """
    if tau < 0:
        raise ValueError("tau must be >= 0")
    M = np.asarray(M)
    if hermitian:
        lam, V = np.linalg.eigh(M)
        keep = np.abs(lam) > tau
        rank = int(keep.sum())
        shrunk = np.sign(lam[keep]) * (np.abs(lam[keep]) - tau)
        out = (V[:, keep] * shrunk) @ V[:, keep].conj().T
        return out.astype(M.dtype, copy=False), rank
    U, s, Vh = np.linalg.svd(M, full_matrices=False)
    keep = s > tau
    rank = int(keep.sum())
    out = (U[:, keep] * (s[keep] - tau)) @ Vh[keep, :]
    return out, rank


def assemble_lifted(t_scalar: float, x: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Bordered matrix Z = [[t, x^H], [x, T]] (scalar block first)."""
    x = np.asarray(x, dtype=complex)
    n = len(x)
    Z = np.empty((n + 1, n + 1), dtype=complex)
    Z[0, 0] = t_scalar
    Z[0, 1:] = x.conj()
    Z[1:, 0] = x
    Z[1:, 1:] = T
    return Z


def psd_truncate(Z: np.ndarray, rank_cap: int) -> np.ndarray:
    """Keep the rank_cap algebraically largest eigenvalues of a Hermitian Z,
    clamp kept negatives to zero, and reassemble. Output is Hermitian, PSD,
    with rank at most rank_cap."""
    Z = np.asarray(Z)
    n = Z.shape[0]
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise ValueError("input must be square")
    if not 1 <= rank_cap <= n:
        raise ValueError("rank cap out of range")
    scale = np.abs(Z).max()
    if scale > 0 and np.abs(Z - Z.conj().T).max() > 1e-8 * scale:
        raise ValueError("input is not Hermitian within tolerance")
    lam, V = np.linalg.eigh(Z)
    idx = np.argsort(lam)[::-1][:rank_cap]
    kept = np.clip(lam[idx], 0, None)
    return (V[:, idx] * kept) @ V[:, idx].conj().T
