"""Accelerated low-rank recovery of the full signal from few noisy samples.

The solver iterates on a lifted variable (T, x, t): momentum extrapolation of
all three blocks, a gradient step on the sampled entries of x, singular-value
soft thresholding of the Toeplitz block, a rank-capped PSD projection of the
bordered matrix [[t, x^H], [x, T]], and re-projection of the T block onto the
Toeplitz subspace. Iteration stops when the relative Frobenius change of the
T block falls below gamma.

The T block is stored by its Toeplitz generator; the PSD projection is
computed exactly in the (rank + 2)-dimensional range of the bordered matrix,
so the only full-size factorizations per step are one partial
eigendecomposition and one LDL inertia check of the N x N Toeplitz block.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .lifted import (
    ToeplitzGen,
    toeplitz_from_gen,
    toeplitz_frobenius_norm,
    toeplitz_project,
)
from .model import SampledSignal, SparseSpectrum, TimeGrid, synthesize


class SolverDivergedError(RuntimeError):
    """Raised when a solver block becomes non-finite."""

    def __init__(self, iteration: int):
        super().__init__(f"solver diverged at iteration {iteration}")
        self.iteration = iteration


@dataclass
class RecoveryConfig:
    """Solver knobs.

    step_first/step_rest: gradient step sizes for iteration 1 and the rest.
    tau: singular-value threshold. gamma: relative stopping tolerance on the
    T block. max_iters: iteration cap. record_trace: keep per-iteration
    (rel_change, data residual) for convergence plots.
    """

    step_first: float = 0.5
    step_rest: float = 0.01
    tau: float = 1e-3
    gamma: float = 1e-6
    max_iters: int = 1000
    record_trace: bool = False

    def __post_init__(self):
        if not (0 < self.step_first <= 1 and 0 < self.step_rest <= 1):
            raise ValueError("step sizes must lie in (0, 1]")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")

    def to_dict(self) -> dict:
        return {
            "step_first": self.step_first,
            "step_rest": self.step_rest,
            "tau": self.tau,
            "gamma": self.gamma,
            "max_iters": self.max_iters,
            "record_trace": self.record_trace,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RecoveryConfig":
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "RecoveryConfig":
        return cls.from_dict(json.loads(s))


@dataclass
class LiftedState:
    """The optimization triple: signal vector x, Toeplitz block (stored by
    generator), and the lifted scalar."""

    x: np.ndarray
    gen: ToeplitzGen
    t_scalar: float

    @property
    def size(self) -> int:
        return len(self.x)

    @property
    def T(self) -> np.ndarray:
        return toeplitz_from_gen(self.gen)

    def copy(self) -> "LiftedState":
        return LiftedState(self.x.copy(), ToeplitzGen(self.gen.gen.copy()), self.t_scalar)


@dataclass
class SolverState:
    current: LiftedState
    previous: LiftedState
    momentum: float = 1.0
    iter: int = 0
    last_rel_change: float = math.inf


@dataclass
class RecoveryResult:
    x_star: np.ndarray
    iterations_used: int
    converged: bool
    trace: list | None = None  # (iter, rel_change, data_residual)


def _state_from_x0(x0: np.ndarray) -> LiftedState:
    outer = np.outer(x0, x0.conj())
    gen = toeplitz_project(outer, hermitian=True)
    n = len(x0)
    t0 = float(gen[0].real)  # trace(T0)/N equals the main-diagonal value
    return LiftedState(x=x0, gen=gen, t_scalar=t0)


def init_default(samples: SampledSignal, grid: TimeGrid) -> LiftedState:
    """Data-driven start: x0 is the zero-filled embedding of the samples,
    T0 the Toeplitz projection of its outer product, t0 = trace(T0)/N."""
    if len(samples) == 0:
        raise ValueError("no samples")
    x0 = np.zeros(grid.size, dtype=complex)
    offset = grid.n_pos if grid.symmetric else 0
    x0[samples.sample_indices + offset] = samples.values
    return _state_from_x0(x0)


def init_pii(guess: SparseSpectrum, grid: TimeGrid, coefficients=None) -> LiftedState:
    """Warm start from approximate frequencies: x0 = sum_k c_k e^{-2i pi w_k n}.

    coefficients: None uses the equal-amplitude default 1/sqrt(s*);
    "weights" uses the guess weights as amplitudes; an array is used as-is.
    """
    if len(guess) == 0:
        raise ValueError("empty guess")
    s_star = len(guess)
    if coefficients is None:
        coeffs = np.full(s_star, 1 / math.sqrt(s_star))
    elif isinstance(coefficients, str) and coefficients == "weights":
        coeffs = guess.weights
    else:
        coeffs = np.asarray(coefficients, dtype=complex)
        if coeffs.shape != (s_star,):
            raise ValueError("coefficient count must match guess size")
    atoms = np.exp(-2j * np.pi * np.outer(grid.indices(), guess.omegas))
    return _state_from_x0(atoms @ coeffs)


def _count_eigs_below(H: np.ndarray, bound: float) -> int:
    """Exact count of eigenvalues of Hermitian H strictly below `bound`
    (Sylvester inertia of H - bound*I via an LDL factorization)."""
    n = H.shape[0]
    shifted = H - bound * np.eye(n)
    try:
        _, d, _ = sla.ldl(shifted, hermitian=True)
    except Exception:
        return -1  # factorization failed; caller must fall back
    count = 0
    i = 0
    while i < n:
        if i + 1 < n and abs(d[i + 1, i]) > 0:
            w = np.linalg.eigvalsh(d[i:i + 2, i:i + 2])
            count += int((w < 0).sum())
            i += 2
        else:
            if d[i, i].real < 0:
                count += 1
            i += 1
    return count


_DENSE_SHRINK_CUTOFF = 256


def _shrink_toeplitz(gen_bar: np.ndarray, tau: float):
    """Eigenpairs of the soft-thresholded Hermitian Toeplitz block.

    Returns (lam, U, surviving_rank) with T_shrunk = U diag(lam) U^H, where
    only singular values strictly above tau survive (shifted toward zero by
    tau, keeping their sign).
    """
    Tb = toeplitz_from_gen(gen_bar)
    n = Tb.shape[0]
    if n <= _DENSE_SHRINK_CUTOFF:
        lam, V = np.linalg.eigh(Tb)
        keep = np.abs(lam) > tau
        return lam[keep] - tau * np.sign(lam[keep]), V[:, keep], int(keep.sum())
    wpos, Upos = sla.eigh(Tb, subset_by_value=(tau, np.inf))
    n_neg = _count_eigs_below(Tb, -tau)
    if n_neg != 0:
        wneg, Uneg = sla.eigh(Tb, subset_by_value=(-np.inf, -tau))
        lam = np.concatenate([wpos - tau, wneg + tau])
        U = np.hstack([Upos, Uneg])
    else:
        lam = wpos - tau
        U = Upos
    return lam, U, len(lam)


def _psd_truncate_bordered(t_b: float, x_g: np.ndarray, lam: np.ndarray,
                           U: np.ndarray, rank_cap: int):
    """Top-`rank_cap` algebraic eigenpairs of Z = [[t_b, x^H], [x, U diag(lam) U^H]],
    negatives clamped to zero.

    The range of Z lies in span{e_0, [0; x], [0; U]}, so the decomposition is
    computed exactly in that (r + 2)-dimensional subspace.
    """
    n = len(x_g)
    r = len(lam)
    B = np.zeros((n + 1, r + 2), dtype=complex)
    B[0, 0] = 1.0
    B[1:, 1] = x_g
    B[1:, 2:] = U
    Q, _ = np.linalg.qr(B)
    q0 = Q[0, :]
    Qx = Q[1:, :]
    ZQ = np.empty_like(Q)
    ZQ[0, :] = t_b * q0 + x_g.conj() @ Qx
    ZQ[1:, :] = np.outer(x_g, q0)
    if r:
        ZQ[1:, :] += U @ (lam[:, None] * (U.conj().T @ Qx))
    Zs = Q.conj().T @ ZQ
    Zs = (Zs + Zs.conj().T) / 2
    w, V = np.linalg.eigh(Zs)
    idx = np.argsort(w)[::-1][:rank_cap]
    kept = np.clip(w[idx], 0, None)
    return kept, Q @ V[:, idx]


def _sample_mask(samples: SampledSignal, n_total: int) -> np.ndarray:
    offset = samples.grid.n_pos if samples.grid.symmetric else 0
    mask = np.zeros(n_total, dtype=bool)
    mask[samples.sample_indices + offset] = True
    return mask


def ivdst_step(state: SolverState, samples: SampledSignal,
               config: RecoveryConfig) -> SolverState:
    """One full iteration; see the module docstring for the step sequence."""
    cur, prev = state.current, state.previous
    n = cur.size
    if samples.grid.size != n:
        raise ValueError("state dimensions do not match the sample grid")

    mom_new = (1 + math.sqrt(4 * state.momentum ** 2 + 1)) / 2
    beta = (state.momentum - 1) / mom_new

    x_bar = cur.x + beta * (cur.x - prev.x)
    gen_bar = cur.gen.gen + beta * (cur.gen.gen - prev.gen.gen)
    t_bar = cur.t_scalar + beta * (cur.t_scalar - prev.t_scalar)

    step = config.step_first if state.iter == 0 else config.step_rest
    mask = _sample_mask(samples, n)
    x_g = x_bar.copy()
    x_g[mask] -= step * (x_bar[mask] - samples.values)

    lam, U, rank = _shrink_toeplitz(gen_bar, config.tau)
    kept, Uk = _psd_truncate_bordered(t_bar, x_g, lam, U, rank + 1)

    x_new = Uk[1:, :] @ (kept * Uk[0, :].conj())
    t_new = float(np.real(np.sum(kept * np.abs(Uk[0, :]) ** 2)))
    block = (Uk[1:, :] * kept) @ Uk[1:, :].conj().T
    gen_new = toeplitz_project(block, hermitian=True)

    if not (np.all(np.isfinite(x_new)) and np.all(np.isfinite(gen_new.gen))
            and math.isfinite(t_new)):
        raise SolverDivergedError(state.iter + 1)

    denom = toeplitz_frobenius_norm(cur.gen)
    change = toeplitz_frobenius_norm(gen_new, diff=cur.gen)
    rel = change / denom if denom > 0 else change

    return SolverState(
        current=LiftedState(x_new, gen_new, t_new),
        previous=cur,
        momentum=mom_new,
        iter=state.iter + 1,
        last_rel_change=rel,
    )


def recover(samples: SampledSignal, init: LiftedState,
            config: RecoveryConfig) -> RecoveryResult:
    """Iterate until the T-block relative change drops below gamma or the
    iteration cap is hit. Samples must live on the symmetric grid."""
    if not samples.grid.symmetric:
        raise ValueError("samples must be Hermitian-extended onto the symmetric grid")
    if init.size != samples.grid.size:
        raise ValueError("init state does not match the sample grid")
    state = SolverState(current=init, previous=init.copy())
    mask = _sample_mask(samples, init.size)
    trace = [] if config.record_trace else None
    converged = False
    for _ in range(config.max_iters):
        state = ivdst_step(state, samples, config)
        if trace is not None:
            residual = float(np.linalg.norm(state.current.x[mask] - samples.values))
            trace.append((state.iter, state.last_rel_change, residual))
        if state.last_rel_change <= config.gamma:
            converged = True
            break
    return RecoveryResult(
        x_star=state.current.x,
        iterations_used=state.iter,
        converged=converged,
        trace=trace,
    )


def save_trace_csv(trace, path, header_comment: str | None = None) -> None:
    """Write a recovery trace as CSV (iter, rel_change, residual)."""
    with open(path, "w") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write("iter,rel_change,residual\n")
        for it, rel, res in trace:
            fh.write(f"{it},{rel!r},{res!r}\n")
