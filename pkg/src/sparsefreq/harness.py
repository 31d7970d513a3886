"""End-to-end trial pipeline and the scaling/comparison studies.

A trial: compute the sample/shot budget, draw the random sample set, measure
with shot noise, Hermitian-extend, recover the full signal, estimate
frequencies with the subspace method, and score against the dominant truth.
Sweeps repeat trials across signal lengths with derived seeds, bin the chosen
cost axis and fit a power law to the binned means.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model import (
    BudgetReport,
    SampledSignal,
    SparseSpectrum,
    TimeGrid,
    draw_sample_set,
    extend_hermitian,
    measure,
    required_samples,
    required_shots,
    runtime_metric,
)
from .music import detect_frequencies, fft_baseline
from .solver import RecoveryConfig, init_default, init_pii, recover

INIT_KINDS = ("default", "pii")


def derive_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent stream for one trial, a deterministic hash of
    (master_seed, trial_index)."""
    return np.random.default_rng([master_seed, trial_index])


def config_hash(obj) -> str:
    """Short stable hash of a JSON-serializable configuration."""
    blob = json.dumps(obj, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def wrapped_distance(a, b):
    """Distance on the frequency circle [0, 1)."""
    d = np.abs(np.asarray(a) - np.asarray(b)) % 1.0
    return np.minimum(d, 1.0 - d)


def match_frequencies(estimated, truth):
    """Assign estimates to true frequencies minimizing total wrapped distance.

    Returns (pairs, errors): pairs is a list of (est_index, truth_index) of
    length min(len(estimated), len(truth)).
    """
    est = np.asarray(estimated, dtype=float)
    tru = np.asarray(truth, dtype=float)
    if est.size == 0 or tru.size == 0:
        return [], np.array([])
    cost = wrapped_distance(est[:, None], tru[None, :])
    rows, cols = linear_sum_assignment(cost)
    return list(zip(rows.tolist(), cols.tolist())), cost[rows, cols]


@dataclass
class TrialSpec:
    """Everything needed to run one reproducible trial."""

    spectrum: SparseSpectrum
    n_pos: int
    s_model: int
    seed: int
    dt: float = 1.0
    guess: SparseSpectrum | None = None
    s_budget: int | None = None          # defaults to s_model
    noise_kind: str = "bernoulli"
    init_kind: str = "default"
    config: RecoveryConfig = field(default_factory=RecoveryConfig)
    force_zero: bool = True
    oversample: int = 100
    zero_pad_factor: int = 8
    pii_coefficients: object = None      # None = equal 1/sqrt(s*)

    def __post_init__(self):
        if self.s_model < 1:
            raise ValueError("s_model must be >= 1")
        if self.init_kind not in INIT_KINDS:
            raise ValueError(f"unknown init kind {self.init_kind!r}")
        if self.init_kind == "pii" and self.guess is None:
            raise ValueError("pii init requires a guess spectrum")

    @property
    def n_total(self) -> int:
        return 2 * self.n_pos + 1

    def to_dict(self) -> dict:
        return {
            "spectrum": self.spectrum.to_dict(),
            "guess": self.guess.to_dict() if self.guess is not None else None,
            "n_pos": self.n_pos,
            "dt": self.dt,
            "s_model": self.s_model,
            "s_budget": self.s_budget,
            "noise_kind": self.noise_kind,
            "init_kind": self.init_kind,
            "seed": self.seed,
            "config": self.config.to_dict(),
            "force_zero": self.force_zero,
            "oversample": self.oversample,
            "zero_pad_factor": self.zero_pad_factor,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrialSpec":
        return cls(
            spectrum=SparseSpectrum.from_dict(d["spectrum"]),
            guess=SparseSpectrum.from_dict(d["guess"]) if d.get("guess") else None,
            n_pos=d["n_pos"],
            dt=d.get("dt", 1.0),
            s_model=d["s_model"],
            s_budget=d.get("s_budget"),
            noise_kind=d.get("noise_kind", "bernoulli"),
            init_kind=d.get("init_kind", "default"),
            seed=d["seed"],
            config=RecoveryConfig.from_dict(d.get("config", {})),
            force_zero=d.get("force_zero", True),
            oversample=d.get("oversample", 100),
            zero_pad_factor=d.get("zero_pad_factor", 8),
        )


@dataclass
class TrialResult:
    estimated: np.ndarray
    abs_errors: np.ndarray
    runtime_metric: float
    t_max: float
    compression: float
    iterations: int
    converged: bool
    under_resolved: bool = False
    budget: BudgetReport | None = None
    trace: list | None = None
    x_star: np.ndarray | None = None

    @property
    def mean_error(self) -> float:
        return float(np.mean(self.abs_errors)) if self.abs_errors.size else math.nan

    @property
    def max_error(self) -> float:
        return float(np.max(self.abs_errors)) if self.abs_errors.size else math.nan

    def to_dict(self) -> dict:
        return {
            "estimated": list(map(float, self.estimated)),
            "abs_errors": list(map(float, self.abs_errors)),
            "runtime_metric": self.runtime_metric,
            "t_max": self.t_max,
            "compression": self.compression,
            "iterations": self.iterations,
            "converged": self.converged,
            "under_resolved": self.under_resolved,
            "n_samples": self.budget.n_samples if self.budget else None,
            "shots_per_sample": self.budget.shots_per_sample if self.budget else None,
        }


def acquire(spec: TrialSpec, rng: np.random.Generator) -> tuple[SampledSignal, BudgetReport]:
    """Budget, sample-set draw and noisy measurement on the positive axis."""
    s_budget = spec.s_budget if spec.s_budget is not None else spec.s_model
    m = required_samples(s_budget, spec.n_total)
    m = min(m, spec.n_pos + 1)
    shots = required_shots(s_budget, spec.n_total)
    grid_pos = TimeGrid(n_pos=spec.n_pos, dt=spec.dt, symmetric=False)
    idx = draw_sample_set(spec.n_pos, m, rng, force_zero=spec.force_zero)
    samples = measure(spec.spectrum, grid_pos, idx, shots, spec.noise_kind, rng)
    budget = BudgetReport.from_samples(idx, shots, spec.dt, spec.n_total)
    return samples, budget


def run_trial(spec: TrialSpec, keep_signal: bool = False) -> TrialResult:
    """Full pipeline for one seeded trial."""
    rng = np.random.default_rng(spec.seed)
    samples, budget = acquire(spec, rng)
    extended = extend_hermitian(samples)
    grid_sym = extended.grid
    if spec.init_kind == "pii":
        init = init_pii(spec.guess, grid_sym, coefficients=spec.pii_coefficients)
    else:
        init = init_default(extended, grid_sym)
    result = recover(extended, init, spec.config)

    imaging = detect_frequencies(result.x_star, spec.s_model, oversample=spec.oversample)
    truth = spec.spectrum.dominant(spec.s_model).omegas
    _, errors = match_frequencies(imaging.frequencies, truth)

    t_max = float(np.max(np.abs(samples.sample_indices)) * spec.dt)
    return TrialResult(
        estimated=imaging.frequencies,
        abs_errors=errors,
        runtime_metric=budget.total_runtime,
        t_max=t_max,
        compression=budget.compression_factor,
        iterations=result.iterations_used,
        converged=result.converged,
        under_resolved=imaging.under_resolved,
        budget=budget,
        trace=result.trace,
        x_star=result.x_star if keep_signal else None,
    )


@dataclass
class BinnedSeries:
    bin_centers: np.ndarray
    means: np.ndarray
    stds: np.ndarray
    counts: np.ndarray


def bin_series(xs, ys, n_bins: int = 20) -> BinnedSeries:
    """Linear binning of the x axis; empty bins are dropped."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size == 0:
        raise ValueError("nothing to bin")
    lo, hi = xs.min(), xs.max()
    if hi == lo:
        return BinnedSeries(
            bin_centers=np.array([lo]),
            means=np.array([ys.mean()]),
            stds=np.array([ys.std()]),
            counts=np.array([len(ys)]),
        )
    edges = np.linspace(lo, hi, n_bins + 1)
    which = np.clip(np.digitize(xs, edges) - 1, 0, n_bins - 1)
    centers, means, stds, counts = [], [], [], []
    for b in range(n_bins):
        sel = which == b
        if not np.any(sel):
            continue
        centers.append(0.5 * (edges[b] + edges[b + 1]))
        means.append(ys[sel].mean())
        stds.append(ys[sel].std())
        counts.append(int(sel.sum()))
    return BinnedSeries(
        bin_centers=np.array(centers),
        means=np.array(means),
        stds=np.array(stds),
        counts=np.array(counts),
    )


@dataclass
class PowerLawFit:
    a: float
    b: float
    r2: float


def fit_power_law(xs, ys) -> PowerLawFit:
    """Least-squares fit of y = a * x^(-b) on log-log axes."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 3:
        raise ValueError("need at least 3 points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("power-law fit requires positive values")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(a=float(np.exp(intercept)), b=float(-slope), r2=r2)


@dataclass
class SweepResult:
    raw: list                      # dict per trial
    binned: BinnedSeries
    x_axis: str

    def xy(self):
        xs = np.array([r["x"] for r in self.raw])
        ys = np.array([r["mean_error"] for r in self.raw])
        return xs, ys


def sweep_scaling(base: TrialSpec, n_pos_list, repeats: int = 5,
                  x_axis: str = "runtime", n_bins: int = 20,
                  max_iters_for=None, progress=None) -> SweepResult:
    """Repeat trials across signal lengths with derived per-trial seeds.

    x_axis selects the binned cost coordinate: "runtime" or "t_max". The
    optional max_iters_for(n_pos) hook adjusts the iteration cap per length.
    """
    if x_axis not in ("runtime", "t_max"):
        raise ValueError("x_axis must be 'runtime' or 't_max'")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    raw = []
    trial_index = 0
    for n_pos in n_pos_list:
        for _ in range(repeats):
            cfg = base.config
            if max_iters_for is not None:
                cfg = replace(cfg, max_iters=int(max_iters_for(n_pos)))
            seed = int(derive_rng(base.seed, trial_index).integers(2 ** 63))
            spec = replace(base, n_pos=n_pos, seed=seed, config=cfg)
            res = run_trial(spec)
            raw.append({
                "n_pos": n_pos,
                "trial_index": trial_index,
                "seed": seed,
                "x": res.runtime_metric if x_axis == "runtime" else res.t_max,
                "runtime": res.runtime_metric,
                "t_max": res.t_max,
                "mean_error": res.mean_error,
                "max_error": res.max_error,
                "compression": res.compression,
                "iterations": res.iterations,
                "under_resolved": res.under_resolved,
            })
            if progress is not None:
                progress(raw[-1])
            trial_index += 1
    xs = np.array([r["x"] for r in raw])
    ys = np.array([r["mean_error"] for r in raw])
    return SweepResult(raw=raw, binned=bin_series(xs, ys, n_bins), x_axis=x_axis)


def rebin(sweep: SweepResult, x_axis: str, n_bins: int = 20) -> BinnedSeries:
    """Bin an existing sweep along the other cost axis without re-running."""
    if x_axis not in ("runtime", "t_max"):
        raise ValueError("x_axis must be 'runtime' or 't_max'")
    xs = np.array([r[x_axis] for r in sweep.raw])
    ys = np.array([r["mean_error"] for r in sweep.raw])
    return bin_series(xs, ys, n_bins)


@dataclass
class InitComparison:
    pii: TrialResult
    default: TrialResult


def compare_init(spec: TrialSpec) -> InitComparison:
    """The identical trial (same seed, sample set and noise) run with the
    warm start versus the data-driven start."""
    if spec.guess is None:
        raise ValueError("compare_init requires a guess spectrum")
    cfg = replace(spec.config, record_trace=True)
    res_pii = run_trial(replace(spec, init_kind="pii", config=cfg))
    res_def = run_trial(replace(spec, init_kind="default", config=cfg))
    return InitComparison(pii=res_pii, default=res_def)


def compare_fft(spec: TrialSpec) -> list:
    """Per-frequency error table, subspace estimator vs zero-padded FFT
    peak-picking, both fed the same recovered signal."""
    res = run_trial(spec, keep_signal=True)
    truth = spec.spectrum.dominant(spec.s_model).omegas
    music_pairs, music_errors = match_frequencies(res.estimated, truth)
    fft_est = fft_baseline(res.x_star, spec.s_model, spec.zero_pad_factor)
    fft_pairs, fft_errors = match_frequencies(fft_est, truth)
    music_by_truth = {t: (res.estimated[e], err)
                      for (e, t), err in zip(music_pairs, music_errors)}
    fft_by_truth = {t: (fft_est[e], err)
                    for (e, t), err in zip(fft_pairs, fft_errors)}
    rows = []
    for i, omega in enumerate(truth):
        m_est, m_err = music_by_truth.get(i, (math.nan, math.nan))
        f_est, f_err = fft_by_truth.get(i, (math.nan, math.nan))
        rows.append({
            "truth": float(omega),
            "music": float(m_est), "music_error": float(m_err),
            "fft": float(f_est), "fft_error": float(f_err),
        })
    return rows


def overlap_study(spec: TrialSpec, background_weights, background_freqs=None,
                  n_background: int = 30, negligible_weight: float = 1e-3) -> list:
    """Degrade the target line by spreading weight over background lines.

    For each background weight w the target component keeps weight (1 - w),
    w is spread uniformly over the background set, the shot budget is
    recomputed for the enlarged effective sparsity, and the trial is re-run.
    Returns one row per w with the target-frequency error.
    """
    target = spec.spectrum.dominant(1)
    target_omega = float(target.omegas[0])
    if background_freqs is None:
        from .fixtures import _low_discrepancy
        background_freqs = _low_discrepancy(
            n_background, 0.13, [target_omega], margin=0.03
        )
    background_freqs = sorted(background_freqs)
    rows = []
    for w in background_weights:
        if not 0 <= w < 1:
            raise ValueError("background weight must lie in [0, 1)")
        if w == 0:
            spectrum = SparseSpectrum.from_arrays([target_omega], [1.0])
        else:
            omegas = [target_omega] + list(background_freqs)
            weights = [1.0 - w] + [w / len(background_freqs)] * len(background_freqs)
            spectrum = SparseSpectrum.from_arrays(omegas, weights)
        s_eff = spectrum.effective_sparsity(negligible_weight)
        guess = spec.guess
        sub = replace(spec, spectrum=spectrum, s_budget=s_eff, guess=guess)
        res = run_trial(sub)
        _, err = match_frequencies(res.estimated, [target_omega])
        rows.append({
            "background_weight": float(w),
            "target_weight": float(1.0 - w),
            "effective_s": s_eff,
            "shots_per_sample": res.budget.shots_per_sample,
            "n_samples": res.budget.n_samples,
            "target_error": float(err[0]) if err.size else math.nan,
            "runtime_metric": res.runtime_metric,
        })
    return rows
