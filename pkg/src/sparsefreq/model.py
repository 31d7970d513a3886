"""Sparse spectra, exact autocorrelation synthesis, shot-noise emulation,
random sample sets, and measurement-budget formulas.

Conventions: frequencies are dimensionless, omega in [0, 1), and the signal
on an integer grid index n is  z(n) = sum_i w_i * exp(-2j*pi*omega_i*n).
Physical energies are obtained only at reporting time via E = 2*pi*omega/dt.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

NOISE_KINDS = ("exact", "bernoulli", "gaussian")


@dataclass(frozen=True)
class SparseSpectrum:
    """A list of (frequency, weight) pairs defining a sparse line spectrum.

    Weights are squared overlaps: nonnegative, summing to at most 1 (a
    complete spectrum of a normalized state sums to exactly 1).
    """

    components: tuple  # of (omega, weight) pairs
    label: str | None = None

    def __post_init__(self):
        comps = tuple((float(o), float(w)) for o, w in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ValueError("empty spectrum")
        omegas = np.array([c[0] for c in comps])
        weights = np.array([c[1] for c in comps])
        if np.any(weights < 0):
            raise ValueError("negative weight")
        if weights.sum() > 1 + 1e-12:
            raise ValueError(f"weights sum to {weights.sum():.6g} > 1")
        if np.any(omegas < 0) or np.any(omegas >= 1):
            raise ValueError("frequencies must lie in [0, 1)")
        if np.any(np.diff(omegas) <= 0):
            raise ValueError("frequencies must be strictly ascending and distinct")

    @property
    def omegas(self) -> np.ndarray:
        return np.array([c[0] for c in self.components])

    @property
    def weights(self) -> np.ndarray:
        return np.array([c[1] for c in self.components])

    def __len__(self) -> int:
        return len(self.components)

    @classmethod
    def from_arrays(cls, omegas, weights, label=None) -> "SparseSpectrum":
        order = np.argsort(np.asarray(omegas, dtype=float))
        comps = tuple(
            (float(np.asarray(omegas)[i]), float(np.asarray(weights)[i])) for i in order
        )
        return cls(comps, label=label)

    def dominant(self, k: int) -> "SparseSpectrum":
        """The k largest-weight components (ties broken by lower frequency)."""
        order = sorted(range(len(self)), key=lambda i: (-self.components[i][1], self.components[i][0]))
        keep = sorted(order[:k])
        return SparseSpectrum(tuple(self.components[i] for i in keep), label=self.label)

    def effective_sparsity(self, threshold: float = 1e-3) -> int:
        """Number of components with non-negligible weight."""
        return int(np.sum(self.weights >= threshold))

    def to_dict(self) -> dict:
        return {
            "components": [{"omega": o, "weight": w} for o, w in self.components],
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SparseSpectrum":
        comps = tuple((c["omega"], c["weight"]) for c in d["components"])
        return cls(comps, label=d.get("label"))


def save_spectrum(spectrum: SparseSpectrum, path) -> None:
    with open(path, "w") as fh:
        json.dump(spectrum.to_dict(), fh, indent=2)


def load_spectrum(path) -> SparseSpectrum:
    with open(path) as fh:
        return SparseSpectrum.from_dict(json.load(fh))


@dataclass(frozen=True)
class TimeGrid:
    """Integer time grid t_n = n*dt, either [0, T] or symmetric [-T, T]."""

    n_pos: int
    dt: float = 1.0
    symmetric: bool = False

    def __post_init__(self):
        if self.n_pos < 1:
            raise ValueError("n_pos must be positive")
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def size(self) -> int:
        return 2 * self.n_pos + 1 if self.symmetric else self.n_pos + 1

    def indices(self) -> np.ndarray:
        lo = -self.n_pos if self.symmetric else 0
        return np.arange(lo, self.n_pos + 1)

    def times(self) -> np.ndarray:
        return self.indices() * self.dt

    @property
    def t_tot(self) -> float:
        return self.n_pos * self.dt


@dataclass
class SampledSignal:
    """Noisy samples of an autocorrelation signal on a subset of grid points."""

    grid: TimeGrid
    sample_indices: np.ndarray  # sorted grid indices (may be negative on symmetric grids)
    values: np.ndarray          # complex, aligned with sample_indices
    shots_per_sample: int
    noise_kind: str = "exact"

    def __post_init__(self):
        self.sample_indices = np.asarray(self.sample_indices, dtype=int)
        self.values = np.asarray(self.values, dtype=complex)
        if self.sample_indices.shape != self.values.shape:
            raise ValueError("sample_indices and values must have equal length")
        if np.any(np.diff(self.sample_indices) <= 0):
            raise ValueError("sample_indices must be sorted and distinct")
        lo = -self.grid.n_pos if self.grid.symmetric else 0
        if self.sample_indices.min(initial=0) < lo or self.sample_indices.max(initial=0) > self.grid.n_pos:
            raise ValueError("sample index outside grid")
        if self.shots_per_sample < 1:
            raise ValueError("shots_per_sample must be >= 1")
        if self.noise_kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.noise_kind!r}")
        mods = np.abs(self.values)
        if self.noise_kind == "exact":
            if np.any(mods > 1 + 1e-12):
                raise ValueError("exact sample with modulus > 1")
        else:
            # Loose physical-plausibility bound; a rare large noise excursion
            # is possible, so this only warns.
            bound = 1 + 2 / math.sqrt(self.shots_per_sample)
            if np.any(mods > bound):
                warnings.warn(
                    f"sample modulus exceeds 1 + 2/sqrt(M) = {bound:.4f}",
                    stacklevel=2,
                )

    def __len__(self) -> int:
        return len(self.sample_indices)


def save_signal_csv(signal: SampledSignal, path, header_comment: str | None = None) -> None:
    """Write samples as CSV with columns (index, t, re, im)."""
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write(f"# n_pos={signal.grid.n_pos} dt={signal.grid.dt!r} "
                 f"symmetric={int(signal.grid.symmetric)} shots={signal.shots_per_sample} "
                 f"noise={signal.noise_kind}\n")
        writer = csv.writer(fh)
        writer.writerow(["index", "t", "re", "im"])
        for n, v in zip(signal.sample_indices, signal.values):
            writer.writerow([int(n), n * signal.grid.dt, v.real, v.imag])


def load_signal_csv(path) -> SampledSignal:
    meta = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    if "=" in tok:
                        k, v = tok.split("=", 1)
                        meta[k] = v
                continue
            rows.append(line)
    reader = csv.reader(rows)
    header = next(reader)
    if header[:4] != ["index", "t", "re", "im"]:
        raise ValueError("bad signal CSV header")
    idx, vals = [], []
    for row in reader:
        idx.append(int(row[0]))
        vals.append(float(row[2]) + 1j * float(row[3]))
    grid = TimeGrid(
        n_pos=int(meta["n_pos"]),
        dt=float(meta["dt"]),
        symmetric=bool(int(meta["symmetric"])),
    )
    return SampledSignal(
        grid=grid,
        sample_indices=np.array(idx),
        values=np.array(vals),
        shots_per_sample=int(meta.get("shots", 1)),
        noise_kind=meta.get("noise", "exact"),
    )


@dataclass(frozen=True)
class BudgetReport:
    """Measurement budget and cost of one acquisition."""

    n_samples: int
    shots_per_sample: int
    total_runtime: float
    compression_factor: float

    @classmethod
    def from_samples(cls, sample_indices, shots: int, dt: float, n_total: int) -> "BudgetReport":
        idx = np.asarray(sample_indices)
        return cls(
            n_samples=len(idx),
            shots_per_sample=shots,
            total_runtime=runtime_metric(idx, shots, dt),
            compression_factor=len(idx) / n_total,
        )


def synthesize(spectrum: SparseSpectrum, grid: TimeGrid, indices=None) -> np.ndarray:
    """Exact signal  z(n) = sum_i w_i exp(-2j*pi*omega_i*n)  on the grid.

    Warns if two spectrum lines sit closer than 1/(10*N) (wrapped), since the
    grid then cannot tell them apart.
    """
    if indices is None:
        indices = grid.indices()
    indices = np.asarray(indices)
    omegas = spectrum.omegas
    if len(omegas) > 1:
        gaps = np.diff(omegas)
        wrap_gap = 1.0 - (omegas[-1] - omegas[0])
        min_gap = min(gaps.min(), wrap_gap)
        if min_gap < 1.0 / (10 * grid.size):
            warnings.warn(
                f"two spectrum lines within {min_gap:.3g} < 1/(10N); "
                "they alias on this grid",
                stacklevel=2,
            )
    phases = np.exp(-2j * np.pi * np.outer(indices, omegas))
    return phases @ spectrum.weights


def hadamard_sample(z_exact: complex, shots: int, rng: np.random.Generator) -> complex:
    """Shot-noise estimate of z from two pools of M Bernoulli (+/-1) outcomes.

    Real and imaginary parts are estimated independently, each from `shots`
    outcomes with success probability (1 + part)/2; the estimator is unbiased
    with per-part variance (1 - part^2)/shots.
    """
    z = complex(z_exact)
    if abs(z) > 1 + 1e-9:
        raise ValueError("non-physical amplitude")
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p_re = np.clip((1 + z.real) / 2, 0.0, 1.0)
    p_im = np.clip((1 + z.imag) / 2, 0.0, 1.0)
    re = 2 * rng.binomial(shots, p_re) / shots - 1
    im = 2 * rng.binomial(shots, p_im) / shots - 1
    return complex(re, im)


def gaussian_sample(z_exact: complex, shots: int, rng: np.random.Generator) -> complex:
    """Gaussian surrogate: adds N(0, 1/shots) noise to each part."""
    z = complex(z_exact)
    if abs(z) > 1 + 1e-9:
        raise ValueError("non-physical amplitude")
    sigma = 1 / math.sqrt(shots)
    return z + complex(rng.normal(0, sigma), rng.normal(0, sigma))


def sample_values(z_exact: np.ndarray, shots: int, noise_kind: str,
                  rng: np.random.Generator) -> np.ndarray:
    """Vectorized noisy sampling of exact values (one rng draw order: all
    real parts, then all imaginary parts)."""
    z = np.asarray(z_exact, dtype=complex)
    if np.any(np.abs(z) > 1 + 1e-9):
        raise ValueError("non-physical amplitude")
    if noise_kind == "exact":
        return z.copy()
    if noise_kind == "bernoulli":
        p_re = np.clip((1 + z.real) / 2, 0.0, 1.0)
        p_im = np.clip((1 + z.imag) / 2, 0.0, 1.0)
        re = 2 * rng.binomial(shots, p_re) / shots - 1
        im = 2 * rng.binomial(shots, p_im) / shots - 1
        return re + 1j * im
    if noise_kind == "gaussian":
        sigma = 1 / math.sqrt(shots)
        return z + rng.normal(0, sigma, z.shape) + 1j * rng.normal(0, sigma, z.shape)
    raise ValueError(f"unknown noise kind {noise_kind!r}")


def measure(spectrum: SparseSpectrum, grid: TimeGrid, sample_indices,
            shots: int, noise_kind: str, rng: np.random.Generator) -> SampledSignal:
    """Synthesize the exact signal at the sampled indices and add shot noise."""
    idx = np.asarray(sample_indices, dtype=int)
    exact = synthesize(spectrum, grid, indices=idx)
    vals = sample_values(exact, shots, noise_kind, rng)
    return SampledSignal(grid=grid, sample_indices=idx, values=vals,
                         shots_per_sample=shots, noise_kind=noise_kind)


def draw_sample_set(n_pos: int, m: int, rng: np.random.Generator,
                    force_zero: bool = True) -> np.ndarray:
    """Draw m distinct indices uniformly from {0, ..., n_pos}.

    Index 0 is forced into the set by default: it carries the normalization
    and costs nothing under the runtime metric.
    """
    if m < 1:
        raise ValueError("need at least one sample")
    if m > n_pos + 1:
        raise ValueError("oversampled")
    if force_zero:
        rest = rng.choice(np.arange(1, n_pos + 1), size=m - 1, replace=False)
        out = np.concatenate([[0], rest])
    else:
        out = rng.choice(np.arange(0, n_pos + 1), size=m, replace=False)
    return np.sort(out)


def required_samples(s: int, n_total: int, delta: float | None = None,
                     C: float | None = None) -> int:
    """Number of random samples for an s-sparse length-N signal.

    With delta/C omitted uses the practical rule ceil(s*ln(s)*ln(N)) (the
    s=1 factor is floored at 1); otherwise evaluates the probabilistic bound
    C*max{ln^2(N/delta), s*ln(s/delta)*ln(N/delta)}.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    if n_total < 2:
        raise ValueError("N must be >= 2")
    if (delta is None) != (C is None):
        raise ValueError("delta and C must be supplied together")
    if delta is None:
        return math.ceil(max(s * math.log(s), 1.0) * math.log(n_total))
    if not 0 < delta < 1:
        raise ValueError("delta must be in (0, 1)")
    bound = C * max(
        math.log(n_total / delta) ** 2,
        s * math.log(s / delta) * math.log(n_total / delta),
    )
    return math.ceil(bound)


def required_shots(s: int, n_total: int) -> int:
    """Shots per sample: ceil(sqrt(s*ln(s) * N*ln(N))), s=1 factor floored at 1."""
    if s < 1:
        raise ValueError("s must be >= 1")
    if n_total < 2:
        raise ValueError("N must be >= 2")
    return math.ceil(math.sqrt(max(s * math.log(s), 1.0) * n_total * math.log(n_total)))


def extend_hermitian(samples: SampledSignal) -> SampledSignal:
    """Mirror positive-time samples onto [-T, T] using z(-n) = conj(z(n)).

    This is classical post-processing of the already-measured values; no new
    measurement is implied.
    """
    if samples.grid.symmetric:
        raise ValueError("already extended")
    pos = samples.sample_indices > 0
    idx = np.concatenate([-samples.sample_indices[pos][::-1], samples.sample_indices])
    vals = np.concatenate([np.conj(samples.values[pos][::-1]), samples.values])
    grid = TimeGrid(n_pos=samples.grid.n_pos, dt=samples.grid.dt, symmetric=True)
    return SampledSignal(grid=grid, sample_indices=idx, values=vals,
                         shots_per_sample=samples.shots_per_sample,
                         noise_kind=samples.noise_kind)


def runtime_metric(sample_indices, shots: int, dt: float) -> float:
    """Total acquisition cost M * sum |t_n| over the measured set."""
    idx = np.asarray(sample_indices)
    if idx.size == 0:
        raise ValueError("empty sample set")
    return float(shots * np.sum(np.abs(idx)) * dt)
