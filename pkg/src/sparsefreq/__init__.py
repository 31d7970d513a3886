"""Recovery of multiple dominant frequencies of a sparse exponential signal
from few shot-noise-corrupted samples, with an experiment harness for scaling
studies."""

from .model import (
    BudgetReport,
    SampledSignal,
    SparseSpectrum,
    TimeGrid,
    draw_sample_set,
    extend_hermitian,
    gaussian_sample,
    hadamard_sample,
    load_signal_csv,
    load_spectrum,
    measure,
    required_samples,
    required_shots,
    runtime_metric,
    sample_values,
    save_signal_csv,
    save_spectrum,
    synthesize,
)
from .lifted import (
    ToeplitzGen,
    assemble_lifted,
    hankel_from_signal,
    psd_truncate,
    svd_soft_threshold,
    toeplitz_from_gen,
    toeplitz_project,
)
from .solver import (
    LiftedState,
    RecoveryConfig,
    RecoveryResult,
    SolverDivergedError,
    SolverState,
    init_default,
    init_pii,
    ivdst_step,
    recover,
)
from .music import (
    DetectabilityReport,
    ImagingResult,
    SubspaceSplit,
    detect_frequencies,
    detectability_report,
    fft_baseline,
    imaging_function,
    subspace_split,
)
from .harness import (
    BinnedSeries,
    InitComparison,
    PowerLawFit,
    SweepResult,
    TrialResult,
    TrialSpec,
    bin_series,
    compare_fft,
    compare_init,
    config_hash,
    derive_rng,
    fit_power_law,
    match_frequencies,
    overlap_study,
    rebin,
    run_trial,
    sweep_scaling,
    wrapped_distance,
)
from . import fixtures

__version__ = "0.1.0"
