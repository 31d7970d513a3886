"""Synthetic benchmark spectra and guess generation.

Two standing fixtures mirror qualitatively different recovery regimes:

* weak correlation: four dominant lines carrying almost all the weight plus a
  thin background, so each line stands far above the residual floor;
* strong correlation: four dominant lines carrying about half the weight with
  a dense 200-line background absorbing the rest, so line weights are closer
  to the background and to the noise.

The physical-unit convention used by the reporting layer: dt = 2*pi atomic
units maps the dimensionless band [0, 1) onto [0, 1) Hartree, so a frequency
error equals an energy error in Hartree and chemical accuracy (1.6 mHa)
corresponds to 1.6e-3 in omega.
"""

from __future__ import annotations

import numpy as np

from .model import SparseSpectrum

#: Time step making omega numerically equal to energy in Hartree.
HARTREE_DT = 2 * np.pi

#: Chemical accuracy (1.6 mHa) in band units under HARTREE_DT.
CHEMICAL_ACCURACY_OMEGA = 1.6e-3

_GOLDEN = 0.6180339887498949


def _low_discrepancy(count: int, start: float, keep_away, margin: float) -> list:
    """Deterministic quasi-uniform points in [0, 1) avoiding given locations."""
    out = []
    x = start
    while len(out) < count:
        x = (x + _GOLDEN) % 1.0
        if all(min(abs(x - a), 1 - abs(x - a)) >= margin for a in keep_away):
            out.append(round(x, 10))
    return out


WEAK_DOMINANT = (0.1137, 0.2417, 0.3861, 0.5523)
STRONG_DOMINANT = (0.1278, 0.3091, 0.4904, 0.6717)


def weak_correlation(n_background: int = 20, background_weight: float = 0.04) -> SparseSpectrum:
    """Four dominant lines at weight 0.24 each plus a 4% background."""
    dom_w = 0.24
    bg = _low_discrepancy(n_background, 0.07, WEAK_DOMINANT, margin=0.02)
    omegas = list(WEAK_DOMINANT) + bg
    weights = [dom_w] * 4 + [background_weight / n_background] * n_background
    return SparseSpectrum.from_arrays(omegas, weights, label="weak-correlation")


def strong_correlation(n_background: int = 200, background_weight: float = 0.45) -> SparseSpectrum:
    """Four dominant lines at weight 0.13 each plus a dense 45% background;
    the background includes near-degenerate pairs with gaps near 1/N at desk
    scale."""
    dom_w = 0.13
    bg = _low_discrepancy(n_background - 2, 0.021, STRONG_DOMINANT, margin=0.008)
    # a deliberately tight pair, gap comparable to 1/N for N ~ 1000
    bg = bg + [round(bg[0] + 1.1e-3, 10), round(bg[1] + 1.3e-3, 10)]
    omegas = list(STRONG_DOMINANT) + bg
    weights = [dom_w] * 4 + [background_weight / n_background] * n_background
    return SparseSpectrum.from_arrays(omegas, weights, label="strong-correlation")


def perturbed_guess(truth: SparseSpectrum, s_top: int, rng: np.random.Generator,
                    lo: float = 0.005, hi: float = 0.05) -> SparseSpectrum:
    """Equal-weight guess at the s_top dominant frequencies of `truth`, each
    offset by a random amount with magnitude uniform in [lo, hi] (band units,
    random sign)."""
    dom = truth.dominant(s_top)
    offsets = rng.uniform(lo, hi, size=s_top) * rng.choice([-1.0, 1.0], size=s_top)
    omegas = (dom.omegas + offsets) % 1.0
    omegas = np.sort(omegas)
    # enforce strict ordering in the unlikely event of a collision after wrap
    for i in range(1, len(omegas)):
        if omegas[i] <= omegas[i - 1]:
            omegas[i] = omegas[i - 1] + 1e-9
    weights = np.full(s_top, 1.0 / s_top)
    return SparseSpectrum.from_arrays(omegas, weights, label="guess")


def exact_guess(truth: SparseSpectrum, s_top: int) -> SparseSpectrum:
    """Equal-weight guess at the exact dominant frequencies of `truth`."""
    dom = truth.dominant(s_top)
    return SparseSpectrum.from_arrays(
        dom.omegas, np.full(s_top, 1.0 / s_top), label="guess-exact"
    )
