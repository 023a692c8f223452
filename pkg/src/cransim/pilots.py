"""Gaussian training matrices and the noisy training-phase observation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PilotMatrix:
    """Real Gaussian training matrix; one column per radio head."""

    entries: np.ndarray  # (n_pilots, n_rrh)

    def __post_init__(self):
        if self.entries.ndim != 2:
            raise ValueError("pilot entries must be a 2-D matrix")

    @property
    def n_pilots(self) -> int:
        return int(self.entries.shape[0])

    @property
    def n_rrh(self) -> int:
        return int(self.entries.shape[1])


@dataclass(frozen=True)
class ReceivedSignal:
    """Observation during the training phase plus its per-entry noise power."""

    y: np.ndarray
    noise_var: float


def sample_pilot_matrix(n_pilots, n_rrh, rng) -> PilotMatrix:
    """i.i.d. standard-normal real training symbols, shape (n_pilots, n_rrh)."""
    n_pilots, n_rrh = int(n_pilots), int(n_rrh)
    if n_pilots < 1 or n_rrh < 1:
        raise ValueError("n_pilots and n_rrh must be >= 1")
    return PilotMatrix(rng.standard_normal((n_pilots, n_rrh)))


def synthesize(p, h, noise_var, rng) -> ReceivedSignal:
    """Form y = P h + w with circularly-symmetric complex Gaussian noise.

    ``noise_var`` is the per-entry variance of w, split equally between the
    real and imaginary parts. With noise_var = 0 no noise is drawn.
    """
    entries = pilot_entries(p)
    h = np.asarray(h)
    if h.shape != (entries.shape[1],):
        raise ValueError(
            f"channel vector length {h.shape} does not match "
            f"{entries.shape[1]} pilot columns"
        )
    if noise_var < 0:
        raise ValueError("noise_var must be nonnegative")
    y = entries @ h.astype(complex)
    if noise_var > 0:
        scale = np.sqrt(noise_var / 2.0)
        n = entries.shape[0]
        y = y + scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return ReceivedSignal(y, float(noise_var))


def pilot_entries(p) -> np.ndarray:
    """Accept a PilotMatrix or a bare 2-D array and return the matrix."""
    if isinstance(p, PilotMatrix):
        return p.entries
    arr = np.asarray(p)
    if arr.ndim != 2:
        raise ValueError("pilot matrix must be 2-D")
    return arr
