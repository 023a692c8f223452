"""Fading models, power-law channel gains, and support selection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Deployment, distances

FADING_KINDS = ("rayleigh-unit", "lognormal", "deterministic-unit")

# amplitude = 10**(X_dB / 20), so ln-amplitude spread = sigma_db * ln(10)/20
_LN10_OVER_20 = math.log(10.0) / 20.0


class SingularGeometryError(RuntimeError):
    """A radio head coincides with the user; the path gain is unbounded."""


@dataclass(frozen=True)
class FadingModel:
    """Zero-mean fading coefficient distribution, normalized to E|c|^2 = 1.

    Kinds:
      * ``rayleigh-unit``: circularly-symmetric complex Gaussian, unit variance.
      * ``lognormal``: log-normal amplitude with the given dB spread,
        rescaled to unit mean-square amplitude, uniform phase.
      * ``deterministic-unit``: unit amplitude, uniform phase.
    """

    kind: str
    sigma_db: float = 0.0

    def __post_init__(self):
        if self.kind not in FADING_KINDS:
            raise ValueError(f"unknown fading kind {self.kind!r}")
        if self.sigma_db < 0:
            raise ValueError("sigma_db must be nonnegative")

    @classmethod
    def rayleigh(cls) -> "FadingModel":
        return cls("rayleigh-unit")

    @classmethod
    def lognormal(cls, sigma_db: float) -> "FadingModel":
        return cls("lognormal", float(sigma_db))

    @classmethod
    def deterministic(cls) -> "FadingModel":
        return cls("deterministic-unit")

    def sample(self, n: int, rng) -> np.ndarray:
        """Draw ``n`` i.i.d. complex fading coefficients."""
        if self.kind == "rayleigh-unit":
            return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
        phase = np.exp(2j * np.pi * rng.uniform(size=n))
        if self.kind == "deterministic-unit":
            return phase
        sig = _LN10_OVER_20 * self.sigma_db
        # amplitude exp(sig*Z - sig^2) has unit mean square
        return np.exp(sig * rng.standard_normal(n) - sig * sig) * phase

    def sample_power(self, n: int, rng) -> np.ndarray:
        """Draw ``n`` i.i.d. squared amplitudes |c|^2 (phase never drawn)."""
        if self.kind == "rayleigh-unit":
            return rng.exponential(1.0, size=n)
        if self.kind == "deterministic-unit":
            return np.ones(n)
        sig = _LN10_OVER_20 * self.sigma_db
        return np.exp(2.0 * (sig * rng.standard_normal(n) - sig * sig))

    def moment(self, alpha: float) -> float:
        return fading_moment(self, alpha)


def fading_moment(model: FadingModel, alpha: float) -> float:
    """Closed form of E|c|^(4/alpha) for the given fading model, alpha > 2.

    Rayleigh: |c|^2 is exponential(1), so the moment is Gamma(1 + 2/alpha).
    Lognormal (unit mean square): exp((4*sig^2/alpha) * (2/alpha - 1)) with
    sig the ln-amplitude spread. Deterministic: 1.
    """
    if not alpha > 2:
        raise ValueError(f"alpha must exceed 2, got {alpha}")
    if model.kind == "rayleigh-unit":
        return math.gamma(1.0 + 2.0 / alpha)
    if model.kind == "deterministic-unit":
        return 1.0
    sig2 = (_LN10_OVER_20 * model.sigma_db) ** 2
    return math.exp((4.0 * sig2 / alpha) * (2.0 / alpha - 1.0))


@dataclass(frozen=True)
class ChannelVector:
    """Complex channel gains with an optional support split."""

    gains: np.ndarray
    support: np.ndarray | None = None
    complement: np.ndarray | None = None

    @property
    def n(self) -> int:
        return int(self.gains.shape[0])

    def with_support(self, s: int) -> "ChannelVector":
        support, complement = select_support(self.gains, s)
        return ChannelVector(self.gains, support, complement)


def draw_channels(
    d: Deployment, model: FadingModel, alpha: float, rng, exclusion_radius: float = 0.0
) -> ChannelVector:
    """Synthesize gains c_i * dist_i^(-alpha/2) for every point of ``d``.

    Raises SingularGeometryError when a point lies within ``exclusion_radius``
    of the user (default 0: only an exact hit trips it); callers may resample.
    """
    if not alpha > 2:
        raise ValueError(f"alpha must exceed 2, got {alpha}")
    dist = distances(d)
    if np.any(dist <= exclusion_radius):
        raise SingularGeometryError(
            f"{int(np.sum(dist <= exclusion_radius))} point(s) within "
            f"exclusion radius {exclusion_radius} of the user"
        )
    coeffs = model.sample(d.n_points, rng)
    return ChannelVector(coeffs * dist ** (-alpha / 2.0))


def select_support(gains, s: int):
    """Indices of the s largest-modulus gains (ties to the lower index).

    Returns ``(support, complement)``, both sorted ascending.
    """
    g = np.asarray(gains)
    n = g.shape[0]
    if not 1 <= s <= n:
        raise ValueError(f"s must lie in [1, {n}], got {s}")
    order = np.argsort(-np.abs(g), kind="stable")
    return np.sort(order[:s]), np.sort(order[s:])


def residual_norm_sq(gains, complement) -> float:
    """Sum of squared moduli over the complement index set."""
    g = np.asarray(gains)
    idx = np.asarray(complement, dtype=int)
    if idx.size == 0:
        return 0.0
    if idx.min() < 0 or idx.max() >= g.shape[0]:
        raise ValueError("complement contains out-of-range indices")
    return float(np.sum(np.abs(g[idx]) ** 2))
