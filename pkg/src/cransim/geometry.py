"""Random planar deployments of radio heads and distances to the user."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Window:
    """Axis-aligned rectangle centered at the origin."""

    half_width: float
    half_height: float

    def __post_init__(self):
        if not (self.half_width > 0 and self.half_height > 0):
            raise ValueError("window half-extents must be positive")

    @property
    def area(self) -> float:
        return 4.0 * self.half_width * self.half_height

    def contains(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return (np.abs(pts[:, 0]) <= self.half_width) & (
            np.abs(pts[:, 1]) <= self.half_height
        )

    @classmethod
    def square(cls, area: float) -> "Window":
        if area <= 0:
            raise ValueError("area must be positive")
        half = 0.5 * float(np.sqrt(area))
        return cls(half, half)


@dataclass(frozen=True)
class Deployment:
    """Radio-head positions and the user position inside a window.

    ``density`` is exact for fixed-count sampling and holds in expectation
    for Poisson sampling.
    """

    points: np.ndarray  # (n, 2)
    ue: np.ndarray  # (2,)
    density: float
    window: Window

    @property
    def n_points(self) -> int:
        return int(self.points.shape[0])


def sample_uniform_deployment(n_rrh, density, rng, ue=None) -> Deployment:
    """Place exactly ``n_rrh`` i.i.d. uniform points on a square of area n_rrh/density.

    The user sits at the window center (the origin) unless ``ue`` overrides it.
    """
    n_rrh = int(n_rrh)
    if n_rrh < 1:
        raise ValueError(f"n_rrh must be >= 1, got {n_rrh}")
    if not density > 0:
        raise ValueError(f"density must be positive, got {density}")
    window = Window.square(n_rrh / density)
    points = _uniform_points(window, n_rrh, rng)
    return Deployment(points, _ue_or_origin(ue), float(density), window)


def sample_hppp(window: Window, density, rng, ue=None) -> Deployment:
    """Homogeneous Poisson point process restricted to ``window``.

    The point count is Poisson(density * area); positions are i.i.d. uniform.
    """
    if not density > 0:
        raise ValueError(f"density must be positive, got {density}")
    count = int(rng.poisson(density * window.area))
    points = _uniform_points(window, count, rng)
    return Deployment(points, _ue_or_origin(ue), float(density), window)


def distances(d: Deployment) -> np.ndarray:
    """Euclidean distances from the user to each point, in point order."""
    if d.n_points == 0:
        return np.empty(0)
    return np.linalg.norm(d.points - d.ue, axis=1)


def _uniform_points(window: Window, count: int, rng) -> np.ndarray:
    lo = np.array([-window.half_width, -window.half_height])
    return rng.uniform(lo, -lo, size=(count, 2))


def _ue_or_origin(ue) -> np.ndarray:
    if ue is None:
        return np.zeros(2)
    out = np.asarray(ue, dtype=float)
    if out.shape != (2,):
        raise ValueError("ue must be a 2-D coordinate")
    return out
