"""Closed-form MSE expressions and received-power order statistics.

Everything here treats the deployment as an infinite homogeneous Poisson
process of density ``density`` seen from the user at the origin, with path
gain |c|^2 * r^(-alpha) and fading moment ``moment`` = E|c|^(4/alpha).
Gamma ratios are evaluated through log-gamma differences so results stay
finite for support sizes up to 1e4 and beyond.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

METRIC_KINDS = ("average", "total")

# relative slack when breaking argmin ties toward the smaller support size
_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class Scenario:
    """Parameter bundle for the closed-form analysis.

    ``moment`` is the fading moment E|c|^(4/alpha); ``s`` (the number of
    estimated channels) may be left None for the operations that search
    over it.
    """

    alpha: float
    density: float
    moment: float
    noise_var: float
    n_pilots: int
    s: int | None = None

    def __post_init__(self):
        if not self.alpha > 2:
            raise ValueError(f"alpha must exceed 2, got {self.alpha}")
        if not self.density > 0:
            raise ValueError(f"density must be positive, got {self.density}")
        if not self.moment > 0:
            raise ValueError(f"moment must be positive, got {self.moment}")
        if self.noise_var < 0:
            raise ValueError(f"noise_var must be nonnegative, got {self.noise_var}")
        if int(self.n_pilots) < 1:
            raise ValueError(f"n_pilots must be >= 1, got {self.n_pilots}")
        if self.s is not None and int(self.s) < 1:
            raise ValueError(f"s must be >= 1, got {self.s}")

    def with_s(self, s: int) -> "Scenario":
        return dataclasses.replace(self, s=int(s))


@dataclass(frozen=True)
class MetricKind:
    """Error metric selector with its linear weights (beta, gamma).

    ``average`` is the per-estimated-coefficient error, ``total`` the error
    of the full zero-filled channel estimate.
    """

    kind: str
    beta: float
    gamma: float

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise ValueError(f"metric kind must be one of {METRIC_KINDS}")
        if self.kind == "average" and (self.beta != 1.0 or self.gamma != 1.0):
            raise ValueError("average metric requires beta = gamma = 1")

    @classmethod
    def from_kind(cls, kind, n_pilots=None, s=None) -> "MetricKind":
        if isinstance(kind, cls):
            return kind
        if kind == "average":
            return cls("average", 1.0, 1.0)
        if kind == "total":
            if n_pilots is None or s is None:
                raise ValueError("total metric needs n_pilots and s for its weights")
            return cls("total", float(n_pilots - 1), float(s))
        raise ValueError(f"metric kind must be one of {METRIC_KINDS}, got {kind!r}")


def residual_power_expected(sc: Scenario) -> float:
    """Expected total power of the ignored (not estimated) channels.

    Equals 2*pi*density*moment/(alpha-2) times the fractional moment of the
    s-th strongest received power; requires s > alpha/2 - 1.
    """
    frac = power_order_fractional_moment(
        _require_s(sc), sc.alpha, sc.density, sc.moment
    )
    return (2.0 * math.pi * sc.density * sc.moment / (sc.alpha - 2.0)) * frac


def oracle_mse(residual_power: float, sc: Scenario, kind) -> float:
    """MSE of the known-support LS estimate under Gaussian training.

    average: (residual + noise_var) / (n_pilots - s - 1)
    total:   ((n_pilots-1)*residual + s*noise_var) / (n_pilots - s - 1)

    Valid for s <= n_pilots - 4.
    """
    if residual_power < 0:
        raise ValueError("residual_power must be nonnegative")
    s = _require_s(sc)
    _check_ls_range(s, sc.n_pilots)
    mk = MetricKind.from_kind(kind, sc.n_pilots, s)
    return (mk.beta * residual_power + mk.gamma * sc.noise_var) / (
        sc.n_pilots - s - 1
    )


def mse_upper_bound(sc: Scenario, kind) -> float:
    """Closed-form MSE upper bound: the oracle MSE at the expected residual power.

    Requires s in (alpha/2 - 1, n_pilots - 4].
    """
    return oracle_mse(residual_power_expected(sc), sc, kind)


def admissible_support_sizes(alpha: float, n_pilots: int) -> range:
    """Integer support sizes where the closed-form bound is valid."""
    if not alpha > 2:
        raise ValueError(f"alpha must exceed 2, got {alpha}")
    lo = max(1, math.floor(alpha / 2.0 - 1.0) + 1)  # smallest integer > alpha/2 - 1
    return range(lo, int(n_pilots) - 4 + 1)


def best_support_size(sc: Scenario, kind) -> tuple[int, float]:
    """Exhaustive integer minimizer of the MSE bound over admissible s.

    Returns (s*, bound at s*); ties within 1e-12 relative break toward the
    smaller s. ``sc.s`` is ignored.
    """
    grid = admissible_support_sizes(sc.alpha, sc.n_pilots)
    if len(grid) == 0:
        raise ValueError(
            f"no admissible support size for alpha={sc.alpha}, "
            f"n_pilots={sc.n_pilots}"
        )
    values = [mse_upper_bound(sc.with_s(s), kind) for s in grid]
    vmin = min(values)
    for s, v in zip(grid, values):
        if v <= vmin * (1.0 + _TIE_RTOL):
            return s, v
    raise AssertionError("unreachable")  # pragma: no cover


def best_support_size_asymptotic(alpha: float, n_pilots: int) -> float:
    """Large-n_pilots support size minimizing the noiseless bound: (alpha-2)(n_pilots-1)/alpha.

    Returned as a real; callers round to an admissible integer.
    """
    if not alpha > 2:
        raise ValueError(f"alpha must exceed 2, got {alpha}")
    return (alpha - 2.0) * (n_pilots - 1.0) / alpha


def min_mse_asymptotic(sc: Scenario, kind) -> float:
    """Asymptotic upper bound of the minimum MSE with zero noise.

    beta * (alpha*pi*moment/(alpha-2) * density/(n_pilots-1))**(alpha/2),
    with beta = 1 (average) or n_pilots - 1 (total). ``sc.s`` is ignored.
    """
    if sc.noise_var != 0:
        raise ValueError("the asymptotic minimum assumes noise_var = 0")
    if isinstance(kind, MetricKind):
        beta = kind.beta
    elif kind == "average":
        beta = 1.0
    elif kind == "total":
        beta = float(sc.n_pilots - 1)
    else:
        raise ValueError(f"metric kind must be one of {METRIC_KINDS}, got {kind!r}")
    log_base = (
        math.log(sc.alpha * math.pi * sc.moment)
        - math.log(sc.alpha - 2.0)
        + math.log(sc.density)
        - math.log(sc.n_pilots - 1.0)
    )
    return beta * math.exp(0.5 * sc.alpha * log_base)


def power_process_intensity(g, alpha, density, moment):
    """Intensity of the received-power point process at level g > 0.

    (2*pi/alpha) * density * moment * g**-(1 + 2/alpha).
    """
    _check_params(alpha, density, moment)
    g_arr, scalar = _positive_array(g, "g")
    out = (2.0 * math.pi / alpha) * density * moment * g_arr ** (-(1.0 + 2.0 / alpha))
    return float(out) if scalar else out


def expected_count_above(delta, alpha, density, moment):
    """Expected number of channels with received power above delta > 0.

    pi * density * moment * delta**(-2/alpha); the count is Poisson.
    """
    _check_params(alpha, density, moment)
    d_arr, scalar = _positive_array(delta, "delta")
    out = math.pi * density * moment * d_arr ** (-2.0 / alpha)
    return float(out) if scalar else out


def power_order_cdf(delta, s, alpha, density, moment):
    """cdf of the s-th largest received power, evaluated at delta > 0.

    Poisson lower tail P(count above delta < s), computed via the
    regularized upper incomplete gamma function.
    """
    s = _check_order(s)
    mu = expected_count_above(delta, alpha, density, moment)
    out = special.gammaincc(s, mu)
    return float(out) if np.isscalar(mu) else np.asarray(out)


def power_order_pdf(delta, s, alpha, density, moment):
    """pdf of the s-th largest received power, evaluated at delta > 0."""
    s = _check_order(s)
    _check_params(alpha, density, moment)
    d_arr, scalar = _positive_array(delta, "delta")
    mu = math.pi * density * moment * d_arr ** (-2.0 / alpha)
    log_pdf = (
        math.log(2.0)
        + s * math.log(math.pi * density * moment)
        - mu
        - (2.0 * s / alpha + 1.0) * np.log(d_arr)
        - math.log(alpha)
        - special.gammaln(s)
    )
    out = np.exp(log_pdf)
    return float(out) if scalar else out


def power_order_fractional_moment(s, alpha, density, moment) -> float:
    """E(g_s^(1 - 2/alpha)) for the s-th largest received power g_s.

    (pi*density*moment)**(alpha/2 - 1) * Gamma(s + 1 - alpha/2) / (s-1)!,
    finite exactly when s > alpha/2 - 1.
    """
    s = _check_order(s)
    _check_params(alpha, density, moment)
    if not s > alpha / 2.0 - 1.0:
        raise ValueError(
            f"fractional moment needs s > alpha/2 - 1 = {alpha / 2.0 - 1.0}, got s={s}"
        )
    log_val = (
        (alpha / 2.0 - 1.0) * math.log(math.pi * density * moment)
        + special.gammaln(s + 1.0 - alpha / 2.0)
        - special.gammaln(s)
    )
    return float(math.exp(log_val))


def _require_s(sc: Scenario) -> int:
    if sc.s is None:
        raise ValueError("this operation needs Scenario.s to be set")
    return int(sc.s)


def _check_ls_range(s: int, n_pilots: int):
    if s > n_pilots - 4:
        raise ValueError(
            f"the closed form requires s <= n_pilots - 4 (s={s}, n_pilots={n_pilots})"
        )
    if n_pilots - s - 1 <= 0:
        raise ValueError("n_pilots - s - 1 must be positive")


def _check_order(s) -> int:
    if int(s) != s or int(s) < 1:
        raise ValueError(f"s must be a positive integer, got {s}")
    return int(s)


def _check_params(alpha, density, moment):
    if not alpha > 2:
        raise ValueError(f"alpha must exceed 2, got {alpha}")
    if not density > 0:
        raise ValueError(f"density must be positive, got {density}")
    if not moment > 0:
        raise ValueError(f"moment must be positive, got {moment}")


def _positive_array(x, name):
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0):
        raise ValueError(f"{name} must be positive")
    return arr, np.isscalar(x) or arr.ndim == 0
