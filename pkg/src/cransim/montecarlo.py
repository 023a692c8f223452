"""Seeded Monte Carlo experiments for oracle and compressive estimators.

Every trial draws from its own counter-based random stream keyed by
(master_seed, trial index), so results are bit-identical no matter how many
workers execute the trials or in which order.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sp_stats

from . import analytics
from .channel import (
    FadingModel,
    SingularGeometryError,
    draw_channels,
    fading_moment,
    residual_norm_sq,
    select_support,
)
from .estimators import (
    BasisPursuitParams,
    SingularSystemError,
    basis_pursuit,
    omp,
    oracle_ls,
)
from .geometry import Window, sample_hppp, sample_uniform_deployment
from .pilots import sample_pilot_matrix, synthesize

ESTIMATORS = ("oracle", "basis-pursuit", "omp")
WINDOW_MODES = ("uniform-finite", "hppp")
DEFAULT_MASTER_SEED = 1729
MAX_TRIAL_RETRIES = 3
WORKERS_ENV = "CRANSIM_WORKERS"


class WindowTooSmallError(RuntimeError):
    """The simulation window truncates the point process too aggressively."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one Monte Carlo experiment."""

    n_rrh: int = 500
    density: float = 1.0
    alpha: float = 4.0
    fading: FadingModel = field(default_factory=FadingModel.rayleigh)
    noise_var: float = 0.0
    n_pilots: int = 81
    s: int | str = "optimal"
    estimator: str = "oracle"
    trials: int = 500
    master_seed: int = DEFAULT_MASTER_SEED
    window_mode: str = "uniform-finite"
    solver: BasisPursuitParams = field(default_factory=BasisPursuitParams)
    ue: tuple[float, float] | None = None

    def __post_init__(self):
        if int(self.n_rrh) < 1:
            raise ValueError(f"n_rrh must be >= 1, got {self.n_rrh}")
        if not self.density > 0:
            raise ValueError(f"density must be positive, got {self.density}")
        if not self.alpha > 2:
            raise ValueError(f"alpha must exceed 2, got {self.alpha}")
        if self.noise_var < 0:
            raise ValueError(f"noise_var must be nonnegative, got {self.noise_var}")
        if int(self.n_pilots) < 1:
            raise ValueError(f"n_pilots must be >= 1, got {self.n_pilots}")
        if isinstance(self.s, str):
            if self.s != "optimal":
                raise ValueError(f's must be a positive integer or "optimal", got {self.s!r}')
        elif int(self.s) < 1:
            raise ValueError(f"s must be >= 1, got {self.s}")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"estimator must be one of {ESTIMATORS}, got {self.estimator!r}")
        if int(self.trials) < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must fit in 64 bits")
        if self.window_mode not in WINDOW_MODES:
            raise ValueError(
                f"window_mode must be one of {WINDOW_MODES}, got {self.window_mode!r}"
            )


@dataclass(frozen=True)
class MonteCarloReport:
    """Sample mean and standard error of one MSE metric."""

    kind: str
    mean: float
    stderr: float
    trials: int
    seed_digest: str
    resampled: int = 0
    non_converged: int = 0


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    """Counter-based substream for one trial: Philox keyed by (seed, trial)."""
    return np.random.Generator(np.random.Philox(key=(int(master_seed) << 64) + int(trial)))


def seed_digest(master_seed: int, trials: int) -> str:
    """Digest of the per-trial stream keys, recorded in every report."""
    h = hashlib.sha256()
    base = int(master_seed) << 64
    for t in range(int(trials)):
        h.update((base + t).to_bytes(16, "little"))
    return h.hexdigest()[:16]


def scenario_for(cfg: ExperimentConfig, s: int | None = None) -> analytics.Scenario:
    """Analytic scenario matching the experiment parameters."""
    return analytics.Scenario(
        alpha=cfg.alpha,
        density=cfg.density,
        moment=fading_moment(cfg.fading, cfg.alpha),
        noise_var=cfg.noise_var,
        n_pilots=cfg.n_pilots,
        s=s if s is not None else (None if isinstance(cfg.s, str) else int(cfg.s)),
    )


def resolve_support_size(cfg: ExperimentConfig, kind: str = "average") -> int:
    """Turn s="optimal" into the bound-minimizing integer (noiseless: kind-independent)."""
    if isinstance(cfg.s, str):
        s, _ = analytics.best_support_size(scenario_for(cfg), kind)
    else:
        s = int(cfg.s)
    if s > cfg.n_rrh:
        raise ValueError(f"s={s} exceeds n_rrh={cfg.n_rrh}")
    if s > cfg.n_pilots:
        raise ValueError(f"s={s} exceeds n_pilots={cfg.n_pilots}: LS subproblem underdetermined")
    return s


def run_oracle_mse(cfg: ExperimentConfig, n_workers: int | None = None):
    """Monte Carlo MSE of the known-support LS estimator.

    Returns (average-metric report, total-metric report). Per trial: sample
    a deployment, channels, keep the s strongest as support, draw pilots and
    noise, LS-estimate on the true support, and accumulate both metrics.
    """
    s = resolve_support_size(cfg)
    if s > cfg.n_pilots - 4:
        warnings.warn(
            f"s={s} exceeds n_pilots-4={cfg.n_pilots - 4}: closed-form comparison "
            "is outside its validity range",
            stacklevel=2,
        )
    rows = _map_trials(_oracle_trial, cfg, s, n_workers)
    av = rows[:, 0]
    tot = rows[:, 1]
    resampled = int(rows[:, 2].sum())
    digest = seed_digest(cfg.master_seed, cfg.trials)
    return (
        _report("average", av, digest, resampled=resampled),
        _report("total", tot, digest, resampled=resampled),
    )


def run_cs_mse(cfg: ExperimentConfig, n_workers: int | None = None) -> MonteCarloReport:
    """Monte Carlo total MSE of a compressive estimator on the full pilot matrix.

    Trials whose solver run is flagged non-converged are excluded from the
    mean; their count is reported.
    """
    if cfg.estimator not in ("basis-pursuit", "omp"):
        raise ValueError(f"run_cs_mse needs a CS estimator, got {cfg.estimator!r}")
    s = resolve_support_size(cfg) if cfg.estimator == "omp" else None
    rows = _map_trials(_cs_trial, cfg, s, n_workers)
    tot = rows[:, 0]
    converged = rows[:, 1] > 0.5
    resampled = int(rows[:, 2].sum())
    n_bad = int((~converged).sum())
    if not converged.any():
        raise RuntimeError("no trial converged; cannot report a mean")
    digest = seed_digest(cfg.master_seed, cfg.trials)
    return _report(
        "total", tot[converged], digest, resampled=resampled, non_converged=n_bad
    )


SWEEP_AXES = ("s", "alpha", "n_pilots")

SWEEP_COLUMNS = (
    "axis",
    "value",
    "estimator",
    "window_mode",
    "n_rrh",
    "density",
    "alpha",
    "fading",
    "sigma_db",
    "noise_var",
    "n_pilots",
    "s",
    "trials",
    "master_seed",
    "mse_av",
    "mse_av_stderr",
    "mse_tot",
    "mse_tot_stderr",
    "bound_av",
    "bound_tot",
    "s_opt_exact",
    "s_opt_asymptotic",
    "resampled",
    "non_converged",
    "error",
)


def sweep(cfg: ExperimentConfig, axis: str, values, n_workers: int | None = None):
    """Run the configured experiment at each value of one swept parameter.

    Returns one dict per value with simulation results, the closed-form
    bounds where admissible, and the optimal support sizes. Errors at a
    point are recorded in-row and the sweep continues.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}, got {axis!r}")
    values = list(values)
    if not values:
        raise ValueError("values must be nonempty")
    rows = []
    for value in values:
        cfg_i = dataclasses.replace(cfg, **{axis: value})
        rows.append(run_point(cfg_i, axis=axis, value=value, n_workers=n_workers))
    return rows


def run_point(
    cfg: ExperimentConfig, axis: str = "", value=None, n_workers: int | None = None
) -> dict:
    """One sweep row: simulate, then attach analytic columns."""
    row = dict.fromkeys(SWEEP_COLUMNS)
    row.update(
        axis=axis,
        value=value,
        estimator=cfg.estimator,
        window_mode=cfg.window_mode,
        n_rrh=cfg.n_rrh,
        density=cfg.density,
        alpha=cfg.alpha,
        fading=cfg.fading.kind,
        sigma_db=cfg.fading.sigma_db,
        noise_var=cfg.noise_var,
        n_pilots=cfg.n_pilots,
        trials=cfg.trials,
        master_seed=cfg.master_seed,
    )
    try:
        s = resolve_support_size(cfg)
        row["s"] = s
        sc = scenario_for(cfg, s)
        grid = analytics.admissible_support_sizes(cfg.alpha, cfg.n_pilots)
        if s in grid:
            row["bound_av"] = analytics.mse_upper_bound(sc, "average")
            row["bound_tot"] = analytics.mse_upper_bound(sc, "total")
        if len(grid) > 0:
            row["s_opt_exact"] = analytics.best_support_size(sc, "average")[0]
        row["s_opt_asymptotic"] = analytics.best_support_size_asymptotic(
            cfg.alpha, cfg.n_pilots
        )
        if cfg.estimator == "oracle":
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                rep_av, rep_tot = run_oracle_mse(cfg, n_workers=n_workers)
            row.update(
                mse_av=rep_av.mean,
                mse_av_stderr=rep_av.stderr,
                mse_tot=rep_tot.mean,
                mse_tot_stderr=rep_tot.stderr,
                resampled=rep_av.resampled,
                non_converged=0,
            )
        else:
            rep = run_cs_mse(cfg, n_workers=n_workers)
            row.update(
                mse_tot=rep.mean,
                mse_tot_stderr=rep.stderr,
                resampled=rep.resampled,
                non_converged=rep.non_converged,
            )
    except Exception as exc:  # recorded in-row; the sweep continues
        row["error"] = str(exc)
    return row


def validate_order_stats(
    cfg: ExperimentConfig,
    s_values,
    samples: int,
    window_side: float = 200.0,
) -> list[float]:
    """KS distances between simulated s-th strongest powers and the closed-form cdf.

    Simulates ``samples`` independent Poisson deployments on a square of the
    given side, extracts the s-th largest received power for each requested
    s, and compares its empirical cdf against the analytic one. Raises
    WindowTooSmallError when truncation by the window is not negligible.
    """
    s_list = [int(s) for s in s_values]
    if not s_list or any(s < 1 for s in s_list):
        raise ValueError("s_values must be positive integers")
    if int(samples) < 1000:
        raise ValueError(f"samples must be >= 1000, got {samples}")
    moment = fading_moment(cfg.fading, cfg.alpha)
    top, _totals, min_count = sample_power_order_stats(
        window_side=window_side,
        density=cfg.density,
        fading=cfg.fading,
        alpha=cfg.alpha,
        s_max=max(s_list),
        draws=int(samples),
        master_seed=cfg.master_seed,
    )
    if min_count < max(s_list):
        raise WindowTooSmallError(
            f"a draw produced only {min_count} points; cannot rank s={max(s_list)}"
        )
    mean_points = cfg.density * window_side**2
    stats = []
    for s in s_list:
        gs = top[:, s - 1]
        mu_min = analytics.expected_count_above(
            float(gs.min()), cfg.alpha, cfg.density, moment
        )
        if mu_min > 0.1 * mean_points:
            raise WindowTooSmallError(
                f"window side {window_side} too small: the infinite process would "
                f"place {mu_min:.1f} points above the weakest ranked power "
                f"(window holds {mean_points:.0f} on average)"
            )
        cdf = lambda d, s=s: analytics.power_order_cdf(
            d, s, cfg.alpha, cfg.density, moment
        )
        stats.append(float(sp_stats.kstest(gs, cdf).statistic))
    return stats


def simulate_interference_power(
    s: int,
    alpha: float,
    density: float,
    fading: FadingModel,
    samples: int,
    master_seed: int = DEFAULT_MASTER_SEED,
    window_side: float = 200.0,
):
    """Monte Carlo mean of the total power of all but the s strongest channels.

    Returns (mean, stderr) over ``samples`` Poisson deployments; the direct
    simulation counterpart of analytics.residual_power_expected.
    """
    top, totals, min_count = sample_power_order_stats(
        window_side=window_side,
        density=density,
        fading=fading,
        alpha=alpha,
        s_max=int(s),
        draws=int(samples),
        master_seed=master_seed,
    )
    if min_count < s:
        raise WindowTooSmallError(
            f"a draw produced only {min_count} points; cannot keep s={s}"
        )
    residual = totals - top[:, :s].sum(axis=1)
    mean = float(residual.mean())
    stderr = float(residual.std(ddof=1) / math.sqrt(residual.size))
    return mean, stderr


def sample_power_order_stats(
    window_side: float,
    density: float,
    fading: FadingModel,
    alpha: float,
    s_max: int,
    draws: int,
    master_seed: int = DEFAULT_MASTER_SEED,
    batch_points: float = 4e6,
):
    """Received-power order statistics under Poisson deployments.

    Draws ``draws`` independent deployments on a centered square, computes
    every point's received power |c|^2 r^(-alpha) at the origin, and returns
    (top powers (draws, s_max) descending, total power per draw, smallest
    point count seen).
    """
    if not alpha > 2:
        raise ValueError(f"alpha must exceed 2, got {alpha}")
    area = window_side * window_side
    lam = density * area
    rng = trial_rng(master_seed, 0)
    batch = max(1, int(batch_points / max(lam, 1.0)))
    top = np.empty((draws, s_max))
    totals = np.empty(draws)
    min_count = np.inf
    done = 0
    while done < draws:
        n_batch = min(batch, draws - done)
        counts = rng.poisson(lam, size=n_batch)
        total_pts = int(counts.sum())
        half = window_side / 2.0
        xy = rng.uniform(-half, half, size=(2, total_pts))
        r2 = xy[0] ** 2 + xy[1] ** 2
        power = fading.sample_power(total_pts, rng) * r2 ** (-alpha / 2.0)
        offsets = np.concatenate(([0], np.cumsum(counts)))
        for i in range(n_batch):
            g = power[offsets[i] : offsets[i + 1]]
            min_count = min(min_count, g.size)
            if g.size < s_max:
                raise WindowTooSmallError(
                    f"a draw produced only {g.size} points; cannot rank s={s_max}"
                )
            idx = np.argpartition(g, g.size - s_max)[g.size - s_max :]
            top[done + i] = np.sort(g[idx])[::-1]
            totals[done + i] = g.sum()
        done += n_batch
    return top, totals, int(min_count)


def oracle_error_samples(
    gains,
    support,
    n_pilots: int,
    noise_var: float,
    trials: int,
    master_seed: int = DEFAULT_MASTER_SEED,
) -> np.ndarray:
    """Estimation errors of the known-support LS estimate for a frozen channel.

    Test hook: holds the channel vector fixed and redraws pilots and noise
    each trial. Returns the complex error matrix of shape (trials, |support|).
    """
    gains = np.asarray(gains, dtype=complex)
    support = np.asarray(support, dtype=int)
    errors = np.empty((int(trials), support.size), dtype=complex)
    for t in range(int(trials)):
        rng = trial_rng(master_seed, t)
        p = sample_pilot_matrix(n_pilots, gains.size, rng)
        sig = synthesize(p, gains, noise_var, rng)
        est = oracle_ls(p, sig.y, support)
        errors[t] = est.estimate_on_support - gains[support]
    return errors


def oracle_mse_fixed_channel(
    gains,
    support,
    n_pilots: int,
    noise_var: float,
    trials: int,
    master_seed: int = DEFAULT_MASTER_SEED,
) -> MonteCarloReport:
    """Average-metric MSE over pilot/noise draws for a frozen channel vector."""
    errors = oracle_error_samples(
        gains, support, n_pilots, noise_var, trials, master_seed
    )
    av = np.sum(np.abs(errors) ** 2, axis=1) / errors.shape[1]
    return _report("average", av, seed_digest(master_seed, trials))


def _oracle_trial(cfg: ExperimentConfig, s: int, trial: int) -> tuple:
    rng = trial_rng(cfg.master_seed, trial)
    for attempt in range(MAX_TRIAL_RETRIES + 1):
        deployment = _sample_deployment(cfg, rng)
        if deployment.n_points < max(s, 1):
            continue
        try:
            ch = draw_channels(deployment, cfg.fading, cfg.alpha, rng)
        except SingularGeometryError:
            continue
        support, complement = select_support(ch.gains, s)
        p = sample_pilot_matrix(cfg.n_pilots, deployment.n_points, rng)
        sig = synthesize(p, ch.gains, cfg.noise_var, rng)
        try:
            est = oracle_ls(p, sig.y, support)
        except SingularSystemError:
            continue
        err = float(np.sum(np.abs(ch.gains[support] - est.estimate_on_support) ** 2))
        residual = residual_norm_sq(ch.gains, complement)
        return err / s, residual + err, attempt
    raise RuntimeError(
        f"trial {trial}: still degenerate after {MAX_TRIAL_RETRIES} resamples"
    )


def _cs_trial(cfg: ExperimentConfig, s: int | None, trial: int) -> tuple:
    rng = trial_rng(cfg.master_seed, trial)
    for attempt in range(MAX_TRIAL_RETRIES + 1):
        deployment = _sample_deployment(cfg, rng)
        if deployment.n_points < max(s or 1, 1):
            continue
        try:
            ch = draw_channels(deployment, cfg.fading, cfg.alpha, rng)
        except SingularGeometryError:
            continue
        p = sample_pilot_matrix(cfg.n_pilots, deployment.n_points, rng)
        sig = synthesize(p, ch.gains, cfg.noise_var, rng)
        try:
            if cfg.estimator == "basis-pursuit":
                res = basis_pursuit(p, sig.y, cfg.solver)
                estimate, converged = res.estimate, res.converged
            else:
                estimate = omp(p, sig.y, s).full_estimate
                converged = True
        except SingularSystemError:
            continue
        err = float(np.sum(np.abs(ch.gains - estimate) ** 2))
        return err, float(converged), attempt
    raise RuntimeError(
        f"trial {trial}: still degenerate after {MAX_TRIAL_RETRIES} resamples"
    )


def _sample_deployment(cfg: ExperimentConfig, rng):
    window = Window.square(cfg.n_rrh / cfg.density)
    if cfg.window_mode == "uniform-finite":
        return sample_uniform_deployment(cfg.n_rrh, cfg.density, rng, ue=cfg.ue)
    return sample_hppp(window, cfg.density, rng, ue=cfg.ue)


def _map_trials(func, cfg: ExperimentConfig, s, n_workers) -> np.ndarray:
    workers = _resolve_workers(n_workers)
    if workers <= 1:
        rows = [func(cfg, s, t) for t in range(cfg.trials)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, cfg.trials // (workers * 4))
            rows = list(
                pool.map(
                    _TrialTask(func, cfg, s),
                    range(cfg.trials),
                    chunksize=chunk,
                )
            )
    return np.asarray(rows, dtype=float)


class _TrialTask:
    """Picklable per-trial callable for process pools."""

    def __init__(self, func, cfg, s):
        self.func = func
        self.cfg = cfg
        self.s = s

    def __call__(self, trial):
        return self.func(self.cfg, self.s, trial)


def _resolve_workers(n_workers) -> int:
    if n_workers is not None:
        return max(1, int(n_workers))
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return 1


def _report(kind, values, digest, resampled=0, non_converged=0) -> MonteCarloReport:
    values = np.asarray(values, dtype=float)
    mean = float(values.mean())
    stderr = (
        float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else float("nan")
    )
    return MonteCarloReport(
        kind=kind,
        mean=mean,
        stderr=stderr,
        trials=int(values.size),
        seed_digest=digest,
        resampled=resampled,
        non_converged=non_converged,
    )
