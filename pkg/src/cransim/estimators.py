"""Channel estimators: known-support least squares, Basis Pursuit, OMP."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pilots import pilot_entries


class SingularSystemError(RuntimeError):
    """The selected pilot columns are rank deficient (or the constraint set is empty)."""


@dataclass(frozen=True)
class EstimateResult:
    """Support-restricted estimate plus its zero-filled embedding."""

    estimate_on_support: np.ndarray
    support: np.ndarray
    full_estimate: np.ndarray


def oracle_ls(p, y, support) -> EstimateResult:
    """Least-squares estimate of the channel entries on a known support.

    Solves argmin_z ||P[:, support] z - y||_2 by SVD (no normal equations),
    zero-filling the remaining entries. Requires |support| <= n_pilots and
    full column rank of the selected columns.
    """
    entries = pilot_entries(p)
    y = np.asarray(y, dtype=complex)
    n_pilots, n_rrh = entries.shape
    if y.shape != (n_pilots,):
        raise ValueError(f"y must have length {n_pilots}, got {y.shape}")
    support = _check_support(support, n_rrh)
    s = support.size
    if s > n_pilots:
        raise ValueError(f"support size {s} exceeds n_pilots {n_pilots}")
    cols = entries[:, support].astype(complex)
    sol, _, rank, _ = np.linalg.lstsq(cols, y, rcond=None)
    if rank < s:
        raise SingularSystemError(f"selected pilot columns have rank {rank} < {s}")
    full = np.zeros(n_rrh, dtype=complex)
    full[support] = sol
    return EstimateResult(sol, support, full)


def omp(p, y, s: int) -> EstimateResult:
    """Orthogonal matching pursuit: grow a support of size s greedily.

    Each step picks the column with maximal normalized residual correlation
    (ties to the lower index) and re-fits least squares on the support so far.
    """
    entries = pilot_entries(p)
    y = np.asarray(y, dtype=complex)
    n_pilots, n_rrh = entries.shape
    if y.shape != (n_pilots,):
        raise ValueError(f"y must have length {n_pilots}, got {y.shape}")
    if not 1 <= s <= min(n_pilots, n_rrh):
        raise ValueError(f"s must lie in [1, {min(n_pilots, n_rrh)}], got {s}")

    col_norms = np.linalg.norm(entries, axis=0)
    safe_norms = np.where(col_norms > 0, col_norms, 1.0)
    residual = y.copy()
    available = np.ones(n_rrh, dtype=bool)
    selected: list[int] = []
    for _ in range(s):
        corr = np.abs(entries.T @ residual) / safe_norms
        corr[~available] = -1.0
        j = int(np.argmax(corr))  # argmax takes the lowest index on ties
        selected.append(j)
        available[j] = False
        cols = entries[:, selected].astype(complex)
        sol, _, rank, _ = np.linalg.lstsq(cols, y, rcond=None)
        if rank < len(selected):
            raise SingularSystemError(
                f"greedy support became rank deficient at size {len(selected)}"
            )
        residual = y - cols @ sol
    return oracle_ls(entries, y, sorted(selected))


@dataclass(frozen=True)
class BasisPursuitParams:
    """Solver knobs for the l1-minimization recovery.

    ``epsilon`` is the data-fidelity radius; None resolves to 1e-6 * ||y||
    (near-equality constraint for noiseless data).
    """

    epsilon: float | None = None
    feasibility_tol: float = 1e-6
    tolerance: float = 1e-6
    max_iters: int = 50_000
    rho: float = 64.0
    adapt_rho_every: int = 25

    def __post_init__(self):
        if self.epsilon is not None and self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if not self.feasibility_tol > 0:
            raise ValueError("feasibility_tol must be positive")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.rho > 0:
            raise ValueError("rho must be positive")


@dataclass(frozen=True)
class BasisPursuitResult:
    """Recovered vector plus convergence diagnostics.

    ``estimate`` always satisfies the fidelity constraint (it is the output
    of an exact projection); ``converged`` reports first-order optimality
    within the requested tolerance. ``objective_history`` tracks the l1 norm
    of the feasible iterate across iterations.
    """

    estimate: np.ndarray
    converged: bool
    iterations: int
    objective: float
    # objective of the reported (best-so-far feasible) iterate per iteration
    objective_history: np.ndarray = field(repr=False)
    primal_residual: float = np.nan
    dual_residual: float = np.nan
    constraint_gap: float = np.nan


def basis_pursuit(p, y, params: BasisPursuitParams | None = None) -> BasisPursuitResult:
    """Minimize the sum of complex moduli of h subject to ||P h - y||_2 <= epsilon.

    Operator-splitting (ADMM) over the complex field: one iterate is the
    exact Euclidean projection onto the fidelity set (via a cached
    eigendecomposition of P P^T), the other a modulus soft threshold. The
    internal rescaling is undone before returning, so the estimate lives in
    the physical scale of P and y.
    """
    if params is None:
        params = BasisPursuitParams()
    entries = pilot_entries(p).astype(float)
    y = np.asarray(y, dtype=complex)
    n_pilots, n_rrh = entries.shape
    if y.shape != (n_pilots,):
        raise ValueError(f"y must have length {n_pilots}, got {y.shape}")

    y_norm = float(np.linalg.norm(y))
    epsilon = params.epsilon if params.epsilon is not None else 1e-6 * y_norm
    if y_norm == 0.0:
        # zero is feasible with zero objective: the unique optimum
        zeros = np.zeros(n_rrh, dtype=complex)
        return BasisPursuitResult(
            estimate=zeros,
            converged=True,
            iterations=0,
            objective=0.0,
            objective_history=np.zeros(0),
            primal_residual=0.0,
            dual_residual=0.0,
            constraint_gap=-epsilon,
        )

    # scaled problem: unit-norm data, near-unit-norm columns
    col_scale = np.sqrt(n_pilots)
    a = entries / col_scale
    b = y / y_norm
    eps_s = epsilon / y_norm
    back = y_norm / col_scale  # physical estimate = scaled iterate * back

    project = _FidelityProjector(a, b, eps_s)
    rho = float(params.rho)
    x = np.zeros(n_rrh, dtype=complex)
    z = np.zeros(n_rrh, dtype=complex)
    u = np.zeros(n_rrh, dtype=complex)
    obj_hist = np.empty(int(params.max_iters))
    x_best = x
    obj_best = np.inf
    converged = False
    pr = dr = np.nan
    it = 0
    for it in range(1, int(params.max_iters) + 1):
        x = project(z - u)
        z_prev = z
        z = _soft_threshold(x + u, 1.0 / rho)
        u = u + x - z
        obj = float(np.sum(np.abs(x)))
        if obj < obj_best:  # incumbent: every x iterate is feasible
            obj_best = obj
            x_best = x
        obj_hist[it - 1] = obj_best * back
        pr = float(np.linalg.norm(x - z))
        dr = float(rho * np.linalg.norm(z - z_prev))
        scale_p = max(float(np.linalg.norm(x)), float(np.linalg.norm(z)), 1e-12)
        scale_d = max(float(rho * np.linalg.norm(u)), 1e-12)
        if pr <= params.tolerance * scale_p and dr <= params.tolerance * scale_d:
            converged = True
            break
        if params.adapt_rho_every and it % params.adapt_rho_every == 0:
            # balance the relative residuals so neither stalls the other
            if pr * scale_d > 10.0 * dr * scale_p and rho < 1e8:
                rho *= 2.0
                u = u / 2.0
            elif dr * scale_p > 10.0 * pr * scale_d and rho > 1e-8:
                rho /= 2.0
                u = u * 2.0

    estimate = x_best * back
    gap = float(np.linalg.norm(entries @ estimate - y)) - epsilon
    return BasisPursuitResult(
        estimate=estimate,
        converged=converged,
        iterations=it,
        objective=float(np.sum(np.abs(estimate))),
        objective_history=obj_hist[:it].copy(),
        primal_residual=pr,
        dual_residual=dr,
        constraint_gap=gap,
    )


class _FidelityProjector:
    """Exact Euclidean projection onto {x : ||A x - b|| <= eps}.

    Uses the eigendecomposition of A A^T, computed once per matrix. For
    eps = 0 this is the affine projection onto {A x = b}.
    """

    def __init__(self, a, b, eps):
        self.a = a
        self.b = b
        self.eps = float(eps)
        gram = a @ a.T
        d, q = np.linalg.eigh(gram)
        self.d = np.clip(d, 0.0, None)
        self.q = q
        tiny = self.d.max() * max(a.shape) * np.finfo(float).eps
        self.rank_mask = self.d > tiny
        if not self.rank_mask.any():
            raise SingularSystemError("pilot matrix is zero; data is unreachable")
        self.pinv_coeff = np.zeros_like(self.d)
        self.pinv_coeff[self.rank_mask] = 1.0 / self.d[self.rank_mask]
        self._mu = 0.0  # warm start for the multiplier search

    def __call__(self, v):
        r = self.a @ v - self.b
        r_norm = float(np.linalg.norm(r))
        if r_norm <= self.eps:
            return v
        rt = self.q.T @ r
        w = np.abs(rt) ** 2
        leak = float(w[~self.rank_mask].sum())  # energy outside range(A)
        if self.eps == 0.0:
            if leak > (1e-10 * max(r_norm, 1.0)) ** 2:
                raise SingularSystemError(
                    "data has a component outside the pilot range; "
                    "the equality constraint is infeasible"
                )
            coeff = self.pinv_coeff
        elif self.eps * self.eps <= leak:
            raise SingularSystemError(
                "fidelity radius is below the minimum achievable residual"
            )
        else:
            mu = self._solve_multiplier(w)
            coeff = mu / (1.0 + mu * self.d)
        return v - self.a.T @ (self.q @ (coeff * rt))

    def _solve_multiplier(self, w):
        """Newton root of sum(w / (1 + mu d)^2) = eps^2 (convex, decreasing)."""
        target = self.eps * self.eps
        mu = max(self._mu, 0.0)
        for _ in range(200):
            denom = 1.0 + mu * self.d
            f = float(np.sum(w / denom**2)) - target
            if abs(f) <= target * 1e-9:
                break
            fp = float(-2.0 * np.sum(w * self.d / denom**3))
            step = f / fp
            if not np.isfinite(step):
                break
            new_mu = max(mu - step, 0.0)
            if abs(new_mu - mu) <= 1e-15 * max(mu, 1.0):
                mu = new_mu
                break
            mu = new_mu
        self._mu = mu
        return mu


def _soft_threshold(v, thresh):
    mags = np.abs(v)
    scale = np.maximum(mags - thresh, 0.0)
    out = np.zeros_like(v)
    nz = mags > 0
    out[nz] = v[nz] * (scale[nz] / mags[nz])
    return out


def _check_support(support, n_rrh) -> np.ndarray:
    idx = np.asarray(support, dtype=int)
    if idx.ndim != 1 or idx.size == 0:
        raise ValueError("support must be a nonempty 1-D index set")
    if np.unique(idx).size != idx.size:
        raise ValueError("support contains duplicate indices")
    if idx.min() < 0 or idx.max() >= n_rrh:
        raise ValueError(f"support indices must lie in [0, {n_rrh})")
    return np.sort(idx)
