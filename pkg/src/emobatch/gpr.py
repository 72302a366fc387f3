"""Gaussian-process surrogates: Matérn 5/2 kernel, exact posterior, derivatives.

One model per objective, fitted on normalized inputs ([0,1]^n via the
problem bounds) and standardized targets (zero mean, unit variance), with
a noiseless-interpolation assumption: the diagonal carries only a small
numerical jitter.  The posterior mean is twice differentiable in closed
form, which downstream components use to build Jacobians and Hessians of
the surrogate vector objective.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.linalg.blas import dtrmm
from scipy.linalg.lapack import dtrtri
from scipy.optimize import minimize
from scipy.spatial.distance import cdist

from .core import (
    Bounds,
    DifferentiableVectorObjective,
    IllConditionedError,
    RandomSource,
)

__all__ = [
    "GpModel",
    "KernelParams",
    "SurrogateBank",
    "fit",
    "fit_surrogates",
    "log_marginal_likelihood",
    "matern52",
    "mean_gradient",
    "mean_hessian",
    "optimize_hyperparameters",
    "predict",
]

logger = logging.getLogger(__name__)

PARAM_LOWER = 1e-5
PARAM_UPPER = 1e5
BASE_JITTER = 1e-8
MAX_JITTER = 1e-2
_SQRT5 = math.sqrt(5.0)


@dataclass(frozen=True)
class KernelParams:
    """Matérn 5/2 kernel hyperparameters plus numerical jitter."""

    amplitude: float
    length_scale: float
    jitter: float = BASE_JITTER

    def __post_init__(self) -> None:
        if not PARAM_LOWER <= self.amplitude <= PARAM_UPPER:
            raise ValueError(f"amplitude outside [{PARAM_LOWER}, {PARAM_UPPER}]")
        if not PARAM_LOWER <= self.length_scale <= PARAM_UPPER:
            raise ValueError(f"length_scale outside [{PARAM_LOWER}, {PARAM_UPPER}]")
        if self.jitter < 1e-10:
            raise ValueError("jitter must be at least 1e-10")


def matern52(d, params: KernelParams):
    """Matérn 5/2 covariance as a function of Euclidean distance."""
    t = np.asarray(d, dtype=float) * (_SQRT5 / params.length_scale)
    return params.amplitude * (1.0 + t + t * t / 3.0) * np.exp(-t)


def _kernel_matrix(D: np.ndarray, amplitude: float, length_scale: float, jitter: float) -> np.ndarray:
    """K = matern52(D) + jitter I, built with in-place ops on a work array."""
    T = D * (_SQRT5 / length_scale)
    poly = 1.0 + T + T * T / 3.0
    np.exp(-T, out=T)
    K = poly
    K *= T
    K *= amplitude
    K[np.diag_indices_from(K)] += jitter
    return K


@dataclass(frozen=True)
class GpModel:
    """Fitted Gaussian process for one objective.

    `train_x` holds normalized inputs, `train_y` standardized targets;
    `weights` solves (K + jitter I) w = train_y through the stored Cholesky
    factor.  `target_mean`/`target_sd` undo the standardization and
    `bounds` undoes the input normalization.
    """

    train_x: np.ndarray
    train_y: np.ndarray
    params: KernelParams
    chol_lower: np.ndarray
    weights: np.ndarray
    target_mean: float
    target_sd: float
    bounds: Bounds | None

    def _normalize(self, X: np.ndarray) -> np.ndarray:
        return self.bounds.normalize(X) if self.bounds is not None else X

    @property
    def input_span(self) -> np.ndarray:
        if self.bounds is None:
            return np.ones(self.train_x.shape[1])
        return self.bounds.span

    def predict_many(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and variance (raw units) at each row of X."""
        Z = self._normalize(np.atleast_2d(np.asarray(X, dtype=float)))
        Ks = matern52(cdist(Z, self.train_x), self.params)
        mean_std = Ks @ self.weights
        solved = cho_solve((self.chol_lower, True), Ks.T, check_finite=False)
        quad = np.einsum("ij,ji->i", Ks, solved)
        var_std = self.params.amplitude + self.params.jitter - quad
        np.clip(var_std, 0.0, None, out=var_std)
        sd2 = self.target_sd**2
        return self.target_mean + self.target_sd * mean_std, var_std * sd2

    def predict(self, x: np.ndarray) -> tuple[float, float]:
        mean, var = self.predict_many(np.asarray(x, dtype=float)[None, :])
        return float(mean[0]), float(var[0])

    def mean_gradient(self, x: np.ndarray) -> np.ndarray:
        """Gradient of the posterior mean at x, in raw input/output units."""
        z = self._normalize(np.asarray(x, dtype=float))
        diff = z[None, :] - self.train_x
        d = np.sqrt((diff**2).sum(axis=1))
        rho = self.params.length_scale
        u = d * (_SQRT5 / rho)
        coeff = -(5.0 * self.params.amplitude / (3.0 * rho * rho)) * (1.0 + u) * np.exp(-u)
        grad_std = (self.weights * coeff) @ diff
        return self.target_sd * grad_std / self.input_span

    def mean_hessian(self, x: np.ndarray) -> np.ndarray:
        """Hessian of the posterior mean at x, in raw input/output units."""
        z = self._normalize(np.asarray(x, dtype=float))
        diff = z[None, :] - self.train_x
        d = np.sqrt((diff**2).sum(axis=1))
        rho = self.params.length_scale
        amp = self.params.amplitude
        u = d * (_SQRT5 / rho)
        decay = np.exp(-u)
        iso = -(5.0 * amp / (3.0 * rho * rho)) * (1.0 + u) * decay
        outer = (25.0 * amp / (3.0 * rho**4)) * decay
        w = self.weights
        n = self.train_x.shape[1]
        H = float(w @ iso) * np.eye(n)
        H += (diff * (w * outer)[:, None]).T @ diff
        span = self.input_span
        return self.target_sd * H / np.outer(span, span)


def fit(
    train_x: np.ndarray,
    train_y: np.ndarray,
    params: KernelParams,
    bounds: Bounds | None = None,
) -> GpModel:
    """Fit the exact GP: factorize the kernel matrix and solve for weights.

    The jitter escalates tenfold on factorization failure up to 1e-2;
    beyond that the training set is declared ill-conditioned.
    """
    X = np.atleast_2d(np.asarray(train_x, dtype=float))
    y = np.asarray(train_y, dtype=float).reshape(-1)
    if X.shape[0] != y.size:
        raise ValueError("train_x and train_y disagree on the sample count")
    if X.shape[0] < 2:
        raise ValueError("need at least two training points")
    Z = bounds.normalize(X) if bounds is not None else X.copy()
    target_mean = float(y.mean())
    target_sd = float(y.std())
    if target_sd < 1e-12:
        target_sd = 1.0
    y_std = (y - target_mean) / target_sd
    D = cdist(Z, Z)
    jitter = params.jitter
    while True:
        K = _kernel_matrix(D, params.amplitude, params.length_scale, jitter)
        try:
            lower, _ = cho_factor(K, lower=True, overwrite_a=True, check_finite=False)
            break
        except LinAlgError:
            jitter *= 10.0
            if jitter > MAX_JITTER:
                raise IllConditionedError(
                    "kernel matrix not positive definite even at maximal jitter"
                ) from None
    weights = cho_solve((lower, True), y_std, check_finite=False)
    used = params if jitter == params.jitter else KernelParams(
        params.amplitude, params.length_scale, jitter
    )
    return GpModel(
        train_x=Z,
        train_y=y_std,
        params=used,
        chol_lower=lower,
        weights=weights,
        target_mean=target_mean,
        target_sd=target_sd,
        bounds=bounds,
    )


def log_marginal_likelihood(model: GpModel) -> float:
    """Zero-mean Gaussian log evidence of the standardized targets."""
    n = model.train_y.size
    log_det_half = float(np.log(np.diag(model.chol_lower)).sum())
    return float(
        -0.5 * model.train_y @ model.weights
        - log_det_half
        - 0.5 * n * math.log(2.0 * math.pi)
    )


class _LikelihoodWorkspace:
    """Preallocated buffers for repeated likelihood-gradient evaluations.

    Holds the pairwise-distance matrix plus four same-shaped scratch
    arrays, all Fortran-ordered so the LAPACK/BLAS calls run in place
    without copies, and a lower-triangle mask to discard the leftover
    upper-triangle storage of in-place factorizations.
    """

    def __init__(self, D: np.ndarray) -> None:
        n = D.shape[0]
        self.D = np.asfortranarray(D)
        self.T = np.empty((n, n), order="F")
        self.E = np.empty((n, n), order="F")
        self.K = np.empty((n, n), order="F")
        self.B = np.empty((n, n), order="F")
        self.lower_mask = np.asfortranarray(np.tril(np.ones((n, n))))
        self.diag = np.diag_indices(n)


def _lml_gradient_from_distances(
    work: _LikelihoodWorkspace, y: np.ndarray, theta: np.ndarray
) -> tuple[float, np.ndarray]:
    """Log marginal likelihood and its gradient at theta = (log amp, log rho).

    Uses d lml/d theta_k = 0.5 (alpha' dK alpha - tr(K^-1 dK)) with
    dK/d log amp = K - jitter I and
    dK/d log rho = (amp/3) t^2 (1 + t) e^-t  where t = sqrt(5) D / rho.
    The log-amplitude component reduces to free quantities through
    K alpha = y and tr(K^-1 (K - jI)) = n - j tr(K^-1); the traces come
    from the inverse Cholesky factor W = L^-1 as tr(K^-1) = |W|_F^2 and
    tr(K^-1 B) = sum((W B) * W) over the lower triangle.
    Returns (-inf, zeros) when the kernel matrix fails to factorize.
    """
    amplitude = math.exp(theta[0])
    length_scale = math.exp(theta[1])
    n = y.size
    T, E, K, B = work.T, work.E, work.K, work.B
    np.multiply(work.D, _SQRT5 / length_scale, out=T)
    np.negative(T, out=E)
    np.exp(E, out=E)
    np.multiply(T, T, out=K)
    K *= 1.0 / 3.0
    K += T
    K += 1.0
    K *= E
    K *= amplitude
    K[work.diag] += BASE_JITTER
    try:
        lower, _ = cho_factor(K, lower=True, overwrite_a=True, check_finite=False)
    except LinAlgError:
        return -np.inf, np.zeros(2)
    alpha = cho_solve((lower, True), y, check_finite=False)
    y_alpha = float(y @ alpha)
    value = float(
        -0.5 * y_alpha
        - np.log(lower.diagonal()).sum()
        - 0.5 * n * math.log(2.0 * math.pi)
    )
    # dK/d log rho, assembled in place.
    np.multiply(T, T, out=B)
    T += 1.0
    B *= T
    B *= E
    B *= amplitude / 3.0
    quad_rho = float(alpha @ (B @ alpha))
    # Invert the factor in place; its upper triangle is leftover storage,
    # hence the masked sums below.
    W, info = dtrtri(lower, lower=1, overwrite_c=1)
    if info != 0:
        return -np.inf, np.zeros(2)
    trace_inv = float(np.einsum("ij,ij,ij->", W, W, work.lower_mask))
    V = dtrmm(1.0, W, B, side=0, lower=1, overwrite_b=1)
    trace_rho = float(np.einsum("ij,ij,ij->", V, W, work.lower_mask))
    g_amp = 0.5 * (
        y_alpha
        - BASE_JITTER * float(alpha @ alpha)
        - n
        + BASE_JITTER * trace_inv
    )
    g_rho = 0.5 * (quad_rho - trace_rho)
    return value, np.array([g_amp, g_rho])


def optimize_hyperparameters(
    train_x: np.ndarray,
    train_y: np.ndarray,
    rng: RandomSource,
    bounds: Bounds | None = None,
    n_starts: int = 8,
    max_iterations: int = 200,
    search_range: tuple[float, float] | None = None,
) -> KernelParams:
    """Maximize the log marginal likelihood over (amplitude, length scale).

    Multi-start bounded quasi-Newton ascent with the analytic likelihood
    gradient, in log space within ``search_range`` squared (default
    [1e-5, 1e5]^2); the best likelihood wins, ties resolved by the lowest
    start index.  The first start sits at the moment heuristic (amplitude =
    target variance, length scale = half the median pairwise distance) so
    the data-scale basin is always probed -- purely random starts miss it
    often enough to leave white-noise fits; the remaining starts are drawn
    log-uniformly.  If every start fails, the heuristic itself is returned
    with a logged warning.
    """
    X = np.atleast_2d(np.asarray(train_x, dtype=float))
    y = np.asarray(train_y, dtype=float).reshape(-1)
    if X.shape[0] < 2:
        raise ValueError("need at least two training points")
    if search_range is None:
        search_range = (PARAM_LOWER, PARAM_UPPER)
    range_lo, range_hi = float(search_range[0]), float(search_range[1])
    if not (PARAM_LOWER <= range_lo < range_hi <= PARAM_UPPER):
        raise ValueError(
            f"search range must be increasing and lie within "
            f"[{PARAM_LOWER}, {PARAM_UPPER}]"
        )
    Z = bounds.normalize(X) if bounds is not None else X
    sd = float(y.std())
    y_std = (y - y.mean()) / (sd if sd > 1e-12 else 1.0)
    D = cdist(Z, Z)
    work = _LikelihoodWorkspace(D)
    lo, hi = math.log(range_lo), math.log(range_hi)

    def objective(theta: np.ndarray) -> tuple[float, np.ndarray]:
        value, grad = _lml_gradient_from_distances(work, y_std, theta)
        if not np.isfinite(value):
            return 1e15, np.zeros(2)
        return -value, -grad

    off = D[~np.eye(len(D), dtype=bool)]
    heuristic = KernelParams(
        amplitude=float(np.clip(y_std.var(), range_lo, range_hi)),
        length_scale=float(
            np.clip(0.5 * np.median(off) if off.size else 1.0, range_lo, range_hi)
        ),
    )
    starts = np.vstack(
        [
            [math.log(heuristic.amplitude), math.log(heuristic.length_scale)],
            rng.uniform(lo, hi, size=(n_starts - 1, 2)),
        ]
    )
    best_value = np.inf
    best_theta: np.ndarray | None = None
    for theta0 in starts:
        result = minimize(
            objective,
            theta0,
            method="L-BFGS-B",
            jac=True,
            bounds=((lo, hi), (lo, hi)),
            options={"maxiter": max_iterations, "ftol": 1e-8, "gtol": 1e-3},
        )
        if result.fun < best_value and result.fun < 1e14:
            best_value = float(result.fun)
            best_theta = result.x
    if best_theta is None:
        logger.warning(
            "hyperparameter search failed on all starts; using fallback parameters"
        )
        return heuristic
    amp = float(np.clip(math.exp(best_theta[0]), range_lo, range_hi))
    rho = float(np.clip(math.exp(best_theta[1]), range_lo, range_hi))
    return KernelParams(amplitude=amp, length_scale=rho)


def predict(model: GpModel, x: np.ndarray) -> tuple[float, float]:
    """Posterior mean and variance at a single point (raw units)."""
    return model.predict(x)


def mean_gradient(model: GpModel, x: np.ndarray) -> np.ndarray:
    return model.mean_gradient(x)


def mean_hessian(model: GpModel, x: np.ndarray) -> np.ndarray:
    return model.mean_hessian(x)


class SurrogateBank(DifferentiableVectorObjective):
    """One GP per objective, presented as a differentiable vector objective.

    Single-point evaluation and derivatives run fused across the models on
    preallocated scratch buffers (they are called once per offspring inside
    the decomposition-based search loop); consequently a bank instance is
    not safe to share across threads.
    """

    def __init__(self, models: list[GpModel]) -> None:
        if not models:
            raise ValueError("need at least one model")
        first = models[0]
        for m in models[1:]:
            if m.train_x.shape != first.train_x.shape or not np.array_equal(
                m.train_x, first.train_x
            ):
                raise ValueError("all models must share the same training inputs")
        self.models = list(models)
        n_train, n_var = first.train_x.shape
        n_obj = len(models)
        amps = np.array([m.params.amplitude for m in models])
        rhos = np.array([m.params.length_scale for m in models])
        sds = np.array([m.target_sd for m in models])
        self._corr_scale = _SQRT5 / rhos
        self._out_scale = amps * sds
        self._means = np.array([m.target_mean for m in models])
        self._iso_scale = -(5.0 / 3.0) * amps * sds / rhos**2
        self._outer_scale = (25.0 / 3.0) * amps * sds / rhos**4
        self._weights = np.stack([m.weights for m in models])
        self._span = first.input_span
        self._diff = np.empty((n_train, n_var))
        self._dist = np.empty(n_train)
        self._t = np.empty((n_obj, n_train))
        self._p = np.empty((n_obj, n_train))

    @property
    def n_var(self) -> int:
        return self.models[0].train_x.shape[1]

    @property
    def n_obj(self) -> int:
        return len(self.models)

    def _point_distances(self, x: np.ndarray) -> None:
        """Fill the diff/dist scratch with offsets from the training inputs."""
        first = self.models[0]
        z = first._normalize(np.asarray(x, dtype=float))
        np.subtract(z, first.train_x, out=self._diff)
        np.einsum("ij,ij->i", self._diff, self._diff, out=self._dist)
        np.sqrt(self._dist, out=self._dist)

    def value(self, x: np.ndarray) -> np.ndarray:
        self._point_distances(x)
        t, p = self._t, self._p
        np.multiply(self._corr_scale[:, None], self._dist[None, :], out=t)
        np.multiply(t, t, out=p)
        p *= 1.0 / 3.0
        p += t
        p += 1.0
        np.negative(t, out=t)
        np.exp(t, out=t)
        p *= t
        vals = np.einsum("ij,ij->i", p, self._weights)
        return self._means + self._out_scale * vals

    def values(self, X: np.ndarray) -> np.ndarray:
        first = self.models[0]
        Z = first._normalize(np.atleast_2d(np.asarray(X, dtype=float)))
        D = cdist(Z, first.train_x)
        out = np.empty((Z.shape[0], self.n_obj))
        for j, m in enumerate(self.models):
            out[:, j] = m.target_mean + m.target_sd * (matern52(D, m.params) @ m.weights)
        return out

    def predict_many(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Means and variances per objective, shape (rows, m) each."""
        means = []
        variances = []
        for m in self.models:
            mu, var = m.predict_many(X)
            means.append(mu)
            variances.append(var)
        return np.column_stack(means), np.column_stack(variances)

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        self._point_distances(x)
        t, p = self._t, self._p
        np.multiply(self._corr_scale[:, None], self._dist[None, :], out=t)
        np.add(t, 1.0, out=p)
        np.negative(t, out=t)
        np.exp(t, out=t)
        p *= t
        p *= self._weights
        J = p @ self._diff
        J *= self._iso_scale[:, None]
        J /= self._span[None, :]
        return J

    def hessians(self, x: np.ndarray) -> np.ndarray:
        self._point_distances(x)
        t, p = self._t, self._p
        n = self._diff.shape[1]
        np.multiply(self._corr_scale[:, None], self._dist[None, :], out=t)
        np.add(t, 1.0, out=p)
        np.negative(t, out=t)
        np.exp(t, out=t)
        decay = t
        p *= decay
        p *= self._weights
        iso = self._iso_scale * p.sum(axis=1)
        span_outer = np.outer(self._span, self._span)
        out = np.empty((self.n_obj, n, n))
        eye = np.eye(n)
        for j in range(self.n_obj):
            row = self._outer_scale[j] * (self._weights[j] * decay[j])
            H = iso[j] * eye + (self._diff * row[:, None]).T @ self._diff
            out[j] = H / span_outer
        return out


def fit_surrogates(
    X: np.ndarray,
    F: np.ndarray,
    rng: RandomSource,
    bounds: Bounds | None = None,
    search_range: tuple[float, float] | None = None,
    base_jitter: float = BASE_JITTER,
) -> SurrogateBank:
    """Fit one hyperparameter-optimized GP per objective column of F."""
    F = np.atleast_2d(np.asarray(F, dtype=float))
    models = []
    for j in range(F.shape[1]):
        params = optimize_hyperparameters(
            X, F[:, j], rng.child(j), bounds=bounds, search_range=search_range
        )
        if base_jitter != params.jitter:
            params = KernelParams(params.amplitude, params.length_scale, base_jitter)
        models.append(fit(X, F[:, j], params, bounds=bounds))
    return SurrogateBank(models)
