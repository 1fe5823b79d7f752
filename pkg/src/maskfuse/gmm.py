"""Three-channel Gaussian mixtures over pixel intensities, fitted with EM."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

EPS_REG = 1e-6
MAX_ITER = 100
REL_TOL = 1e-6
MIN_WEIGHT = 1e-8

_LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class GmmModel:
    """An n-component mixture of full-covariance 3-d normals.

    ``ll_trace`` holds the mean training log-likelihood after every EM step
    (first entry is the initialization), so monotonicity can be audited.
    """

    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    ll_trace: tuple = field(default=(), compare=False)

    def __post_init__(self):
        for name in ("weights", "means", "covariances"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = self.weights.shape[0]
        if self.means.shape != (n, 3) or self.covariances.shape != (n, 3, 3):
            raise ValueError("inconsistent GMM parameter shapes")
        if abs(self.weights.sum() - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {self.weights.sum()!r}, not 1")

    @property
    def n_components(self) -> int:
        return self.weights.shape[0]

    def log_score(self, pixels) -> np.ndarray:
        return mixture_log_score(self, pixels)


def _cholesky(covs: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(covs)
    except np.linalg.LinAlgError as exc:
        raise ValueError("covariance is not symmetric positive definite") from exc


def _component_log_densities(XT: np.ndarray, means: np.ndarray, covs: np.ndarray) -> np.ndarray:
    """Log N(x, mu_k, Sigma_k) for pixels given as a (3, N) array -> (n, N).

    Pixels run along the last axis so every elementwise op has a long inner loop.
    """
    n = means.shape[0]
    chol = _cholesky(covs)
    inv_chol = np.linalg.inv(chol)
    # whitened coordinates for all components in one product: (n*3, N)
    y = inv_chol.reshape(n * 3, 3) @ XT
    y -= np.einsum("kij,kj->ki", inv_chol, means).reshape(n * 3, 1)
    y *= y
    maha = y.reshape(n, 3, -1).sum(axis=1)
    log_det = 2.0 * np.log(np.diagonal(chol, axis1=1, axis2=2)).sum(axis=1)
    return -0.5 * (maha + (3 * _LOG_2PI + log_det)[:, None])


def _logsumexp_cols(a: np.ndarray) -> np.ndarray:
    top = a.max(axis=0)
    return top + np.log(np.exp(a - top).sum(axis=0))


def component_density(c, mean, cov) -> float:
    """Normal density (2pi)^-1.5 |cov|^-0.5 exp(-(c-mu)' cov^-1 (c-mu) / 2)."""
    c = np.asarray(c, dtype=np.float64).reshape(3, 1)
    mean = np.asarray(mean, dtype=np.float64).reshape(1, 3)
    cov = np.asarray(cov, dtype=np.float64).reshape(1, 3, 3)
    return float(np.exp(_component_log_densities(c, mean, cov)[0, 0]))


def mixture_log_score(model: GmmModel, pixels) -> np.ndarray | float:
    """Natural log of sum_i w_i N(c, mu_i, Sigma_i), via log-sum-exp.

    Accepts a single 3-vector (returns a float) or an (N, 3) array.
    """
    X = np.asarray(pixels, dtype=np.float64)
    single = X.ndim == 1
    XT = np.ascontiguousarray(X.reshape(-1, 3).T)
    log_dens = _component_log_densities(XT, model.means, model.covariances)
    out = _logsumexp_cols(log_dens + np.log(model.weights)[:, None])
    return float(out[0]) if single else out


def _kmeanspp_means(X: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    N = X.shape[0]
    centers = [X[rng.integers(N)]]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, n):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(N, p=d2 / total)
        else:
            idx = rng.integers(N)
        centers.append(X[idx])
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    return np.array(centers)


def _m_step(X, XT, resp, base_cov, log_norm):
    """Weights, means and regularized covariances from (n, N) responsibilities."""
    N = X.shape[0]
    nk = resp.sum(axis=1)
    n = nk.shape[0]
    empty = nk < MIN_WEIGHT * N
    safe_nk = np.where(empty, 1.0, nk)
    means = (resp @ X) / safe_nk[:, None]
    diff = XT[None, :, :] - means[:, :, None]
    covs = np.matmul(resp[:, None, :] * diff, diff.transpose(0, 2, 1)) / safe_nk[:, None, None]
    covs = 0.5 * (covs + covs.transpose(0, 2, 1)) + EPS_REG * np.eye(3)
    rescued = np.flatnonzero(empty)
    if rescued.size:
        # reseed starved components at the worst-explained points
        worst_order = np.argsort(log_norm, kind="stable")
        for j, k in enumerate(rescued):
            means[k] = X[worst_order[j % N]]
            covs[k] = base_cov
            nk[k] = 1.0
    weights = nk / nk.sum()
    weights = np.maximum(weights, MIN_WEIGHT)
    weights /= weights.sum()
    return weights, means, covs, bool(rescued.size)


def fit_em(sample, n: int, seed: int, max_iter: int = MAX_ITER, tol: float = REL_TOL) -> GmmModel:
    """Fit an n-component full-covariance GMM to (N, 3) pixel values.

    Seeding is k-means++ driven by ``seed``; initial weights are uniform and
    initial covariances equal the pooled sample covariance. Every covariance
    gets ``EPS_REG`` added to its diagonal. Iteration stops after
    ``max_iter`` M-steps or when the relative gain in mean log-likelihood
    drops below ``tol``.
    """
    X = np.asarray(sample, dtype=np.float64).reshape(-1, 3)
    if n < 1:
        raise ValueError("number of components must be positive")
    if X.shape[0] < n:
        raise ValueError(f"sample of {X.shape[0]} pixels is smaller than n={n}")
    XT = np.ascontiguousarray(X.T)
    rng = np.random.default_rng(seed)

    base_cov = np.cov(X.T, bias=True).reshape(3, 3) + EPS_REG * np.eye(3)
    means = _kmeanspp_means(X, n, rng)
    covs = np.repeat(base_cov[None], n, axis=0)
    weights = np.full(n, 1.0 / n)

    def e_step(w, mu, cov):
        log_prob = _component_log_densities(XT, mu, cov) + np.log(w)[:, None]
        log_norm = _logsumexp_cols(log_prob)
        return float(log_norm.mean()), np.exp(log_prob - log_norm), log_norm

    ll, resp, log_norm = e_step(weights, means, covs)
    trace = [ll]
    for _ in range(max_iter):
        weights, means, covs, rescued = _m_step(X, XT, resp, base_cov, log_norm)
        new_ll, resp, log_norm = e_step(weights, means, covs)
        trace.append(new_ll)
        if not rescued and new_ll - ll < tol * abs(ll):
            break
        ll = new_ll
    return GmmModel(weights, means, covs, tuple(trace))
