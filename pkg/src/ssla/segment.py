"""Scene segmentation of an exposure stack by per-pixel brightness.

Two routes produce a :class:`~ssla.core.Partition`:

* :func:`threshold_partition` — equal-width brightness bands of the middle
  enhanced luminance map (one band per exposure, empty bands dropped);
* :func:`mixture_partition` — a variational-Bayes Gaussian mixture over the
  per-pixel vector of enhanced luminances across all exposures, fitted on a
  downsized copy and applied at full resolution, with automatic selection of
  the number of segments through component pruning.
"""

from __future__ import annotations

import cv2
import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import digamma, gammaln, logsumexp, xlogy

from .core import MixtureModel, Partition, geometric_mean
from .errors import InferenceError, InputError

DEFAULT_MAX_COMPONENTS = 10
DEFAULT_MAX_ITER = 100
DEFAULT_REL_TOL = 1e-6
DEFAULT_DOWNSIZE_MAX = 256
PRUNE_WEIGHT = 1e-3


# ---------------------------------------------------------------------------
# middle-exposure selection and equal-width banding
# ---------------------------------------------------------------------------

def select_middle_index(maps) -> int:
    """Index of the middle exposure, ranked by log-average luminance.

    For an even count the darker of the two central candidates wins; equal
    keys keep input order (stable sort).
    """
    if len(maps) == 0:
        raise InputError("empty stack")
    keys = [geometric_mean(m) for m in maps]
    order = np.argsort(keys, kind="stable")
    return int(order[(len(keys) - 1) // 2])


def band_thresholds(lmin: float, lmax: float, n_bands: int) -> np.ndarray:
    """Equal-width band edges, brightest first: theta_i = ((n-i)/n)(max-min)+min."""
    i = np.arange(n_bands + 1, dtype=np.float64)
    return ((n_bands - i) / n_bands) * (lmax - lmin) + lmin


def threshold_partition(lum: np.ndarray, n_bands: int) -> Partition:
    """Partition a luminance map into equal-width brightness bands.

    Band 0 is the brightest. A pixel exactly on an interior edge joins the
    brighter band. Bands that receive no pixels are dropped and the remaining
    ids compacted, preserving brightest-first order.
    """
    l = np.asarray(lum, dtype=np.float64)
    if l.ndim != 2 or l.size == 0:
        raise InputError(f"expected non-empty 2-D luminance map, got shape {l.shape}")
    if n_bands < 1:
        raise InputError("n_bands must be >= 1")
    theta = band_thresholds(float(l.min()), float(l.max()), n_bands)
    labels = np.zeros(l.shape, dtype=np.int64)
    for edge in theta[1:-1]:  # interior edges only; strict < sends edge pixels up
        labels += l < edge
    return _compact(labels, n_bands)


def _compact(labels: np.ndarray, n_candidates: int) -> Partition:
    """Drop unused label ids and renumber consecutively, preserving order."""
    counts = np.bincount(labels.ravel(), minlength=n_candidates)
    used = np.flatnonzero(counts)
    remap = np.zeros(n_candidates, dtype=np.int64)
    remap[used] = np.arange(used.size)
    return Partition(remap[labels].astype(np.int32), int(used.size))


# ---------------------------------------------------------------------------
# variational Gaussian mixture
# ---------------------------------------------------------------------------

def _kmeanspp_centers(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Seed centers by distance-weighted sampling (k-means++)."""
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]), dtype=np.float64)
    centers[0] = x[rng.integers(n)]
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            cdf = np.cumsum(d2)
            idx = int(np.searchsorted(cdf, rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        else:
            idx = int(rng.integers(n))
        centers[j] = x[idx]
        d2 = np.minimum(d2, ((x - centers[j]) ** 2).sum(axis=1))
    return centers


def _init_resp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """One-hot responsibilities from nearest seeded center."""
    centers = _kmeanspp_centers(x, k, rng)
    d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    hard = d2.argmin(axis=1)
    resp = np.zeros((x.shape[0], k), dtype=np.float64)
    resp[np.arange(x.shape[0]), hard] = 1.0
    return resp


class _Posterior:
    """Mutable posterior state of the variational fit."""

    __slots__ = ("alpha", "beta", "m", "nu", "scale_inv", "chol", "e_log_pi",
                 "e_log_det")


def _m_step(x, resp, prior):
    """Update posterior parameters from responsibilities."""
    alpha0, beta0, m0, nu0, w0_inv = prior
    n, d = x.shape
    post = _Posterior()
    nk = resp.sum(axis=0)
    safe_nk = np.maximum(nk, 1e-300)
    xbar = (resp.T @ x) / safe_nk[:, None]
    xbar = np.where(nk[:, None] > 0, xbar, m0[None, :])
    k = resp.shape[1]
    sk = np.zeros((k, d, d))
    for j in range(k):
        if nk[j] > 0:
            dx = x - xbar[j]
            sk[j] = (resp[:, j][:, None] * dx).T @ dx / safe_nk[j]
    post.alpha = alpha0 + nk
    post.beta = beta0 + nk
    post.nu = nu0 + nk
    post.m = (beta0 * m0[None, :] + nk[:, None] * xbar) / post.beta[:, None]
    dm = xbar - m0[None, :]
    post.scale_inv = (
        w0_inv[None, :, :]
        + nk[:, None, None] * sk
        + (beta0 * nk / (beta0 + nk))[:, None, None] * (dm[:, :, None] * dm[:, None, :])
    )
    try:
        post.chol = np.linalg.cholesky(post.scale_inv)
    except np.linalg.LinAlgError as exc:
        raise InferenceError("posterior scale matrix not positive definite") from exc
    post.e_log_pi = digamma(post.alpha) - digamma(post.alpha.sum())
    # E[log det Lambda_k] from the Wishart posterior
    halves = 0.5 * (post.nu[:, None] + 1.0 - np.arange(1, d + 1)[None, :])
    logdet_scale_inv = 2.0 * np.log(np.diagonal(post.chol, axis1=1, axis2=2)).sum(axis=1)
    post.e_log_det = digamma(halves).sum(axis=1) + d * np.log(2.0) - logdet_scale_inv
    return post


def _log_resp(x, post):
    """E-step: unnormalized log responsibilities, shape (n, K)."""
    n, d = x.shape
    k = post.alpha.shape[0]
    quad = np.empty((n, k))
    for j in range(k):
        # (x - m)^T W (x - m) with W = scale_inv^{-1}, via triangular solve
        dx = (x - post.m[j]).T
        yj = solve_triangular(post.chol[j], dx, lower=True, check_finite=False)
        quad[:, j] = (yj * yj).sum(axis=0)
    log_rho = (
        post.e_log_pi[None, :]
        + 0.5 * post.e_log_det[None, :]
        - 0.5 * d * np.log(2.0 * np.pi)
        - 0.5 * (d / post.beta[None, :] + post.nu[None, :] * quad)
    )
    return log_rho


def _normalize_resp(log_rho):
    norm = logsumexp(log_rho, axis=1, keepdims=True)
    return np.exp(log_rho - norm)


def _log_dirichlet_const(alpha: np.ndarray) -> float:
    return float(gammaln(alpha.sum()) - gammaln(alpha).sum())


def _log_wishart_const(logdet_scale: float, nu: float, d: int) -> float:
    """log B(W, nu) for a Wishart with log|W| = logdet_scale."""
    return float(
        -0.5 * nu * logdet_scale
        - 0.5 * nu * d * np.log(2.0)
        - 0.25 * d * (d - 1) * np.log(np.pi)
        - gammaln(0.5 * (nu + 1.0 - np.arange(1, d + 1))).sum()
    )


def _elbo(x, resp, post, prior):
    """Evidence lower bound for the current variational state.

    Evaluated at the given responsibilities and posterior jointly, so the
    data statistics are recomputed from ``resp`` (the posterior may have been
    produced from an earlier responsibility matrix).
    """
    alpha0, beta0, m0, nu0, w0_inv = prior
    n, d = x.shape
    k = post.alpha.shape[0]
    nk = resp.sum(axis=0)
    safe_nk = np.maximum(nk, 1e-300)
    xbar = (resp.T @ x) / safe_nk[:, None]
    xbar = np.where(nk[:, None] > 0, xbar, post.m)
    sk = np.zeros((k, d, d))
    for j in range(k):
        if nk[j] > 0:
            dx = x - xbar[j]
            sk[j] = (resp[:, j][:, None] * dx).T @ dx / safe_nk[j]

    # recurring pieces
    logdet_scale_inv = 2.0 * np.log(np.diagonal(post.chol, axis1=1, axis2=2)).sum(axis=1)
    w_full = np.empty((k, d, d))
    for j in range(k):
        w_full[j] = np.linalg.inv(post.scale_inv[j])
    tr_sw = np.einsum("kij,kji->k", sk, w_full)
    dxm = xbar - post.m
    quad_xm = np.einsum("ki,kij,kj->k", dxm, w_full, dxm)
    dmm = post.m - m0[None, :]
    quad_mm = np.einsum("ki,kij,kj->k", dmm, w_full, dmm)
    tr_w0w = np.einsum("ij,kji->k", w0_inv, w_full)

    sign, logdet_w0_inv = np.linalg.slogdet(w0_inv)
    logdet_w0 = -logdet_w0_inv  # log|W0| with W0 = w0_inv^{-1}

    e_lik = 0.5 * (
        nk
        * (
            post.e_log_det
            - d / post.beta
            - post.nu * tr_sw
            - post.nu * quad_xm
            - d * np.log(2.0 * np.pi)
        )
    ).sum()
    e_pz = float((resp * post.e_log_pi[None, :]).sum())
    e_ppi = _log_dirichlet_const(np.full(k, alpha0)) + (alpha0 - 1.0) * post.e_log_pi.sum()
    e_pmu_lambda = (
        0.5
        * (
            d * np.log(beta0 / (2.0 * np.pi))
            + post.e_log_det
            - d * beta0 / post.beta
            - beta0 * post.nu * quad_mm
        ).sum()
        + k * _log_wishart_const(logdet_w0, nu0, d)
        + 0.5 * (nu0 - d - 1.0) * post.e_log_det.sum()
        - 0.5 * (post.nu * tr_w0w).sum()
    )
    e_qz = float(xlogy(resp, resp).sum())
    e_qpi = float(
        ((post.alpha - 1.0) * post.e_log_pi).sum() + _log_dirichlet_const(post.alpha)
    )
    wishart_entropy = np.array(
        [
            -_log_wishart_const(-logdet_scale_inv[j], post.nu[j], d)
            - 0.5 * (post.nu[j] - d - 1.0) * post.e_log_det[j]
            + 0.5 * post.nu[j] * d
            for j in range(k)
        ]
    )
    e_qmu_lambda = float(
        (
            0.5 * post.e_log_det
            + 0.5 * d * np.log(post.beta / (2.0 * np.pi))
            - 0.5 * d
            - wishart_entropy
        ).sum()
    )
    return e_lik + e_pz + e_ppi + e_pmu_lambda - e_qz - e_qpi - e_qmu_lambda


def fit_mixture(
    x: np.ndarray,
    n_components: int = DEFAULT_MAX_COMPONENTS,
    seed: int = 0,
    max_iter: int = DEFAULT_MAX_ITER,
    rel_tol: float = DEFAULT_REL_TOL,
) -> MixtureModel:
    """Fit a variational-Bayes Gaussian mixture to row vectors ``x``.

    Broad symmetric priors: Dirichlet concentration 1/K, unit mean-precision
    scale, degrees of freedom D+2, and a Wishart scale matched to the data's
    per-dimension variances so the prior expected covariance is diag(var).
    Responsibilities are seeded from distance-weighted sampled centers
    (deterministic for a given ``seed``), the bound is checked every
    iteration, and the loop stops early when its relative change drops
    below ``rel_tol``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise InputError(f"expected (n, d) data, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise InferenceError("mixture input contains non-finite values")
    n, d = x.shape
    k = int(n_components)
    if k < 1:
        raise InputError("n_components must be >= 1")

    alpha0 = 1.0 / k
    beta0 = 1.0
    nu0 = float(d) + 2.0
    m0 = x.mean(axis=0)
    var = x.var(axis=0)
    mean_var = float(var.mean())
    ridge = 1e-6 * (mean_var if mean_var > 0 else 1.0)
    w0_inv = nu0 * np.diag(var) + ridge * np.eye(d)
    prior = (alpha0, beta0, m0, nu0, w0_inv)

    rng = np.random.default_rng(seed)
    resp = _init_resp(x, k, rng)

    trace: list[float] = []
    converged = False
    post = None
    for it in range(max_iter):
        post = _m_step(x, resp, prior)
        resp = _normalize_resp(_log_resp(x, post))
        bound = _elbo(x, resp, post, prior)
        if not np.isfinite(bound):
            raise InferenceError("evidence bound is not finite")
        trace.append(float(bound))
        if len(trace) >= 2:
            prev, cur = trace[-2], trace[-1]
            if abs(cur - prev) <= rel_tol * abs(cur):
                converged = True
                break
    # final parameter refresh so the stored posterior matches the last resp
    post = _m_step(x, resp, prior)

    return MixtureModel(
        alpha=post.alpha,
        beta=post.beta,
        m=post.m,
        nu=post.nu,
        scale_inv=post.scale_inv,
        elbo_trace=trace,
        converged=converged,
        n_iter=len(trace),
        seed=seed,
    )


def responsibilities(model: MixtureModel, x: np.ndarray) -> np.ndarray:
    """Posterior responsibilities of each row of ``x`` under ``model``."""
    x = np.asarray(x, dtype=np.float64)
    post = _Posterior()
    post.alpha = model.alpha
    post.beta = model.beta
    post.m = model.m
    post.nu = model.nu
    post.scale_inv = model.scale_inv
    post.chol = np.linalg.cholesky(model.scale_inv)
    post.e_log_pi = digamma(model.alpha) - digamma(model.alpha.sum())
    d = x.shape[1]
    halves = 0.5 * (model.nu[:, None] + 1.0 - np.arange(1, d + 1)[None, :])
    logdet_scale_inv = 2.0 * np.log(np.diagonal(post.chol, axis1=1, axis2=2)).sum(axis=1)
    post.e_log_det = digamma(halves).sum(axis=1) + d * np.log(2.0) - logdet_scale_inv
    return _normalize_resp(_log_resp(x, post))


# ---------------------------------------------------------------------------
# full pipeline entry points
# ---------------------------------------------------------------------------

def _downsize(lum: np.ndarray, max_side: int) -> np.ndarray:
    h, w = lum.shape
    side = max(h, w)
    if side <= max_side:
        return lum
    scale = max_side / side
    nw = max(1, round(w * scale))
    nh = max(1, round(h * scale))
    return cv2.resize(lum, (nw, nh), interpolation=cv2.INTER_LINEAR)


def mixture_partition(
    maps,
    n_components: int = DEFAULT_MAX_COMPONENTS,
    seed: int = 0,
    downsize_max: int = DEFAULT_DOWNSIZE_MAX,
    max_iter: int = DEFAULT_MAX_ITER,
    rel_tol: float = DEFAULT_REL_TOL,
):
    """Segment a stack of luminance maps with a variational Gaussian mixture.

    The model is fitted to per-pixel luminance vectors from bilinearly
    downsized copies (longest side at most ``downsize_max``) and applied to
    every full-resolution pixel. Components with posterior weight below
    1e-3, and components that win no pixel, are removed; surviving segment
    ids are compacted in component order.

    Returns ``(partition, model)``.
    """
    maps = [np.asarray(m, dtype=np.float64) for m in maps]
    if not maps:
        raise InputError("empty stack")
    shape = maps[0].shape
    if any(m.shape != shape for m in maps):
        raise InputError("luminance maps differ in shape")

    small = [_downsize(m, downsize_max) for m in maps]
    x_fit = np.stack([m.ravel() for m in small], axis=1)
    model = fit_mixture(x_fit, n_components, seed, max_iter, rel_tol)

    x_full = np.stack([m.ravel() for m in maps], axis=1)
    resp = responsibilities(model, x_full)

    keep = np.flatnonzero(model.weights >= PRUNE_WEIGHT)
    if keep.size == 0:
        raise InferenceError("all mixture components pruned")
    labels_kept = resp[:, keep].argmax(axis=1)
    part = _compact(labels_kept.reshape(shape), keep.size)
    return part, model
