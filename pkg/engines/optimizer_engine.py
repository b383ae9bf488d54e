import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

import config
from engines.geometry_engine import MetricParam, as_point_rows, invert_param
from engines.partition_engine import (
    data_term,
    half_dimension,
    log_partition_gradient_weights,
    log_partition_weights,
)
from errors import DomainError, NumericError

LOGGER = logging.getLogger(__name__)

# Smallest coordinate an iterate may reach before a step is rejected
MIN_COORD = 1e-300


@dataclass(frozen=True)
class OptimizerConfig:
    step: float = config.DEFAULT_STEP
    backtrack: float = config.DEFAULT_BACKTRACK
    tol: float = config.DEFAULT_TOL
    max_iter: int = config.DEFAULT_MAX_ITER
    seed: int = config.DEFAULT_SEED

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"Initial step must be positive, got {self.step}")
        if not 0 < self.backtrack < 1:
            raise ValueError(f"Backtracking factor must lie in (0, 1), got {self.backtrack}")
        if not self.tol > 0:
            raise ValueError(f"Tolerance must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")


@dataclass(frozen=True, eq=False)
class FitResult:
    theta_hat: MetricParam
    lambda_metric: MetricParam
    trace: tuple
    iterations: int
    converged: bool
    seed: int = config.DEFAULT_SEED

    @property
    def final_loglikelihood(self):
        return self.trace[-1]


def _loglikelihood(theta, rows, k):
    total, _ = data_term(theta, rows)
    return k * total - rows.shape[0] * log_partition_weights(theta).value


def _mean_gradient(theta, rows, k):
    """Gradient of the mean loglikelihood: k/N sum_j x_j / (x_j . theta) - grad log Z~."""
    _, data_grad = data_term(theta, rows)
    grad = k * data_grad / rows.shape[0] - log_partition_gradient_weights(theta)
    if not np.all(np.isfinite(grad)):
        raise NumericError("Non-finite loglikelihood gradient")
    return grad


def _centred(grad, theta):
    """Component of the gradient that moves theta; the theta-weighted mean is a pure normalization shift."""
    return grad - theta @ grad


def estimate_theta(points, cfg=None):
    """
    Maximum-likelihood theta under the inverse-volume model by exponentiated-gradient
    ascent, started at the uniform parameter.

    Each step is theta_i <- theta_i exp(eta g_i / |g|_inf) / norm with g the centred
    gradient of the mean loglikelihood, so the first trial moves no coordinate by more
    than a factor e^eta. eta is multiplied by cfg.backtrack until the loglikelihood does
    not decrease, and the next iteration starts from min(cfg.step, 2 eta).
    """
    cfg = cfg or OptimizerConfig()
    rows = as_point_rows(points)
    if np.any(rows <= 0):
        raise DomainError("Optimizer needs interior data points (use a positive smoothing pseudocount)")
    k = half_dimension(rows.shape[1])

    theta = np.full(rows.shape[1], 1.0 / rows.shape[1])
    ll = _loglikelihood(theta, rows, k)
    if not np.isfinite(ll):
        raise NumericError("Non-finite loglikelihood at the uniform start")
    trace = [ll]
    eta = cfg.step
    converged = False
    iterations = 0

    for iterations in range(1, cfg.max_iter + 1):
        grad = _centred(_mean_gradient(theta, rows, k), theta)
        scale = np.abs(grad).max()
        if scale < config.GRAD_TOL:
            LOGGER.debug("iteration %d: gradient %.3g below tolerance", iterations, scale)
            converged = True
            break
        direction = grad / scale

        eta = min(cfg.step, 2.0 * eta)
        candidate = None
        for _ in range(config.MAX_BACKTRACKS):
            log_cand = np.log(theta) + eta * direction
            cand = np.exp(log_cand - logsumexp(log_cand))
            if cand.min() > MIN_COORD:
                cand_ll = _loglikelihood(cand, rows, k)
                if cand_ll >= ll:
                    candidate = cand
                    break
            eta *= cfg.backtrack

        if candidate is None:
            LOGGER.debug("iteration %d: no ascent step found, stopping", iterations)
            converged = True
            break

        improvement = (cand_ll - ll) / max(abs(ll), np.finfo(float).tiny)
        theta, ll = candidate, cand_ll
        trace.append(ll)
        LOGGER.debug("iteration %d: loglikelihood %.12g, step %.3g", iterations, ll, eta)
        if improvement < cfg.tol:
            converged = True
            break

    theta_hat = MetricParam.from_values(theta)
    LOGGER.info(
        "Fit %s after %d iterations, loglikelihood %.10g",
        "converged" if converged else "stopped at max_iter", iterations, ll,
    )
    return FitResult(
        theta_hat=theta_hat,
        lambda_metric=invert_param(theta_hat),
        trace=tuple(trace),
        iterations=iterations,
        converged=converged,
        seed=cfg.seed,
    )


def learned_metric_param(fit):
    """The metric parameter is the group inverse of theta_hat: common directions get small weight."""
    return invert_param(fit.theta_hat)
