"""
Inverse-volume density on the simplex and its normalization term.

    p(x; lambda) = (1/Z) (x . lambda)^k prod_i sqrt(x_i),   k = (n+1)/2

Expanding (x . lambda)^k and integrating each Dirichlet monomial gives

    Z = k! / Gamma(k + 3(n+1)/2) * Z~(lambda)
    Z~(lambda) = sum over weak compositions a of k into n+1 parts of prod_j c_{a_j} lambda_j^{a_j}
    c_m = Gamma(m + 3/2) / Gamma(m + 1)

Z~ is the last entry of a chain of n+1 truncated linear convolutions, filled row by
row from i = n+1 down to 1 (B_i = (c_m lambda_i^m)_m * B_{i+1}). Each row is stored
rescaled to max 1 with its log scale kept aside, and all series share one
exponential tilt z so that the entry B_{1,k} stays close to the row maxima.
"""
import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import fft, optimize
from scipy.special import gammaln

import config
from engines.geometry_engine import as_metric_param, as_point_rows, as_simplex_point
from errors import DomainError, NumericError, UnsupportedDimensionError

LOGGER = logging.getLogger(__name__)


# --- Domain Types ---

@dataclass(frozen=True, eq=False)
class CoefficientSeries:
    """c_0..c_k stored as values * exp(log_scale)."""
    k: int
    values: np.ndarray
    log_scale: float

    @property
    def log_values(self):
        return np.log(self.values) + self.log_scale

    @property
    def c(self):
        return np.exp(self.log_values)


@dataclass(frozen=True, eq=False)
class ConvolutionTable:
    """
    rows[i - 1] holds B_{i,0..k} / exp(log_scales[i - 1]); series were built from the
    tilted weights z * w_i, so B_{1,k} = exp(log_scales[0]) * rows[0, k] equals z^k Z~(w).
    """
    rows: np.ndarray
    log_scales: np.ndarray
    log_tilt: float
    k: int

    @property
    def log_total(self):
        """log Z~ of the untilted weights."""
        last = self.rows[0, self.k]
        if last <= 0:
            raise NumericError("Partition table entry B_1k underflowed to zero")
        return float(np.log(last) + self.log_scales[0] - self.k * self.log_tilt)


@dataclass(frozen=True)
class LogPartition:
    value: float
    n: int
    k: int


# --- Coefficients & Convolution ---

def coefficient_series(k):
    """c_m = Gamma(m + 3/2) / Gamma(m + 1) for m = 0..k, via log-Gamma differences."""
    if k < 0:
        raise DomainError(f"k must be nonnegative, got {k}")
    m = np.arange(k + 1, dtype=float)
    log_c = gammaln(m + 1.5) - gammaln(m + 1.0)
    offset = float(log_c.max())
    return CoefficientSeries(k, np.exp(log_c - offset), offset)


def convolve(a, b, mode="auto", length=None):
    """
    Linear convolution (a * b)_j = sum_m a_m b_{j-m}, truncated to `length` entries.

    mode: "direct" (O(L^2)), "fft" (O(L log L)) or "auto" (FFT once the longer
    input reaches FFT_THRESHOLD).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise DomainError("Cannot convolve an empty sequence")
    full = a.size + b.size - 1
    length = full if length is None else min(int(length), full)
    a, b = a[:length], b[:length]

    if mode == "auto":
        mode = "fft" if max(a.size, b.size) >= config.FFT_THRESHOLD else "direct"
    if mode == "direct":
        return np.convolve(a, b)[:length]
    if mode == "fft":
        size = fft.next_fast_len(a.size + b.size - 1, real=True)
        spectrum = fft.rfft(a, size) * fft.rfft(b, size)
        return fft.irfft(spectrum, size)[:length]
    raise ValueError(f"Unknown convolution mode: {mode!r}")


def _rescaled(log_values):
    """exp(log_values) divided by its maximum, plus the log of that maximum."""
    top = float(np.max(log_values))
    return np.exp(log_values - top), top


def _positive_part(row):
    """Clips FFT round-off below zero and rescales to max 1."""
    row = np.maximum(row, 0.0)
    top = row.max()
    if not top > 0 or not np.isfinite(top):
        raise NumericError("Convolution row lost all mass")
    return row / top, float(np.log(top))


# --- Dimension & Tilt ---

def half_dimension(size):
    """k = (n+1)/2 for a weight vector of n+1 entries; n must be odd."""
    if size < 2 or size % 2:
        raise UnsupportedDimensionError(
            f"Likelihood engine needs n = 2k - 1 (an even number of coordinates), got n = {size - 1}; "
            "pad the vocabulary with a dummy term"
        )
    return size // 2


def _weights(w):
    w = np.asarray(w.coords if hasattr(w, "coords") else w, dtype=float)
    if w.ndim != 1 or not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise DomainError("Partition weights must be a finite, strictly positive vector")
    return w


def _log_tilt(w, k):
    """
    log z where z solves sum_i 1.5 w_i z / (1 - w_i z) = k: the expected total degree
    of the tilted series (c_m (z w_i)^m) then matches k, which keeps B_{1,k} near the mode.
    """
    top = w.max()
    ratios = w / top

    def excess(t):
        return np.sum(1.5 * ratios * t / (1.0 - ratios * t)) - k

    upper = 1.0 - 0.75 / (k + 1.5)
    t = optimize.brentq(excess, 0.0, upper, xtol=1e-14, rtol=1e-12)
    return float(np.log(t) - np.log(top))


def _tilted_series(log_c, log_w):
    """Rows of log(c_m (z w_i)^m) for every coordinate i."""
    m = np.arange(log_c.size, dtype=float)
    return log_c[None, :] + np.outer(log_w, m)


# --- Partition Function ---

def _table_rows(w, k, log_tilt):
    """
    Yields (i, row, log_scale) for i = n, n-1, ..., 0, where row holds B_{i+1,0..k}
    divided by exp(log_scale): the convolution of the tilted series i..n.
    """
    log_series = _tilted_series(coefficient_series(k).log_values, np.log(w) + log_tilt)
    row, log_scale = _rescaled(log_series[-1])
    yield w.size - 1, row, log_scale
    for i in range(w.size - 2, -1, -1):
        series, series_scale = _rescaled(log_series[i])
        row, row_scale = _positive_part(convolve(series, row, length=k + 1))
        log_scale += series_scale + row_scale
        yield i, row, log_scale


def partition_table(w):
    """Fills the full convolution table for strictly positive weights w (any scale)."""
    w = _weights(w)
    k = half_dimension(w.size)
    log_tilt = _log_tilt(w, k)
    rows = np.empty((w.size, k + 1))
    log_scales = np.empty(w.size)
    for i, row, log_scale in _table_rows(w, k, log_tilt):
        rows[i], log_scales[i] = row, log_scale
    return ConvolutionTable(rows, log_scales, log_tilt, k)


def log_partition_weights(w):
    """
    log Z~(w) for any strictly positive weight vector; Z~ is homogeneous of degree k,
    so log Z~(c w) = k log c + log Z~(w). Keeps only the current row, O(k) memory.
    """
    w = _weights(w)
    k = half_dimension(w.size)
    log_tilt = _log_tilt(w, k)
    for _, row, log_scale in _table_rows(w, k, log_tilt):
        pass
    table = ConvolutionTable(row[None, :], np.array([log_scale]), log_tilt, k)
    return LogPartition(table.log_total, w.size - 1, k)


def log_partition(lam):
    """log Z~(lambda) in O(n^2 log n) via the convolution table."""
    lam = as_metric_param(lam)
    return log_partition_weights(lam.coords)


def _weak_compositions(total, parts):
    """All tuples of `parts` nonnegative integers summing to `total` (stars and bars)."""
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        comp = []
        for bar in bars:
            comp.append(bar - prev - 1)
            prev = bar
        comp.append(total + parts - 2 - prev)
        yield comp


def log_partition_bruteforce(lam):
    """Test oracle: enumerates every weak composition of k into n+1 parts."""
    w = _weights(as_metric_param(lam))
    k = half_dimension(w.size)
    n_terms = math.comb(k + w.size - 1, w.size - 1)
    if n_terms > config.BRUTEFORCE_MAX_TERMS:
        raise DomainError(f"Brute-force enumeration would need {n_terms} terms (limit {config.BRUTEFORCE_MAX_TERMS})")

    log_c = coefficient_series(k).log_values
    log_w = np.log(w)
    log_terms = np.array([
        float(np.sum(log_c[comp] + np.asarray(comp) * log_w))
        for comp in _weak_compositions(k, w.size)
    ])
    top = log_terms.max()
    total = math.fsum(np.exp(log_terms - top))
    return LogPartition(float(top + math.log(total)), w.size - 1, k)


def log_partition_gradient_weights(w):
    """
    d log Z~ / d w_i for strictly positive weights, via leave-one-out convolutions.

    With P_i the convolution of series 1..i-1 and S_i = B_{i+1} (series i+1..n+1),
        dZ~/dw_i = sum_m m c_m w_i^(m-1) (P_i * S_i)_{k-m}.
    """
    w = _weights(w)
    table = partition_table(w)
    k = table.k
    coeffs = coefficient_series(k)
    tilted = np.log(w) + table.log_tilt
    log_series = _tilted_series(coeffs.log_values, tilted)
    log_total = float(np.log(table.rows[0, k]) + table.log_scales[0])

    m = np.arange(1, k + 1, dtype=float)
    gradient = np.empty(w.size)
    prefix, prefix_scale = np.zeros(k + 1), 0.0
    prefix[0] = 1.0
    for i in range(w.size):
        if i + 1 < w.size:
            suffix, suffix_scale = table.rows[i + 1], table.log_scales[i + 1]
        else:
            suffix, suffix_scale = prefix * 0.0, 0.0
            suffix[0] = 1.0
        leave_one_out, loo_scale = _positive_part(convolve(prefix, suffix, length=k + 1))

        # derivative series m c_m (z w_i)^(m-1), m >= 1
        deriv, deriv_scale = _rescaled(np.log(m) + coeffs.log_values[1:] + (m - 1.0) * tilted[i])
        inner = float(deriv @ leave_one_out[k - 1::-1])
        with np.errstate(divide="ignore"):
            log_inner = np.log(inner) + deriv_scale + loo_scale + prefix_scale + suffix_scale
        gradient[i] = np.exp(log_inner - log_total + table.log_tilt)

        series, series_scale = _rescaled(log_series[i])
        prefix, step_scale = _positive_part(convolve(prefix, series, length=k + 1))
        prefix_scale += series_scale + step_scale

    if not np.all(np.isfinite(gradient)):
        raise NumericError("Non-finite partition gradient")
    return gradient


def log_partition_gradient(lam):
    """Gradient of log Z~ with respect to the (unconstrained) coordinates of lambda."""
    return log_partition_gradient_weights(as_metric_param(lam).coords)


# --- Density & Likelihood ---

def log_normalizer(lam):
    """log Z = log Z~ + log Gamma(k+1) - log Gamma(k + 3(n+1)/2)."""
    part = log_partition(lam)
    n, k = part.n, part.k
    return part.value + gammaln(k + 1.0) - gammaln(k + 1.5 * (n + 1))


def log_density(lam, x):
    """Exact log p(x; lambda) with respect to Lebesgue measure on the first n coordinates."""
    lam, x = as_metric_param(lam), as_simplex_point(x)
    if lam.coords.size != x.coords.size:
        raise DomainError(f"Dimension mismatch: {lam.coords.size} vs {x.coords.size}")
    if not x.interior:
        raise DomainError("log density is -inf on the boundary of the simplex")
    k = half_dimension(x.coords.size)
    dot = float(x.coords @ lam.coords)
    return k * np.log(dot) + 0.5 * np.sum(np.log(x.coords)) - log_normalizer(lam)


def data_term(lam, points):
    """Sum over documents of log(x_j . lambda) and its gradient sum_j x_j / (x_j . lambda)."""
    lam = as_metric_param(lam)
    rows = as_point_rows(points)
    if rows.shape[1] != lam.coords.size:
        raise DomainError(f"Dimension mismatch: data has {rows.shape[1]} coordinates, lambda {lam.coords.size}")
    if np.any(rows <= 0):
        raise DomainError("Likelihood needs interior data points")
    dots = rows @ lam.coords
    return float(np.sum(np.log(dots))), (rows / dots[:, None]).sum(axis=0)


def loglikelihood(lam, points):
    """
    k sum_j log(x_j . lambda) - N log Z~(lambda).

    The x-only term and the Gamma constants are dropped; they do not move the argmax.
    """
    lam = as_metric_param(lam)
    k = half_dimension(lam.coords.size)
    rows = as_point_rows(points)
    total, _ = data_term(lam, rows)
    return k * total - rows.shape[0] * log_partition(lam).value
