import numpy as np
import pandas as pd
from scipy import stats


def calculate_distribution_stats(series):
    """Mean, sample standard deviation (0 for a single value) and count of a series."""
    series = pd.Series(series, dtype=float)
    return {
        "Mean": float(series.mean()),
        "Std Dev": float(series.std()) if len(series) > 1 else 0.0,
        "Count": len(series),
    }


def pooled_std(stds):
    """Root mean square of per-group standard deviations (equal group sizes)."""
    stds = np.asarray(stds, dtype=float)
    return float(np.sqrt(np.mean(stds ** 2)))


def jaccard(a, b):
    a, b = set(a), set(b)
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def rank_value_trend(scores):
    """
    Least-squares line of log(value) against log(rank) for the positive scores sorted
    in decreasing order. A high r_squared means the rank-value curve is close to a
    power law.
    """
    values = np.sort(np.asarray(scores, dtype=float))[::-1]
    values = values[values > 0]
    if values.size < 2:
        return {"slope": float("nan"), "intercept": float("nan"), "r_squared": float("nan")}
    ranks = np.arange(1, values.size + 1)
    fit = stats.linregress(np.log(ranks), np.log(values))
    return {"slope": float(fit.slope), "intercept": float(fit.intercept), "r_squared": float(fit.rvalue ** 2)}
