"""Inverse volume element and geodesic distance along P_1 for a handful of metric parameters."""
import numpy as np
import pandas as pd

import config
from engines.geometry_engine import as_metric_param, geodesic_distance, inverse_volume_element
from errors import DomainError

CORNER = (0.0, 1.0)


def volume_profile(lambdas=None, grid=config.PROFILE_GRID):
    """
    One row per (lambda, x) with x = (t, 1 - t) on `grid` interior points t = i / (grid + 1).
    distance_from_corner is the geodesic distance to x = (0, 1) under the same lambda.
    """
    lambdas = config.PROFILE_LAMBDAS if lambdas is None else lambdas
    if grid < 1:
        raise DomainError(f"Profile grid needs at least one point, got {grid}")
    ts = np.arange(1, grid + 1) / (grid + 1)

    frames = []
    for lam in lambdas:
        lam = as_metric_param(lam)
        if lam.n != 1:
            raise DomainError(f"Profiles live on P_1; got a parameter with {lam.coords.size} coordinates")
        points = [np.array([t, 1.0 - t]) for t in ts]
        frames.append(pd.DataFrame({
            "lambda_1": lam.coords[0],
            "x_1": ts,
            "inverse_volume": [inverse_volume_element(lam, x) for x in points],
            "distance_from_corner": [geodesic_distance(lam, x, CORNER) for x in points],
        }))
    return pd.concat(frames, ignore_index=True)[config.COLS_PROFILE]
