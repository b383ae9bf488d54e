"""
Geometry of the multinomial simplex P_n.

Points of P_n are probability vectors over n+1 outcomes. The transformation
group F_lambda(x)_i = x_i lambda_i / (x . lambda) acts on the interior, and
composing it with the coordinatewise square root sends P_n onto the positive
orthant of the unit sphere, where geodesics are great circles. Everything in
this module follows the unit-sphere convention: distances are acos(.) without
a factor 2 and det G carries the constant 4^-n.
"""
from dataclasses import dataclass

import numpy as np

import config
from errors import DomainError


# --- Domain Types ---

def _frozen(values):
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SimplexPoint:
    """A point of P_n: n+1 nonnegative reals summing to 1."""
    coords: np.ndarray

    @classmethod
    def from_values(cls, values):
        """Validates and renormalizes values whose sum is within SIMPLEX_TOL of 1."""
        arr = np.asarray(values, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise DomainError(f"Simplex point needs a 1-d vector of at least 2 coordinates, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise DomainError(f"Simplex coordinates must be finite and nonnegative: {arr}")
        total = arr.sum()
        if abs(total - 1.0) > config.SIMPLEX_TOL:
            raise DomainError(f"Simplex coordinates sum to {total!r}, expected 1")
        return cls(_frozen(arr / total))

    @property
    def n(self):
        return self.coords.size - 1

    @property
    def interior(self):
        return bool(np.all(self.coords > 0))


@dataclass(frozen=True, eq=False)
class MetricParam:
    """An interior simplex point used as a transformation or metric parameter."""
    coords: np.ndarray

    @classmethod
    def from_values(cls, values):
        point = SimplexPoint.from_values(values)
        if not point.interior:
            raise DomainError(f"Metric parameter must lie in the interior of the simplex: {point.coords}")
        return cls(point.coords)

    @classmethod
    def uniform(cls, n):
        return cls(_frozen(np.full(n + 1, 1.0 / (n + 1))))

    @property
    def n(self):
        return self.coords.size - 1


@dataclass(frozen=True, eq=False)
class SpherePoint:
    """A point of the positive unit sphere S_n^+."""
    coords: np.ndarray


@dataclass(frozen=True, eq=False)
class TangentJacobian:
    """Push-forward of the tangent basis (rows of U) through the sphere map."""
    entries: np.ndarray
    point: SimplexPoint
    param: MetricParam


@dataclass(frozen=True, eq=False)
class GramMatrix:
    entries: np.ndarray


def as_simplex_point(x):
    return x if isinstance(x, SimplexPoint) else SimplexPoint.from_values(x)


def as_metric_param(lam):
    return lam if isinstance(lam, MetricParam) else MetricParam.from_values(lam)


def as_point_rows(points):
    """Stacks simplex points (or validates an (N, n+1) array) into a float matrix with unit row sums."""
    if isinstance(points, np.ndarray):
        rows = np.array(points, dtype=float)
    else:
        rows = np.array([as_simplex_point(p).coords for p in points], dtype=float)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise DomainError(f"Expected a nonempty (N, n+1) collection of points, got shape {rows.shape}")
    if not np.all(np.isfinite(rows)) or np.any(rows < 0):
        raise DomainError("Point rows must be finite and nonnegative")
    sums = rows.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > config.SIMPLEX_TOL)
    if bad.size:
        raise DomainError(f"Row {bad[0]} sums to {sums[bad[0]]!r}, expected 1")
    return rows / sums[:, None]


def _check_same_dimension(*points):
    sizes = {p.coords.size for p in points}
    if len(sizes) > 1:
        raise DomainError(f"Dimension mismatch: {sorted(sizes)}")


def _require_interior(x):
    if not x.interior:
        raise DomainError(f"Operation needs an interior point, got {x.coords}")


def _clamped_acos(value):
    return float(np.arccos(np.clip(value, -1.0, 1.0)))


# --- Transformation Group ---

def apply_transform(lam, x):
    """F_lambda(x)_i = x_i lambda_i / (x . lambda)."""
    lam, x = as_metric_param(lam), as_simplex_point(x)
    _check_same_dimension(lam, x)
    scaled = x.coords * lam.coords
    dot = scaled.sum()
    if dot <= 0:
        raise DomainError("x . lambda = 0; the transformation is undefined at this boundary point")
    return SimplexPoint(_frozen(scaled / dot))


def invert_param(lam):
    """Parameter eta of the inverse transformation, eta_i proportional to 1 / lambda_i."""
    lam = as_metric_param(lam)
    recip = 1.0 / lam.coords
    return MetricParam(_frozen(recip / recip.sum()))


def compose_params(lam, mu):
    """Parameter nu with F_nu = F_lam o F_mu; nu_i is proportional to lam_i mu_i."""
    lam, mu = as_metric_param(lam), as_metric_param(mu)
    _check_same_dimension(lam, mu)
    prod = lam.coords * mu.coords
    return MetricParam(_frozen(prod / prod.sum()))


def sphere_map(lam, x):
    """Square root of F_lambda(x): the flattening map onto S_n^+."""
    return SpherePoint(_frozen(np.sqrt(apply_transform(lam, x).coords)))


def sphere_map_rows(lam, points):
    """Row-wise sphere map of an (N, n+1) array of simplex points."""
    lam = as_metric_param(lam)
    points = np.asarray(points, dtype=float)
    scaled = points * lam.coords
    dots = scaled.sum(axis=1, keepdims=True)
    if np.any(dots <= 0):
        raise DomainError("x . lambda = 0 for at least one row")
    return np.sqrt(scaled / dots)


# --- Distances ---

def fisher_distance(x, y):
    """Great-circle distance between R(x) and R(y); value in [0, pi/2]."""
    x, y = as_simplex_point(x), as_simplex_point(y)
    _check_same_dimension(x, y)
    return _clamped_acos(np.sum(np.sqrt(x.coords * y.coords)))


def geodesic_distance(lam, x, y):
    """Geodesic distance under the pull-back metric F_lambda^* J."""
    return fisher_distance(apply_transform(lam, x), apply_transform(lam, y))


# --- Tangent Structure ---

def basis_matrix(n):
    """Rows e_i - e_{n+1}, a basis of the tangent space of P_n."""
    return np.hstack([np.eye(n), -np.ones((n, 1))])


def pushforward_jacobian(lam, x):
    """
    Rows are the push-forwards of the rows of U through the sphere map:

        J = U (I - lambda x^T / (x . lambda)) Lambda,
        Lambda_ii = sqrt(lambda_i / x_i) / (2 sqrt(x . lambda))
    """
    lam, x = as_metric_param(lam), as_simplex_point(x)
    _check_same_dimension(lam, x)
    _require_interior(x)

    dot = float(x.coords @ lam.coords)
    diag = np.sqrt(lam.coords / x.coords) / (2.0 * np.sqrt(dot))
    projector = np.eye(x.n + 1) - np.outer(lam.coords, x.coords) / dot
    entries = (basis_matrix(x.n) @ projector) * diag
    return TangentJacobian(_frozen(entries), x, lam)


def gram_matrix(lam, x):
    jac = pushforward_jacobian(lam, x).entries
    return GramMatrix(_frozen(jac @ jac.T))


def log_volume_element(lam, x):
    """
    Half the log determinant of the Gram matrix, in closed form:

        0.5 * (-n log 4 + sum log(lambda_i / x_i) - (n+1) log(x . lambda))
    """
    lam, x = as_metric_param(lam), as_simplex_point(x)
    _check_same_dimension(lam, x)
    _require_interior(x)
    n = x.n
    dot = float(x.coords @ lam.coords)
    return 0.5 * (-n * np.log(4.0) + np.sum(np.log(lam.coords / x.coords)) - (n + 1) * np.log(dot))


def inverse_volume_element(lam, x):
    return float(np.exp(-log_volume_element(lam, x)))
