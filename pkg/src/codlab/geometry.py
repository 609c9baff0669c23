"""Flat-torus geometry: wrapped distances, projected balls, uniform ball sampling.

Everything downstream (fooling functions, quadrature operators, point
selection) is built on the metric of the quotient R^d / Z^d restricted to
the unit cube.  Radii are restricted to < 1/2 so the nearest-image wrap is
a valid representative of the quotient distance.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gamma, pi

import numpy as np

__all__ = [
    "ProjectedBall",
    "torus_distance",
    "torus_distances",
    "nearest_torus_distances",
    "in_projected_ball",
    "unit_ball_volume",
    "sample_uniform_ball",
    "sample_projected_ball",
]


def _as_point(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.ndim != 1:
        raise ValueError(f"expected a single point, got shape {x.shape}")
    return x


@dataclass(frozen=True)
class ProjectedBall:
    """Ball of the flat torus projected onto [0,1]^d.

    The radius must be < 1/2 so that membership can be decided with the
    nearest-image convention.
    """

    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = _as_point(self.center)
        object.__setattr__(self, "center", center)
        if not (0.0 < self.radius < 0.5):
            raise ValueError(f"radius must lie in (0, 1/2), got {self.radius}")
        if np.any(center < 0.0) or np.any(center >= 1.0):
            raise ValueError("center coordinates must lie in [0, 1)")

    @property
    def dim(self) -> int:
        return self.center.shape[0]


def torus_distance(x, y) -> float:
    """Distance on the flat torus: each coordinate difference wrapped to [-1/2, 1/2]."""
    x, y = _as_point(x), _as_point(y)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    diff = x - y
    diff -= np.round(diff)
    return float(np.linalg.norm(diff))


def torus_distances(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Pairwise wrapped distances, shape (len(points), len(centers)).

    Vectorized workhorse for fooling-function evaluation; inputs are
    (N, d) and (n, d) arrays.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if points.shape[1] != centers.shape[1]:
        raise ValueError("dimension mismatch between points and centers")
    diff = points[:, None, :] - centers[None, :, :]
    diff -= np.round(diff)
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def nearest_torus_distances(points: np.ndarray,
                            centers: np.ndarray) -> np.ndarray:
    """Wrapped distance from each point to its nearest center, shape (N,).

    Uses a periodic KD-tree, so the cost per query is logarithmic in the
    number of centers instead of linear.
    """
    from scipy.spatial import cKDTree
    points = np.atleast_2d(np.asarray(points, dtype=float))
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if points.shape[1] != centers.shape[1]:
        raise ValueError("dimension mismatch between points and centers")
    tree = cKDTree(np.mod(centers, 1.0), boxsize=1.0)
    dist, _ = tree.query(np.mod(points, 1.0), k=1, workers=-1)
    return np.asarray(dist, dtype=float)


def in_projected_ball(x, ball: ProjectedBall) -> bool:
    """Membership in the projected ball via the wrapped metric."""
    return torus_distance(x, ball.center) <= ball.radius


def unit_ball_volume(d: int) -> float:
    """Volume of the Euclidean unit ball in R^d: pi^(d/2) / Gamma(d/2 + 1)."""
    if d < 0:
        raise ValueError("dimension must be nonnegative")
    return pi ** (d / 2.0) / gamma(d / 2.0 + 1.0)


def sample_uniform_ball(center, radius: float, rng: np.random.Generator,
                        size: int | None = None) -> np.ndarray:
    """Uniform samples from the Euclidean ball of given center and radius.

    Uses the standard normal-direction / radial-power construction.  With
    ``size=None`` returns a single point of shape (d,), otherwise (size, d).
    """
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    center = _as_point(center)
    d = center.shape[0]
    n = 1 if size is None else size
    direction = rng.standard_normal((n, d))
    norms = np.linalg.norm(direction, axis=1, keepdims=True)
    # regenerate the (measure-zero) degenerate draws
    bad = norms[:, 0] == 0.0
    while np.any(bad):
        direction[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(direction, axis=1, keepdims=True)
        bad = norms[:, 0] == 0.0
    radii = radius * rng.random((n, 1)) ** (1.0 / d)
    points = center[None, :] + radii * direction / norms
    return points[0] if size is None else points


def sample_projected_ball(ball: ProjectedBall, rng: np.random.Generator,
                          size: int | None = None) -> np.ndarray:
    """Uniform samples from a projected ball: sample the Euclidean ball, wrap mod 1."""
    pts = sample_uniform_ball(ball.center, ball.radius, rng, size=size)
    return np.mod(pts, 1.0)
