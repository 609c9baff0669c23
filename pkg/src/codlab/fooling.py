"""Smooth fooling functions for ball-average quadrature rules.

Given n centers on the torus and a radius eps_n = theta * n^(-1/d), the
witness is a C^r function that vanishes on every projected ball of radius
eps_n around the centers, equals a known plateau value away from them, and
still integrates to at least K * n^(-r/d) over the cube.  It is realized
as a cutoff of the distance-to-centers function convolved r times with a
uniform ball kernel, then rescaled into the C^r unit ball.

The r-fold convolution is evaluated by Monte Carlo: the kernel variable is
a sum of r independent uniform draws from the ball of radius rho/r.  Two
regions evaluate exactly for every kernel sample, so the vanishing and
plateau identities hold without tolerance.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    ProjectedBall,
    nearest_torus_distances,
    sample_projected_ball,
    sample_uniform_ball,
    unit_ball_volume,
)

__all__ = [
    "FoolingSpec",
    "FoolingFunction",
    "k_const",
    "tau",
    "k_theta",
    "h_cut",
    "eval_fooling",
    "eval_fooling_batch",
    "verify_vanishing",
    "verify_integral",
    "verify_cr_norm",
]

DEFAULT_MC_SAMPLES = 4096


def k_const(d: int) -> float:
    """Ratio 2 * omega_{d-1} / omega_d controlling the smoothing derivative loss."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return 2.0 * unit_ball_volume(d - 1) / unit_ball_volume(d)


def tau(d: int, r: int) -> float:
    """Largest admissible scale constant for the radius eps_n = theta * n^(-1/d)."""
    if d < 1 or r < 1:
        raise ValueError("d and r must be positive integers")
    return min((1.0 / 21.0) * (1.0 / (2.0 * unit_ball_volume(d))) ** (1.0 / d),
               k_const(d))


def k_theta(theta: float, d: int, r: int) -> float:
    """Constant in the integral lower bound K * n^(-r/d): theta^r / (2 k_d^r r^r)."""
    t = tau(d, r)
    if not (0.0 < theta <= t + 1e-15):
        raise ValueError(f"theta must lie in (0, tau]; theta={theta}, tau={t}")
    return theta ** r / (2.0 * k_const(d) ** r * r ** r)


@dataclass(frozen=True)
class FoolingSpec:
    """Centers and radii defining one fooling function.

    rho (kernel support) and rho_prime (cutoff width) are tied to eps_n as
    rho = eps_n, rho_prime = 3 * eps_n, so the excluded region has total
    width 2*rho_prime + rho = 7*eps_n.
    """

    points: np.ndarray
    d: int
    r: int
    theta: float

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        object.__setattr__(self, "points", pts)
        if pts.shape[0] < 1 or pts.shape[1] != self.d:
            raise ValueError(f"points must have shape (n, {self.d}), got {pts.shape}")
        if self.r < 1 or not self.r < self.d / 2:
            raise ValueError(f"need 1 <= r < d/2, got r={self.r}, d={self.d}")
        t = tau(self.d, self.r)
        if not (0.0 < self.theta <= t + 1e-15):
            raise ValueError(f"theta={self.theta} outside (0, tau={t}]")
        if self.rho > k_const(self.d) * self.r:
            raise ValueError("rho exceeds k_d * r; C^r bound would fail")
        if 2 * self.rho_prime + self.rho >= 0.5:
            raise ValueError("7 * eps_n must stay below 1/2")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def eps_n(self) -> float:
        return self.theta * self.n ** (-1.0 / self.d)

    @property
    def rho(self) -> float:
        return self.eps_n

    @property
    def rho_prime(self) -> float:
        return 3.0 * self.eps_n


def h_cut(x, spec: FoolingSpec) -> float:
    """Cutoff min{1, max(0, dist(x, centers) - rho') / rho'}; (1/rho')-Lipschitz."""
    return float(_h_cut_batch(np.atleast_2d(np.asarray(x, dtype=float)), spec)[0])


def _h_cut_batch(points: np.ndarray, spec: FoolingSpec) -> np.ndarray:
    mind = nearest_torus_distances(points, spec.points)
    return np.clip((mind - spec.rho_prime) / spec.rho_prime, 0.0, 1.0)


@dataclass(frozen=True)
class FoolingFunction:
    """Monte Carlo evaluable fooling function psi with its C^r scaling.

    Evaluation at a single point is deterministic given (point, base_seed,
    mc_samples): the kernel stream seed is derived from the base seed and a
    hash of the point's coordinates.
    """

    spec: FoolingSpec
    mc_samples: int = DEFAULT_MC_SAMPLES
    base_seed: int = 0

    def __post_init__(self):
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be positive")

    @property
    def scale(self) -> float:
        return (self.spec.eps_n / (k_const(self.spec.d) * self.spec.r)) ** self.spec.r

    def __call__(self, x) -> float:
        return eval_fooling(x, self)

    def to_json(self) -> str:
        return json.dumps({
            "points": self.spec.points.tolist(),
            "d": self.spec.d,
            "r": self.spec.r,
            "theta": self.spec.theta,
            "seed": self.base_seed,
            "mc_samples": self.mc_samples,
        })

    @classmethod
    def from_json(cls, text: str) -> "FoolingFunction":
        data = json.loads(text)
        spec = FoolingSpec(points=np.asarray(data["points"]), d=data["d"],
                           r=data["r"], theta=data["theta"])
        return cls(spec=spec, mc_samples=data["mc_samples"], base_seed=data["seed"])


def _point_rng(x: np.ndarray, base_seed: int) -> np.random.Generator:
    digest = hashlib.blake2b(np.ascontiguousarray(x, dtype=float).tobytes(),
                             digest_size=8).digest()
    return np.random.default_rng(
        np.random.SeedSequence([base_seed, int.from_bytes(digest, "little")]))


def kernel_shifts(spec: FoolingSpec, count: int,
                  rng: np.random.Generator) -> np.ndarray:
    """Draws of the r-fold kernel variable: sums of r uniform ball samples."""
    origin = np.zeros(spec.d)
    s = np.zeros((count, spec.d))
    for _ in range(spec.r):
        s += sample_uniform_ball(origin, spec.rho / spec.r, rng, size=count)
    return s


def eval_fooling(x, f: FoolingFunction) -> float:
    """psi(x) = scale * mean_j h(x - S_j) with a point-derived kernel stream."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != f.spec.d:
        raise ValueError("point dimension mismatch")
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("evaluation points must lie in the unit cube")
    rng = _point_rng(x, f.base_seed)
    shifts = kernel_shifts(f.spec, f.mc_samples, rng)
    return f.scale * float(_h_cut_batch(x[None, :] - shifts, f.spec).mean())


def eval_fooling_batch(points: np.ndarray, f: FoolingFunction,
                       shifts: np.ndarray | None = None,
                       rng: np.random.Generator | None = None,
                       chunk: int = 1 << 21) -> np.ndarray:
    """Vectorized evaluation with kernel shifts shared across all points.

    Sharing the kernel draws keeps the inner convolution noise common to
    every point (the integral of each shifted cutoff over the torus equals
    the integral of the unshifted one, so averages over points stay
    unbiased) and enables common-random-number finite differences.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if shifts is None:
        if rng is None:
            rng = np.random.default_rng(f.base_seed)
        shifts = kernel_shifts(f.spec, f.mc_samples, rng)
    out = np.empty(points.shape[0])
    step = max(1, chunk // shifts.shape[0])
    for lo in range(0, points.shape[0], step):
        block = points[lo:lo + step]
        shifted = block[:, None, :] - shifts[None, :, :]
        h = _h_cut_batch(shifted.reshape(-1, f.spec.d), f.spec)
        out[lo:lo + step] = h.reshape(block.shape[0], -1).mean(axis=1)
    return f.scale * out


def verify_vanishing(f: FoolingFunction, probes_per_ball: int,
                     rng: np.random.Generator) -> dict:
    """Probe every center ball; psi must vanish identically there."""
    if probes_per_ball < 1:
        raise ValueError("probes_per_ball must be >= 1")
    violations = 0
    for center in f.spec.points:
        ball = ProjectedBall(center=center, radius=f.spec.eps_n)
        probes = sample_projected_ball(ball, rng, size=probes_per_ball)
        values = eval_fooling_batch(probes, f, rng=rng)
        violations += int(np.count_nonzero(values))
    return {"violations": violations, "probes_per_ball": probes_per_ball}


def verify_integral(f: FoolingFunction, outer_samples: int,
                    rng: np.random.Generator,
                    inner_samples: int | None = None) -> dict:
    """Two-level MC estimate of the integral of psi against its lower bound.

    Returns the estimate with its standard error, the bound K * n^(-r/d),
    and the analytic floor scale * (1 - n * omega_d * (21 eps_n)^d).
    """
    if outer_samples < 1000:
        raise ValueError("outer_samples must be >= 1e3")
    spec = f.spec
    inner = inner_samples if inner_samples is not None else min(f.mc_samples, 256)
    shifts = kernel_shifts(spec, inner, rng)
    xs = rng.random((outer_samples, spec.d))
    values = eval_fooling_batch(xs, f, shifts=shifts)
    estimate = float(values.mean())
    stderr = float(values.std(ddof=1) / np.sqrt(outer_samples))
    bound = k_theta(spec.theta, spec.d, spec.r) * spec.n ** (-spec.r / spec.d)
    floor = f.scale * (1.0 - spec.n * unit_ball_volume(spec.d)
                       * (21.0 * spec.eps_n) ** spec.d)
    return {"estimate": estimate, "stderr": stderr, "bound": bound, "floor": floor}


def verify_cr_norm(f: FoolingFunction, fd_step: float, probe_count: int,
                   rng: np.random.Generator) -> dict:
    """Finite-difference estimates of all derivatives of order <= r.

    Uses common random numbers: every stencil point is evaluated against
    the same kernel draws, so the difference quotient is itself a
    consistent estimator of the derivative of the smoothed function.
    Only first-order multi-indices are iterated per axis and composed up
    to total order r via repeated central differencing.
    """
    if fd_step <= 0:
        raise ValueError("fd_step must be positive")
    spec = f.spec
    margin = spec.r * fd_step
    probes = margin + (1.0 - 2.0 * margin) * rng.random((probe_count, spec.d))
    shifts = kernel_shifts(spec, f.mc_samples, rng)

    def evaluate(pts):
        return eval_fooling_batch(pts, f, shifts=shifts)

    max_est = float(np.abs(evaluate(probes)).max())
    for beta in _multi_indices(spec.d, spec.r):
        ests = _central_difference(evaluate, probes, beta, fd_step)
        max_est = max(max_est, float(np.abs(ests).max()))
    return {"max_derivative_estimate": max_est, "fd_step": fd_step}


def _multi_indices(d: int, r: int):
    """All nonzero multi-indices beta with |beta|_1 <= r."""
    def rec(prefix, remaining, axes_left):
        if axes_left == 0:
            if sum(prefix) > 0:
                yield tuple(prefix)
            return
        for v in range(remaining + 1):
            yield from rec(prefix + [v], remaining - v, axes_left - 1)
    yield from rec([], r, d)


def _central_difference(evaluate, points: np.ndarray, beta: tuple,
                        step: float) -> np.ndarray:
    """Nested central differences D^beta via stencil composition."""
    stencils = [(np.zeros(points.shape[1]), 1.0)]
    for axis, order in enumerate(beta):
        for _ in range(order):
            new = []
            for offset, weight in stencils:
                up, down = offset.copy(), offset.copy()
                up[axis] += step / 2.0
                down[axis] -= step / 2.0
                new.append((up, weight / step))
                new.append((down, -weight / step))
            stencils = new
    total = np.zeros(points.shape[0])
    for offset, weight in stencils:
        total += weight * evaluate(points + offset[None, :])
    return total
