"""Shallow networks as particle measures and their mean-field gradient flow.

A width-m network is the average (1/m) * sum_i a_i * sigma(w_i . x + b_i);
the triples form an empirical measure over parameter space.  Training
follows the particle form of the 2-Wasserstein gradient flow of a fixed
risk functional: each particle moves with velocity -m * grad of the risk
with respect to its own triple (the factor m makes trajectories
width-comparable).  Diagnostics cover the second moment, Barron-norm
surrogates, Lipschitz bounds, and Rademacher complexity estimates.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "Activation",
    "GlobalLipschitz",
    "LocalLipschitz",
    "ParticleMeasure",
    "RiskSpec",
    "Trajectory",
    "relu",
    "tanh_act",
    "square",
    "relu_power",
    "forward",
    "risk",
    "risk_gradient",
    "second_moment",
    "barron_direct",
    "barron_bound",
    "lipschitz_bound",
    "flow_integrate",
    "check_second_moment_growth",
    "local_lipschitz_measure",
    "rademacher_bound",
    "empirical_rademacher",
    "sample_f_md",
    "population_grid",
    "normal_init",
]


@dataclass(frozen=True)
class GlobalLipschitz:
    L: float


@dataclass(frozen=True)
class LocalLipschitz:
    """Lipschitz constant on [-x, x] equals C * x^delta for x >= T."""

    delta: float
    C: float
    T: float = 0.0


@dataclass(frozen=True)
class Activation:
    name: str
    fn: callable
    deriv: callable
    lipschitz_class: GlobalLipschitz | LocalLipschitz
    fn_and_deriv: callable | None = None    # fused (sigma, sigma') when cheaper

    def lipschitz_on(self, x: float) -> float:
        """Lipschitz constant of sigma on [-x, x]."""
        if isinstance(self.lipschitz_class, GlobalLipschitz):
            return self.lipschitz_class.L
        lc = self.lipschitz_class
        return lc.C * max(x, lc.T) ** lc.delta

    def value_and_deriv(self, z):
        if self.fn_and_deriv is not None:
            return self.fn_and_deriv(z)
        return self.fn(z), self.deriv(z)


def _tanh_pair(z):
    s = np.tanh(z)
    return s, 1.0 - s ** 2


# sigma'(0) taken as 0 at the ReLU kink (a.e. derivative)
relu = Activation("relu", lambda z: np.maximum(z, 0.0),
                  lambda z: (z > 0).astype(float), GlobalLipschitz(1.0))
tanh_act = Activation("tanh", np.tanh, lambda z: 1.0 - np.tanh(z) ** 2,
                      GlobalLipschitz(1.0), fn_and_deriv=_tanh_pair)
square = Activation("square", lambda z: z ** 2, lambda z: 2.0 * z,
                    LocalLipschitz(delta=1.0, C=2.0))


def relu_power(k: int) -> Activation:
    if k < 2:
        return relu
    return Activation(f"relu^{k}",
                      lambda z: np.maximum(z, 0.0) ** k,
                      lambda z: k * np.maximum(z, 0.0) ** (k - 1),
                      LocalLipschitz(delta=float(k - 1), C=float(k)))


ACTIVATIONS = {a.name: a for a in (relu, tanh_act, square, relu_power(3))}


@dataclass(frozen=True)
class ParticleMeasure:
    """m triples (a_i, w_i, b_i) representing the empirical parameter measure."""

    a: np.ndarray          # (m,)
    w: np.ndarray          # (m, d)
    b: np.ndarray          # (m,)

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        w = np.atleast_2d(np.asarray(self.w, dtype=float))
        b = np.asarray(self.b, dtype=float)
        if not (a.ndim == 1 and b.ndim == 1 and a.shape[0] == b.shape[0] == w.shape[0]):
            raise ValueError("inconsistent particle shapes")
        if a.shape[0] < 1:
            raise ValueError("need at least one particle")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", b)

    @property
    def m(self) -> int:
        return self.a.shape[0]

    @property
    def d(self) -> int:
        return self.w.shape[1]

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.a).all() and np.isfinite(self.w).all()
                    and np.isfinite(self.b).all())


def normal_init(m: int, d: int, rng: np.random.Generator) -> ParticleMeasure:
    """a = 0, (w, b) standard normal scaled by 1/sqrt(d+1)."""
    scale = 1.0 / np.sqrt(d + 1)
    return ParticleMeasure(a=np.zeros(m),
                           w=scale * rng.standard_normal((m, d)),
                           b=scale * rng.standard_normal(m))


@dataclass(frozen=True)
class RiskSpec:
    """Fixed risk functional: target values on a fixed node set with weights.

    The nodes are frozen for the whole flow so the dynamics are a genuine
    gradient flow of one functional; population risk uses a quadrature
    grid, empirical risk uses sample points with uniform weights.
    """

    nodes: np.ndarray      # (n, d)
    weights: np.ndarray    # (n,), summing to 1
    target_values: np.ndarray

    def __post_init__(self):
        nodes = np.atleast_2d(np.asarray(self.nodes, dtype=float))
        weights = np.asarray(self.weights, dtype=float)
        values = np.asarray(self.target_values, dtype=float)
        if not np.isclose(weights.sum(), 1.0, atol=1e-12):
            raise ValueError("weights must sum to 1")
        if np.any(nodes < 0.0) or np.any(nodes > 1.0):
            raise ValueError("nodes must lie in the unit cube")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "target_values", values)

    @classmethod
    def population(cls, target, d: int, nodes_per_axis: int = 16,
                   mc_nodes: int = 4096, rng=None) -> "RiskSpec":
        nodes = population_grid(d, nodes_per_axis, mc_nodes, rng)
        weights = np.full(nodes.shape[0], 1.0 / nodes.shape[0])
        return cls(nodes=nodes, weights=weights,
                   target_values=_eval_target(target, nodes))

    @classmethod
    def empirical(cls, target, samples: np.ndarray) -> "RiskSpec":
        samples = np.atleast_2d(np.asarray(samples, dtype=float))
        weights = np.full(samples.shape[0], 1.0 / samples.shape[0])
        return cls(nodes=samples, weights=weights,
                   target_values=_eval_target(target, samples))


def population_grid(d: int, nodes_per_axis: int = 16, mc_nodes: int = 4096,
                    rng=None) -> np.ndarray:
    """Midpoint tensor grid for d <= 3, fixed MC nodes otherwise."""
    if d <= 3:
        axis = (np.arange(nodes_per_axis) + 0.5) / nodes_per_axis
        grids = np.meshgrid(*([axis] * d), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)
    rng = rng if rng is not None else np.random.default_rng(0)
    return rng.random((mc_nodes, d))


def _eval_target(target, nodes: np.ndarray) -> np.ndarray:
    try:
        values = np.asarray(target(nodes), dtype=float)
        if values.shape == (nodes.shape[0],):
            return values
    except Exception:
        pass
    return np.array([float(target(x)) for x in nodes])


def forward(pi: ParticleMeasure, act: Activation, x) -> float | np.ndarray:
    """Network output (1/m) * sum_i a_i * sigma(w_i . x + b_i)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    if pts.shape[1] != pi.d:
        raise ValueError("input dimension mismatch")
    pre = pts @ pi.w.T + pi.b[None, :]
    out = act.fn(pre) @ pi.a / pi.m
    return float(out[0]) if single else out


def risk(pi: ParticleMeasure, act: Activation, spec: RiskSpec) -> float:
    residual = forward(pi, act, spec.nodes) - spec.target_values
    return 0.5 * float(spec.weights @ residual ** 2)


def risk_gradient(pi: ParticleMeasure, act: Activation, spec: RiskSpec):
    """Gradients of the risk with respect to each particle triple."""
    pre = spec.nodes @ pi.w.T + pi.b[None, :]
    sig, sig_prime = act.value_and_deriv(pre)
    residual = (sig @ pi.a / pi.m) - spec.target_values
    weighted = spec.weights * residual                       # (n,)
    grad_a = (weighted @ sig) / pi.m                         # (m,)
    dsig = sig_prime * pi.a[None, :] / pi.m                  # (n, m)
    grad_b = weighted @ dsig                                 # (m,)
    grad_w = (dsig * weighted[:, None]).T @ spec.nodes       # (m, d)
    return grad_a, grad_w, grad_b


def second_moment(pi: ParticleMeasure) -> float:
    return float(np.mean(pi.a ** 2 + np.sum(pi.w ** 2, axis=1) + pi.b ** 2))


def barron_direct(pi: ParticleMeasure, act: Activation) -> float:
    """Barron-norm upper bound computed on the particle measure itself."""
    extra = 0.0 if act.name == "relu" else 1.0
    return float(np.mean(np.abs(pi.a)
                         * (np.sum(np.abs(pi.w), axis=1) + np.abs(pi.b) + extra)))


def barron_bound(pi: ParticleMeasure, d: int | None = None) -> float:
    """Second-moment control of the Barron norm: (sqrt(d)/2 + 1) N + 1/2."""
    d = pi.d if d is None else d
    return (np.sqrt(d) / 2.0 + 1.0) * second_moment(pi) + 0.5


def lipschitz_bound(pi: ParticleMeasure, act: Activation) -> float:
    if not isinstance(act.lipschitz_class, GlobalLipschitz):
        raise ValueError("Lipschitz bound requires a globally Lipschitz activation")
    return act.lipschitz_class.L * barron_direct(pi, act)


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    risks: list = field(default_factory=list)
    second_moments: list = field(default_factory=list)
    barron_bounds: list = field(default_factory=list)
    barron_directs: list = field(default_factory=list)
    final_state: ParticleMeasure | None = None
    scheme: str = "rk4"
    step: float = 0.0
    tolerance: float = 1e-8
    blew_up: bool = False

    def checkpoint_rows(self):
        return zip(self.times, self.risks, self.second_moments,
                   self.barron_bounds, self.barron_directs)


def flow_integrate(pi0: ParticleMeasure, act: Activation, spec: RiskSpec,
                   T_end: float, checkpoints: int = 50,
                   step: float | None = None, tolerance: float = 1e-6,
                   max_halvings: int = 20) -> Trajectory:
    """Integrate the particle flow theta_dot = -m * grad R with explicit RK4.

    Fixed step with halving whenever a step increases the risk by more
    than the tolerance; checkpoints are emitted at evenly spaced times.
    """
    state = _State(pi0.a.copy(), pi0.w.copy(), pi0.b.copy())
    m = pi0.m

    def velocity(s: "_State") -> "_State":
        pi = ParticleMeasure(s.a, s.w, s.b)
        ga, gw, gb = risk_gradient(pi, act, spec)
        return _State(-m * ga, -m * gw, -m * gb)

    g0 = velocity(state)
    grad_inf = max(np.abs(g0.a).max(), np.abs(g0.w).max(), np.abs(g0.b).max())
    if step is None:
        step = min(1e-3, 0.1 / grad_inf) if grad_inf > 0 else 1e-3

    traj = Trajectory(scheme="rk4", step=step, tolerance=tolerance)
    check_times = np.linspace(0.0, T_end, checkpoints + 1)
    next_check = 0
    t = 0.0

    def record(t_now, pi):
        traj.times.append(t_now)
        traj.risks.append(risk(pi, act, spec))
        traj.second_moments.append(second_moment(pi))
        traj.barron_bounds.append(barron_bound(pi))
        traj.barron_directs.append(barron_direct(pi, act))

    pi_now = ParticleMeasure(state.a, state.w, state.b)
    record(0.0, pi_now)
    next_check = 1

    current_risk = traj.risks[0]
    while t < T_end - 1e-15:
        h = min(step, T_end - t, check_times[next_check] - t)
        if h <= 0:
            h = step
        for attempt in range(max_halvings + 1):
            candidate = _rk4_step(state, velocity, h)
            pi_cand = ParticleMeasure(candidate.a, candidate.w, candidate.b)
            if not pi_cand.is_finite():
                if attempt == max_halvings:
                    traj.blew_up = True
                    traj.final_state = ParticleMeasure(state.a, state.w, state.b)
                    return traj
                h /= 2.0
                continue
            cand_risk = risk(pi_cand, act, spec)
            if cand_risk <= current_risk + tolerance:
                break
            if attempt == max_halvings:
                break
            h /= 2.0
        state = candidate
        current_risk = cand_risk
        t += h
        if t >= check_times[next_check] - 1e-12:
            record(t, ParticleMeasure(state.a, state.w, state.b))
            next_check = min(next_check + 1, len(check_times) - 1)

    traj.final_state = ParticleMeasure(state.a, state.w, state.b)
    return traj


@dataclass
class _State:
    a: np.ndarray
    w: np.ndarray
    b: np.ndarray

    def axpy(self, c, other: "_State") -> "_State":
        return _State(self.a + c * other.a, self.w + c * other.w,
                      self.b + c * other.b)


def _rk4_step(state: _State, velocity, h: float) -> _State:
    k1 = velocity(state)
    k2 = velocity(state.axpy(h / 2.0, k1))
    k3 = velocity(state.axpy(h / 2.0, k2))
    k4 = velocity(state.axpy(h, k3))
    combo = _State(k1.a + 2 * k2.a + 2 * k3.a + k4.a,
                   k1.w + 2 * k2.w + 2 * k3.w + k4.w,
                   k1.b + 2 * k2.b + 2 * k3.b + k4.b)
    return state.axpy(h / 6.0, combo)


def check_second_moment_growth(traj: Trajectory, N0: float | None = None,
                               R0: float | None = None,
                               tolerance: float | None = None) -> dict:
    """Sublinear growth check N(pi^t) <= 2 [N(pi^0) + R(pi^0) t] per checkpoint."""
    N0 = traj.second_moments[0] if N0 is None else N0
    R0 = traj.risks[0] if R0 is None else R0
    tol = traj.tolerance if tolerance is None else tolerance
    violations = []
    for t, N_t in zip(traj.times, traj.second_moments):
        bound = 2.0 * (N0 + R0 * t)
        if N_t > bound + tol:
            violations.append((t, N_t, bound))
    return {"passed": not violations, "violations": violations,
            "N0": N0, "R0": R0}


def local_lipschitz_measure(act: Activation, x_values, probes: int = 20000,
                            rng: np.random.Generator | None = None) -> list[float]:
    """Probe-pair estimates of the Lipschitz constant of sigma on [-x, x]."""
    rng = rng if rng is not None else np.random.default_rng(0)
    estimates = []
    for x in x_values:
        if x <= 0:
            raise ValueError("x_values must be positive")
        u = rng.uniform(-x, x, probes)
        v = u + rng.uniform(-1e-4 * x, 1e-4 * x, probes)
        v = np.clip(v, -x, x)
        ok = v != u
        quotients = np.abs(act.fn(u[ok]) - act.fn(v[ok])) / np.abs(u[ok] - v[ok])
        estimates.append(float(quotients.max()))
    return estimates


def rademacher_bound(m: int, D: float, n: int, d: int, act: Activation) -> float:
    """Complexity bound L_{sqrt(mD(d+1))} * m D sqrt(d+1) / (2 sqrt(n))."""
    if D <= 0:
        raise ValueError("D must be positive")
    L = act.lipschitz_on(np.sqrt(m * D * (d + 1)))
    return L * m * D * np.sqrt(d + 1) / (2.0 * np.sqrt(n))


def sample_f_md(m: int, D: float, count: int, d: int,
                rng: np.random.Generator) -> list[ParticleMeasure]:
    """Random width-m particle measures rescaled to second moment exactly D."""
    out = []
    for _ in range(count):
        pi = ParticleMeasure(a=rng.standard_normal(m),
                             w=rng.standard_normal((m, d)),
                             b=rng.standard_normal(m))
        factor = np.sqrt(D / second_moment(pi))
        out.append(ParticleMeasure(a=factor * pi.a, w=factor * pi.w,
                                   b=factor * pi.b))
    return out


def empirical_rademacher(family, points: np.ndarray, sign_trials: int,
                         rng: np.random.Generator) -> dict:
    """MC estimate of sup over the family of correlation with random signs."""
    if not family:
        raise ValueError("family must be nonempty")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    values = np.stack([np.asarray(f(points), dtype=float) for f in family])
    sups = np.empty(sign_trials)
    for trial in range(sign_trials):
        signs = rng.choice([-1.0, 1.0], size=n)
        sups[trial] = (values @ signs).max() / n
    return {"estimate": float(sups.mean()),
            "stderr": float(sups.std(ddof=1) / np.sqrt(sign_trials))}
