"""Experiment orchestration: dispatch, rate fitting, reports and plots.

Each run kind exercises one pipeline (fooling verification, quadrature gap
sweep, sequence checks, adversarial target, particle training, rate
fitting) and writes CSV/JSON artifacts plus SVG plots into the output
directory.  Rate comparisons against the theoretical floor exponents are
reported, never asserted: a finite run cannot settle a limsup statement.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field, asdict
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import adversary, fooling, meanfield, quadrature, sequences
from .meanfield import ACTIVATIONS

__all__ = [
    "ExperimentConfig",
    "RateFit",
    "run",
    "fit_rate",
    "floor_exponent",
    "barron_growth_check",
    "emit_plots",
    "trajectory_to_csv",
]


@dataclass
class ExperimentConfig:
    kind: str
    d: int = 3
    r: int = 1
    m: int = 32
    n: int = 64
    theta: float | None = None          # defaults to tau(d, r)
    activation: str = "tanh"
    delta: float = 0.0
    seq_terms: list = field(default_factory=lambda: [4, 64])
    T_end: float = 10.0
    seed: int = 0
    outer_samples: int = 20000
    inner_samples: int = 256
    probes_per_ball: int = 100
    checkpoints: int = 50
    out_dir: str = "runs"

    VALID_KINDS = ("fool", "quad", "seq", "adv", "train", "rates")

    def validate(self) -> list[str]:
        problems = []
        if self.kind not in self.VALID_KINDS:
            problems.append(f"kind must be one of {self.VALID_KINDS}")
        if self.kind in ("fool", "quad", "adv", "train", "rates") and \
                not self.r < self.d / 2:
            problems.append(f"need r < d/2, got r={self.r}, d={self.d}")
        for name in ("m", "n", "outer_samples", "inner_samples",
                     "probes_per_ball", "checkpoints"):
            if getattr(self, name) < 1:
                problems.append(f"{name} must be positive")
        if self.activation not in ACTIVATIONS:
            problems.append(f"unknown activation {self.activation!r}")
        return problems

    def resolved_theta(self) -> float:
        return self.theta if self.theta is not None else fooling.tau(self.d, self.r)

    def config_hash(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            data = json.load(fh)
        return cls(**data)


@dataclass(frozen=True)
class RateFit:
    t_lo: float
    t_hi: float
    gamma_hat: float
    floor_exponent: float
    residual: float


def floor_exponent(d: int, r: int, delta: float = 0.0) -> float:
    """Risk-decay exponent floor (4 + 2*delta) * r / (d - 2r)."""
    if not r < d / 2:
        raise ValueError("need r < d/2")
    return (4.0 + 2.0 * delta) * r / (d - 2.0 * r)


def fit_rate(traj: meanfield.Trajectory, window: tuple[float, float],
             d: int, r: int, delta: float = 0.0) -> RateFit:
    """Least-squares slope of log risk vs log t over the window."""
    t_lo, t_hi = window
    if not t_lo < t_hi:
        raise ValueError("window must satisfy t_lo < t_hi")
    times = np.asarray(traj.times)
    risks = np.asarray(traj.risks)
    mask = (times >= t_lo) & (times <= t_hi) & (times > 0)
    if mask.sum() < 8:
        raise ValueError("need at least 8 checkpoints inside the window")
    if np.any(risks[mask] <= 0):
        raise ValueError("risk must be positive on the fit window")
    log_t = np.log(times[mask])
    log_r = np.log(risks[mask])
    slope, intercept = np.polyfit(log_t, log_r, 1)
    residual = float(np.sqrt(np.mean((log_r - (slope * log_t + intercept)) ** 2)))
    return RateFit(t_lo=t_lo, t_hi=t_hi, gamma_hat=-float(slope),
                   floor_exponent=floor_exponent(d, r, delta), residual=residual)


def barron_growth_check(traj: meanfield.Trajectory,
                        tolerance: float | None = None) -> dict:
    """Barron-bound growth: bound(t) <= (sqrt(d)+2)(N0 + R0 t) + 1/2."""
    if not traj.times:
        raise ValueError("empty trajectory")
    d = traj.final_state.d if traj.final_state is not None else None
    if d is None:
        raise ValueError("trajectory carries no final state")
    tol = traj.tolerance if tolerance is None else tolerance
    N0, R0 = traj.second_moments[0], traj.risks[0]
    violations = []
    for t, bb in zip(traj.times, traj.barron_bounds):
        envelope = (np.sqrt(d) + 2.0) * (N0 + R0 * t) + 0.5
        if bb > envelope + tol:
            violations.append((t, bb, envelope))
    return {"passed": not violations, "violations": violations}


def trajectory_to_csv(traj: meanfield.Trajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "risk", "second_moment", "barron_bound",
                         "barron_direct"])
        for row in traj.checkpoint_rows():
            writer.writerow([f"{v:.12g}" for v in row])


def run(config: ExperimentConfig, verbose: bool = False) -> int:
    """Dispatch a configured experiment; returns the process exit status."""
    problems = config.validate()
    if problems:
        for p in problems:
            print(f"config error: {p}")
        return 2
    out = Path(config.out_dir) / f"{config.kind}-{config.config_hash()}"
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(config.seed)
    runner = _RUNNERS[config.kind]
    report = runner(config, rng, out, verbose)
    report["config"] = asdict(config)
    report["config_hash"] = config.config_hash()
    with open(out / "report.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, default=str)
    if verbose:
        print(json.dumps({k: v for k, v in report.items() if k != "config"},
                         indent=2, default=str))
    status = 0 if report.get("passed", True) else 1
    print(f"{config.kind}: {'PASS' if status == 0 else 'FAIL'} -> {out}")
    return status


def _run_fool(config, rng, out, verbose) -> dict:
    theta = config.resolved_theta()
    points = rng.random((config.n, config.d))
    spec = fooling.FoolingSpec(points=points, d=config.d, r=config.r, theta=theta)
    fn = fooling.FoolingFunction(spec=spec, base_seed=config.seed)
    vanishing = fooling.verify_vanishing(fn, config.probes_per_ball, rng)
    integral = fooling.verify_integral(fn, config.outer_samples, rng,
                                       inner_samples=config.inner_samples)
    passed = (vanishing["violations"] == 0 and
              integral["estimate"] + 3 * integral["stderr"] >= integral["bound"])
    return {"check": "fooling witness (vanishing + integral floor)",
            "vanishing": vanishing, "integral": integral, "passed": passed}


def _run_quad(config, rng, out, verbose) -> dict:
    theta = config.resolved_theta()
    certs = []
    for n in sorted({config.n // 4, config.n, config.n * 4} - {0}):
        rule = quadrature.QuadratureRule.uniform(n, config.d, theta, rng)
        cert, _ = quadrature.worst_case_gap_cr(
            rule, config.r, theta, rng, outer_samples=config.outer_samples,
            inner_samples=config.inner_samples)
        certs.append(cert)
    quadrature.certificates_to_csv(certs, out / "gap_certificates.csv")
    emit_gap_plot(certs, out / "gap_vs_n.svg")
    return {"check": "worst-case quadrature gap certificates",
            "certificates": [asdict(c) | {"pass": c.passed} for c in certs],
            "passed": all(c.passed for c in certs)}


def _run_seq(config, rng, out, verbose) -> dict:
    ok, idx = sequences.verify_superexp(config.seq_terms)
    report = {"check": "super-exponential sequence verification",
              "terms": [str(t) for t in config.seq_terms],
              "verified": ok, "first_failure_index": idx, "passed": ok}
    if ok:
        seq = sequences.SuperExpSeq(tuple(config.seq_terms))
        report["reciprocal_sum_le_1"] = sequences.total_reciprocal_sum(seq) <= 1
        report["passed"] = ok and report["reciprocal_sum_le_1"]
    return report


def _run_adv(config, rng, out, verbose) -> dict:
    seq = sequences.SuperExpSeq(tuple(config.seq_terms))
    theta = config.resolved_theta()
    consts = sequences.RateConstants(
        alpha=Fraction(1, 2), beta=Fraction(config.r, config.d),
        c_Y=fooling.k_theta(theta, config.d, config.r))
    K = min(len(seq), 2)
    target = adversary.partial_target(
        seq, K, config.d, config.r, theta, consts, rng,
        outer_samples=config.outer_samples, inner_samples=config.inner_samples)
    with open(out / "target.json", "w") as fh:
        json.dump(target.serialize(), fh, indent=2)
    sign_ok = all(s * e >= 0 for s, e in
                  zip(target.signs[1:], target.sign_evidence[1:]))
    return {"check": "adversarial partial-sum construction",
            "signs": target.signs, "sign_evidence": target.sign_evidence,
            "sup_norm_bound": target.sup_norm_bound(), "passed": sign_ok}


def _run_train(config, rng, out, verbose) -> dict:
    act = ACTIVATIONS[config.activation]
    theta = config.resolved_theta()
    witness = adversary.build_witness(config.n, config.d, config.r, theta, rng,
                                      outer_samples=config.outer_samples,
                                      inner_samples=config.inner_samples)

    def target(points):
        return -witness.eval_batch(points)

    spec = meanfield.RiskSpec.population(target, config.d)
    pi0 = meanfield.normal_init(config.m, config.d, rng)
    traj = meanfield.flow_integrate(pi0, act, spec, config.T_end,
                                    checkpoints=config.checkpoints)
    trajectory_to_csv(traj, out / "trajectory.csv")
    emit_trajectory_plots(traj, config.d, config.r, config.delta, out)
    growth = meanfield.check_second_moment_growth(traj)
    barron = barron_growth_check(traj)
    return {"check": "particle flow (dissipation, moment growth, Barron growth)",
            "second_moment_growth": growth["passed"],
            "barron_growth": barron["passed"],
            "blew_up": traj.blew_up,
            "final_risk": traj.risks[-1],
            "passed": growth["passed"] and barron["passed"] and not traj.blew_up}


def _run_rates(config, rng, out, verbose) -> dict:
    report = _run_train(config, rng, out, verbose)
    traj_path = out / "trajectory.csv"
    times, risks = [], []
    with open(traj_path) as fh:
        for row in csv.DictReader(fh):
            times.append(float(row["t"]))
            risks.append(float(row["risk"]))
    traj = meanfield.Trajectory(times=times, risks=risks)
    positive = [(t, rk) for t, rk in zip(times, risks) if t > 0 and rk > 0]
    if len(positive) >= 8:
        t_lo, t_hi = positive[len(positive) // 4][0], positive[-1][0]
        traj.second_moments = [0.0] * len(times)
        fit = fit_rate(traj, (t_lo, t_hi), config.d, config.r, config.delta)
        report["rate_fit"] = asdict(fit)
        report["floor_comparison"] = (
            f"fitted decay exponent {fit.gamma_hat:.4f} vs floor "
            f"{fit.floor_exponent:.4f} (reported, not asserted)")
    else:
        report["rate_fit"] = None
    return report


_RUNNERS = {"fool": _run_fool, "quad": _run_quad, "seq": _run_seq,
            "adv": _run_adv, "train": _run_train, "rates": _run_rates}


def emit_gap_plot(certs, path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    ns = [c.n for c in certs]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(ns, [c.gap_estimate for c in certs], "o", label="measured gap")
    ax.loglog(ns, [c.gap_bound for c in certs], "--",
              label="K n^(-r/d) floor")
    ax.set_xlabel("n")
    ax.set_ylabel("worst-case gap")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def emit_trajectory_plots(traj: meanfield.Trajectory, d: int, r: int,
                          delta: float, out: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    times = np.asarray(traj.times)
    risks = np.asarray(traj.risks)
    pos = (times > 0) & (risks > 0)

    fig, ax = plt.subplots(figsize=(5, 4))
    if pos.any():
        ax.loglog(times[pos], risks[pos], label="risk")
        floor = floor_exponent(d, r, delta)
        ref = risks[pos][0] * (times[pos] / times[pos][0]) ** (-floor)
        ax.loglog(times[pos], ref, "--", label=f"t^(-{floor:.3g}) floor")
    ax.set_xlabel("t")
    ax.set_ylabel("risk")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "risk_loglog.svg", format="svg")
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(5, 4))
    N0, R0 = traj.second_moments[0], risks[0]
    ax.plot(times, traj.second_moments, label="N(pi^t)")
    ax.plot(times, 2.0 * (N0 + R0 * times), "--", label="2 [N0 + R0 t]")
    ax.set_xlabel("t")
    ax.set_ylabel("second moment")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "second_moment.svg", format="svg")
    plt.close(fig)


def emit_plots(artifact_dir) -> list[Path]:
    """Re-render plots from the CSV artifacts in a run directory."""
    out = Path(artifact_dir)
    made = []
    traj_csv = out / "trajectory.csv"
    if traj_csv.exists():
        times, risks, moments, bounds, directs = [], [], [], [], []
        with open(traj_csv) as fh:
            reader = csv.DictReader(fh)
            required = {"t", "risk", "second_moment", "barron_bound",
                        "barron_direct"}
            if not required.issubset(reader.fieldnames or set()):
                raise ValueError(f"trajectory CSV missing columns: "
                                 f"{required - set(reader.fieldnames or [])}")
            for row in reader:
                times.append(float(row["t"]))
                risks.append(float(row["risk"]))
                moments.append(float(row["second_moment"]))
                bounds.append(float(row["barron_bound"]))
                directs.append(float(row["barron_direct"]))
        if not times:
            raise ValueError("trajectory CSV is empty")
        traj = meanfield.Trajectory(times=times, risks=risks,
                                    second_moments=moments,
                                    barron_bounds=bounds,
                                    barron_directs=directs)
        emit_trajectory_plots(traj, d=3, r=1, delta=0.0, out=out)
        made += [out / "risk_loglog.svg", out / "second_moment.svg"]
    return made
