"""Adversarial slow-approximation targets from stacked fooling witnesses.

The target is a finite truncation of the series sum_k eps_k / n_k * y_k,
where each y_k is the negated fooling function built on the point set of
the ball-average rule with m_k = n_k^floor(sqrt(k)) centers, and the signs
are chosen inductively so every new term reinforces the gap functional
L_k = A_{m_k} - A evaluated on the partial sum.  Finite truncations keep
every inequality of the construction checkable by Monte Carlo.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .fooling import FoolingFunction, FoolingSpec, eval_fooling_batch, k_theta, tau
from .quadrature import QuadratureRule, apply_A, apply_An
from .sequences import RateConstants, SuperExpSeq, m_of

__all__ = [
    "Witness",
    "AdversarialTarget",
    "GapLowerBound",
    "build_witness",
    "choose_sign",
    "partial_target",
    "gap_lower_bound",
    "verify_gap",
]


@dataclass(frozen=True)
class Witness:
    """Negated fooling function -psi with its rule and measured gap.

    (A_n - A)(witness) = integral of psi, so the sign functional that
    witnesses the operator gap is simply +1.
    """

    rule: QuadratureRule
    fooling: FoolingFunction
    gap_estimate: float
    stderr: float
    gap_floor: float

    def eval_batch(self, points: np.ndarray) -> np.ndarray:
        return -eval_fooling_batch(points, self.fooling)

    def __call__(self, points):
        return self.eval_batch(np.atleast_2d(np.asarray(points, dtype=float)))


def build_witness(n: int, d: int, r: int, theta: float,
                  rng: np.random.Generator, outer_samples: int = 20000,
                  inner_samples: int = 256) -> Witness:
    """Uniform point set, fooling function on it, and its certified gap."""
    if theta > tau(d, r) + 1e-15:
        raise ValueError("theta exceeds tau(d, r)")
    from .geometry import unit_ball_volume
    from .quadrature import worst_case_gap_cr
    rule = QuadratureRule.uniform(n, d, theta, rng)
    cert, fooling = worst_case_gap_cr(rule, r, theta, rng,
                                      outer_samples=outer_samples,
                                      inner_samples=inner_samples)
    spec = fooling.spec
    floor = fooling.scale * (1.0 - spec.n * unit_ball_volume(d)
                             * (21.0 * spec.eps_n) ** d)
    return Witness(rule=rule, fooling=fooling, gap_estimate=cert.gap_estimate,
                   stderr=cert.stderr, gap_floor=floor)


@dataclass
class AdversarialTarget:
    """Partial sum phi_K = sum_k eps_k / n_k * witness_k, evaluable on the cube."""

    seq: SuperExpSeq
    consts: RateConstants
    signs: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)
    sign_evidence: list = field(default_factory=list)   # L_k(partial) per chosen sign

    @property
    def K(self) -> int:
        return len(self.signs)

    def eval_batch(self, points: np.ndarray, upto: int | None = None) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        upto = self.K if upto is None else upto
        total = np.zeros(points.shape[0])
        for k in range(upto):
            total += (self.signs[k] / self.seq[k]) * self.witnesses[k].eval_batch(points)
        return total

    def __call__(self, points):
        return self.eval_batch(points)

    def sup_norm_bound(self) -> float:
        # each witness has sup norm <= scale <= 1
        return float(sum(Fraction(1, self.seq[k]) for k in range(self.K)))

    def serialize(self) -> dict:
        return {
            "terms": [{"sign": s, "n": str(self.seq[k]),
                       "witness": self.witnesses[k].fooling.to_json()}
                      for k, s in enumerate(self.signs)],
        }


def choose_sign(k: int, partial_value: float) -> int:
    """Sign rule: eps_k * L_k(partial sum before term k) >= 0; ties take +1."""
    if k < 2:
        raise ValueError("the first sign is fixed to +1")
    return 1 if partial_value >= 0.0 else -1


def partial_target(seq: SuperExpSeq, K_terms: int, d: int, r: int, theta: float,
                   consts: RateConstants, rng: np.random.Generator,
                   outer_samples: int = 20000, inner_samples: int = 256,
                   operator_inner: int = 64,
                   integral_samples: int = 8192) -> AdversarialTarget:
    """Build witnesses for k = 1..K and choose signs inductively."""
    if not 1 <= K_terms <= len(seq):
        raise ValueError("K_terms outside the defined sequence")
    target = AdversarialTarget(seq=seq, consts=consts)
    for k in range(1, K_terms + 1):
        witness = build_witness(m_of(seq, k), d, r, theta, rng,
                                outer_samples=outer_samples,
                                inner_samples=inner_samples)
        if k == 1:
            sign, evidence = 1, 0.0
        else:
            evidence = _gap_functional(target, witness.rule, rng,
                                       operator_inner, integral_samples)
            sign = choose_sign(k, evidence)
        target.witnesses.append(witness)
        target.signs.append(sign)
        target.sign_evidence.append(evidence)
    return target


def _gap_functional(target: AdversarialTarget, rule: QuadratureRule,
                    rng: np.random.Generator, inner_samples: int,
                    integral_samples: int) -> float:
    """L_k(phi) = A_{m_k}(phi) - A(phi) on the current partial sum."""
    return (apply_An(target, rule, inner_samples, rng)
            - apply_A(target, rule.d, integral_samples, rng))


@dataclass(frozen=True)
class GapLowerBound:
    k: int
    value: float


def gap_lower_bound(k: int, seq: SuperExpSeq, consts: RateConstants,
                    C_up: float | None = None) -> GapLowerBound:
    """Distance floor (c_Y / (8 C_Z)) * n_k^(-1 - beta * floor(sqrt(k))).

    Valid only once the tail of the series is negligible against the
    witness gap: 2 * C_up / n_k^k <= (c_Y / 8) * m_k^(-beta), checked with
    the configured bound C_up on the gap functional over the unit ball
    (default: C_Z, via the unit embedding of C^r into L2 on the cube).
    """
    from math import log
    C_up = consts.C_Z if C_up is None else C_up
    n_k = seq[k - 1]
    beta = float(consts.beta)
    # log domain: the sequence terms outgrow float range quickly
    log_lhs = log(2.0 * C_up) - k * log(n_k)
    log_rhs = log(consts.c_Y / 8.0) - beta * log(m_of(seq, k))
    if log_lhs > log_rhs:
        raise ValueError(
            f"tail condition 2*C_up/n_k^k <= (c_Y/8)*m_k^-beta fails at k={k}: "
            f"exp({log_lhs:.3f}) > exp({log_rhs:.3f})")
    value = (consts.c_Y / (8.0 * consts.C_Z)) \
        * np.exp(-(1.0 + beta * _floor_sqrt(k)) * log(n_k))
    return GapLowerBound(k=k, value=value)


def _floor_sqrt(k: int) -> int:
    from math import isqrt
    return isqrt(k)


def verify_gap(target: AdversarialTarget, k: int, candidate_set,
               rng: np.random.Generator, mc_samples: int = 8192,
               consts: RateConstants | None = None,
               C_up: float | None = None) -> dict:
    """Min L2 distance from the target to the candidate set vs the floor."""
    consts = target.consts if consts is None else consts
    bound = gap_lower_bound(k, target.seq, consts, C_up=C_up).value
    d = target.witnesses[0].rule.d
    xs = rng.random((mc_samples, d))
    target_vals = target.eval_batch(xs)
    best, best_stderr = np.inf, 0.0
    for candidate in candidate_set:
        diff_sq = (np.asarray(candidate(xs), dtype=float) - target_vals) ** 2
        dist = float(np.sqrt(diff_sq.mean()))
        if dist < best:
            # delta-method stderr for sqrt of the MC mean
            var = float(diff_sq.std(ddof=1) / np.sqrt(mc_samples))
            best, best_stderr = dist, var / (2.0 * dist) if dist > 0 else 0.0
    return {"measured_inf_distance": best, "bound": bound, "stderr": best_stderr}
