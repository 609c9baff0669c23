"""Exact arithmetic for super-exponentially increasing index sequences.

A finite list n_1 < ... < n_K of integers (n_1 >= 2) qualifies when every
tail sum sum_{l>k} 1/n_l stays below 2 / n_k^(k+1).  All comparisons are
performed with exact rationals; the infinite-sequence definition is made
finite by additionally certifying that any continuation with
n_{K+1} >= n_K^(K+2) preserves the property.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

import mpmath

__all__ = [
    "SuperExpSeq",
    "RateConstants",
    "default_seq",
    "verify_superexp",
    "m_of",
    "time_scales_global",
    "time_scales_local",
    "first_k_above_threshold",
]

BIT_BUDGET = 10 ** 6


@dataclass(frozen=True)
class SuperExpSeq:
    """Finite prefix of a super-exponentially increasing sequence."""

    terms: tuple

    def __post_init__(self):
        terms = tuple(int(t) for t in self.terms)
        object.__setattr__(self, "terms", terms)
        ok, idx = verify_superexp(terms)
        if not ok:
            raise ValueError(f"super-exponential condition fails at index {idx}")

    def __len__(self) -> int:
        return len(self.terms)

    def __getitem__(self, k: int) -> int:
        return self.terms[k]

    def to_strings(self) -> list[str]:
        # decimal strings so serialization never loses precision
        return [str(t) for t in self.terms]

    @classmethod
    def from_strings(cls, strings) -> "SuperExpSeq":
        return cls(tuple(int(s) for s in strings))


def default_seq(K: int, bit_budget: int = BIT_BUDGET) -> SuperExpSeq:
    """The canonical example n_k = 2^(k^k)."""
    if K < 1:
        raise ValueError("K must be >= 1")
    exponents = [k ** k for k in range(1, K + 1)]
    if max(exponents) > bit_budget:
        raise ValueError(
            f"term 2^{max(exponents)} exceeds the bit budget of {bit_budget}")
    return SuperExpSeq(tuple(1 << e for e in exponents))


def verify_superexp(terms) -> tuple[bool, int | None]:
    """Exact verification; returns (ok, first failing 1-based index or None).

    Checks n_1 >= 2, strict monotonicity, the tail inequality over defined
    terms, and the sufficient-extension certificate: each tail is charged
    an extra 2 / n_K^(K+2), an upper bound on any admissible continuation.
    """
    terms = [int(t) for t in terms]
    K = len(terms)
    if K == 0:
        return False, None
    if terms[0] < 2:
        return False, 1
    for k in range(1, K):
        if terms[k] <= terms[k - 1]:
            return False, k + 1
    extension_tail = Fraction(2, terms[-1] ** (K + 2))
    tail = extension_tail
    # walk tails from the back so each is a single running sum
    for k in range(K, 0, -1):
        if tail > Fraction(2, terms[k - 1] ** (k + 1)):
            return False, k
        tail += Fraction(1, terms[k - 1])
    return True, None


def total_reciprocal_sum(seq: SuperExpSeq) -> Fraction:
    """Exact sum of 1/n_k over defined terms; at most 1 for valid sequences."""
    return sum((Fraction(1, t) for t in seq.terms), Fraction(0))


def m_of(seq: SuperExpSeq, k: int) -> int:
    """Derived width index m_k = n_k ^ floor(sqrt(k)); k is 1-based."""
    if not 1 <= k <= len(seq):
        raise IndexError(f"k={k} outside 1..{len(seq)}")
    return seq[k - 1] ** isqrt(k)


@dataclass(frozen=True)
class RateConstants:
    """Operator-norm rate constants: decay alpha on X, floor beta on Y."""

    alpha: Fraction
    beta: Fraction
    c_Y: float = 1.0
    C_X: float = 1.0
    C_Z: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        object.__setattr__(self, "beta", Fraction(self.beta))
        if not 0 < self.beta < self.alpha:
            raise ValueError("need 0 < beta < alpha")
        if min(self.c_Y, self.C_X, self.C_Z) <= 0:
            raise ValueError("rate constants must be positive")


def time_scales_global(seq: SuperExpSeq, consts: RateConstants, k: int,
                       prec: int = 80) -> float:
    """Norm-cap time scale t_k = c_Y * m_k^(alpha - beta) / (8 * C_X * n_k).

    Computed in log domain with high-precision arithmetic so that exact
    integer m_k of thousands of bits are handled without overflow.
    """
    m_k = m_of(seq, k)
    n_k = seq[k - 1]
    with mpmath.workprec(prec):
        exponent = mpmath.mpf(consts.alpha.numerator) / consts.alpha.denominator \
            - mpmath.mpf(consts.beta.numerator) / consts.beta.denominator
        log_t = (mpmath.log(consts.c_Y) + exponent * _log_bigint(m_k)
                 - mpmath.log(8 * consts.C_X) - _log_bigint(n_k))
        return float(mpmath.exp(log_t))


def time_scales_local(seq: SuperExpSeq, k: int, m: int, delta: float,
                      C: float, d: int, r: int, K_const: float,
                      prec: int = 80) -> float:
    """Finite-width time scale for locally Lipschitz activations.

    t_k = ( m_k^(1/2 - r/d) * K / (24 * n_k * C * m^(1 + delta/2)
            * (d+1)^(1/2 + delta/2)) ) ^ (1 / (1 + delta/2)).
    """
    if not (r < d / 2 and delta >= 0 and m >= 1):
        raise ValueError("need r < d/2, delta >= 0, m >= 1")
    m_k = m_of(seq, k)
    n_k = seq[k - 1]
    with mpmath.workprec(prec):
        log_inner = ((mpmath.mpf(1) / 2 - mpmath.mpf(r) / d) * _log_bigint(m_k)
                     + mpmath.log(K_const)
                     - _log_bigint(n_k)
                     - mpmath.log(24 * C)
                     - (1 + delta / 2) * mpmath.log(m)
                     - (mpmath.mpf(1) / 2 + delta / 2) * mpmath.log(d + 1))
        return float(mpmath.exp(log_inner / (1 + delta / 2)))


def first_k_above_threshold(seq: SuperExpSeq, T: float, m: int, delta: float,
                            C: float, d: int, r: int, K_const: float) -> int | None:
    """First index k with t_k >= T^2 under the finite-width time scales."""
    for k in range(1, len(seq) + 1):
        if time_scales_local(seq, k, m, delta, C, d, r, K_const) >= T * T:
            return k
    return None


def _log_bigint(n: int):
    mantissa, exp = _frexp_bigint(n)
    return mpmath.log(mantissa) + exp * mpmath.log(2)


def _frexp_bigint(n: int) -> tuple[float, int]:
    bits = n.bit_length()
    if bits <= 53:
        return float(n), 0
    shift = bits - 53
    return float(n >> shift), shift
