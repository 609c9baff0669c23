from fractions import Fraction

import pytest

from codlab.sequences import (
    RateConstants,
    SuperExpSeq,
    default_seq,
    first_k_above_threshold,
    m_of,
    time_scales_global,
    time_scales_local,
    total_reciprocal_sum,
    verify_superexp,
)


class TestDefaultSeq:
    def test_k1(self):
        assert default_seq(1).terms == (2,)

    def test_k2(self):
        assert default_seq(2).terms == (2, 16)

    def test_k3(self):
        assert default_seq(3).terms == (2, 16, 134217728)

    def test_bit_budget(self):
        with pytest.raises(ValueError):
            default_seq(8)   # 2^(8^8) needs ~16.8M bits
        assert default_seq(7)[-1] == 1 << (7 ** 7)


class TestVerify:
    def test_canonical_examples(self):
        assert verify_superexp((2, 16, 1 << 27)) == (True, None)

    def test_rejects_small_first_term(self):
        ok, idx = verify_superexp((1, 4))
        assert not ok and idx == 1

    def test_rejects_non_increasing(self):
        ok, idx = verify_superexp((3, 2))
        assert not ok and idx == 2

    def test_rejects_slow_growth(self):
        # tail 1/10 exceeds 2/4^2 at k=1? 0.1 < 0.125, but k=2 extension:
        # 2/10^4 <= 2/10^3 holds, k=1: 1/10 + 2/10^4 <= 1/8 holds -> valid;
        # make it fail with a genuinely slow third term
        ok, idx = verify_superexp((4, 64, 4096))
        assert not ok and idx == 2   # 1/4096 > 2/64^3

    def test_all_default_prefixes_verify(self):
        for K in range(1, 7):
            assert verify_superexp(default_seq(K).terms) == (True, None)

    def test_constructor_rejects_invalid(self):
        with pytest.raises(ValueError):
            SuperExpSeq((4, 64, 4096))

    def test_reciprocal_sum_at_most_one(self):
        for K in range(1, 6):
            assert total_reciprocal_sum(default_seq(K)) <= 1

    def test_string_roundtrip(self):
        seq = default_seq(5)
        assert SuperExpSeq.from_strings(seq.to_strings()).terms == seq.terms


class TestDerivedIndices:
    def test_m_equals_n_for_small_k(self):
        seq = default_seq(3)
        for k in (1, 2, 3):
            assert m_of(seq, k) == seq[k - 1]

    def test_m_squares_at_four(self):
        seq = default_seq(4)
        assert m_of(seq, 4) == seq[3] ** 2

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            m_of(default_seq(2), 3)


class TestTimeScales:
    def test_global_formula(self):
        consts = RateConstants(alpha=Fraction(1, 2), beta=Fraction(1, 4))
        t1 = time_scales_global(default_seq(2), consts, 1)
        assert t1 == pytest.approx(2 ** 0.25 / 16.0, rel=1e-12)

    def test_global_linearity_in_c_Y(self):
        seq = default_seq(3)
        base = RateConstants(alpha=Fraction(1, 2), beta=Fraction(1, 4))
        doubled = RateConstants(alpha=Fraction(1, 2), beta=Fraction(1, 4), c_Y=2.0)
        for k in (1, 2, 3):
            assert time_scales_global(seq, doubled, k) == pytest.approx(
                2.0 * time_scales_global(seq, base, k), rel=1e-12)

    def test_global_increasing_for_large_rate_gap(self):
        # exponent (alpha-beta)*floor(sqrt(k)) - 1 >= 1 makes t_k increase in k
        seq = default_seq(5)
        consts = RateConstants(alpha=Fraction(9, 4), beta=Fraction(1, 4))
        values = [time_scales_global(seq, consts, k) for k in range(1, 6)]
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_local_delta_zero_degenerates(self):
        seq = default_seq(2)
        t = time_scales_local(seq, 1, m=4, delta=0.0, C=1.0, d=3, r=1,
                              K_const=0.01)
        inner = (float(m_of(seq, 1)) ** (0.5 - 1.0 / 3) * 0.01
                 / (24 * seq[0] * 1.0 * 4 ** 1.0 * 4 ** 0.5))
        assert t == pytest.approx(inner, rel=1e-9)

    def test_local_positive(self):
        from codlab.fooling import k_theta, tau
        K = k_theta(tau(3, 1), 3, 1)
        t = time_scales_local(default_seq(3), 1, m=4, delta=1.0, C=1.0,
                              d=3, r=1, K_const=K)
        assert t > 0

    def test_local_validates(self):
        with pytest.raises(ValueError):
            time_scales_local(default_seq(2), 1, m=4, delta=0.0, C=1.0,
                              d=2, r=1, K_const=1.0)

    def test_threshold_filter(self):
        seq = default_seq(5)
        # threshold below every t_k -> first index; above all -> None
        args = dict(m=1, delta=0.0, C=1.0, d=3, r=1, K_const=1.0)
        assert first_k_above_threshold(seq, 1e-12, **args) == 1
        assert first_k_above_threshold(seq, 1e12, **args) is None


class TestRateConstants:
    def test_order_enforced(self):
        with pytest.raises(ValueError):
            RateConstants(alpha=Fraction(1, 4), beta=Fraction(1, 2))
        with pytest.raises(ValueError):
            RateConstants(alpha=Fraction(1, 2), beta=Fraction(1, 4), c_Y=0.0)
