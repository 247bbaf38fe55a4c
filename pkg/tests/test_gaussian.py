import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from informed_relay import gaussian as g
from informed_relay.gaussian import ChannelParams, LowerParams, UpperParams
from informed_relay.optimize import GridSpec

from conftest import random_channel
from oracles import df_oracle, half_log2, lower_oracle, upper_oracle

TEN = ChannelParams(10, 10, 10, 10, 10)
TEN_DEG = TEN.with_(degraded=True)

pos = st.floats(0.1, 100)


@st.composite
def channels(draw, degraded=st.booleans()):
    deg = draw(degraded)
    p1, p2, q, n2, n3 = (draw(pos) for _ in range(5))
    if deg and n3 < n2:
        n2, n3 = n3, n2
    return ChannelParams(p1, p2, q, n2, n3, degraded=deg)


class TestChannelParams:
    def test_from_db(self):
        ch = ChannelParams.from_db(10, 0, 20, -10, 10)
        assert (ch.p1, ch.p2, ch.q, ch.n2, ch.n3) == pytest.approx((10, 1, 100, 0.1, 10))

    @pytest.mark.parametrize("field", ["p1", "p2", "q"])
    def test_negative_power_names_field(self, field):
        with pytest.raises(ValueError, match=field):
            TEN.with_(**{field: -1.0})

    @pytest.mark.parametrize("field", ["n2", "n3"])
    def test_zero_noise_names_field(self, field):
        with pytest.raises(ValueError, match=field):
            TEN.with_(**{field: 0.0})

    @pytest.mark.parametrize("bad", [math.nan, math.inf])
    def test_non_finite(self, bad):
        with pytest.raises(ValueError, match="p2"):
            TEN.with_(p2=bad)

    def test_non_number(self):
        with pytest.raises(TypeError, match="q"):
            TEN.with_(q="10")

    def test_zero_powers_allowed(self):
        assert ChannelParams(0, 0, 0, 1, 1).p1 == 0


class TestParamTypes:
    def test_lower_correlations(self):
        lp = LowerParams(0.5, 0.25, -0.5)
        assert lp.sigma12(TEN) == pytest.approx(0.5 * math.sqrt(0.75 * 100))
        assert lp.sigma2s(TEN) == pytest.approx(-0.5 * math.sqrt(0.25 * 100))

    @pytest.mark.parametrize("args", [(1.1, 0.5, -0.5), (0.5, -0.1, -0.5), (0.5, 0.5, 0.1), (math.nan, 0, 0)])
    def test_lower_box(self, args):
        with pytest.raises(ValueError):
            LowerParams(*args)

    def test_upper_disc(self):
        UpperParams(0.6, -0.8)
        with pytest.raises(ValueError, match="exceed 1"):
            UpperParams(0.8, -0.8)


class TestLowerTerms:
    def test_term1_examples(self):
        ch = ChannelParams(10, 10, 10, 1, 10)
        assert g.lower_term1(ch, 1.0) == 0.0
        assert g.lower_term1(ch, 0.0) == pytest.approx(0.5 * math.log2(11))
        assert g.lower_term1(ch.with_(p1=0, n2=5), 0.3) == 0.0

    @given(r12=st.floats(0, 1), r2s=st.floats(-1, 0))
    def test_term2_theta_zero(self, r12, r2s):
        ch = ChannelParams(3, 7, 2, 1, 4)
        want = 0.5 * math.log2(1 + (3 + 7 + 2 * r12 * math.sqrt(21)) / (2 + 4))
        assert g.lower_term2(ch, r12, 0.0, r2s) == pytest.approx(want, rel=1e-12)

    def test_term2_hand_value(self):
        val = g.lower_term2(TEN, 0.0, 1.0, 0.0)
        assert val == pytest.approx(0.5 * math.log2(1 + 10 / 30) + 0.5, abs=1e-12)
        assert val == pytest.approx(0.70752, abs=1e-5)

    @given(r12=st.floats(0, 1), th=st.floats(0, 1), r2s=st.floats(-1, 0))
    def test_term2_without_relay_power(self, r12, th, r2s):
        ch = ChannelParams(10, 0, 10, 1, 10)
        assert g.lower_term2(ch, r12, th, r2s) == pytest.approx(0.5 * math.log2(1.5), rel=1e-12)

    def test_vectorized(self):
        r = np.linspace(0, 1, 5)
        assert np.allclose(g.lower_term1(TEN, r), [g.lower_term1(TEN, x) for x in r])

    @pytest.mark.parametrize("args", [(1.5, 0.5, -0.5), (0.5, 1.5, -0.5), (0.5, 0.5, 0.5)])
    def test_term2_rejects_out_of_box(self, args):
        with pytest.raises(ValueError):
            g.lower_term2(TEN, *args)

    def test_non_positive_denominator(self):
        # theta*P2 + Q - 2 sqrt(theta P2 Q) + N3 vanishes only with N3 -> 0, so force it via tiny N3
        ch = ChannelParams(1, 1, 1, 1, 1e-300)
        with pytest.raises(ArithmeticError):
            g.lower_term2(ch, 0.0, 1.0, -1.0)


class TestAlpha:
    def test_costa_coefficient(self):
        assert g.alpha_opt(ChannelParams(1, 10, 3, 1, 10), 1.0, 0.0) == pytest.approx(0.5)

    def test_theta_zero(self):
        assert g.alpha_opt(TEN, 0.0, -0.7) == 0.0

    def test_exact_rational_value(self):
        # theta P2 / Q = 1 keeps every quantity rational
        p2, n3, rho = Fraction(10), Fraction(10), Fraction(-1, 2)
        pe = p2 * (1 - rho**2)
        want = pe / (pe + n3) * (1 + rho) - rho
        assert want == Fraction(5, 7)
        assert g.alpha_opt(TEN, 1.0, -0.5) == pytest.approx(float(want), abs=1e-15)

    def test_requires_state(self):
        with pytest.raises(ValueError, match="q = 0"):
            g.alpha_opt(TEN.with_(q=0.0), 0.5, -0.5)


class TestUpperTerms:
    def test_general_first_term(self):
        ch = ChannelParams(10, 10, 10, 1, 10)
        assert g.upper_term1_general(ch, 0, 0) == pytest.approx(0.5 * math.log2(12))
        assert g.upper_term1_general(ch, 1, 0) == 0.0
        assert g.upper_term1_general(ch, 0, -1) == pytest.approx(0.5 * math.log2(1 + 10 * 1.1))

    def test_degraded_first_term(self):
        ch = ChannelParams(10, 10, 10, 2, 10, degraded=True)
        assert g.upper_term1_degraded(ch, 0, 0) == pytest.approx(0.5 * math.log2(6))
        assert g.upper_term1_degraded(ch, 0.6, -0.8) == pytest.approx(0.0, abs=1e-12)
        assert g.upper_term1_degraded(ch, 0, -1) == pytest.approx(0.5 * math.log2(6))

    def test_second_term_hand_value(self):
        assert g.upper_term2(TEN, 0, 0) == pytest.approx(0.5 * math.log2(4 / 3) + 0.5, abs=1e-12)

    @given(r12=st.floats(0, 0.7), r2s=st.floats(-0.7, 0))
    def test_second_term_without_relay_power(self, r12, r2s):
        ch = ChannelParams(10, 0, 10, 1, 10)
        assert g.upper_term2(ch, r12, r2s) == pytest.approx(0.5 * math.log2(1.5), rel=1e-12)

    @given(phi=st.floats(0, math.pi / 2))
    def test_second_term_on_circle(self, phi):
        r12, r2s = math.cos(phi), -math.sin(phi)
        ch = ChannelParams(3, 5, 7, 1, 2)
        want = 0.5 * math.log2(1 + (math.sqrt(3) + r12 * math.sqrt(5)) ** 2 / ((math.sqrt(7) + r2s * math.sqrt(5)) ** 2 + 2))
        assert g.upper_term2(ch, r12, r2s) == pytest.approx(want, rel=1e-9, abs=1e-12)

    def test_disc_violation(self):
        with pytest.raises(ValueError, match="rho12\\^2"):
            g.upper_term2(TEN, 0.9, -0.9)


class TestLowerBound:
    def test_argmax_keys_and_terms(self):
        res = g.lower_bound(TEN)
        assert set(res.argmax) == {"rho12p", "theta", "rho2sp"}
        a = res.argmax
        assert res.rate == min(g.lower_term1(TEN, a["rho12p"]), g.lower_term2(TEN, a["rho12p"], a["theta"], a["rho2sp"]))
        assert res.grid_tolerance >= 0

    def test_no_state_is_df(self):
        ch = ChannelParams(10, 10, 0, 1, 10, degraded=True)
        assert g.lower_bound(ch).rate == pytest.approx(g.degraded_df_capacity(ch).rate, abs=1e-6)

    def test_zero_relay_power(self):
        ch = ChannelParams(10, 0, 10, 1, 10)
        assert g.lower_bound(ch).rate == pytest.approx(0.5 * math.log2(1.5), abs=1e-12)
        assert g.lower_bound(ch).rate == pytest.approx(0.29248, abs=1e-5)

    def test_strong_state(self):
        ch = ChannelParams(10, 10, 1e6, 1, 10, degraded=True)
        res = g.lower_bound(ch)
        assert res.rate == pytest.approx(0.5, abs=1e-3 + res.grid_tolerance)

    def test_zero_source_power(self):
        assert g.lower_bound(TEN.with_(p1=0.0)).rate == 0.0

    def test_against_dense_oracle(self, rng):
        for _ in range(4):
            ch = random_channel(rng)
            res = g.lower_bound(ch)
            ref = lower_oracle(ch.p1, ch.p2, ch.q, ch.n2, ch.n3)
            # the refined search may only beat the coarse joint grid
            assert ref - 1e-9 <= res.rate <= ref + 5e-3


class TestUpperBounds:
    def test_argmax_feasible(self):
        res = g.upper_bound(TEN)
        assert res.argmax["rho12"] ** 2 + res.argmax["rho2s"] ** 2 <= 1.0

    @pytest.mark.parametrize("degraded", [False, True])
    def test_against_dense_oracle(self, rng, degraded):
        for _ in range(4):
            ch = random_channel(rng, degraded)
            res = g.upper_bound(ch)
            ref = upper_oracle(ch.p1, ch.p2, ch.q, ch.n2, ch.n3, degraded)
            assert ref - 1e-9 <= res.rate <= ref + 5e-3

    def test_zero_relay_power(self):
        ch = ChannelParams(10, 0, 10, 1, 10, degraded=True)
        assert g.upper_bound(ch).rate == pytest.approx(0.5 * math.log2(1.5), abs=1e-9)

    def test_strong_state(self):
        ch = ChannelParams(10, 10, 1e6, 1, 10, degraded=True)
        res = g.upper_bound(ch)
        assert res.rate == pytest.approx(0.5, abs=1e-3 + res.grid_tolerance)

    def test_no_state_equals_df(self):
        ch = ChannelParams(10, 10, 0, 1, 10, degraded=True)
        assert g.upper_bound(ch).rate == pytest.approx(g.degraded_df_capacity(ch).rate, abs=1e-6)

    def test_equiv_requires_degraded(self):
        with pytest.raises(ValueError, match="degraded"):
            g.upper_bound_degraded_equiv(TEN)

    def test_equiv_no_state(self):
        ch = ChannelParams(10, 10, 0, 1, 10, degraded=True)
        res = g.upper_bound_degraded_equiv(ch)
        assert res.rate == pytest.approx(g.degraded_df_capacity(ch).rate, abs=1e-6)
        assert abs(res.argmax["rho"]) <= 1e-6

    @given(ch=channels(degraded=st.just(True)))
    def test_equiv_matches(self, ch):
        grid = GridSpec(41, 3)
        a, b = g.upper_bound(ch, grid), g.upper_bound_degraded_equiv(ch, grid)
        assert abs(a.rate - b.rate) <= 2 * max(a.grid_tolerance, b.grid_tolerance) + 1e-9


class TestReferenceCurves:
    def test_df_capacity_against_oracle(self, rng):
        for _ in range(5):
            ch = random_channel(rng, True, q=0.0)
            res = g.degraded_df_capacity(ch)
            assert abs(res.rate - df_oracle(ch.p1, ch.p2, ch.n2, ch.n3)) <= res.grid_tolerance + 1e-9

    def test_trivial_lower_example(self):
        ch = ChannelParams(10, 10, 10, 1, 10)
        res = g.trivial_lower_bound(ch)
        assert res.rate == pytest.approx(df_oracle(10, 10, 11, 20), abs=1e-7)
        assert set(res.argmax) == {"beta"}

    def test_trivial_lower_without_state(self):
        ch = ChannelParams(10, 10, 0, 1, 10, degraded=True)
        assert g.trivial_lower_bound(ch).rate == pytest.approx(g.degraded_df_capacity(ch).rate, abs=1e-12)

    def test_trivial_upper_without_state(self):
        ch = ChannelParams(10, 10, 0, 1, 10, degraded=True)
        assert g.trivial_upper_bound(ch).rate == pytest.approx(g.upper_bound(ch).rate, abs=1e-6)

    def test_trivial_upper_zero_relay_power(self):
        ch = ChannelParams(10, 0, 10, 1, 10)
        assert g.trivial_upper_bound(ch).rate == pytest.approx(0.5 * math.log2(2), abs=1e-9)

    @given(ch=channels())
    def test_ordering(self, ch):
        grid = GridSpec(41, 3)
        tl, lo = g.trivial_lower_bound(ch, grid), g.lower_bound(ch, grid)
        up, tu = g.upper_bound(ch, grid), g.trivial_upper_bound(ch, grid)
        slack = lambda *r: 2 * sum(x.grid_tolerance for x in r) + 1e-12
        assert tl.rate <= lo.rate + slack(tl, lo)
        assert lo.rate <= up.rate + slack(lo, up)
        assert up.rate <= tu.rate + slack(up, tu)


class TestSpecialCases:
    def test_threshold_hand_value(self):
        assert g.capacity_condition_threshold(TEN) == pytest.approx(10.0, abs=1e-9)

    @given(p1=pos, q=pos, n3=pos, n2=pos)
    def test_threshold_without_relay_power(self, p1, q, n3, n2):
        ch = ChannelParams(p1, 0.0, q, n2, n3)
        assert g.capacity_condition_threshold(ch) == pytest.approx(q + n3, rel=1e-12)

    @given(p1=pos, p2=pos, n3=pos)
    def test_threshold_without_state(self, p1, p2, n3):
        ch = ChannelParams(p1, p2, 0.0, 1.0, n3)
        want = p1 * n3 * (p2 + n3) / (p1 * n3)
        assert g.capacity_condition_threshold(ch) == pytest.approx(want, rel=1e-12)

    def test_threshold_ignores_n2(self):
        assert g.capacity_condition_threshold(TEN.with_(n2=0.3)) == g.capacity_condition_threshold(TEN)

    @pytest.mark.parametrize("n2", [10.0, 15.0, 20.0])
    def test_capacity_known(self, n2):
        ch = TEN_DEG.with_(n2=n2)
        assert g.capacity_known(ch) == pytest.approx(0.5 * math.log2(1 + 10 / n2), abs=1e-15)

    def test_capacity_unknown_below_threshold(self):
        assert g.capacity_known(TEN_DEG.with_(n2=5.0)) is None

    def test_extreme_no_state(self):
        ch = ChannelParams(10, 10, 0, 1, 10, degraded=True)
        ext = g.extreme_cases(ch)
        assert ext.name == "no_state"
        assert ext.capacity == pytest.approx(df_oracle(10, 10, 1, 10), abs=1e-7)

    def test_extreme_zero_relay_power(self):
        ext = g.extreme_cases(ChannelParams(10, 0, 10, 1, 10, degraded=True))
        assert (ext.name, ext.capacity) == ("zero_relay_power", pytest.approx(0.29248, abs=1e-5))

    def test_extreme_strong_state(self):
        ext = g.extreme_cases(ChannelParams(10, 10, 1e9, 1, 10, degraded=True))
        assert (ext.name, ext.capacity) == ("strong_state", pytest.approx(0.5, abs=1e-12))

    def test_no_extreme_case(self):
        assert g.extreme_cases(TEN_DEG) is None


class TestPurity:
    def test_repeatable_and_input_untouched(self):
        ch = ChannelParams(3, 4, 5, 1, 7, degraded=True)
        before = ch.with_()
        runs = [(g.lower_bound(ch).rate, g.upper_bound(ch).rate) for _ in range(2)]
        assert runs[0] == runs[1]
        assert ch == before

    def test_monotone_in_relay_noise(self):
        rates = [g.lower_bound(TEN_DEG.with_(n2=n2)).rate for n2 in (0.1, 1.0, 10.0, 100.0)]
        assert all(a >= b - 1e-9 for a, b in zip(rates, rates[1:]))

    def test_half_log2_helper_agrees(self):
        assert half_log2(3.0) == pytest.approx(0.5 * math.log2(4.0))
