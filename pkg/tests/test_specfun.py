"""Special function layer: scaled Bessel evaluations and zeros of K.

Reference values were computed independently with mpmath at 40+ digits
and frozen here; the library itself never imports mpmath.
"""

import cmath
import math

import numpy as np
import pytest

from nrbk.specfun import (
    BesselOrder,
    bessel_k_complex,
    bessel_k_half,
    decay_exponent,
    find_zeros,
    log_bessel_i,
    log_bessel_k,
    zero_count,
)


def crel(a, b):
    return abs(a - b) / abs(b)


class TestRealAxisLogs:
    @pytest.mark.parametrize("nu,r,ref", [
        (3, 2.0, math.log(0.21273995923985265527)),
        (4, 2.0, math.log(0.050728569979180238238)),
        (7, 3.5, -4.2327899885046738986),
        (15, 10.0, math.log(0.10437149070600108614)),
        (40, 20.0, -15.844173874859163118),
        (0, 100.0, 96.779732689942583717),
    ])
    def test_log_i(self, nu, r, ref):
        assert crel(log_bessel_i(nu, r), ref) < 1e-13

    @pytest.mark.parametrize("nu,r,ref", [
        (0.5, 1.0, -0.77420864735527256764),
        (3, 2.0, -0.43481350347114886148),
        (4, 2.0, 0.78659923849363304976),
        (15, 10.0, -1.3255515915340407779),
        (40, 20.0, 11.350537974802906746),
    ])
    def test_log_k(self, nu, r, ref):
        assert crel(log_bessel_k(nu, r), ref) < 1e-13

    def test_log_i_underflow_fallback(self):
        # scipy's scaled routine underflows here; the series must take over
        assert crel(log_bessel_i(64, 1e-3), -691.625956889488314492) < 1e-13

    def test_log_k_overflow_fallback(self):
        assert crel(log_bessel_k(64, 1e-4), 834.139372580994090674) < 1e-13
        assert crel(log_bessel_k(63.5, 1e-4), 827.114077335373659183) < 1e-13

    def test_tiny_arguments(self):
        assert abs(log_bessel_i(0, 1e-8) - 2.5e-17) < 1e-16
        assert crel(log_bessel_k(0, 1e-12), 3.32312601908437901242) < 1e-13

    def test_vector_mixes_routes(self):
        r = np.array([1e-4, 2.0, 50.0])
        v = log_bessel_k(64, r)
        assert v.shape == (3,)
        assert np.all(np.isfinite(v))
        assert np.all(np.diff(v) < 0)  # K decreases in r

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            log_bessel_i(3, 0.0)
        with pytest.raises(ValueError):
            log_bessel_i(3, -1.0)
        with pytest.raises(ValueError):
            log_bessel_k(-1, 2.0)


class TestComplexK:
    def test_left_half_series_route(self):
        z = complex(-2, 3)
        v, d = bessel_k_complex(5, z)
        assert crel(v, complex(0.04276005842419881162, -0.028014445022254864713)) < 5e-13
        assert crel(v * cmath.exp(-z),
                    complex(-0.34200641986734342727, 0.16034096992323854821)) < 5e-13
        assert crel(d * cmath.exp(-z),
                    complex(-1.6261831813669407267, -0.11125594521410551636)) < 5e-13

    def test_right_half_matches_real_axis(self):
        for n, r in [(0, 0.7), (3, 2.0), (9, 11.0), (24, 30.0)]:
            v, _ = bessel_k_complex(n, complex(r, 0.0))
            assert crel(math.log(v.real) - r, log_bessel_k(n, r)) < 1e-12
            assert v.imag == 0.0

    def test_asymptotic_route(self):
        v, _ = bessel_k_complex(0, complex(20, 5))
        assert crel(v, complex(0.27243987585041778583, -0.0331501075840777992052)) < 5e-13
        v, _ = bessel_k_complex(1, complex(20, 5))
        assert crel(v, complex(0.278591549810435724664, -0.0354891051556330592135)) < 5e-13

    def test_reflection_with_long_ladders(self):
        v, d = bessel_k_complex(33, complex(-25, 30))
        assert crel(v, complex(6.38076866338233605515e-6, 1.24783478601105767982e-5)) < 5e-13
        assert crel(d, complex(-1.92589724506194302972e-6, -1.45400380211427938401e-5)) < 5e-13
        v, d = bessel_k_complex(12, complex(-8, 3))
        assert crel(v, complex(-2.13640445620448104835e-4, 1.78016218009975366742e-4)) < 5e-13
        assert crel(d, complex(3.03459287798033105557e-4, -5.9851755353261801128e-5)) < 5e-13

    def test_deep_left_large_order(self):
        v, _ = bessel_k_complex(64, complex(-40, 10))
        assert crel(v, complex(-9.88344376882067123522e-18, -3.23329693184347627904e-18)) < 5e-13

    def test_conjugate_symmetry_is_bit_exact(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            z = complex(rng.uniform(-40, 30), rng.uniform(0.01, 30))
            n = int(rng.integers(0, 40))
            v1, d1 = bessel_k_complex(n, z)
            v2, d2 = bessel_k_complex(n, z.conjugate())
            assert v2 == v1.conjugate()
            assert d2 == d1.conjugate()

    def test_branch_cut_sides_differ(self):
        up, _ = bessel_k_complex(2, complex(-3.0, 0.0))
        dn, _ = bessel_k_complex(2, complex(-3.0, -0.0))
        assert up == dn.conjugate()
        assert abs(up.imag) > 0

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            bessel_k_complex(-1, 1 + 1j)
        with pytest.raises(ValueError):
            bessel_k_complex(3, 0.0)


class TestHalfOrder:
    def test_frozen_point(self):
        z = complex(2, -1)
        v, d = bessel_k_half(3, z)
        assert crel(v, complex(3.49009749367570498591, 5.06090137600385079773)) < 5e-13
        assert crel(d, complex(-3.22377937599285352762, -10.9022760328856959795)) < 5e-13
        assert crel(v * cmath.exp(-z),
                    complex(-0.32113627364223250162, 0.76751785104537690941)) < 5e-13

    def test_lowest_order_closed_form(self):
        v, d = bessel_k_half(0, 1.0)
        assert crel(v.real * math.exp(-1), 0.46106850444789455844) < 1e-14
        # K_{1/2}' = -K_{1/2} (1 + 1/(2z)) / ... check against the exact form
        ref = -math.sqrt(math.pi / 2.0) * math.exp(-1) * 1.5
        assert crel(d.real * math.exp(-1), ref) < 1e-13

    def test_matches_real_axis_log(self):
        for n, r in [(0, 1.0), (5, 4.0), (20, 9.0)]:
            v, _ = bessel_k_half(n, complex(r, 0.0))
            assert crel(math.log(v.real) - r, log_bessel_k(n + 0.5, r)) < 1e-12

    def test_large_order_left_half(self):
        # regression for the cancellation blowup of the naive polynomial form
        v, d = bessel_k_half(64, complex(-42.5, 3.8))
        assert cmath.isfinite(v) and cmath.isfinite(d)
        ratio = v / d
        assert abs(ratio) < 10.0

    def test_conjugate_symmetry_is_bit_exact(self):
        rng = np.random.default_rng(11)
        for _ in range(15):
            z = complex(rng.uniform(-40, 30), rng.uniform(0.01, 30))
            n = int(rng.integers(0, 40))
            v1, d1 = bessel_k_half(n, z)
            v2, d2 = bessel_k_half(n, z.conjugate())
            assert v2 == v1.conjugate()
            assert d2 == d1.conjugate()


class TestDecayExponent:
    def test_real_axis_root(self):
        # the curve carrying the zeros meets the real axis here
        assert abs(decay_exponent(0.66274341934918158097)) < 1e-15

    def test_frozen_value(self):
        assert crel(decay_exponent(0.5), -0.325601486428915494289) < 1e-14

    def test_large_order_estimate(self):
        # K_nu(nu kappa) ~ sqrt(pi/2nu) (1+kappa^2)^(-1/4) exp(-nu theta)
        nu, kappa = 40.0, 0.5
        est = (0.5 * math.log(math.pi / (2 * nu))
               - 0.25 * math.log(1 + kappa ** 2) - nu * decay_exponent(kappa))
        assert abs(est - log_bessel_k(nu, nu * kappa)) < 1e-3


class TestZeroCount:
    @pytest.mark.parametrize("n,m", [(0, 0), (1, 0), (2, 2), (3, 2), (4, 4),
                                     (5, 4), (6, 6), (7, 6), (8, 8), (63, 62), (64, 64)])
    def test_integer(self, n, m):
        assert zero_count(BesselOrder.integer(n)) == m

    @pytest.mark.parametrize("n", [0, 1, 2, 7, 64])
    def test_half(self, n):
        assert zero_count(BesselOrder.half(n)) == n

    def test_order_validation(self):
        with pytest.raises(ValueError):
            BesselOrder("quarter", 3)
        with pytest.raises(ValueError):
            BesselOrder.integer(-2)


# upper-half zeros, ascending imaginary part, frozen from a 30-digit run
FROZEN_INTEGER_ZEROS = {
    2: [complex(-1.281373797656096476068, 0.4294849652087196999798)],
    3: [complex(-1.68178880474584545853, 1.308012032273949052263)],
    5: [complex(-3.135132844704643418671, 1.303882397713705745764),
        complex(-2.218626274639876036411, 3.113082944985948506669)],
    10: [complex(-6.618481884707936068688, 0.4336862057862098768614),
         complex(-6.378394970794156899465, 2.174248586202665492573),
         complex(-5.790027164179677271397, 3.940972615769246849259),
         complex(-4.764845373372903983574, 5.77055559870997686085),
         complex(-3.045293498958948893554, 7.761655670874568237198)],
}

FROZEN_HALF_ZEROS = {
    1: [complex(-1.0, 0.0)],
    2: [complex(-1.5, math.sqrt(3) / 2.0)],
    7: [complex(-4.971786858527935677861, 0.0),
        complex(-4.758290528154628945237, 1.739286061130536542894),
        complex(-4.070139163638137471706, 3.517174047709753165815),
        complex(-2.685676878943265744126, 5.420694130716748895848)],
}


class TestFindZeros:
    @pytest.mark.parametrize("n", sorted(FROZEN_INTEGER_ZEROS))
    def test_integer_against_frozen(self, n):
        zs = find_zeros(BesselOrder.integer(n))
        up = sorted(zs.upper_half(), key=lambda z: z.imag)
        ref = FROZEN_INTEGER_ZEROS[n]
        assert len(up) == len(ref)
        for a, b in zip(up, ref):
            assert abs(a - b) < 1e-12 * (1 + abs(b))

    @pytest.mark.parametrize("n", sorted(FROZEN_HALF_ZEROS))
    def test_half_against_frozen(self, n):
        zs = find_zeros(BesselOrder.half(n))
        got = sorted((z for z in zs.zeros if z.imag >= 0), key=lambda z: z.imag)
        ref = FROZEN_HALF_ZEROS[n]
        assert len(got) == len(ref)
        for a, b in zip(got, ref):
            assert abs(a - b) < 1e-12 * (1 + abs(b))

    def test_large_order_endpoints(self):
        up = find_zeros(BesselOrder.integer(30)).upper_half()
        lm = up[np.argmin(up.real)]
        ex = up[np.argmax(up.imag)]
        assert abs(lm - complex(-19.87931663648153972823591, 0.4338590250396529559486727)) < 3e-11
        assert abs(ex - complex(-4.705498172498582210521201, 26.95063289727087905972569)) < 3e-11
        up = find_zeros(BesselOrder.integer(60)).upper_half()
        lm = up[np.argmin(up.real)]
        ex = up[np.argmax(up.imag)]
        assert abs(lm - complex(-39.76311210203819656916843, 0.4338753138292621808222497)) < 7e-11
        assert abs(ex - complex(-6.063076149363504401143745, 56.23550777586941231649799)) < 7e-11

    @pytest.mark.parametrize("order", [
        BesselOrder.integer(2), BesselOrder.integer(10), BesselOrder.integer(31),
        BesselOrder.half(2), BesselOrder.half(9), BesselOrder.half(30),
    ])
    def test_invariants(self, order):
        zs = find_zeros(order)
        m = zero_count(order)
        assert len(zs) == m
        # exact closure under conjugation
        assert np.array_equal(zs.zeros, np.conj(zs.zeros[::-1]))
        # all zeros strictly in the left half plane
        assert np.all(zs.zeros.real < 0)
        # residual gate
        assert np.all(zs.residuals <= 1e-12 * (1 + np.abs(zs.zeros)))
        # pairwise separation
        if m > 1:
            d = np.abs(zs.zeros[:, None] - zs.zeros[None, :]) + np.eye(m)
            assert d.min() > 1e-6 * max(1, order.n)

    def test_empty_orders(self):
        for order in [BesselOrder.integer(0), BesselOrder.integer(1), BesselOrder.half(0)]:
            zs = find_zeros(order)
            assert len(zs) == 0

    def test_real_zero_only_for_odd_half_orders(self):
        assert np.sum(find_zeros(BesselOrder.half(7)).zeros.imag == 0) == 1
        assert np.sum(find_zeros(BesselOrder.half(8)).zeros.imag == 0) == 0
        assert np.sum(find_zeros(BesselOrder.integer(8)).zeros.imag == 0) == 0

    def test_rejects_non_order(self):
        with pytest.raises(ValueError):
            find_zeros(5)
