import math

import numpy as np
import pytest
from scipy import integrate, special

from bnnprior.errors import AccuracyError, ConfigurationError, DivergenceError, DomainError
from bnnprior.specfun import (
    ContourConfig,
    MellinSpectrum,
    bessel_j_zeros,
    bessel_k,
    f_q_nested,
    hankel_radial,
    log_bessel_k,
    log_f_q_nested,
    log_gamma,
    log_gamma_complex,
    log_meijer_g_1q,
    log_meijer_g_q0,
    log_rising_factorial,
    meijer_g_1q,
    meijer_g_q0,
    radial_integral,
    sphere_area,
    vquad,
    wynn_epsilon,
)

# reference values computed once with mpmath at 30 digits
G30_B = (0.0, 0.5, 1.5)
G30_REF = {0.01: 1.2665721691548657413, 1.0: 0.26423310239397635328, 20.0: 0.0033558903229077725132}
G40_B = (0.0, 1.0, 2.5, 4.0)
G40_REF = {0.3: 6.7570402952632605366, 5.0: 2.9692894529908157922}
G12_A = (-0.5, -1.0)
G12_REF = {0.5: 0.37875972742495089689, 4.0: 0.070557408899905293143}


class TestGamma:
    def test_log_gamma_matches_factorial(self):
        assert log_gamma(101) == pytest.approx(363.73937555556349014, rel=1e-15)

    def test_complex_log_gamma(self):
        got = log_gamma_complex(2 + 3j)
        assert got.real == pytest.approx(-2.09285175309273334956, rel=1e-14)
        assert got.imag == pytest.approx(2.30239654346686762615, rel=1e-14)

    def test_rising_factorial(self):
        # (3/2)(5/2)(7/2) = 105/8
        assert math.exp(log_rising_factorial(1.5, 3)) == pytest.approx(105 / 8, rel=1e-14)

    def test_pole_is_domain_error(self):
        with pytest.raises(DomainError):
            log_gamma(-2.0)


class TestBessel:
    def test_reference_values(self):
        assert bessel_k(0, 2.0) == pytest.approx(0.11389387274953343565, rel=1e-14)
        assert bessel_k(2.5, 0.1) == pytest.approx(1187.0212236418929429, rel=1e-13)

    def test_log_form_survives_underflow(self):
        assert log_bessel_k(1, 50.0) == pytest.approx(-51.722793870183626011, rel=1e-14)
        value, flag = bessel_k(1, 800.0, full_output=True)
        assert value == 0.0 and flag
        assert np.isfinite(log_bessel_k(1, 800.0))

    def test_half_integer_closed_form(self):
        x = np.array([0.3, 3.0, 30.0])
        assert np.allclose(bessel_k(0.5, x), np.sqrt(np.pi / (2 * x)) * np.exp(-x), rtol=1e-14)

    def test_even_in_order(self):
        assert bessel_k(-1.7, 2.0) == bessel_k(1.7, 2.0)

    def test_nonpositive_argument(self):
        with pytest.raises(DomainError):
            bessel_k(1, 0.0)


class TestMeijer:
    def test_density_family_reference(self):
        spec = MellinSpectrum(G30_B)
        z = np.array(list(G30_REF))
        assert np.allclose(meijer_g_q0(z, spec), list(G30_REF.values()), rtol=1e-12, atol=0)
        spec = MellinSpectrum(G40_B)
        z = np.array(list(G40_REF))
        assert np.allclose(meijer_g_q0(z, spec), list(G40_REF.values()), rtol=1e-12, atol=0)

    def test_charfun_family_reference(self):
        spec = MellinSpectrum((0.0,), G12_A)
        z = np.array(list(G12_REF))
        assert np.allclose(meijer_g_1q(z, spec), list(G12_REF.values()), rtol=1e-12, atol=0)

    def test_two_factor_is_bessel(self):
        # G^{2,0}_{0,2}(z | 0, nu) = 2 z^(nu/2) K_nu(2 sqrt z)
        nu = 1.5
        z = np.geomspace(1e-3, 50, 30)
        ref = 2 * z ** (nu / 2) * special.kv(nu, 2 * np.sqrt(z))
        assert np.allclose(meijer_g_q0(z, MellinSpectrum((0.0, nu))), ref, rtol=1e-11)

    def test_single_upper_is_power(self):
        # G^{1,1}_{1,1}(z | a ; 0) = Gamma(1 - a) (1 + z)^(a - 1)
        a = -1.5
        z = np.geomspace(1e-4, 1e4, 25)
        ref = special.gamma(1 - a) * (1 + z) ** (a - 1)
        assert np.allclose(meijer_g_1q(z, MellinSpectrum((0.0,), (a,))), ref, rtol=1e-11)

    def test_value_at_zero(self):
        assert meijer_g_q0(0.0, MellinSpectrum((0.0, 1.0, 2.5))) == pytest.approx(
            special.gamma(1.0) * special.gamma(2.5), rel=1e-14
        )
        assert meijer_g_1q(0.0, MellinSpectrum((0.0,), (-0.5, -1.0))) == pytest.approx(
            special.gamma(1.5) * special.gamma(2.0), rel=1e-14
        )

    def test_divergent_origin(self):
        with pytest.raises(DivergenceError):
            meijer_g_q0(0.0, MellinSpectrum((0.0, -0.5)))

    @pytest.mark.parametrize(
        "b, log_z, ref",
        [
            ((0.0, 0.0), -90, 88.845568670196934279),
            ((0.0, 0.0), -600, 598.84556867019693428),
            ((0.0, 0.0, 0.0), -90, 3898.1184722339932013),
            ((0.0, 0.0, 0.0), -460, 105007.40908419329173),
            ((0.0, 0.5, 0.5), -600, 3.1415926535897932385),
        ],
    )
    def test_tiny_argument_near_poles(self, b, log_z, ref):
        # the saddle crowds the leading (multiple) pole here; mpmath line integral at 40 digits
        assert meijer_g_q0(math.exp(log_z), MellinSpectrum(b)) == pytest.approx(ref, rel=1e-13)

    def test_charfun_family_extreme_arguments(self):
        a = -1.5
        z = np.array([1e-60, 1e-20, 1e20, 1e200])
        ref = special.gammaln(1 - a) + (a - 1) * np.log1p(z)
        assert np.allclose(log_meijer_g_1q(z, MellinSpectrum((0.0,), (a,))), ref, rtol=1e-13, atol=1e-13)

    def test_log_form_far_tail(self):
        spec = MellinSpectrum(G30_B)
        lv = log_meijer_g_q0(np.array([1e6, 1e9]), spec)
        assert np.all(np.isfinite(lv)) and lv[1] < lv[0] < -100

    def test_explicit_abscissa_agrees(self):
        spec = MellinSpectrum(G30_B)
        z = np.array([0.5, 2.0])
        cfg = ContourConfig(abscissa=-0.3)
        assert np.allclose(meijer_g_q0(z, spec, cfg), meijer_g_q0(z, spec), rtol=1e-11)

    def test_abscissa_outside_strip(self):
        with pytest.raises(ConfigurationError):
            meijer_g_q0(1.0, MellinSpectrum(G30_B), ContourConfig(abscissa=0.2))

    def test_family_mismatch(self):
        with pytest.raises(ConfigurationError):
            meijer_g_1q(1.0, MellinSpectrum(G30_B))

    def test_diagnostics(self):
        value, info = meijer_g_q0(np.array([0.1, 1.0]), MellinSpectrum(G30_B), full_output=True)
        assert value.shape == (2,)
        assert np.all(np.asarray(info.error_estimate) <= 1e-10 * value)

    def test_log_charfun_consistent(self):
        spec = MellinSpectrum((0.0,), G12_A)
        z = np.array([0.1, 3.0])
        assert np.allclose(np.exp(log_meijer_g_1q(z, spec)), meijer_g_1q(z, spec), rtol=1e-14)


class TestNestedOracle:
    def test_matches_reference(self):
        z = np.array(list(G30_REF))
        got = f_q_nested(z, [0.5, 1.5])
        assert np.allclose(got, list(G30_REF.values()), rtol=1e-12)

    def test_single_level_is_bessel(self):
        z = np.geomspace(1e-2, 30, 12)
        ref = 2 * z ** 0.5 * special.kv(1.0, 2 * np.sqrt(z))
        assert np.allclose(f_q_nested(z, [1.0]), ref, rtol=1e-11)

    def test_log_version(self):
        z = np.array([0.5, 5.0])
        assert np.allclose(np.exp(log_f_q_nested(z, [0.5, 1.5])), f_q_nested(z, [0.5, 1.5]), rtol=1e-14)


class TestQuadrature:
    def test_vquad_many_intervals(self):
        a = np.zeros(3)
        b = np.array([1.0, 2.0, np.pi])
        vals, err = vquad(lambda x, p: np.sin(x), a, b)
        assert np.allclose(vals, 1 - np.cos(b), rtol=1e-13)

    def test_vquad_parameters(self):
        p = np.array([0.5, 2.0, 7.0])
        vals, _ = vquad(lambda x, k: np.exp(-k * x), np.zeros(3), np.full(3, 10.0), p)
        assert np.allclose(vals, (1 - np.exp(-10 * p)) / p, rtol=1e-13)

    def test_sphere_area(self):
        assert sphere_area(1) == 2
        assert sphere_area(2) == pytest.approx(2 * np.pi)
        assert sphere_area(3) == pytest.approx(4 * np.pi)

    @pytest.mark.parametrize("n", [1, 2, 3, 6])
    def test_radial_integral_gaussian(self, n):
        gauss = lambda r: (2 * np.pi) ** (-n / 2) * np.exp(-r * r / 2)
        assert radial_integral(gauss, n) == pytest.approx(1.0, abs=1e-12)
        assert radial_integral(gauss, n, order=2) == pytest.approx(n, rel=1e-12)


class TestHankel:
    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_gaussian_self_pair(self, n):
        k = np.linspace(0, 5, 11)
        density = lambda r: (2 * np.pi) ** (-n / 2) * np.exp(-r * r / 2)
        out = hankel_radial(density, n, "forward", k)
        assert out.shape == (11, 2)
        assert np.allclose(out[:, 0], k)
        assert np.allclose(out[:, 1], np.exp(-k * k / 2), atol=1e-12)

    def test_laplace_pair(self):
        # 3-d Fourier transform of exp(-r)/(8 pi) is 1/(1 + k^2)^2
        k = np.array([0.0, 0.5, 2.0, 6.0])
        out = hankel_radial(lambda r: np.exp(-r) / (8 * np.pi), 3, "forward", k)[:, 1]
        assert np.allclose(out, 1 / (1 + k * k) ** 2, rtol=1e-9)

    def test_inverse_of_power_law(self):
        # (1 + q^2)^(-1) in 2-d inverts to K_0(r) / (2 pi)
        r = np.array([0.1, 1.0, 4.0])
        out = hankel_radial(lambda q: 1 / (1 + q * q), 2, "inverse", r)[:, 1]
        assert np.allclose(out, special.k0(r) / (2 * np.pi), rtol=1e-8)

    def test_bessel_zeros(self):
        assert np.allclose(bessel_j_zeros(0, 5), special.jn_zeros(0, 5), rtol=1e-14)
        assert np.allclose(bessel_j_zeros(2, 5), special.jn_zeros(2, 5), rtol=1e-14)
        z = bessel_j_zeros(-0.5, 4)
        assert np.allclose(z, (np.arange(4) + 0.5) * np.pi, rtol=1e-12)

    def test_wynn_accelerates_alternating_series(self):
        sums = np.cumsum([(-1) ** k / (k + 1) for k in range(13)])
        assert abs(wynn_epsilon(sums) - math.log(2)) < 1e-9
        assert abs(sums[-1] - math.log(2)) > 1e-2

    def test_bad_direction(self):
        with pytest.raises(ConfigurationError):
            hankel_radial(lambda r: np.exp(-r), 1, "sideways", [1.0])


def test_recursion_against_direct_quadrature():
    # f_2(z) = int t^(nu-1) e^-t f_1(z/t) dt with f_1 the Bessel closed form
    nu1, nu2, z = 0.5, 1.5, 0.7
    f1 = lambda x: 2 * x ** (nu1 / 2) * special.kv(nu1, 2 * np.sqrt(x))
    val, _ = integrate.quad(lambda t: t ** (nu2 - 1) * np.exp(-t) * f1(z / t), 0, np.inf, epsabs=0, epsrel=1e-12)
    assert meijer_g_q0(z, MellinSpectrum((0.0, nu1, nu2))) == pytest.approx(val, rel=1e-10)


def test_mellin_transform_consistency():
    # int_0^inf z^(s-1) G(z) dz = prod Gamma(b_j + s)
    b = (0.0, 0.5, 1.5)
    s = 1.3
    spec = MellinSpectrum(b)
    lz = np.linspace(-30, 8, 3001)
    vals = np.exp(s * lz) * meijer_g_q0(np.exp(lz), spec)
    got = integrate.simpson(vals, x=lz)
    assert got == pytest.approx(math.prod(special.gamma(bj + s) for bj in b), rel=1e-8)


def test_failed_refinement_raises_accuracy_error():
    cfg = ContourConfig(target_rel_tol=1e-15, max_refinements=1, step=4.0)
    with pytest.raises(AccuracyError):
        meijer_g_q0(np.array([1.0]), MellinSpectrum(G40_B), cfg)
