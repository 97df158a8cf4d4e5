"""Closed-form rate calculators against hand-derived and quoted values."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phononet import rates
from phononet.units import TWO_PI

GHZ = TWO_PI * 1e9


class TestGroundStateSpectrum:
    def test_no_distortion_no_field(self):
        s = rates.ground_state_spectrum(lambda_so=GHZ * 46.0)
        assert s.splitting == pytest.approx(GHZ * 46.0)
        assert s.theta == pytest.approx(math.pi / 4.0)
        assert s.phi == 0.0
        assert s.e3 - s.e1 == pytest.approx(s.splitting)
        assert s.e4 - s.e2 == pytest.approx(s.splitting)

    def test_splitting_46ghz(self):
        s = rates.ground_state_spectrum(GHZ * 46.0, 0.0, 0.0, GHZ * 1.0)
        assert s.splitting / GHZ == pytest.approx(46.0)
        # Zeeman splits the doublets without changing the gap
        assert (s.e2 - s.e1) / GHZ == pytest.approx(1.0)

    def test_pure_y_distortion(self):
        lam = GHZ * 10.0
        s = rates.ground_state_spectrum(lam, 0.0, lam / 2.0)
        assert math.tan(s.phi) == pytest.approx(1.0)
        assert s.splitting == pytest.approx(math.sqrt(2.0) * lam)

    @given(
        lam=st.floats(0.1, 100.0),
        ux=st.floats(-10.0, 10.0),
        uy=st.floats(-10.0, 10.0),
        wb=st.floats(-5.0, 5.0),
    )
    @settings(max_examples=80, deadline=None)
    def test_closed_forms_are_exact_eigenpairs(self, lam, ux, uy, wb):
        spec = rates.ground_state_spectrum(lam, ux, uy, wb)
        h = rates.ground_state_hamiltonian(lam, ux, uy, wb)
        vecs = rates.ground_state_eigenvectors(spec)
        energies = [spec.e1, spec.e2, spec.e3, spec.e4]
        scale = max(abs(e) for e in energies) + lam
        for i, e in enumerate(energies):
            v = vecs[:, i]
            assert np.linalg.norm(v) == pytest.approx(1.0, rel=1e-12)
            assert np.linalg.norm(h @ v - e * v) <= 1e-10 * scale


class TestCouplingAndEmission:
    def test_strain_null(self):
        assert rates.coupling_strength(1e15, 3500, 3e-15, GHZ * 46, 4e7, xi=0.0) == 0.0

    def test_quarter_area_doubles(self):
        g1 = rates.coupling_strength(1e15, 3500.0, 3e-15, GHZ * 46, 4e7)
        g2 = rates.coupling_strength(1e15, 3500.0, 12e-15, GHZ * 46, 4e7)
        assert g1 == pytest.approx(2.0 * g2, rel=1e-12)

    def test_emission_linear_in_omega(self):
        g1 = rates.emission_rate_compression(TWO_PI * 1e15, 3500, 3e-15, 1.71e4, GHZ * 46)
        g2 = rates.emission_rate_compression(TWO_PI * 1e15, 3500, 3e-15, 1.71e4, GHZ * 92)
        assert g2 == pytest.approx(2.0 * g1, rel=1e-12)

    def test_mhz_scale_for_quoted_parameters(self):
        # d/2pi = 1 PHz, rho = 3500 kg/m^3, A ~ 3e3 nm^2, v = 1.71e4 m/s,
        # omega = 2pi x 46 GHz -> bare rate of order 2pi x 1 MHz
        gamma = rates.emission_rate_compression(
            TWO_PI * 1e15, 3500.0, 3e3 * 1e-18, 1.71e4, GHZ * 46.0
        )
        assert 0.3 < gamma / (TWO_PI * 1e6) < 10.0

    @given(
        d=st.floats(1e14, 1e16),
        rho=st.floats(1000.0, 10000.0),
        area=st.floats(1e-16, 1e-13),
        v=st.floats(1e3, 3e4),
        f=st.floats(1.0, 100.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_rate_equals_two_g_squared_over_v(self, d, rho, area, v, f):
        omega = GHZ * f
        g = rates.coupling_strength(d, rho, area, omega, omega / v)
        gamma = rates.emission_rate_compression(d, rho, area, v, omega)
        assert 2.0 * g * g / v == pytest.approx(gamma, rel=1e-12)


class TestRamanRate:
    def _params(self, omega_mhz, delta_mhz, gamma_mhz, betas=(0.5, 0.5)):
        g = TWO_PI * gamma_mhz
        return rates.RamanDriveParams(
            omega_rabi=TWO_PI * omega_mhz,
            delta=TWO_PI * delta_mhz,
            gamma_ph=g,
            gamma_ph_branches={"t": betas[0] * g, "l": betas[1] * g},
        )

    def test_drive_off(self):
        r = rates.raman_rate(self._params(0.0, 100.0, 2.0))
        assert r.gamma_total == 0.0
        assert r.stark_shift == 0.0

    def test_quoted_maximal_rate(self):
        # Omega/2pi = 70 MHz, delta/2pi = 100 MHz, Gamma/2pi = 2 MHz
        r = rates.raman_rate(self._params(70.0, 100.0, 2.0))
        assert r.gamma_total / TWO_PI * 1e3 == pytest.approx(245.0, abs=5.0)

    def test_stark_parity_in_delta(self):
        plus = rates.raman_rate(self._params(70.0, 100.0, 2.0))
        minus = rates.raman_rate(self._params(70.0, -100.0, 2.0))
        assert minus.stark_shift == pytest.approx(-plus.stark_shift)
        assert minus.gamma_total == pytest.approx(plus.gamma_total)

    def test_branch_rates_sum_and_split(self):
        r = rates.raman_rate(self._params(70.0, 100.0, 2.0, betas=(0.3, 0.7)))
        assert sum(r.gamma_branches.values()) == pytest.approx(r.gamma_total, rel=1e-12)
        assert r.gamma_branches["t"] / r.gamma_total == pytest.approx(0.3, rel=1e-12)

    @given(
        omega=st.floats(0.1, 200.0),
        factor=st.floats(1.01, 5.0),
        delta=st.floats(10.0, 500.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_monotonicity(self, omega, factor, delta):
        base = rates.raman_rate(self._params(omega, delta, 2.0)).gamma_total
        stronger = rates.raman_rate(self._params(omega * factor, delta, 2.0)).gamma_total
        further = rates.raman_rate(self._params(omega, delta * factor, 2.0)).gamma_total
        assert stronger > base
        assert further < base

    def test_phase_offset_range(self):
        r = rates.raman_rate(self._params(70.0, -100.0, 2.0))
        assert -math.pi < r.phase_offset <= math.pi


class TestEffectiveEmission:
    def test_antinode(self):
        assert rates.effective_emission_rate(1.0, math.pi) == pytest.approx(2.0)

    def test_mirror_image_node(self):
        assert rates.effective_emission_rate(1.0, 2.0 * math.pi) == pytest.approx(
            0.0, abs=1e-30
        )

    def test_quarter(self):
        assert rates.effective_emission_rate(1.0, math.pi / 2.0) == pytest.approx(1.0)


class TestResidualFlip:
    def test_degenerate_zeeman(self):
        assert rates.residual_flip_ratio(1.0, 0.0, 2.0, 2.0) == pytest.approx(1.0)

    def test_quoted_suppression(self):
        # delta/2pi = 100 MHz, omega_B/2pi = 1 GHz, equal bare rates
        ratio = rates.residual_flip_ratio(
            TWO_PI * 100.0, TWO_PI * 1000.0, 1.0, 1.0
        )
        assert ratio == pytest.approx((100.0 / 1900.0) ** 2, rel=1e-12)

    def test_band_gap(self):
        assert rates.residual_flip_ratio(1.0, 10.0, 2.0, 0.0) == 0.0

    def test_resonance_flagged(self):
        with pytest.raises(rates.ResonantFlipError):
            rates.residual_flip_ratio(2.0, 1.0 + 1e-7, 1.0, 1.0)


class TestOpticalRaman:
    def _si_example(self):
        # Omega_d ~ 2.5 GHz, Omega_u = 2 Omega_d, delta_E ~ 30 GHz,
        # Gamma_rad ~ 100 MHz, eta_- = 0.1 via omega_x = 0.2 * splitting
        return rates.optical_raman_params(
            rates.OpticalRamanParams(
                omega_rabi_u=GHZ * 5.0,
                omega_rabi_d=GHZ * 2.5,
                delta_e=GHZ * 30.0,
                gamma_rad=GHZ * 0.1,
                omega_x=GHZ * 9.2,
                splitting=GHZ * 46.0,
            )
        )

    def test_aligned_field_drives_nothing(self):
        r = rates.optical_raman_params(
            rates.OpticalRamanParams(
                omega_rabi_u=GHZ * 5.0,
                omega_rabi_d=GHZ * 2.5,
                delta_e=GHZ * 30.0,
                gamma_rad=GHZ * 0.1,
                omega_x=0.0,
                splitting=GHZ * 46.0,
            )
        )
        assert r.eta_minus == 0.0 and r.eta_plus == 0.0
        assert r.omega_eff == 0.0

    def test_si_loss_rates(self):
        r = self._si_example()
        assert r.eta_minus == pytest.approx(0.1, rel=1e-12)
        assert 150.0 <= r.gamma_rad_d / (TWO_PI * 1e3 / 1e9) / 1e9 <= 175.0
        assert 5.0 <= r.gamma_rad_u / (TWO_PI * 1e3 / 1e9) / 1e9 <= 10.0

    def test_si_transfer_rate_composition(self):
        r = self._si_example()
        gamma_ph = TWO_PI * 2e6  # Gamma(omega_0)/2pi ~ 2 MHz
        eff = rates.raman_rate(
            rates.RamanDriveParams(
                omega_rabi=r.omega_eff,
                delta=TWO_PI * 30e6,
                gamma_ph=gamma_ph,
                gamma_ph_branches={"all": gamma_ph},
            )
        )
        gamma_khz = eff.gamma_total / (TWO_PI * 1e3)
        assert 200.0 <= gamma_khz <= 300.0

    def test_viability_ordering(self):
        r = self._si_example()
        gamma_ph = TWO_PI * 2e6
        gamma_wb = TWO_PI * 1e6  # Gamma(omega_B) ~ 1 MHz
        eff = rates.raman_rate(
            rates.RamanDriveParams(
                omega_rabi=r.omega_eff,
                delta=TWO_PI * 30e6,
                gamma_ph=gamma_ph,
                gamma_ph_branches={"all": gamma_ph},
            )
        ).gamma_total
        assert r.gamma_rad_d < gamma_ph
        assert r.gamma_rad_u < eff
        assert r.eta**2 * gamma_wb < eff


class TestBoundaryLoss:
    def test_lossless(self):
        res = rates.reflectivity_to_q(1.0, 100e-6, 7000.0, GHZ * 46.0)
        assert res.kappa == 0.0 and math.isinf(res.q)

    def test_absorbing_sentinel(self):
        res = rates.reflectivity_to_q(0.0, 100e-6, 7000.0, GHZ * 46.0)
        assert res.q == 0.0

    def test_quoted_quality_factor(self):
        res = rates.reflectivity_to_q(0.92, 100e-6, 0.7e4, GHZ * 46.0)
        assert res.q == pytest.approx(4.95e4, rel=0.01)

    def test_kappa_from_spacing(self):
        kappa = rates.boundary_decay_rate(0.92, TWO_PI * 36.5e6)
        mhz = kappa / (TWO_PI * 1e6)
        assert mhz == pytest.approx(0.9687, abs=0.005)
        assert abs(mhz - 0.93) / 0.93 < 0.10  # paper rounded its spacing

    @given(
        r=st.floats(0.01, 0.9999), l=st.floats(1e-6, 1e-2), v=st.floats(1e3, 3e4)
    )
    @settings(max_examples=60, deadline=None)
    def test_roundtrip_identity(self, r, l, v):
        # reflectivities so close to 1 that the loss no longer fits in a
        # float cannot round-trip; the generic range must be exact
        carrier = GHZ * 46.0
        q = rates.reflectivity_to_q(r, l, v, carrier).q
        assert rates.q_to_reflectivity(q, l, v, carrier) == pytest.approx(
            r, rel=1e-12
        )


class TestCavityCouplings:
    def test_quoted_coupling(self):
        g = rates.cavity_coupling(TWO_PI * 0.25e6, TWO_PI * 36.5e6)
        assert g / (TWO_PI * 1e6) == pytest.approx(1.20, abs=0.05)

    def test_node_position(self):
        g = rates.single_mode_coupling(1.0, 1.0, 1.0, math.pi, 1.0, 1.0)
        assert g == pytest.approx(0.0, abs=1e-12)

    def test_mode_scale(self):
        g10 = rates.cavity_mode_coupling(TWO_PI * 105e6, 200e-9, 10e-6)
        g100 = rates.cavity_mode_coupling(TWO_PI * 105e6, 200e-9, 100e-6)
        assert g10 / (TWO_PI * 1e6) == pytest.approx(14.8, abs=0.1)
        assert g100 / (TWO_PI * 1e6) == pytest.approx(4.7, abs=0.05)

    def test_spacing(self):
        assert rates.mode_spacing(7000.0, 100.0) == pytest.approx(70.0 * math.pi)


class TestRateBundle:
    def test_reports_entries_with_units(self):
        b = rates.RateBundle((("gamma", 0.25, "MHz"), ("phase", 0.3, "rad")))
        assert b.value("gamma") == 0.25
        assert [u for _, _, u in b] == ["MHz", "rad"]

    def test_rejects_negative_rate(self):
        with pytest.raises(ValueError, match="must be >= 0"):
            rates.RateBundle((("gamma", -1.0, "MHz"),))

    def test_rejects_out_of_range_phase(self):
        with pytest.raises(ValueError, match="outside"):
            rates.RateBundle((("phase", 4.0, "rad"),))

    def test_signed_shifts_allowed(self):
        b = rates.RateBundle((("stark_shift", -0.5, "MHz, signed"),))
        assert b.value("stark_shift") == -0.5
