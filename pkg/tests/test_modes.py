import pytest

from entbath.errors import ConfigError
from entbath.model import build_config
from entbath.modes import critical_coupling, find_localized_modes, z_function
from entbath.spectral import SpectralDensityHandle, self_energy_slope

# frozen reference: 200-step bisection on z over [-3, -1e-9] at
# eta=0.3, s=0.5, omega_c=3, omega_plus=1.5
BISECTION_ROOT = -0.33941458582351036


def point(eta, s):
    config, spectral, _ = build_config(eta=eta, s=s)
    return config, SpectralDensityHandle(spectral)


class TestCriticalCoupling:
    def test_subohmic_reference(self):
        assert critical_coupling(0.5, 1.5, 3.0) == pytest.approx(0.141, abs=2e-4)

    def test_gamma_one_and_two(self):
        assert critical_coupling(1.0, 1.5, 3.0) == pytest.approx(0.25, rel=1e-12)
        assert critical_coupling(3.0, 1.5, 3.0) == pytest.approx(0.125, rel=1e-12)

    @pytest.mark.parametrize("bad", [
        dict(s=0.0, omega_plus=1.5, omega_c=3.0),
        dict(s=1.0, omega_plus=0.0, omega_c=3.0),
        dict(s=1.0, omega_plus=1.5, omega_c=-1.0),
    ])
    def test_domain_rejections(self, bad):
        with pytest.raises(ConfigError):
            critical_coupling(**bad)


class TestModeSearch:
    def test_weak_coupling_is_empty(self):
        config, handle = point(0.9 * 0.14104739588693907, 0.5)
        search = find_localized_modes(config, handle)
        assert len(search) == 0 and not search.marginal

    def test_strong_coupling_single_mode(self):
        config, handle = point(0.3, 0.5)
        search = find_localized_modes(config, handle)
        assert len(search) == 1
        mode = search.modes[0]
        assert mode.frequency < 0.0
        assert 0.0 < mode.residue <= 1.0
        assert mode.frequency == pytest.approx(BISECTION_ROOT, rel=1e-10)

    def test_root_residual_below_tolerance(self):
        config, handle = point(0.3, 0.5)
        mode = find_localized_modes(config, handle).modes[0]
        assert abs(z_function(handle, config.omega_plus, mode.frequency)) < 1e-10

    def test_residue_matches_slope_formula(self):
        config, handle = point(0.3, 0.5)
        mode = find_localized_modes(config, handle).modes[0]
        slope = self_energy_slope(handle, mode.frequency)
        assert mode.residue == pytest.approx(1.0 / (1.0 - slope), rel=1e-12)

    @pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("ratio", [0.5, 0.9, 0.99, 1.01, 1.1, 2.0])
    def test_count_flips_exactly_at_threshold(self, s, ratio):
        eta_c = critical_coupling(s, 1.5, 3.0)
        config, handle = point(ratio * eta_c, s)
        search = find_localized_modes(config, handle)
        assert len(search) == (0 if ratio < 1.0 else 1)

    def test_marginal_coupling_flagged_empty(self):
        eta_c = critical_coupling(0.5, 1.5, 3.0)
        config, handle = point(eta_c, 0.5)
        search = find_localized_modes(config, handle)
        assert search.marginal and len(search) == 0

    def test_eta_zero_empty(self):
        config, handle = point(0.0, 1.0)
        assert len(find_localized_modes(config, handle)) == 0

    def test_frequency_decreases_with_coupling(self):
        s = 0.5
        eta_c = critical_coupling(s, 1.5, 3.0)
        freqs = []
        for ratio in (1.05, 1.2, 1.5, 2.0, 3.0):
            config, handle = point(ratio * eta_c, s)
            freqs.append(find_localized_modes(config, handle).modes[0].frequency)
        assert all(a > b for a, b in zip(freqs[:-1], freqs[1:]))

    def test_frequency_vanishes_at_threshold(self):
        s = 1.0
        eta_c = critical_coupling(s, 1.5, 3.0)
        config, handle = point(1.001 * eta_c, s)
        mode = find_localized_modes(config, handle).modes[0]
        assert -0.01 < mode.frequency < 0.0
        assert mode.residue < 0.5

    def test_residues_in_unit_interval_on_grid(self):
        for s in (0.5, 1.0, 2.0):
            eta_c = critical_coupling(s, 1.5, 3.0)
            for ratio in (1.1, 2.0, 4.0):
                config, handle = point(ratio * eta_c, s)
                for mode in find_localized_modes(config, handle):
                    assert 0.0 < mode.residue <= 1.0

    def test_z_sign_structure(self):
        # z falls from +inf toward z(0) = omega_plus*(1 - eta/eta_c)
        config, handle = point(0.3, 0.5)
        z0 = z_function(handle, config.omega_plus, 0.0)
        eta_c = critical_coupling(0.5, config.omega_plus, 3.0)
        assert z0 == pytest.approx(config.omega_plus * (1.0 - 0.3 / eta_c), rel=1e-12)
        assert z_function(handle, config.omega_plus, -6.0) > 0.0 > z0
