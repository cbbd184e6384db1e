import numpy as np
import pytest

import vacmirror as vm
from vacmirror.errors import AccuracyError, CutoffDivergenceError
from vacmirror.numerics import QuadratureSettings

# closed-form value at w = Omega: Gamma = -6 f(i)/i^3 with
# f(x) = -x + x^2/2 - (1-x) ln(1-x)
GAMMA_AT_OMEGA = 0.7918305220645259 + 0.3670525612951462j


def test_alpha_reference_values(lorentzian, perfect):
    assert vm.alpha(perfect, 0.7, 12.0) == pytest.approx(2.0)
    assert vm.alpha(lorentzian, 0.0, 0.0) == pytest.approx(2.0)
    assert vm.alpha(lorentzian, 1.0, 1.0) == pytest.approx(1.0 + 1.0j)


def test_beta_reference_values(lorentzian, perfect):
    assert vm.beta(lorentzian, 0.8, 0.8) == pytest.approx(0.0)
    assert vm.beta(perfect, 0.3, 2.0) == pytest.approx(0.0)
    assert vm.beta(lorentzian, 1.0, 0.0) == pytest.approx(-(1 - 1j) / 2)


def test_beta_antisymmetry(lorentzian):
    rng = np.random.default_rng(7)
    w1 = rng.uniform(0.05, 8.0, 100)
    w2 = rng.uniform(0.05, 8.0, 100)
    np.testing.assert_allclose(
        vm.beta(lorentzian, w1, w2), -vm.beta(lorentzian, w2, w1), atol=1e-14
    )


def test_unitarity_identity(lorentzian):
    # 2 Re alpha = |alpha|^2 + |beta|^2 for unitary scattering
    w = np.geomspace(0.02, 20.0, 60)
    W1, W2 = np.meshgrid(w, w)
    a = vm.alpha(lorentzian, W1, W2)
    b = vm.beta(lorentzian, W1, W2)
    defect = np.abs(2 * a.real - np.abs(a) ** 2 - np.abs(b) ** 2)
    assert defect.max() < 1e-12


def test_gamma_perfect_is_unity(perfect):
    for w in [1e-3, 0.4, 3.0, 250.0]:
        assert abs(vm.gamma(perfect, w) - 1.0) < 1e-10


def test_gamma_zero_frequency_limit(lorentzian, tabulated_copy):
    assert vm.gamma(lorentzian, 0.0) == pytest.approx(1.0)
    assert vm.gamma(tabulated_copy, 0.0) == pytest.approx(1.0, abs=1e-8)


def test_gamma_quadrature_matches_closed_form_at_omega(lorentzian):
    val, err = vm.gamma(lorentzian, 1.0, full_output=True)
    assert abs(val - GAMMA_AT_OMEGA) < 1e-9
    assert err < 1e-9


def test_gamma_negative_frequency_conjugate(lorentzian):
    g = vm.gamma(lorentzian, 2.5)
    assert vm.gamma(lorentzian, -2.5) == pytest.approx(np.conj(g))


def test_gamma_parity_on_symmetric_grid(lorentzian):
    ws = np.array([0.3, 1.7, 6.0])
    for w in ws:
        gp = vm.gamma(lorentzian, w)
        gn = vm.gamma(lorentzian, -w)
        assert gn.real == pytest.approx(gp.real, abs=1e-12)  # even
        assert gn.imag == pytest.approx(-gp.imag, abs=1e-12)  # odd


def test_gamma_quadrature_budget_error(lorentzian):
    with pytest.raises(AccuracyError) as info:
        vm.gamma(lorentzian, 300.0, QuadratureSettings(abs_tol=1e-16, max_panels=4))
    assert info.value.estimate is not None
    assert info.value.error_bound > 1e-16


def test_lorentzian_gamma_series_and_limits():
    assert vm.lorentzian_gamma(0.0) == pytest.approx(1.0)
    w = 1e-3
    x = 1j * w
    series = 1.0 + 0.5 * x + 0.3 * x * x
    assert abs(vm.lorentzian_gamma(w) - series) < 1e-9
    assert vm.lorentzian_gamma(1.0) == pytest.approx(GAMMA_AT_OMEGA)
    # real and in (0, 1] on the positive imaginary axis
    g = vm.lorentzian_gamma(1j)
    assert g.imag == pytest.approx(0.0, abs=1e-15)
    assert g.real == pytest.approx(6 * (1.5 - 2 * np.log(2.0)))


def test_lorentzian_gamma_branch_cut():
    with pytest.raises(vm.BranchCutError):
        vm.lorentzian_gamma(-2.0j)


def test_susceptibility_values(lorentzian, perfect):
    mech = vm.MirrorMechanics(tau=1e-3)
    assert vm.susceptibility(perfect, mech, 1.0) == pytest.approx(1e-3j)
    assert vm.susceptibility(lorentzian, mech, 0.0) == 0.0
    expect = 1j * 1e-3 * GAMMA_AT_OMEGA
    assert vm.susceptibility(lorentzian, mech, 1.0) == pytest.approx(expect, abs=1e-11)


def test_susceptibility_vanishes_quadratically(lorentzian):
    # chi, chi', chi'' all vanish at w = 0: |chi| <= C w^3 at small w
    mech = vm.MirrorMechanics(tau=1e-3)
    for w in [1e-2, 1e-3]:
        assert abs(vm.susceptibility(lorentzian, mech, w)) < 2e-3 * w**3


def test_positivity_gamma_real(lorentzian, tabulated_copy):
    ws = np.geomspace(1e-2, 10.0, 60)
    mech = vm.MirrorMechanics(tau=1e-3)
    for model in (lorentzian, tabulated_copy):
        for w in ws:
            g = vm.gamma(model, float(w))
            assert g.real >= -1e-9
            chi_i = vm.susceptibility(model, mech, float(w)).imag
            assert chi_i >= -1e-9 * mech.m * mech.tau * w**3


def test_oracle_equivalence_band(lorentzian):
    ws = np.geomspace(0.01, 10.0, 60)
    quad = np.array([vm.gamma(lorentzian, float(w)) for w in ws])
    exact = vm.lorentzian_gamma(ws)
    assert np.max(np.abs(quad - exact) / np.abs(exact)) < 1e-6


def test_high_frequency_tail_law(lorentzian):
    # Gamma ~ omega_C / (-i w): the residual decays faster than 1/w, so
    # a decay-rate fit on the top decade must come out well below -1
    ws = np.geomspace(100.0, 1000.0, 12)
    res = np.array([abs(vm.gamma(lorentzian, float(w)) - 3.0j / w) for w in ws])
    slope = np.polyfit(np.log(ws), np.log(res), 1)[0]
    assert slope < -1.5
    assert np.all(res * ws < 0.5)


def test_reflection_cutoff_lorentzian(lorentzian):
    omega_c, diag = vm.reflection_cutoff(lorentzian, full_output=True)
    assert omega_c == pytest.approx(3.0, rel=1e-2)
    assert diag.tail_fraction > 0.0
    assert diag.decay_slope < -1.2


def test_reflection_cutoff_perfect_diverges(perfect):
    with pytest.raises(CutoffDivergenceError):
        vm.reflection_cutoff(perfect)


def test_induced_mass():
    mech = vm.MirrorMechanics(tau=1e-3)
    assert vm.induced_mass(mech, 3.0) == pytest.approx(3e-3)
    boundary = vm.MirrorMechanics(tau=1.0 / 3.0)
    assert vm.induced_mass(boundary, 3.0) == pytest.approx(1.0)
    assert vm.induced_mass(mech, 0.0) == 0.0
    with pytest.raises(ValueError):
        vm.induced_mass(mech, np.inf)


def test_response_curve_parity_and_range():
    grid = np.linspace(0.0, 5.0, 200)
    vals = vm.lorentzian_gamma(grid)
    curve = vm.ResponseCurve(grid, vals, label="gamma")
    assert curve(-2.0) == pytest.approx(np.conj(curve(2.0)))
    with pytest.raises(vm.FrequencyRangeError):
        curve(7.0)
    with pytest.raises(ValueError):
        vm.ResponseCurve(grid[::-1], vals)


def test_compute_susceptibility_and_csv(tmp_path, lorentzian):
    mech = vm.MirrorMechanics(tau=1e-3)
    grid = np.geomspace(0.1, 10.0, 25)
    result = vm.compute_susceptibility(lorentzian, mech, grid)
    assert result.omega_c == pytest.approx(3.0, rel=1e-2)
    assert result.mu == pytest.approx(3e-3, rel=1e-2)
    assert not result.cutoff_divergent
    assert np.all(result.quad_errors < 1e-9)
    path = tmp_path / "suscept.csv"
    result.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "omega,gamma_re,gamma_im,chi_re,chi_im,quad_err"
    assert len(lines) == 26
    first = lines[1].split(",")
    assert len(first) == 6
    assert "e" in first[0]  # scientific notation


def test_compute_susceptibility_perfect_records_divergence(perfect):
    mech = vm.MirrorMechanics(tau=1e-3)
    result = vm.compute_susceptibility(perfect, mech, np.geomspace(0.1, 10, 8))
    assert result.cutoff_divergent
    assert np.isinf(result.mu)
