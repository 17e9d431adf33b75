import json
import math

import numpy as np
import pytest
from scipy.special import exp1, sici

from geostable import (ProcessSpec, Regime, SingularPointError,
                       asymptotic_report, k_function, k_radial, levy_density,
                       polar_levy_mass, verify_selfdecomposable)
from geostable.levy_structure import (exponential_tail_constant, large_x_constant,
                                      small_x_constant, surface_measure)


def j_closed_a2_d1(r):
    return math.exp(-r) / r


def j_closed_a1_d1(r):
    si, ci = sici(r)
    return (math.sin(r) * ci + math.cos(r) * (math.pi / 2.0 - si)) / (math.pi * r)


def j_closed_a2_d3(r):
    return math.exp(-r) * (1.0 + 1.0 / r) / (2.0 * math.pi * r ** 2)


def test_levy_density_variance_gamma_oracle():
    spec = ProcessSpec(2.0, 1)
    assert abs(levy_density(spec, 1.0) / j_closed_a2_d1(1.0) - 1.0) < 1e-8
    assert abs(levy_density(spec, 2.0) / j_closed_a2_d1(2.0) - 1.0) < 1e-8
    for r in np.geomspace(0.1, 8.0, 40):
        assert abs(levy_density(spec, r) / j_closed_a2_d1(r) - 1.0) < 1e-8


def test_levy_density_cauchy_subordination_oracle():
    # alpha=1, d=1: the subordination integral has the sine/cosine-integral form
    spec = ProcessSpec(1.0, 1)
    for r in (0.05, 0.3, 1.0, 4.0, 20.0):
        assert abs(levy_density(spec, r) / j_closed_a1_d1(r) - 1.0) < 1e-9


def test_levy_density_gaussian_d3_oracle():
    spec = ProcessSpec(2.0, 3)
    for r in (0.1, 0.7, 2.0, 6.0):
        got = levy_density(spec, np.array([r, 0.0, 0.0]))
        assert abs(got / j_closed_a2_d3(r) - 1.0) < 1e-8


def test_levy_density_even_and_singular_origin():
    spec = ProcessSpec(1.5, 1)
    assert levy_density(spec, 0.8) == levy_density(spec, -0.8)
    with pytest.raises(SingularPointError):
        levy_density(spec, 0.0)


def test_k_matches_density_identity():
    for alpha, dim in ((0.7, 1), (1.5, 1), (1.5, 2), (2.0, 3)):
        spec = ProcessSpec(alpha, dim)
        for r in np.geomspace(1e-2, 10.0, 10):
            x = np.zeros(dim)
            x[0] = r
            assert abs(k_radial(spec, r) / (r ** dim * levy_density(spec, x)) - 1.0) < 1e-6


def test_k_small_radius_limit():
    # k(0+) = alpha * int u^{d-1} q_1 du = alpha Gamma(d/2) / (2 pi^{d/2}); d=1 gives alpha/2
    for alpha, dim in ((1.0, 1), (1.5, 1), (2.0, 1), (1.5, 2), (0.7, 3)):
        spec = ProcessSpec(alpha, dim)
        assert abs(k_radial(spec, 1e-4) / small_x_constant(spec) - 1.0) < 0.01


def test_k_function_requires_unit_theta():
    spec = ProcessSpec(1.5, 2)
    assert k_function(spec, np.array([1.0, 0.0]), 0.5) == pytest.approx(
        k_function(spec, np.array([0.0, 1.0]), 0.5), rel=1e-12)
    with pytest.raises(ValueError):
        k_function(spec, np.array([1.0, 1.0]), 0.5)


def test_k_monotone_random_specs():
    rng = np.random.default_rng(314)
    alphas = np.linspace(0.5, 2.0, 16)
    for _ in range(200):
        spec = ProcessSpec(round(float(rng.choice(alphas)), 12), int(rng.choice([1, 2, 3])))
        r1, r2 = np.sort(np.exp(rng.uniform(np.log(1e-2), np.log(10.0), 2)))
        k1, k2 = k_radial(spec, r1), k_radial(spec, r2)
        assert k1 >= k2 - 1e-12 * k1


def test_k_scale_covariance_in_t_is_exact_multiplication():
    spec = ProcessSpec(1.3, 1)
    grid = np.geomspace(0.1, 5.0, 12)
    base = verify_selfdecomposable(spec, 1.0, grid)
    for t in (0.1, 2.5, 10.0):
        scaled = verify_selfdecomposable(spec, t, grid)
        assert np.array_equal(scaled.values, t * base.values)


def test_polar_levy_mass_oracle_and_additivity():
    spec = ProcessSpec(2.0, 1)
    mass = polar_levy_mass(spec, 1.0, 2.0)
    oracle = 2.0 * (exp1(1.0) - exp1(2.0))
    assert abs(mass / oracle - 1.0) < 1e-6
    m_ab = polar_levy_mass(spec, 0.5, 1.0)
    m_bc = polar_levy_mass(spec, 1.0, 3.0)
    m_ac = polar_levy_mass(spec, 0.5, 3.0)
    assert abs((m_ab + m_bc) / m_ac - 1.0) < 1e-8
    with pytest.raises(ValueError):
        polar_levy_mass(spec, 2.0, 1.0)


def test_polar_levy_mass_general_specs_cross_route():
    # the internal polar-vs-direct assertion (1e-6) runs on every call
    for alpha, dim in ((0.8, 1), (1.5, 1), (1.5, 2)):
        spec = ProcessSpec(alpha, dim)
        assert polar_levy_mass(spec, 0.1, 10.0) > 0


def test_levy_measure_square_truncation_finite():
    # int (1 ^ |y|^2) J(dy): small-ball second moment plus tail mass, both finite
    for alpha, dim in ((0.8, 1), (1.5, 2)):
        spec = ProcessSpec(alpha, dim)
        omega = surface_measure(dim)
        rs_in = np.geomspace(1e-6, 1.0, 120)
        vals_in = np.array([k_radial(spec, r) * r for r in rs_in])  # r^2 * j * r^{d-1}
        inner = omega * np.trapezoid(vals_in, rs_in)
        tail = polar_levy_mass(spec, 1.0, 200.0)
        assert np.isfinite(inner) and np.isfinite(tail)
        assert inner > 0 and tail > 0


def test_selfdecomposable_certificate_and_theta_independence():
    table = verify_selfdecomposable(ProcessSpec(1.5, 1), 1.0, np.geomspace(0.01, 10.0, 30))
    assert table.monotone_certificate
    table3 = verify_selfdecomposable(ProcessSpec(2.0, 3), 0.1, np.geomspace(0.05, 5.0, 20))
    assert table3.monotone_certificate
    spec2 = ProcessSpec(1.5, 2)
    grid = np.geomspace(0.1, 5.0, 15)
    ta = verify_selfdecomposable(spec2, 1.0, grid, theta_samples=[np.array([1.0, 0.0])])
    tb = verify_selfdecomposable(spec2, 1.0, grid, theta_samples=[np.array([0.0, 1.0])])
    assert np.max(np.abs(ta.values / tb.values - 1.0)) < 1e-9


def test_kfunction_table_csv(tmp_path):
    table = verify_selfdecomposable(ProcessSpec(1.5, 1), 1.0, np.geomspace(0.1, 2.0, 5))
    path = tmp_path / "k.csv"
    table.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "r,k_value"
    assert len(lines) == 6
    r0, k0 = (float(v) for v in lines[1].split(","))
    assert r0 == pytest.approx(0.1)
    assert k0 == pytest.approx(table.values[0])


def test_asymptotic_small_x_reports():
    for alpha, dim in ((1.0, 1), (1.5, 1), (2.0, 1), (1.5, 2)):
        spec = ProcessSpec(alpha, dim)
        rep = asymptotic_report(spec, Regime.SMALL_X)
        assert rep.converged
        assert abs(rep.empirical_limit / rep.oracle_constant - 1.0) < 0.02
        # oracle agrees with the analytic limit alpha Gamma(d/2) / (2 pi^{d/2})
        assert abs(rep.oracle_constant / small_x_constant(spec) - 1.0) < 0.01
        # printed constant differs by exactly pi^{d/2}
        assert rep.paper_constant / small_x_constant(spec) == pytest.approx(
            math.pi ** (dim / 2.0), rel=1e-12)


def test_asymptotic_large_x_alpha1_matches_cauchy_constant():
    rep = asymptotic_report(ProcessSpec(1.0, 1), Regime.LARGE_X)
    assert abs(rep.empirical_limit * math.pi - 1.0) < 0.02
    assert abs(large_x_constant(ProcessSpec(1.0, 1)) - 1.0 / math.pi) < 1e-14
    # printed constant is low by 4^alpha
    assert rep.paper_constant * 4.0 == pytest.approx(large_x_constant(ProcessSpec(1.0, 1)), rel=1e-12)


def test_asymptotic_large_x_alpha2_exponential_profile():
    rep = asymptotic_report(ProcessSpec(2.0, 1), Regime.LARGE_X)
    assert abs(rep.empirical_limit - 1.0) < 0.02
    assert exponential_tail_constant(1) == 1.0
    assert rep.paper_constant == pytest.approx(2.0 ** -0.5, rel=1e-12)
    assert rep.relative_gap_paper > 0.4


def test_asymptotic_report_json(tmp_path):
    rep = asymptotic_report(ProcessSpec(1.5, 1), Regime.SMALL_X)
    path = tmp_path / "rep.json"
    rep.to_json(path)
    data = json.loads(path.read_text())
    assert set(data) == {"alpha", "dim", "regime", "paper_constant", "oracle_constant",
                         "empirical_limit", "relative_gap_paper", "relative_gap_oracle",
                         "converged"}
    assert data["regime"] == "SmallX"
    assert data["relative_gap_paper"] > 0
