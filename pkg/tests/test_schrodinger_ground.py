import math

import numpy as np
import pytest

from geostable import (GridDomain, MeasureOnGrid, ProcessSpec,
                       RngStream, SchrodingerProblem, apply_generator,
                       dense_ground_state, energy_form, feynman_kac_estimate,
                       irreducibility_cross_term, kato_diagnostic,
                       solve_ground_state)
from geostable.acceptance import density_gamma_mixture, reference_problem
from geostable.stable_kernel import _panel_nodes


@pytest.fixture(scope="module")
def prob():
    return reference_problem()


@pytest.fixture(scope="module")
def ground(prob):
    return solve_ground_state(prob, tol=1e-11)


def test_domain_validation():
    GridDomain(16.0, 256)
    with pytest.raises(ValueError):
        GridDomain(16.0, 100)  # not a power of two
    with pytest.raises(ValueError):
        GridDomain(16.0, 32)  # below the floor
    with pytest.raises(ValueError):
        GridDomain(-1.0, 256)


def test_measure_profiles_and_masses():
    dom = GridDomain(16.0, 256)
    ind = MeasureOnGrid.from_profile(dom, "indicator", half_width=1.0, height=0.5)
    assert abs(ind.total_mass - 1.0) < 0.1  # riemann mass of 0.5 * 1_[-1,1]
    tri = MeasureOnGrid.from_profile(dom, "triangle", half_width=2.0, height=1.0)
    assert abs(tri.total_mass - 2.0) < 0.1
    gau = MeasureOnGrid.from_profile(dom, "gaussian", half_width=1.0, height=1.0)
    assert abs(gau.total_mass - math.sqrt(math.pi)) < 0.01
    with pytest.raises(ValueError):
        MeasureOnGrid.from_profile(dom, "sawtooth")
    with pytest.raises(ValueError):
        MeasureOnGrid(dom, -np.ones(dom.N))


def test_measure_csv_roundtrip(tmp_path):
    dom = GridDomain(16.0, 256)
    m = MeasureOnGrid.from_profile(dom, "triangle", half_width=1.5, height=2.0)
    path = tmp_path / "m.csv"
    m.to_csv(path)
    again = MeasureOnGrid.from_csv(dom, path)
    assert np.allclose(again.weights, m.weights)


def test_problem_validation():
    spec = ProcessSpec(1.5, 1)
    dom = GridDomain(16.0, 256)
    mup = MeasureOnGrid.from_profile(dom, "indicator", half_width=1.0, height=0.5)
    mum = MeasureOnGrid.from_profile(dom, "indicator", half_width=2.0)
    SchrodingerProblem(spec, dom, mup, mum)
    with pytest.raises(ValueError):  # transient regime rejected
        SchrodingerProblem(ProcessSpec(0.5, 1), dom, mup, mum)
    with pytest.raises(ValueError):  # trivial measure rejected
        SchrodingerProblem(spec, dom, MeasureOnGrid(dom, np.zeros(dom.N)), mum)
    with pytest.raises(ValueError):  # support too wide for the torus
        wide = MeasureOnGrid.from_profile(dom, "indicator", half_width=10.0)
        SchrodingerProblem(spec, dom, mup, wide)


def test_generator_constant_kernel_and_eigenvectors(prob):
    dom = prob.domain
    assert np.max(np.abs(apply_generator(prob, np.ones(dom.N)))) == 0.0
    xi = dom.rfft_freqs()[5]
    u = np.cos(xi * dom.nodes())
    hu = apply_generator(prob, u)
    lam = math.log1p(xi ** prob.spec.alpha)
    assert np.max(np.abs(hu - lam * u)) < 1e-12


def test_generator_self_adjoint_positive(prob):
    rng = np.random.default_rng(11)
    for _ in range(20):
        u = rng.standard_normal(prob.domain.N)
        v = rng.standard_normal(prob.domain.N)
        hu, hv = apply_generator(prob, u), apply_generator(prob, v)
        assert abs(hu @ v - u @ hv) < 1e-12 * np.linalg.norm(u) * np.linalg.norm(v)
        assert u @ hu >= -1e-12 * (u @ u)


def test_energy_form_constants_and_positivity(prob):
    ones = np.ones(prob.domain.N)
    assert energy_form(prob, ones, ones, "multiplier") == 0.0
    assert abs(energy_form(prob, ones, ones, "jump_kernel")) < 1e-12
    rng = np.random.default_rng(12)
    for _ in range(5):
        u = rng.standard_normal(prob.domain.N)
        assert energy_form(prob, u, u, "multiplier") >= 0.0


def test_energy_form_cross_method_agreement():
    dom = GridDomain(16.0, 1024)
    u = np.exp(-dom.nodes() ** 2)
    for alpha in (1.0, 1.5, 2.0):
        p = SchrodingerProblem(
            ProcessSpec(alpha, 1), dom,
            MeasureOnGrid.from_profile(dom, "indicator", half_width=1.0, height=0.5),
            MeasureOnGrid.from_profile(dom, "indicator", half_width=2.0))
        em = energy_form(p, u, u, "multiplier")
        ej = energy_form(p, u, u, "jump_kernel")
        assert abs(ej / em - 1.0) < 0.01, alpha


def test_ground_state_matches_dense_oracle(prob, ground):
    dense = dense_ground_state(prob)
    assert abs(ground.lambda_ / dense.lambda_ - 1.0) < 1e-8
    hi = ground.h / np.linalg.norm(ground.h)
    hd = dense.h / np.linalg.norm(dense.h)
    if hi @ hd < 0:
        hd = -hd
    assert np.linalg.norm(hi - hd) < 1e-6


def test_ground_state_contracts(prob, ground):
    assert 0.0 < ground.lambda_ <= prob.mu_plus.total_mass / prob.mu_minus.total_mass + 1e-12
    assert ground.lambda_ <= 0.25 + 1e-12
    assert abs(ground.normalization_check - 1.0) < 1e-10
    assert ground.residual < 1e-10
    assert ground.h.min() > 0.0
    mirrored = ground.h[np.r_[0, np.arange(prob.domain.N - 1, 0, -1)]]
    assert np.max(np.abs(ground.h - mirrored)) < 1e-6 * np.max(np.abs(ground.h))


def test_ground_state_scaling_law(prob, ground):
    for c in (0.5, 2.0, 10.0):
        scaled = solve_ground_state(reference_problem(c_minus=c), tol=1e-11)
        assert abs(scaled.lambda_ * c / ground.lambda_ - 1.0) < 1e-8
        # same shape up to normalization
        a = scaled.h / np.linalg.norm(scaled.h)
        b = ground.h / np.linalg.norm(ground.h)
        assert np.linalg.norm(a - b) < 1e-7


def test_ground_state_monotone_in_measures(prob, ground):
    spec, dom = prob.spec, prob.domain
    bigger_plus = MeasureOnGrid(dom, prob.mu_plus.weights * 2.0)
    lam_up = solve_ground_state(
        SchrodingerProblem(spec, dom, bigger_plus, prob.mu_minus), tol=1e-11).lambda_
    assert lam_up >= ground.lambda_ - 1e-12
    smaller_minus = MeasureOnGrid.from_profile(dom, "indicator", half_width=1.0)
    lam_shrunk = solve_ground_state(
        SchrodingerProblem(spec, dom, prob.mu_plus, smaller_minus), tol=1e-11).lambda_
    assert lam_shrunk >= ground.lambda_ - 1e-12


def test_ground_state_grid_stability(ground):
    big = solve_ground_state(reference_problem(L=32.0, N=512), tol=1e-11)
    assert abs(big.lambda_ / ground.lambda_ - 1.0) < 0.01


def test_feynman_kac_bounds_and_zero_potential(prob):
    f = lambda x: np.exp(-np.asarray(x) ** 2)
    est, se = feynman_kac_estimate(prob, f, 0.0, 0.25, 20_000, 1.0 / 64, RngStream(31))
    assert 0.0 <= est <= 1.0  # 0 <= e^{-A} f <= sup f
    est0, se0 = feynman_kac_estimate(prob, f, 0.0, 0.25, 20_000, 1.0 / 64, RngStream(32),
                                     rho=lambda x: np.zeros(np.shape(x)))
    assert est0 >= est - 3.0 * (se + se0)  # killing only decreases the expectation
    ys, wy = _panel_nodes(np.unique(np.concatenate([
        np.linspace(-40.0, 40.0, 401), np.geomspace(1e-10, 2.0, 60),
        -np.geomspace(1e-10, 2.0, 60)])))
    oracle = float((f(ys) * density_gamma_mixture(prob.spec, 0.25, ys)) @ wy)
    assert abs(est0 - oracle) < 3.5 * se0


def test_feynman_kac_validates_steps(prob):
    with pytest.raises(ValueError):
        feynman_kac_estimate(prob, lambda x: x, 0.0, 0.5, 100, 0.3, RngStream(1))
    with pytest.raises(ValueError):
        feynman_kac_estimate(prob, lambda x: x, 0.0, 0.0, 100, 0.1, RngStream(1))


def test_feynman_kac_deterministic_given_seed(prob):
    f = lambda x: np.exp(-np.asarray(x) ** 2)
    a = feynman_kac_estimate(prob, f, 0.0, 0.125, 5_000, 1.0 / 32, RngStream(77))
    b = feynman_kac_estimate(prob, f, 0.0, 0.125, 5_000, 1.0 / 32, RngStream(77))
    assert a == b


def test_kato_diagnostic_contracts(prob):
    ts = [1.0, 0.5, 0.1, 0.01]
    vals = kato_diagnostic(prob, ts)
    sup_rho = prob.mu_plus.density_values().max()
    assert all(v <= t * sup_rho * (1.0 + 1e-9) for v, t in zip(vals, ts))
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 0.011 * sup_rho * 2
    zeros = kato_diagnostic(prob, ts, mu=MeasureOnGrid(prob.domain, np.zeros(prob.domain.N)))
    assert zeros == [0.0, 0.0, 0.0, 0.0]
    with pytest.raises(ValueError):
        kato_diagnostic(prob, [0.1, 0.5])  # must be decreasing


def test_cross_term_identity_and_sign(prob):
    u = np.ones(prob.domain.N)
    left = np.arange(prob.domain.N // 2)
    cross = irreducibility_cross_term(prob, left, u)
    assert cross < 0.0
    # bilinear decomposition: E(u,u) = E(au,au) + E(bu,bu) + 2 cross
    a = np.zeros(prob.domain.N)
    a[left] = 1.0
    b = 1.0 - a
    e_u = energy_form(prob, u, u, "jump_kernel", near_diagonal="lattice")
    e_a = energy_form(prob, a, a, "jump_kernel", near_diagonal="lattice")
    e_b = energy_form(prob, b, b, "jump_kernel", near_diagonal="lattice")
    scale = max(abs(e_a), abs(e_b))
    assert abs(e_u - (e_a + e_b + 2.0 * cross)) < 1e-10 * scale
    assert irreducibility_cross_term(prob, np.array([], dtype=int), u) == 0.0
    with pytest.raises(ValueError):
        irreducibility_cross_term(prob, left, np.zeros(prob.domain.N))


def test_ground_state_serialization(tmp_path, prob, ground):
    json_path = tmp_path / "gs.json"
    csv_path = tmp_path / "gs.csv"
    ground.to_json(json_path, problem=prob, seed=None)
    ground.to_csv(csv_path, prob.domain)
    import json as _json
    data = _json.loads(json_path.read_text())
    assert set(data) >= {"alpha", "L", "N", "lambda", "residual", "iterations",
                         "h", "mu_plus", "mu_minus", "seed"}
    assert len(data["h"]) == prob.domain.N
    assert data["mu_minus"]["support"] == [-2.0, 2.0]
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "x,h"
    assert len(lines) == prob.domain.N + 1
