"""Acceptance gate: one test per criterion, each printing its PASS/FAIL line.

Criteria run at their stated tolerances through geostable.acceptance, the
same registry the `geostable verify` subcommand executes.
"""
from geostable import acceptance


def _run(check, seed=None):
    result = check() if seed is None else check(seed=seed)
    print(result.line())
    assert result.passed, result.detail
    return result


def test_acceptance_01_laplace_density_oracle():
    r = _run(acceptance.check_laplace_density)
    assert r.elapsed < 5.0


def test_acceptance_02_variance_gamma_levy_oracle():
    r = _run(acceptance.check_vg_levy)
    assert r.elapsed < 5.0


def test_acceptance_03_asymptotic_constants():
    r = _run(acceptance.check_asymptotics)
    assert r.elapsed < 30.0


def test_acceptance_04_selfdecomposability_certificate():
    r = _run(acceptance.check_selfdecomposability, seed=77001)
    assert r.elapsed < 60.0


def test_acceptance_05_recurrence_table():
    r = _run(acceptance.check_recurrence_table)
    assert r.elapsed < 1.0


def test_acceptance_06_mc_inversion_agreement():
    r = _run(acceptance.check_mc_inversion_agreement, seed=42)
    assert r.elapsed < 30.0


def test_acceptance_07_form_equivalence():
    r = _run(acceptance.check_form_equivalence)
    assert r.elapsed < 30.0


def test_acceptance_08_ground_state_vs_dense_oracle():
    r = _run(acceptance.check_ground_state_oracle)
    assert r.elapsed < 20.0


def test_acceptance_09_eigenvalue_laws():
    r = _run(acceptance.check_eigenvalue_laws)
    assert r.elapsed < 60.0


def test_acceptance_10_feynman_kac_crosscheck():
    r = _run(acceptance.check_feynman_kac, seed=2024)
    assert r.elapsed < 120.0


def test_acceptance_11_cross_term_identity():
    r = _run(acceptance.check_cross_term, seed=5150)
    assert r.elapsed < 10.0


def test_acceptance_12_kato_diagnostic():
    r = _run(acceptance.check_kato)
    assert r.elapsed < 10.0
