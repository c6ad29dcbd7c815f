import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qlattice import DEFAULT_PARAMS, CheckReport, ConfigError, ParameterError, make_family, q_racah
from qlattice.reports import FLOAT_MAX
from qlattice.verifier import (
    CHECKS,
    check_derivative_structure,
    check_eigenvalue_constancy,
    check_mean_identities,
    check_orthogonality_continuous_aw,
    check_orthogonality_discrete,
    check_pearson,
    check_sode,
    check_structure_relation,
    check_summation_by_parts,
    check_ttrr,
    compare_closed,
    extract_ttrr,
    mean_sum_residual,
    mean_quotient_residuals,
    leibniz_residual,
    perturb,
    run_suite,
    solve_structure,
)


def default(name, q=0.5):
    return make_family(name, DEFAULT_PARAMS[name], q)


def lead(spec, n):
    return spec.leading_coeff(n)


def assert_symmetric(g, rtol):
    d = np.sqrt(np.abs(np.diag(g)))
    assert (np.abs(g - g.T) / np.outer(d, d)).max() < rtol


# -- reports -------------------------------------------------------------------


def test_report_invariants():
    r = CheckReport("x", "fam", {"a": 0.1 + 0.2j}, 1e-9, 1e-8)
    assert r.passed
    assert r.to_dict()["params"]["a"] == {"re": 0.1, "im": 0.2}
    bad = CheckReport("x", "fam", {}, math.nan, 1e-8)
    assert not bad.passed and bad.max_residual == FLOAT_MAX
    assert "non-finite residual" in bad.notes
    assert not CheckReport("x", "fam", {}, 1e-8, 1e-8).passed


# -- Pearson and the difference equation ---------------------------------------


def test_pearson(spec):
    rep = check_pearson(spec, spec.default_grid, tol=1e-10)
    assert rep.passed, rep.max_residual


def test_pearson_q_racah_is_exact():
    spec = default("q_racah", 0.7)
    assert check_pearson(spec, spec.default_grid).max_residual < 1e-14


@pytest.mark.parametrize("eps", [1e-6, 1e-4, 1e-2])
def test_pearson_detects_sigma(eps):
    spec = default("askey_wilson")
    rep = check_pearson(perturb(spec, "sigma", eps), spec.default_grid)
    assert not rep.passed
    assert rep.max_residual == pytest.approx(eps, rel=0.1)


@pytest.mark.parametrize("n", range(9))
def test_sode(spec, n):
    rep = check_sode(spec, n, spec.default_grid)
    assert rep.passed, rep.max_residual
    assert check_eigenvalue_constancy(spec, n, spec.default_grid).passed


def test_sode_degree_zero_exact(spec):
    assert check_sode(spec, 0, spec.default_grid).max_residual == 0


def test_extracted_lambda_matches_library():
    spec = default("q_racah")
    rep = check_eigenvalue_constancy(spec, 3, spec.default_grid)
    value = float(rep.notes[0].split("= ")[1].split("+")[0].split("-0j")[0])
    assert value == pytest.approx(spec.eigenvalue(3).real, rel=1e-8)


# -- recurrences -----------------------------------------------------------------


def test_ttrr_degree_zero(spec):
    triple = extract_ttrr(spec, 0)
    assert triple.last is None
    assert triple.first == pytest.approx(1 / lead(spec, 1), rel=1e-9)


@pytest.mark.parametrize("n", range(1, 8))
def test_ttrr(spec, n):
    rep = check_ttrr(spec, n, spec.recurrence_grid)
    assert rep.passed, (rep.max_residual, rep.notes)
    assert abs(extract_ttrr(spec, n).last) > 0


@pytest.mark.parametrize("n", range(7))
def test_asc_monic(n):
    assert extract_ttrr(default("al_salam_carlitz_1"), n).first == pytest.approx(1, rel=1e-10)


def test_structure_degree_zero(spec):
    triple, res = solve_structure(spec, 0, spec.recurrence_grid)
    assert triple.first == pytest.approx(1 / lead(spec, 1), rel=1e-9)
    assert triple.middle is None and triple.last is None


@pytest.mark.parametrize("n", range(7))
def test_structure(spec, n):
    rep = check_structure_relation(spec, n, spec.recurrence_grid)
    assert rep.passed, (rep.max_residual, rep.notes)


def test_structure_closed_form_flagged():
    spec = default("al_salam_carlitz_1")
    triple, _ = solve_structure(spec, 3, spec.recurrence_grid)
    rows = compare_closed(spec, 3, triple)
    assert [label for label, _, _ in rows] == ["e", "f", "g"]
    assert all(note for _, _, note in rows)


@pytest.mark.parametrize("n", range(7))
def test_derivative_structure(spec, n):
    rep = check_derivative_structure(spec, n, spec.recurrence_grid)
    assert rep.passed, (rep.max_residual, rep.notes)


# -- orthogonality ---------------------------------------------------------------


def test_gram_q_racah():
    spec = q_racah(0.2, 0.1, 0, 8, 0.5)
    gram, rep = check_orthogonality_discrete(spec, 5)
    assert rep.passed, rep.max_residual
    g = gram.entries
    assert g[0, 0].real > 0
    assert_symmetric(g, 1e-12)
    _, drep = check_orthogonality_discrete(spec, 5, derivative=True)
    assert drep.passed, drep.max_residual


def test_gram_rejects_continuous():
    with pytest.raises(ConfigError):
        check_orthogonality_discrete(default("askey_wilson"), 3)
    with pytest.raises(ConfigError):
        check_orthogonality_discrete(q_racah(0.2, 0.1, 0, 5, 0.5), 5)


def test_gram_askey_wilson():
    params = dict(a=0.2, b=0.3, c=0.4, d=0.5)
    gram, rep = check_orthogonality_continuous_aw(params, 0.6, 4)
    assert rep.passed, rep.max_residual
    assert gram.entries[0, 0].real > 0
    assert_symmetric(gram.entries, 1e-12)
    g = gram.entries
    assert abs(g[1, 0]) / abs(g[0, 0]) < 1e-5
    with pytest.raises(ParameterError):
        check_orthogonality_continuous_aw(dict(a=1.2, b=0.3, c=0.4, d=0.5), 0.6, 2)


# -- identities --------------------------------------------------------------------


def test_summation_by_parts_constant():
    rep = check_summation_by_parts(lambda s: 2.0, lambda s: s**2, 0, 10)
    assert rep.max_residual == 0


@given(st.lists(st.floats(-1, 1), min_size=4, max_size=4), st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_summation_by_parts_random(fc, gc):
    lat = default("q_racah").lattice
    f = lambda s: np.polyval(fc, lat.x(s))  # noqa: E731
    g = lambda s: np.polyval(gc, lat.x(s))  # noqa: E731
    assert check_summation_by_parts(f, g, 0, 10).max_residual < 1e-9
    assert leibniz_residual(f, g, [s + 0.0 for s in range(1, 8)]) < 1e-9


@given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 2**32 - 1), st.sampled_from(sorted(DEFAULT_PARAMS)))
def test_mean_value_identities(dp, dx, seed, name):
    rng = np.random.default_rng(seed)
    spec = default(name, 0.7)
    lat = spec.lattice
    pi = list(rng.uniform(-1, 1, dp + 1))
    xi = list(rng.uniform(-1, 1, dx + 1))
    pts = spec.window(14, 2, 2).points()
    first, second, poly = mean_quotient_residuals(lat, pi, xi, pts)
    assert max(first, second, poly) < 1e-9
    for k in (-1, 0, 1):
        assert mean_sum_residual(lat, pi, k, pts) < 1e-9


def test_mean_identities_report(spec):
    rep = check_mean_identities(spec, spec.window(14, 2, 2), np.random.default_rng(7), trials=2)
    assert rep.passed, rep.notes


# -- perturbation and suite --------------------------------------------------------


def test_perturb_unknown():
    with pytest.raises(ParameterError):
        perturb(default("q_meixner"), "mu", 1e-3)


@pytest.mark.parametrize("target,check", [("lambda", check_sode), ("tau", check_sode)])
def test_perturb_breaks_sode(target, check):
    spec = default("q_racah")
    assert check(spec, 3, spec.default_grid).passed
    assert not check(perturb(spec, target, 1e-4), 3, spec.default_grid).passed


def test_perturb_rho_breaks_pearson():
    spec = default("q_meixner")
    assert not check_pearson(perturb(spec, "rho", 1e-4), spec.default_grid).passed


def small_config(**extra):
    raw = {
        "seed": 3,
        "n_max": 3,
        "q": [0.5],
        "checks": ["pearson", "sode", "ttrr"],
        "families": [{"name": "q_meixner", "params": {"b": 0.6, "c": 0.8}}],
    }
    raw.update(extra)
    return raw


def test_run_suite_sorted_and_complete():
    reports = run_suite(small_config())
    assert [r.sort_key() for r in reports] == sorted(r.sort_key() for r in reports)
    assert {r.check_id for r in reports} == {"pearson", "sode", "ttrr"}
    assert all(r.passed for r in reports)
    assert len(reports) == 1 + 4 + 4


def test_run_suite_bad_family_reports():
    raw = small_config(families=[{"name": "q_racah", "params": {"alpha": 0.2, "beta": 0.1, "a": 0, "b": 7.5}}])
    reports = run_suite(raw)
    assert len(reports) == 1 and reports[0].check_id == "construct" and not reports[0].passed


def test_checks_registry():
    assert len(CHECKS) == len(set(CHECKS)) == 16
