import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from qlattice import (
    DEFAULT_PARAMS,
    DegeneracyError,
    DiscreteSupport,
    ParameterError,
    QParam,
    SupportError,
    al_salam_carlitz_1,
    al_salam_carlitz_2,
    askey_wilson,
    delta_chain,
    family_eval,
    make_family,
    q_meixner,
    q_number,
    q_racah,
)
from qlattice.families import aw_theta_density
from qlattice.verifier import extract_ttrr

# p_n at one point, from an independent 40-digit mpmath implementation of the series
FROZEN = [
    ("askey_wilson", 3, 1.7, 16.31952418435932129),
    ("q_racah", 4, 2.3, 23378886749378.597688),
    ("q_meixner", 3, -2.7, 132.11794634410354685),
]
FROZEN_X = [
    ("al_salam_carlitz_1", 3, 1.7, 0.82875),
    ("al_salam_carlitz_2", 3, 1.7, 1.59),
]
# lambda_1..3 at q = 0.5 as -H p_n / p_n, same oracle
FROZEN_LAMBDA = {
    "askey_wilson": [1.9692875, 5.95393125, 13.946253125],
    "q_racah": [2.501056077927371871, 8.4590887042715622209, 20.853114192204666225],
    "q_meixner": [1.4142135623730950488, 2.1213203435596425732, 2.4748737341529163354],
    "al_salam_carlitz_1": [-1.4142135623730950488, -4.2426406871192851464, -9.8994949366116653416],
}
AW_MASS = 145.18638310226043655


def default(name, q=0.5):
    return make_family(name, DEFAULT_PARAMS[name], q)


@pytest.mark.parametrize("name,n,s,want", FROZEN)
def test_frozen_values(name, n, s, want):
    assert family_eval(default(name), n, s).real == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("name,n,x,want", FROZEN_X)
def test_frozen_values_x(name, n, x, want):
    assert default(name).poly_x(n, x).real == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("name", sorted(FROZEN_LAMBDA))
def test_frozen_eigenvalues(name):
    spec = default(name)
    got = [spec.eigenvalue(n).real for n in (1, 2, 3)]
    np.testing.assert_allclose(got, FROZEN_LAMBDA[name], rtol=1e-11)
    assert spec.eigenvalue(0) == 0
    assert spec.eigenvalue(1) == pytest.approx(-spec.tau_lead)


def test_aw_total_mass():
    # closed-form Askey-Wilson integral against midpoint quadrature of the density
    p = DEFAULT_PARAMS["askey_wilson"]
    params = tuple(p[k] for k in "abcd")
    nodes = (np.arange(256) + 0.5) * np.pi / 256
    mass = sum(aw_theta_density(t, params, QParam(0.5)) for t in nodes) * np.pi / 256
    assert mass == pytest.approx(AW_MASS, rel=1e-12)


def test_unit_degree_zero(spec):
    assert family_eval(spec, 0, spec.default_grid.s0 + 0.25) == pytest.approx(1)


def test_exact_degree(spec):
    grid = spec.default_grid.points()[:4]
    for n in range(0, 7):
        p = lambda t, n=n: spec.poly(n, t)  # noqa: E731
        values = [abs(p(s)) for s in grid]
        top = [delta_chain(p, spec.lattice, n, s) for s in grid] if n else [p(s) for s in grid]
        assert abs(top[0]) > 0
        np.testing.assert_allclose(top, top[0], rtol=1e-6)
        over = delta_chain(p, spec.lattice, n + 1, grid[0])
        assert abs(over) < 1e-7 * max(1.0, abs(top[0]), max(values))


def test_tau_decomposition(spec):
    for s in spec.default_grid.points()[:10]:
        lhs = spec.theta(s) - spec.sigma(s)
        assert lhs == pytest.approx(spec.tau(s) * spec.nabla_x1(s), rel=1e-12, abs=1e-12)


def test_tau_and_sigma_hat_degrees(spec):
    pts = spec.default_grid.points()[:5]
    xs = [spec.lattice.x(s) for s in pts]
    tau = np.polyfit(np.real(xs), np.real([spec.tau(s) for s in pts]), 1, full=True)
    assert np.abs(np.polyval(tau[0], np.real(xs)) - np.real([spec.tau(s) for s in pts])).max() < 1e-8 * max(
        1, np.abs([spec.tau(s) for s in pts]).max()
    )
    sh = lambda t: spec.sigma_hat(t)  # noqa: E731
    third = delta_chain(sh, spec.lattice, 3, pts[0])
    assert abs(third) < 1e-8 * max(1, abs(sh(pts[0])), abs(sh(pts[3])))


def test_weight_recurrence(spec):
    # rho_k(s) = rho_{k-1}(s+1) sigma(s+1), compared as ratios to rho_0(s)
    for s in spec.default_grid.points()[:6]:
        for k in range(1, 5):
            lhs = spec.weight_ratio(k, s, s)
            rhs = spec.weight_ratio(k - 1, s + 1, s) * spec.sigma(s + 1)
            assert lhs == pytest.approx(rhs, rel=1e-9)


def test_pearson_ratio_aw():
    spec = default("askey_wilson", 0.7)
    for s in spec.default_grid.points():
        got = spec.weight_ratio(0, s + 1, s)
        assert got == pytest.approx(spec.sigma(-s) / spec.sigma(s + 1), rel=1e-10)


def test_aw_theta_identity():
    spec = default("askey_wilson", 0.3)
    for s in spec.default_grid.points():
        res = spec.sigma(-s) - spec.sigma(s) - spec.tau(s) * spec.nabla_x1(s)
        assert abs(res) < 1e-9 * max(abs(spec.sigma(-s)), abs(spec.sigma(s)))


def test_q_racah_symmetry():
    spec = default("q_racah", 0.7)
    for s in np.linspace(0.3, 6, 9):
        assert spec.theta(s) == pytest.approx(spec.sigma(-s - 1), rel=1e-12)


def test_q_racah_rodrigues_constant():
    spec = default("q_racah")
    for n in range(6):
        fact = np.prod([q_number(j, spec.q) for j in range(1, n + 1)])
        assert spec.B(n) == pytest.approx((-1) ** n / fact, rel=1e-10)


@given(st.floats(-0.45, 0.45), st.floats(-0.45, 0.45), st.sampled_from([0.3, 0.5, 0.7]))
def test_q_racah_orthogonal_on_short_support(alpha, beta, q):
    assume(abs(alpha + beta) > 1e-3 and abs(alpha - beta) > 1e-3)
    spec = q_racah(alpha, beta, 0, 7, q)
    pts = spec.support.points()
    w = [spec.weight_ratio(0, s, pts[0]) * spec.nabla_x1(s) for s in pts]
    for n, m in ((1, 2), (0, 3), (2, 4)):
        pn = [spec.poly(n, s) for s in pts]
        pm = [spec.poly(m, s) for s in pts]
        cross = sum(a * b * c for a, b, c in zip(pn, pm, w))
        nn = sum(a * a * c for a, c in zip(pn, w))
        mm = sum(b * b * c for b, c in zip(pm, w))
        assert abs(cross) < 1e-8 * np.sqrt(abs(nn * mm))


def test_q_meixner_closed_e1():
    spec = q_meixner(0.6, 0.8, 0.5)
    q = spec.q
    want = 1 - q_number(2, q) ** 2 * q.pow(-0.5) / 2
    assert spec.structure_closed(1).first == pytest.approx(want)


def test_asc_second_kind_is_first_kind_at_inverse_base():
    u = al_salam_carlitz_1(0.3, QParam(2.0, allow_any=True))
    v = al_salam_carlitz_2(0.3, 0.5)
    for n in range(5):
        for x in (-1.2, 0.4, 1.7):
            assert v.poly_x(n, x) == pytest.approx(u.poly_x(n, x), rel=1e-12, abs=1e-12)
    assert v.poly_x(0, 0.9) == 1


@given(st.floats(0.2, 3), st.floats(0.2, 0.8))
def test_asc_lowering(x, q):
    spec = al_salam_carlitz_1(0.3, q)
    s = spec.lattice.s_of_x(x)
    lhs = delta_chain(lambda t: spec.poly(2, t), spec.lattice, 1, s)
    rhs = q**0.5 * q_number(2, q) * spec.poly(1, s)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.7])
def test_asc_recurrence_closed_form(q):
    # x U_n = U_{n+1} + (1 + a) q^n U_n - a q^{n-1} (1 - q^n) U_{n-1}
    a = -0.4
    spec = al_salam_carlitz_1(a, q)
    for n in range(1, 7):
        triple = extract_ttrr(spec, n)
        assert triple.first == pytest.approx(1, rel=1e-10)
        assert triple.middle == pytest.approx((1 + a) * q**n, rel=1e-7)
        assert triple.last == pytest.approx(-a * q ** (n - 1) * (1 - q**n), rel=1e-7)


def test_discrete_support():
    spec = default("q_racah")
    assert isinstance(spec.support, DiscreteSupport)
    assert spec.support.points() == list(range(10))
    # zero at integers outside a <= s < b, the off-lattice cosets keep the Pearson recurrence
    assert spec.weight(0, -1) == spec.weight(0, 10) == spec.weight(0, 12) == 0
    assert spec.weight(0, 3) != 0


def test_errors():
    with pytest.raises(SupportError):
        q_racah(0.2, 0.1, 0, 7.5, 0.5)
    with pytest.raises(ParameterError):
        al_salam_carlitz_1(0, 0.5)
    with pytest.raises(ParameterError):
        askey_wilson(0.5, 0.35, 0.45, 0.65, 0.5)
    with pytest.raises(ParameterError):
        make_family("jacobi", {}, 0.5)
    with pytest.raises(ParameterError):
        make_family("q_meixner", {"b": 0.6}, 0.5)
    with pytest.raises(ParameterError):
        family_eval(default("q_meixner"), -1, 0.3)


@given(st.floats(0.05, 0.95), st.sampled_from([-1, 1]))
def test_asc_construct_small_q(q, sign):
    a = 0.5 * sign
    for ctor in (al_salam_carlitz_1, al_salam_carlitz_2):
        try:
            spec = ctor(a, q)
        except DegeneracyError:
            pytest.fail("leading operator coefficient reported as vanishing")
        assert spec.poly_x(1, 2.0) == pytest.approx(1 - a, rel=1e-12)
