"""Residual checks for the characterization identities, and the suite runner.

Every check returns a :class:`CheckReport` whose residual is a relative
quantity; ``passed`` means residual < tolerance.  Solves always keep held-out
points, so a check can only pass if the relation holds away from the points
it was fitted on.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    ConfigError,
    ConvergenceError,
    InconsistencyError,
    ParameterError,
    QLatticeError,
    SingularWeightError,
    StepError,
)
from .families import (
    CoeffTriple,
    ContinuousSupport,
    DiscreteSupport,
    askey_wilson,
    aw_theta_density,
    make_family,
    operator_leading,
)
from .lattice import GridWindow, Lattice, alpha_q, delta_div, mean_op, q_number
from .numerics import fit_polynomial
from .recurrence import structure_solve, structure_unknowns, ttrr_solve
from .reports import CheckReport, failed_report
from .rodrigues import RodriguesContext, delta_k_rodrigues_check, r1_polynomial_fit, rodrigues_apply, rodrigues_flat, rodrigues_nested

ALGEBRAIC_TOL = 1e-8
OPERATOR_TOL = 1e-7
QUADRATURE_TOL = 1e-5
IDENTITY_TOL = 1e-9
# a coefficient counts as nonzero when it exceeds this multiple of its resampling drift
NONZERO_MARGIN = 10.0
PERTURB_TARGETS = ("sigma", "tau", "rho", "lambda")


def _params(spec, extra=None):
    out = {}
    for key, v in spec.params.items():
        v = complex(v)
        out[key] = v.real if v.imag == 0 else v
    q = complex(spec.user_q if spec.user_q is not None else spec.q.q)
    out["q"] = q.real if q.imag == 0 else q
    out.update(extra or {})
    return out


def _report(check_id, spec, residual, tol, n=None, m=None, notes=None, params=None):
    return CheckReport(check_id, spec.name, params or _params(spec), residual, tol, n=n, m=m, notes=list(notes or []))


def _points(grid):
    return [complex(s) for s in grid]


# -- operator-level checks -----------------------------------------------------


def check_pearson(spec, grid, tol=ALGEBRAIC_TOL, params=None):
    """sigma(s+1) rho(s+1) = Theta(s) rho(s), weights taken relative to rho(s)."""
    worst = 0.0
    notes = []
    for s in _points(grid):
        try:
            lhs = spec.sigma(s + 1) * spec.weight_ratio(0, s + 1, s)
        except (SingularWeightError, ZeroDivisionError) as exc:
            notes.append(f"skipped s={s}: {exc}")
            continue
        rhs = spec.theta(s)
        scale = max(abs(lhs), abs(rhs), 1e-300)
        worst = max(worst, abs(lhs - rhs) / scale)
    return _report("pearson", spec, worst, tol, notes=notes, params=params)


def _sode_terms(spec, n, s):
    x = spec.lattice.x
    y = spec.poly
    nx1 = spec.nabla_x1(s)
    fwd = spec.theta(s) * (y(n, s + 1) - y(n, s)) / (x(s + 1) - x(s)) / nx1
    bwd = spec.sigma(s) * (y(n, s) - y(n, s - 1)) / (x(s) - x(s - 1)) / nx1
    return fwd, bwd, y(n, s)


def check_sode(spec, n, grid, tol=OPERATOR_TOL, params=None):
    """Theta Delta p/Delta x - sigma nabla p/nabla x over nabla x_1, plus lambda_n p_n."""
    lam = spec.eigenvalue(n)
    worst = 0.0
    notes = []
    for s in _points(grid):
        try:
            fwd, bwd, p = _sode_terms(spec, n, s)
        except (StepError, ZeroDivisionError) as exc:
            notes.append(f"skipped s={s}: {exc}")
            continue
        scale = max(abs(fwd), abs(bwd), abs(lam * p), 1e-300)
        worst = max(worst, abs(fwd - bwd + lam * p) / scale)
    return _report("sode", spec, worst, tol, n=n, notes=notes, params=params)


def check_eigenvalue_constancy(spec, n, grid, tol=OPERATOR_TOL, params=None):
    """-(H p_n)/p_n is the same number at every grid point."""
    if n == 0:
        return _report("sode_lambda", spec, 0.0, tol, n=0, notes=["lambda_0 = 0"], params=params)
    values = []
    for s in _points(grid):
        fwd, bwd, p = _sode_terms(spec, n, s)
        if p != 0:
            values.append(-(fwd - bwd) / p)
    mean = sum(values) / len(values)
    dev = max(abs(v - mean) for v in values) / max(abs(mean), 1e-300)
    notes = [f"extracted lambda_{n} = {mean.real:.12g}{mean.imag:+.3g}j"]
    return _report("sode_lambda", spec, dev, tol, n=n, notes=notes, params=params)


# -- recurrences ---------------------------------------------------------------


def _solve_checked(solver, tol):
    """(result, residual); a failed held-out validation keeps its residual."""
    try:
        res = solver(tol)
        return res, res.residual
    except InconsistencyError as exc:
        return None, exc.residual


def _resolved(value, resampled):
    """A solved coefficient is nonzero if it stands well clear of its resampling drift."""
    if value == 0:
        return False
    if resampled is None:
        return True
    return abs(value) > NONZERO_MARGIN * abs(value - resampled)


def _resample(solver):
    try:
        return solver(1)
    except QLatticeError:
        return None


def extract_ttrr(spec, n, grid=None, tol=ALGEBRAIC_TOL, start=0, full_output=False):
    """(alpha_n, beta_n, gamma_n) of x p_n = alpha p_{n+1} + beta p_n + gamma p_{n-1}.

    Raises InconsistencyError if held-out points disagree, and ParameterError
    if gamma_n is not resolved from zero for n >= 1.
    """
    pts = _points(grid if grid is not None else spec.recurrence_grid)

    def solve(offset):
        return ttrr_solve(spec.poly, spec.lattice, n, pts, tol=tol, start=start + offset)

    res = solve(0)
    c = res.coeffs
    triple = CoeffTriple(c[0], c[1], c[2] if n >= 1 else None)
    if n >= 1:
        other = _resample(solve)
        if not _resolved(c[2], other.coeffs[2] if other else None):
            raise ParameterError(f"gamma_{n} is not resolved from zero")
    return (triple, res) if full_output else triple


def check_ttrr(spec, n, grid, tol=ALGEBRAIC_TOL, params=None):
    pts = _points(grid)

    def solve(offset, t=tol):
        return ttrr_solve(spec.poly, spec.lattice, n, pts, tol=t, start=offset)

    res, resid = _solve_checked(lambda t: solve(0, t), tol)
    notes = []
    if res is None:
        return _report("ttrr", spec, resid, tol, n=n, notes=["held-out validation failed"], params=params)
    c = res.coeffs
    notes.append("alpha={:.12g}{:+.3g}j beta={:.12g}{:+.3g}j".format(c[0].real, c[0].imag, c[1].real, c[1].imag))
    other = _resample(solve)
    if other is None:
        notes.append("resample failed")
    else:
        drift = max(abs(u - v) / max(abs(u), 1e-300) for u, v in zip(c, other.coeffs))
        notes.append(f"resampled drift {drift:.2e}")
    if n >= 1:
        notes.append(f"gamma={c[2].real:.12g}{c[2].imag:+.3g}j")
        if not _resolved(c[2], other.coeffs[2] if other else None):
            notes.append("gamma_n not resolved from zero")
            resid = math.inf
    return _report("ttrr", spec, resid, tol, n=n, notes=notes, params=params)


def solve_structure(spec, n, grid, tol=OPERATOR_TOL, start=0):
    """(CoeffTriple, SolveResult) for M p_n = e D p_{n+1} + f D p_n + g D p_{n-1}.

    D = Delta^{(1)}.  Slots multiplying D p_0 = 0 come back as None.
    """
    res = structure_solve(spec.poly, spec.lattice, n, _points(grid), tol=tol, start=start)
    c = list(res.coeffs) + [None] * (3 - structure_unknowns(n))
    return CoeffTriple(*c), res


def _compare(label, solved, closed, rtol):
    if closed is None or solved is None:
        return None, f"closed {label}: unavailable"
    rel = abs(solved - closed) / max(abs(solved), 1e-300)
    if rel <= rtol:
        return True, f"closed {label}: match ({rel:.1e})"
    return False, f"closed {label}: FLAGGED discrepancy {rel:.2e} (solved {complex(solved):.10g}, closed form {complex(closed):.10g})"


def compare_closed(spec, n, triple, rtol=1e-6):
    """[(label, match-or-None, note)] against the family's closed-form coefficients."""
    if spec.structure_closed is None or n < 1:
        return []
    closed = spec.structure_closed(n)
    out = []
    for label, s_val, c_val in zip(("e", "f", "g"), triple.as_tuple(), closed.as_tuple()):
        ok, note = _compare(f"{label}_{n}", s_val, c_val, rtol)
        out.append((label, ok, note))
    return out


def check_structure_relation(spec, n, grid, tol=OPERATOR_TOL, params=None):
    """Held-out residual of the mean structure relation with side conditions.

    e_n must not vanish and g_n must differ from the recurrence gamma_n.
    Disagreement with the family's closed-form coefficients is only noted.
    """
    pts = _points(grid)
    notes = []
    try:
        triple, res = solve_structure(spec, n, pts, tol=tol)
        resid = res.residual
    except InconsistencyError as exc:
        return _report("structure", spec, exc.residual, tol, n=n, notes=["held-out validation failed"], params=params)
    other = _resample(lambda offset: solve_structure(spec, n, pts, tol=tol, start=offset)[0])
    if not _resolved(triple.first, other.first if other else None):
        notes.append("e_n not resolved from zero")
        resid = math.inf
    if n >= 2:
        gamma = extract_ttrr(spec, n, pts, tol=ALGEBRAIC_TOL * 10).last
        if abs(triple.last - gamma) <= 1e-8 * max(abs(gamma), 1e-300):
            notes.append("g_n equals gamma_n")
            resid = math.inf
    for label, value in zip(("e", "f", "g"), triple.as_tuple()):
        if value is not None:
            notes.append(f"{label}={complex(value):.12g}")
    notes.extend(note for _, _, note in compare_closed(spec, n, triple))
    return _report("structure", spec, resid, tol, n=n, notes=notes, params=params)


def _shifted_lattice(lat, m):
    """Lattice whose x(s) is lat.x_m(s)."""
    half = lat.q.pow(m / 2)
    return Lattice(lat.c1 * half, lat.c2 / half, lat.c3, lat.q)


def derivative_poly(spec):
    """P_m(s) = Delta^{(1)} p_{m+1}(s) / [m+1]_q, a sequence in x_1(s)."""
    lat = spec.lattice

    def poly(m, s):
        if m < 0:
            return 0j
        return delta_div(lambda t: spec.poly(m + 1, t), lat, 0, s) / q_number(m + 1, spec.q)

    return poly


def check_derivative_structure(spec, n, grid, tol=IDENTITY_TOL, ttrr_tol=ALGEBRAIC_TOL, params=None):
    """Delta^{(1)}(x p_n) = (M x) Delta^{(1)} p_n + M p_n, and the recurrence of Delta^{(1)} p_{n+1} on x_1.

    The residual is the pointwise one; the recurrence is validated at
    ``ttrr_tol`` and a failure there makes the report fail outright.
    """
    lat = spec.lattice
    pts = _points(grid)
    worst = 0.0
    for s in pts:
        lhs = delta_div(lambda t: lat.x(t) * spec.poly(n, t), lat, 0, s)
        mx = mean_op(lat.x, s)
        a = mx * delta_div(lambda t: spec.poly(n, t), lat, 0, s)
        b = mean_op(lambda t: spec.poly(n, t), s)
        worst = max(worst, abs(lhs - a - b) / max(abs(lhs), abs(a), abs(b), 1e-300))
    notes = []
    if n >= 1:
        dpoly = derivative_poly(spec)
        m = n - 1
        try:
            shifted = _shifted_lattice(lat, 1)
            res = ttrr_solve(dpoly, shifted, m, pts, tol=ttrr_tol)
            notes.append(f"derivative recurrence held-out {res.residual:.2e}")
            if m >= 1:
                other = _resample(lambda offset: ttrr_solve(dpoly, shifted, m, pts, tol=ttrr_tol, start=offset))
                if not _resolved(res.coeffs[2], other.coeffs[2] if other else None):
                    notes.append("derivative gamma not resolved from zero")
                    worst = math.inf
        except InconsistencyError as exc:
            notes.append(f"derivative recurrence failed held-out validation ({exc.residual:.2e})")
            worst = math.inf
    return _report("derivative_structure", spec, worst, tol, n=n, notes=notes, params=params)


# -- Rodrigues -------------------------------------------------------------------


def check_rodrigues(spec, n, grid, tol=1e-6, params=None):
    """B_n R_n(rho, x)(1) against the series value of p_n."""
    worst = 0.0
    for s in _points(grid):
        ref = spec.poly(n, s)
        val = rodrigues_nested(spec, n, s)
        worst = max(worst, abs(val - ref) / max(abs(ref), 1e-300))
    return _report("rodrigues", spec, worst, tol, n=n, params=params)


def check_rodrigues_forms(spec, n, grid, tol=1e-10, params=None):
    """Nested operator composition against the flattened backward chain."""
    worst = 0.0
    for s in _points(grid):
        a = rodrigues_nested(spec, n, s)
        b = rodrigues_flat(spec, n, s)
        worst = max(worst, abs(a - b) / max(abs(a), abs(b), 1e-300))
    return _report("rodrigues_forms", spec, worst, tol, n=n, params=params)


def check_rodrigues_tau(spec, grid, tol=ALGEBRAIC_TOL, params=None):
    """R_1(rho, x)(1) = tau(s)."""
    ctx = RodriguesContext(spec, 0, 1)
    worst = 0.0
    for s in _points(grid):
        a = rodrigues_apply(ctx, lambda t: 1.0, s)
        b = spec.tau(s)
        worst = max(worst, abs(a - b) / max(abs(a), abs(b), 1e-300))
    return _report("rodrigues_tau", spec, worst, tol, params=params)


def check_delta_ratio(spec, n, k, grid, tol=ALGEBRAIC_TOL, params=None):
    return delta_k_rodrigues_check(spec, n, k, _points(grid), tol=tol, params=params or _params(spec))


def check_rodrigues_raising(spec, k, degree, grid, rng, tol=ALGEBRAIC_TOL, lead_tol=OPERATOR_TOL, params=None):
    """R_1(rho_k, x_k)(pi(x_{k+1})) is a polynomial of degree deg(pi)+1 in x_k.

    Its leading coefficient is compared with
    lc(pi) (alpha_q(deg+2k) tau' + [deg+2k]_q sigma_hat''/2).
    """
    coeffs = list(rng.uniform(-1, 1, degree + 1))
    coeffs[-1] = 1.0
    fit = r1_polynomial_fit(spec, coeffs, k, _points(grid))
    pred = operator_leading(spec, degree + 2 * k)
    lead_err = abs(fit.poly.leading() - pred) / max(abs(pred), 1e-300)
    notes = [f"leading coefficient deviation {lead_err:.2e}"]
    resid = fit.residual
    if not lead_err < lead_tol:
        notes.append("leading coefficient mismatch")
        resid = math.inf
    return _report("rodrigues_raising", spec, resid, tol, n=degree, m=k, notes=notes, params=params)


# -- orthogonality ---------------------------------------------------------------


@dataclass
class OrthogonalityGram:
    entries: np.ndarray
    diag_floor: float

    @property
    def off_diagonal_ratio(self):
        """max |G_nm| / sqrt(|G_nn G_mm|) over n != m; blind to each p_n's normalization."""
        g = self.entries
        if g.shape[0] < 2:
            return 0.0
        d = np.sqrt(np.abs(np.diag(g)))
        ratio = np.abs(g) / np.outer(d, d)
        np.fill_diagonal(ratio, 0.0)
        return float(ratio.max())


def _gram(values, weights):
    v = np.array(values, dtype=complex)
    w = np.array(weights, dtype=complex)
    g = (v * w) @ v.T
    return OrthogonalityGram(g, float(np.min(np.abs(np.diag(g)))))


def gram_discrete(spec, n_max, derivative=False):
    """Gram matrix of p_0..p_{n_max} (or Delta^{(1)} p_1..p_{n_max+1} against rho_1 on x_1)."""
    sup = spec.support
    if not isinstance(sup, DiscreteSupport):
        raise ConfigError(f"{spec.name} has no finite discrete support")
    pts = sup.points()
    if len(pts) < n_max + 2:
        raise ConfigError(f"support of {len(pts)} points is too short for n_max={n_max}")
    if spec.max_degree is not None and n_max + (1 if derivative else 0) > spec.max_degree:
        raise ConfigError(f"n_max={n_max} exceeds the family's degree range")
    lat = spec.lattice
    ref = pts[0]
    if derivative:
        pts = pts[:-1]
        dpoly = derivative_poly(spec)
        weights = [spec.weight_ratio(1, s, ref) * (lat.x(s, 2) - lat.x(s - 1, 2)) for s in pts]
        values = [[dpoly(n, s) for s in pts] for n in range(n_max + 1)]
    else:
        weights = [spec.weight_ratio(0, s, ref) * spec.nabla_x1(s) for s in pts]
        values = [[spec.poly(n, s) for s in pts] for n in range(n_max + 1)]
    if any(w == 0 or not np.isfinite(w) for w in weights):
        raise ConfigError("weight vanishes or is singular on the support")
    return _gram(values, weights)


def check_orthogonality_discrete(spec, n_max, tol=ALGEBRAIC_TOL, derivative=False, params=None):
    """(gram, report); passes if the normalized off-diagonal ratio is below tol."""
    gram = gram_discrete(spec, n_max, derivative)
    check_id = "orthogonality_derivative" if derivative else "orthogonality_discrete"
    notes = [f"diag floor {gram.diag_floor:.6g}", "boundary terms vanish on the finite support"]
    return gram, _report(check_id, spec, gram.off_diagonal_ratio, tol, n=n_max, notes=notes, params=params)


def gram_aw(spec, n_max, points):
    """Trapezoid rule in theta for int_0^pi p_n p_m w(theta) d theta, x = cos(theta)."""
    params = tuple(spec.params[k] for k in ("a", "b", "c", "d"))
    thetas = (np.arange(points) + 0.5) * math.pi / points
    logq = spec.q.log
    weights = [aw_theta_density(t, params, spec.q) * math.pi / points for t in thetas]
    values = [[spec.poly(n, 1j * t / logq) for t in thetas] for n in range(n_max + 1)]
    return _gram(values, weights)


def check_orthogonality_continuous_aw(params, q, n_max, points=64, tol=QUADRATURE_TOL, max_doublings=6):
    """Askey-Wilson Gram matrix on (-1, 1) under point doubling.

    Needs 0 < a, b, c, d < 1.  Raises ConvergenceError if successive
    doublings keep changing the Gram matrix by more than ``tol`` relative.
    """
    vals = [params[k] for k in ("a", "b", "c", "d")]
    if not all(abs(complex(v).imag) == 0 and 0 < complex(v).real < 1 for v in vals):
        raise ParameterError("Askey-Wilson quadrature needs 0 < a, b, c, d < 1")
    spec = askey_wilson(*vals, q)
    prev = gram_aw(spec, n_max, points)
    for _ in range(max_doublings):
        points *= 2
        cur = gram_aw(spec, n_max, points)
        change = float(np.max(np.abs(cur.entries - prev.entries))) / cur.diag_floor
        if change < tol * 1e-2:
            notes = [f"{points} nodes, last doubling changed entries by {change:.1e}"]
            return cur, _report("orthogonality_aw", spec, cur.off_diagonal_ratio, tol, n=n_max, notes=notes)
        prev = cur
    raise ConvergenceError(f"quadrature still moving after {max_doublings} doublings")


# -- lattice identities on random polynomials ------------------------------------


def _random_poly(rng, degree):
    return [complex(c) for c in rng.uniform(-1, 1, degree + 1)]


def _horner(coeffs, x):
    out = 0j
    for c in reversed(coeffs):
        out = out * x + c
    return out


def _on(coeffs, lat, k):
    return lambda s: _horner(coeffs, lat.x(s, k))


def _rel(a, b, *terms):
    return abs(a - b) / max(abs(a), abs(b), *[abs(t) for t in terms], 1e-300)


def check_summation_by_parts(f, g, a, b, tol=IDENTITY_TOL):
    """sum_{a}^{b-1} g nabla f = f(s) g(s+1) |_{a-1}^{b-1} - sum_{a}^{b-1} f Delta g."""
    lhs = sum(g(s) * (f(s) - f(s - 1)) for s in range(a, b))
    boundary = f(b - 1) * g(b) - f(a - 1) * g(a)
    tail = sum(f(s) * (g(s + 1) - g(s)) for s in range(a, b))
    scale = max(abs(lhs), abs(boundary), abs(tail), 1e-300)
    return CheckReport("summation_by_parts", "lattice", {}, abs(lhs - boundary + tail) / scale, tol)


def leibniz_residual(f, g, points):
    """max relative residual of nabla(fg) = (nabla f) g + f(s-1) nabla g."""
    worst = 0.0
    for s in points:
        lhs = f(s) * g(s) - f(s - 1) * g(s - 1)
        a = (f(s) - f(s - 1)) * g(s)
        b = f(s - 1) * (g(s) - g(s - 1))
        worst = max(worst, _rel(lhs, a + b, a, b))
    return worst


def product_rule_residual(lat, pi, xi, points):
    """Delta^{(1)}(pi xi) = (Delta^{(1)} pi) M xi + (Delta^{(1)} xi) M pi."""
    worst = 0.0
    for s in points:
        lhs = delta_div(lambda t: pi(t) * xi(t), lat, 0, s)
        a = delta_div(pi, lat, 0, s) * mean_op(xi, s)
        b = delta_div(xi, lat, 0, s) * mean_op(pi, s)
        worst = max(worst, _rel(lhs, a + b, a, b))
    return worst


def mean_x_residual(spec, n, points):
    """Delta^{(1)}(x p_n) = M p_n + (alpha_q(1) x_1 + c_3 (1 - alpha_q(1))) Delta^{(1)} p_n."""
    lat = spec.lattice
    a1 = alpha_q(1, spec.q)
    worst = 0.0
    for s in points:
        lhs = delta_div(lambda t: lat.x(t) * spec.poly(n, t), lat, 0, s)
        a = mean_op(lambda t: spec.poly(n, t), s)
        b = (a1 * lat.x(s, 1) + lat.c3 * (1 - a1)) * delta_div(lambda t: spec.poly(n, t), lat, 0, s)
        worst = max(worst, _rel(lhs, a + b, a, b))
    return worst


def mean_quotient_residuals(lat, pi_c, xi_c, points):
    """(first form, second form, polynomiality) residuals of the mean identities.

    First form:  M(pi(x_{-1}) nabla xi)/nabla x_1 = nabla(pi(x_1) M xi)/nabla x_1 - (nabla pi(x_1)/nabla x_1) xi.
    Second form: the same left side = [M(pi(x_{-1}) nabla x)/nabla x_1] M(nabla xi/nabla x)
                 + (1/4) nabla(pi(x_1) Delta x) nabla Delta^{(1)} xi / nabla x_1.
    """
    x = lat.x
    pi_m1 = _on(pi_c, lat, -1)
    pi_1 = _on(pi_c, lat, 1)
    xi = _on(xi_c, lat, 0)

    def nabla(f, s):
        return f(s) - f(s - 1)

    def nx1(s):
        return x(s, 1) - x(s - 1, 1)

    first = second = 0.0
    u_vals, v_vals, xs = [], [], []
    for s in points:
        lhs = mean_op(lambda t: pi_m1(t) * nabla(xi, t), s) / nx1(s)
        a = nabla(lambda t: pi_1(t) * mean_op(xi, t), s) / nx1(s)
        b = nabla(pi_1, s) / nx1(s) * xi(s)
        first = max(first, _rel(lhs, a - b, a, b))
        u = mean_op(lambda t: pi_m1(t) * nabla(x, t), s) / nx1(s)
        v = nabla(lambda t: pi_1(t) * (x(t + 1) - x(t)), s)
        c = u * mean_op(lambda t: nabla(xi, t) / nabla(x, t), s)
        d = v / 4 * nabla(lambda t: delta_div(xi, lat, 0, t), s) / nx1(s)
        second = max(second, _rel(lhs, c + d, c, d))
        u_vals.append(u)
        v_vals.append(v)
        xs.append(x(s))
    deg = len(pi_c) - 1
    poly_res = 0.0
    for ys, d in ((u_vals, deg), (v_vals, deg + 1)):
        held = min(10, len(xs) - d - 1)
        poly_res = max(poly_res, fit_polynomial(xs, ys, d, held_out=held, smallest_first=True).residual)
    return first, second, poly_res


def mean_sum_residual(lat, pi_c, k, points):
    """pi(x_k(s)) + pi(x_k(s-1)) fitted as a degree-deg(pi) polynomial in x_{k-1}(s)."""
    xs = [lat.x(s, k - 1) for s in points]
    ys = [_horner(pi_c, lat.x(s, k)) + _horner(pi_c, lat.x(s - 1, k)) for s in points]
    deg = len(pi_c) - 1
    return fit_polynomial(xs, ys, deg, held_out=min(10, len(xs) - deg - 1), smallest_first=True).residual


def check_mean_identities(spec, grid, rng, trials=1, max_degree=3, tol=IDENTITY_TOL, params=None):
    """Product rule, mean of x p_n, mean sums and mean quotients on seeded random polynomials."""
    lat = spec.lattice
    pts = _points(grid)
    worst = {"product_rule": 0.0, "mean_x": 0.0, "mean_sum": 0.0, "mean_quotient_first": 0.0,
             "mean_quotient_second": 0.0, "mean_quotient_polynomial": 0.0, "leibniz": 0.0}
    for _ in range(trials):
        pi_c = _random_poly(rng, int(rng.integers(0, max_degree + 1)))
        xi_c = _random_poly(rng, int(rng.integers(0, max_degree + 1)))
        pi, xi = _on(pi_c, lat, 0), _on(xi_c, lat, 0)
        worst["product_rule"] = max(worst["product_rule"], product_rule_residual(lat, pi, xi, pts))
        worst["leibniz"] = max(worst["leibniz"], leibniz_residual(pi, xi, pts))
        for k in range(-2, 3):
            worst["mean_sum"] = max(worst["mean_sum"], mean_sum_residual(lat, pi_c, k, pts))
        first, second, poly = mean_quotient_residuals(lat, pi_c, xi_c, pts)
        worst["mean_quotient_first"] = max(worst["mean_quotient_first"], first)
        worst["mean_quotient_second"] = max(worst["mean_quotient_second"], second)
        worst["mean_quotient_polynomial"] = max(worst["mean_quotient_polynomial"], poly)
    for n in range(5):
        if spec.max_degree is None or n <= spec.max_degree:
            worst["mean_x"] = max(worst["mean_x"], mean_x_residual(spec, n, pts))
    notes = [f"{key} {val:.2e}" for key, val in worst.items()]
    return _report("mean_identities", spec, max(worst.values()), tol, notes=notes, params=params)


# -- falsifiability --------------------------------------------------------------


def perturb(spec, target, eps):
    """A copy of ``spec`` with one ingredient scaled by (1 + eps).

    sigma: sigma -> sigma (1 + eps), Theta and rho unchanged.
    tau: Theta -> Theta + eps (Theta - sigma), i.e. tau -> tau (1 + eps).
    rho: rho_k(s) -> rho_k(s) (1 + eps s).
    lambda: lambda_n -> lambda_n (1 + eps).
    Leading coefficients and B_n are left alone, so the perturbed spec is
    deliberately inconsistent.
    """
    if target == "sigma":
        sig = spec.sigma
        return replace(spec, sigma=lambda s: sig(s) * (1 + eps))
    if target == "tau":
        sig, th = spec.sigma, spec.theta
        return replace(spec, theta=lambda s: th(s) + eps * (th(s) - sig(s)))
    if target == "rho":
        w, r = spec.weight, spec.weight_ratio

        def factor(s):
            return 1 + eps * complex(s).real

        return replace(
            spec,
            weight=lambda k, s: w(k, s) * factor(s),
            weight_ratio=lambda k, t, ref: r(k, t, ref) * factor(t) / factor(ref),
        )
    if target == "lambda":
        return replace(spec, eigenvalue_factor=spec.eigenvalue_factor * (1 + eps))
    raise ParameterError(f"unknown perturbation target {target!r}; choose from {PERTURB_TARGETS}")


# -- suite ---------------------------------------------------------------------------


CHECKS = (
    "pearson",
    "sode",
    "sode_lambda",
    "ttrr",
    "structure",
    "derivative_structure",
    "rodrigues",
    "rodrigues_forms",
    "rodrigues_tau",
    "delta_ratio",
    "rodrigues_raising",
    "mean_identities",
    "summation_by_parts",
    "orthogonality_discrete",
    "orthogonality_derivative",
    "orthogonality_aw",
)


def _guard(out, check_id, spec_or_name, params, tol, fn, n=None, m=None):
    """Run one check; errors become failing reports instead of aborting."""
    try:
        result = fn()
    except (QLatticeError, ArithmeticError, ValueError) as exc:
        name = spec_or_name if isinstance(spec_or_name, str) else spec_or_name.name
        out.append(failed_report(check_id, name, params, tol, exc, n=n, m=m))
        return
    if isinstance(result, tuple):
        result = result[-1]
    out.append(result)


def run_family_checks(spec, settings, rng, params=None):
    """Every applicable check for one (family, q) pair."""
    s = settings
    tol = s.tolerances
    params = params or _params(spec)
    out = []
    enabled = set(s.checks)
    top = s.n_max if spec.max_degree is None else min(s.n_max, spec.max_degree)
    # recurrences look one degree up
    top_rec = top if spec.max_degree is None else min(top, spec.max_degree - 1)

    def grid(forward=1, backward=1, near=False):
        if s.grid_s0 is not None:
            return GridWindow(s.grid_s0, s.grid_count)
        return spec.window(s.grid_count, forward, backward, near)

    def run(check_id, fn, n=None, m=None, tolerance=tol.algebraic):
        if check_id in enabled:
            _guard(out, check_id, spec, params, tolerance, fn, n=n, m=m)

    run("pearson", lambda: check_pearson(spec, grid(), tol.algebraic, params))
    run("rodrigues_tau", lambda: check_rodrigues_tau(spec, grid(1, 1), tol.algebraic, params))
    for n in range(top + 1):
        run("sode", lambda n=n: check_sode(spec, n, grid(), tol.operator, params), n=n, tolerance=tol.operator)
        run("sode_lambda", lambda n=n: check_eigenvalue_constancy(spec, n, grid(), tol.operator, params),
            n=n, tolerance=tol.operator)
    for n in range(top_rec + 1):
        run("ttrr", lambda n=n: check_ttrr(spec, n, grid(near=True), tol.algebraic, params), n=n)
        run("structure", lambda n=n: check_structure_relation(spec, n, grid(near=True), tol.operator, params),
            n=n, tolerance=tol.operator)
        run("derivative_structure",
            lambda n=n: check_derivative_structure(spec, n, grid(near=True), tol.identity, tol.algebraic, params),
            n=n, tolerance=tol.identity)
    for n in range(min(top, s.rodrigues_n_max) + 1):
        rgrid = grid(0, n)
        run("rodrigues", lambda n=n, g=rgrid: check_rodrigues(spec, n, g, tol.rodrigues, params),
            n=n, tolerance=tol.rodrigues)
        run("rodrigues_forms", lambda n=n, g=rgrid: check_rodrigues_forms(spec, n, g, tol.forms, params),
            n=n, tolerance=tol.forms)
    for n in range(min(top, s.delta_ratio_n_max) + 1):
        for k in range(n + 1):
            run("delta_ratio", lambda n=n, k=k: check_delta_ratio(spec, n, k, grid(k, n - k), tol.algebraic, params),
                n=n, m=k)
    for k in (-1, 0, 1, 2):
        for degree in range(4):
            run("rodrigues_raising", lambda k=k, d=degree: check_rodrigues_raising(spec, k, d, grid(2, 2), rng, tol.algebraic,
                                                                 tol.operator, params), n=degree, m=k)
    run("mean_identities", lambda: check_mean_identities(spec, grid(2, 2), rng, s.trials, 3, tol.identity, params),
        tolerance=tol.identity)
    if "summation_by_parts" in enabled:
        lat = spec.lattice
        f_c, g_c = _random_poly(rng, 3), _random_poly(rng, 3)
        _guard(out, "summation_by_parts", spec, params, tol.identity,
               lambda: _sbp_report(spec, lat, f_c, g_c, tol.identity, params))
    if isinstance(spec.support, DiscreteSupport) and not math.isinf(spec.support.a):
        width = len(spec.support.points())
        n_orth = min(top, width - 2, s.orth_n_max)
        run("orthogonality_discrete", lambda: check_orthogonality_discrete(spec, n_orth, tol.algebraic, False, params),
            n=n_orth)
        n_der = min(top, width - 3, s.orth_n_max)
        run("orthogonality_derivative",
            lambda: check_orthogonality_discrete(spec, n_der, tol.algebraic, True, params), n=n_der)
    if isinstance(spec.support, ContinuousSupport) and spec.name == "askey_wilson":
        n_aw = min(top, s.aw_n_max)
        run("orthogonality_aw",
            lambda: _retag(check_orthogonality_continuous_aw(dict(spec.params), spec.q, n_aw, s.quad_points,
                                                             tol.quadrature)[1], params),
            n=n_aw, tolerance=tol.quadrature)
    return out


def _retag(report, params):
    report.params = params
    return report


def _sbp_report(spec, lat, f_c, g_c, tol, params):
    start = int(round(spec.window(12, 1, 1).s0.real))
    f, g = _on(f_c, lat, 0), _on(g_c, lat, 0)
    shift = spec.window(12, 1, 1).s0 - start
    fs = lambda s: f(s + shift)  # noqa: E731
    gs = lambda s: g(s + shift)  # noqa: E731
    rep = check_summation_by_parts(fs, gs, start, start + 10, tol)
    lei = leibniz_residual(fs, gs, [start + j + 0j for j in range(10)])
    return CheckReport("summation_by_parts", spec.name, params, max(rep.max_residual, lei), tol,
                       notes=[f"summation {rep.max_residual:.2e}", f"leibniz {lei:.2e}"])


def run_suite(config):
    """Run every configured check; reports come back sorted and deterministic."""
    from .config import SuiteConfig, resolve

    if not isinstance(config, SuiteConfig):
        config = SuiteConfig.model_validate(config)
    out = []
    for job in resolve(config):
        rng = np.random.default_rng([config.seed, job.index])
        try:
            spec = make_family(job.name, job.params, job.q)
        except (QLatticeError, ValueError) as exc:
            params = dict(job.params, q=job.q)
            out.append(failed_report("construct", job.name, params, job.settings.tolerances.algebraic, exc))
            continue
        params = _params(spec, {"q": job.q})
        if job.perturb is not None:
            spec = perturb(spec, job.perturb.target, job.perturb.eps)
            params["perturb"] = f"{job.perturb.target}:{job.perturb.eps:g}"
        out.extend(run_family_checks(spec, job.settings, rng, params))
    return sorted(out, key=CheckReport.sort_key)
