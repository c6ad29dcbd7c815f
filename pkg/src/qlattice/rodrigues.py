"""Rodrigues operators R_k(sigma, rho_m, x_m) and the Rodrigues formula for p_n."""

from dataclasses import dataclass

from .errors import InconclusiveError, InconsistencyError, ParameterError, SingularWeightError, StepError
from .lattice import delta_chain, nabla_chain
from .numerics import fit_polynomial
from .reports import CheckReport


@dataclass(frozen=True)
class RodriguesContext:
    """Operator R_k attached to (sigma, rho_m, x_m) of ``spec``."""

    spec: object
    m: int
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ParameterError("Rodrigues order k must be >= 0")


def rodrigues_apply(ctx, f, s):
    """R_k(rho_m, x_m) f at s.

    R_1(rho_m, x_m) f = nabla(rho_{m+1} f) / (rho_m nabla x_{m+1}) and
    R_k = R_1(rho_m, x_m) o R_{k-1}(rho_{m+1}, x_{m+1}).  The recursion
    touches s, s-1, ..., s-k; values are memoized by (level, order, offset).
    The operator is homogeneous of degree 0 in the weights, so every weight
    is taken relative to rho(s), which keeps magnitudes local to the stencil.
    """
    spec = ctx.spec
    x = spec.lattice.x
    s = complex(s)
    memo = {}

    def weight(level, t):
        return spec.weight_ratio(level, t, s)

    def r(level, order, offset):
        key = (level, order, offset)
        if key in memo:
            return memo[key]
        t = s - offset
        if order == 0:
            val = f(t)
        else:
            rho = weight(level, t)
            if rho == 0:
                raise SingularWeightError(f"rho_{level} vanishes at s={t}", point=t)
            step = x(t, level + 1) - x(t - 1, level + 1)
            if step == 0:
                raise StepError(f"nabla x_{level + 1} vanishes at s={t}")
            hi = weight(level + 1, t) * r(level + 1, order - 1, offset)
            lo = weight(level + 1, t - 1) * r(level + 1, order - 1, offset + 1)
            val = (hi - lo) / (rho * step)
        memo[key] = val
        return val

    return r(ctx.m, ctx.k, 0)


def _one(_s):
    return 1.0


def rodrigues_nested(spec, n, s):
    return spec.B(n) * rodrigues_apply(RodriguesContext(spec, 0, n), _one, s)


def rodrigues_flat(spec, n, s):
    """(B_n / rho(s)) nabla/nabla x_1 ... nabla/nabla x_n rho_n(s)."""
    s = complex(s)
    if n == 0:
        return spec.B(0) + 0j
    # rho_n(t) / rho(s); the chain is linear, so this is the chain divided by rho(s)
    chain = nabla_chain(lambda t: spec.weight_ratio(n, t, s), spec.lattice, n, 0, s)
    return spec.B(n) * chain


def rodrigues_poly(spec, n, s, form="nested", rtol=1e-8):
    """p_n(x(s)) = B_n R_n(rho, x)(1).

    ``form`` selects the nested operator composition, the flattened backward
    chain on rho_n, or ``"both"``, which evaluates both and raises
    InconsistencyError if they differ by more than ``rtol`` relative.
    """
    if form == "nested":
        return rodrigues_nested(spec, n, s)
    if form == "flat":
        return rodrigues_flat(spec, n, s)
    if form == "both":
        a = rodrigues_nested(spec, n, s)
        b = rodrigues_flat(spec, n, s)
        err = abs(a - b) / max(abs(a), abs(b), 1e-300)
        if err > rtol:
            raise InconsistencyError(f"nested and flat Rodrigues forms differ by {err:.2e}", residual=err)
        return a
    raise ParameterError(f"unknown form {form!r}")


def delta_k_rodrigues_check(spec, n, k, grid, tol=1e-8, params=None):
    """Constancy of Delta^{(k)} p_n / R_{n-k}(rho_k, x_k)(1) over the grid.

    The mean ratio is reported as C_{n,k} in the notes.
    """
    if not 0 <= k <= n:
        raise ParameterError("need 0 <= k <= n")

    ctx = RodriguesContext(spec, k, n - k)
    notes = []
    ratios = []
    for s in grid:
        num = spec.poly(n, s) if k == 0 else delta_chain(lambda t: spec.poly(n, t), spec.lattice, k, s)
        den = rodrigues_apply(ctx, _one, s)
        if den == 0:
            notes.append(f"skipped s={s}: zero denominator")
            continue
        ratios.append(num / den)
    if not ratios:
        raise InconclusiveError("every grid point had a zero denominator")
    mean = sum(ratios) / len(ratios)
    dev = max(abs(r - mean) for r in ratios) / max(abs(mean), 1e-300)
    notes.append(f"C_{n},{k} = {mean.real:.12g}{mean.imag:+.3g}j")
    return CheckReport(
        "delta_ratio", spec.name, dict(params or spec.params), dev, tol, n=n, m=k, notes=notes
    )


def r1_polynomial_fit(spec, coeffs, k, points):
    """Fit R_1(rho_k, x_k)(pi(x_{k+1})) as a polynomial of degree deg(pi)+1 in x_k.

    ``coeffs`` lists pi's coefficients from the constant term up.  Returns the
    PolyFit; its leading() is the x_k^{deg+1} coefficient.
    """
    deg = len(coeffs) - 1
    x = spec.lattice.x

    def pi_of(t):
        xv = x(t, k + 1)
        out = 0j
        for c in reversed(coeffs):
            out = out * xv + c
        return out

    ctx = RodriguesContext(spec, k, 1)
    xs = [x(s, k) for s in points]
    ys = [rodrigues_apply(ctx, pi_of, s) for s in points]
    return fit_polynomial(xs, ys, deg + 1, smallest_first=True)
