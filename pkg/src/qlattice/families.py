"""q-classical families on q-quadratic lattices.

Each constructor returns an immutable :class:`FamilySpec` holding the lattice,
the two operator slots of

    H y(s) = (Theta(s) Delta y(s)/Delta x(s) - sigma(s) nabla y(s)/nabla x(s)) / nabla x_1(s),

the weights rho_k, the Rodrigues constants B_n and the series evaluation of
p_n.  Polynomials are kept in their hypergeometric normalization.
"""

import cmath
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from types import MappingProxyType
from typing import Callable, Optional

from .errors import DegeneracyError, ParameterError, QLatticeError, SingularWeightError, SupportError
from .hypergeometric import SeriesSpec, eval_terminating
from .lattice import (
    N_MAX_ROOT,
    GridWindow,
    Lattice,
    QParam,
    alpha_q,
    as_qparam,
    kappa,
    log_q_pochhammer_general,
    q_factorial,
    q_number,
    q_pochhammer,
    q_pochhammer_infinite,
    q_pochhammer_multi,
)
from .numerics import fit_polynomial
from .recurrence import ttrr_solve

# points used to read off the leading coefficients of tau and sigma-hat
_REFERENCE_POINTS = [0.37 + 0.45 * j for j in range(13)]


@dataclass(frozen=True)
class CoeffTriple:
    first: Optional[complex]
    middle: Optional[complex]
    last: Optional[complex]

    def as_tuple(self):
        return (self.first, self.middle, self.last)


@dataclass(frozen=True)
class DiscreteSupport:
    """Integer points a, a+1, ..., b-1 (a may be -inf)."""

    a: float
    b: float

    def contains(self, s):
        """True/False for points on the support coset, None off it."""
        s = complex(s)
        if s.imag != 0:
            return None
        offset = s.real - (self.b if math.isinf(self.a) else self.a)
        if abs(offset - round(offset)) > 1e-12:
            return None
        return self.a <= s.real + 1e-12 and s.real < self.b - 0.5

    def points(self):
        if math.isinf(self.a):
            raise SupportError("support is unbounded below")
        return [complex(self.a + j) for j in range(int(round(self.b - self.a)))]


@dataclass(frozen=True)
class ContinuousSupport:
    interval: tuple
    density: Callable = field(repr=False)


@dataclass(frozen=True)
class FamilySpec:
    name: str
    params: MappingProxyType
    q: QParam
    lattice: Lattice
    sigma: Callable = field(repr=False)
    theta: Callable = field(repr=False)
    weight: Callable = field(repr=False)
    weight_ratio: Callable = field(repr=False)
    poly: Callable = field(repr=False)
    leading_coeff: Callable = field(repr=False)
    B: Callable = field(repr=False)
    tau_lead: complex = 0j
    sigma_hat_lead: complex = 0j
    support: object = None
    structure_closed: Optional[Callable] = field(default=None, repr=False)
    max_degree: Optional[int] = None
    eigenvalue_factor: complex = 1.0
    # windows sit on one side of the lattice's turning or accumulation point
    safe_start: float = 0.3
    direction: int = 1
    # start for checks without high-order differences, if it may sit closer in
    near_start: Optional[float] = None
    # the q the caller passed, when the family runs internally on another base
    user_q: Optional[complex] = None

    def nabla_x1(self, s):
        return self.lattice.x(s, 1) - self.lattice.x(s - 1, 1)

    def tau(self, s):
        """tau(s) = (Theta(s) - sigma(s)) / nabla x_1(s)."""
        return (self.theta(s) - self.sigma(s)) / self.nabla_x1(s)

    def sigma_hat(self, s):
        return (self.sigma(s) + self.theta(s)) / 2

    def eigenvalue(self, n):
        return eigenvalue(self, n)

    def operator(self, y, s):
        """H applied to a callable y at s."""
        x = self.lattice.x
        s = complex(s)
        fwd = (y(s + 1) - y(s)) / (x(s + 1) - x(s))
        bwd = (y(s) - y(s - 1)) / (x(s) - x(s - 1))
        return (self.theta(s) * fwd - self.sigma(s) * bwd) / self.nabla_x1(s)

    def window(self, count=20, forward=1, backward=1, near=False):
        """Unit-step window whose stencils s-backward .. s+forward stay well separated.

        Quadratic lattices turn around (x(s) = x(-s-c)) and q-linear ones
        accumulate at x = 0; both make divided differences cancel, so the
        window starts at ``safe_start`` and extends away from that point.
        ``near`` uses ``near_start`` instead, for relations that only take
        first differences and need small-x points to resolve low-order terms.
        """
        start = self.near_start if near and self.near_start is not None else self.safe_start
        if self.direction > 0:
            return GridWindow(start + backward, count)
        return GridWindow(start - forward - (count - 1), count)

    @property
    def default_grid(self):
        return self.window()

    @property
    def recurrence_grid(self):
        return self.window(near=True)

    def poly_x(self, n, x):
        return self.poly(n, self.lattice.s_of_x(x))

    def describe(self):
        return {k: complex(v) for k, v in self.params.items()}


def family_eval(spec, n, s):
    """p_n(x(s)) in the family's own normalization."""
    if int(n) != n or n < 0:
        raise ParameterError("n must be a nonnegative integer")
    return spec.poly(int(n), complex(s))


def eigenvalue(spec, n):
    """lambda_n = -[n]_q (alpha_q(n-1) tau' + [n-1]_q sigma_hat''/2)."""
    return -q_number(n, spec.q) * operator_leading(spec, n - 1) * spec.eigenvalue_factor


# split coefficients below this share of their inputs are rounding noise
_SPLIT_NOISE = 1e-12


def operator_leading(spec, m):
    """alpha_q(m) tau' + [m]_q sigma_hat''/2.

    Written as A q^{m/2} + C q^{-m/2}.  For the q-linear families one of A, C
    vanishes exactly, and summing the two halves directly would leave its
    rounding noise amplified by q^{-+m/2}; such a coefficient is set to zero.
    """
    q = spec.q
    half = spec.tau_lead / 2
    other = spec.sigma_hat_lead / (q.pow(0.5) - q.pow(-0.5))
    scale = abs(half) + abs(other)
    a, c = half + other, half - other
    if abs(a) < _SPLIT_NOISE * scale:
        a = 0j
    if abs(c) < _SPLIT_NOISE * scale:
        c = 0j
    return a * q.pow(m / 2) + c * q.pow(-m / 2)


def rodrigues_constant(spec, n):
    """B_n = lc(p_n) / prod_{k<n} (alpha_q(n-1+k) tau' + [n-1+k]_q sigma_hat''/2)."""
    out = spec.leading_coeff(n)
    for k in range(n):
        out /= operator_leading(spec, n - 1 + k)
    return out


def _finish(spec, *, validate=True):
    """Read tau' and sigma_hat''/2 off interpolations in x(s)."""
    xs = [spec.lattice.x(s) for s in _REFERENCE_POINTS]
    tau_vals = [spec.tau(s) for s in _REFERENCE_POINTS]
    sh_vals = [spec.sigma_hat(s) for s in _REFERENCE_POINTS]
    tau_fit = fit_polynomial(xs, tau_vals, 1)
    sh_fit = fit_polynomial(xs, sh_vals, 2)
    if validate and (tau_fit.residual > 1e-9 or sh_fit.residual > 1e-9):
        raise DegeneracyError(
            f"{spec.name}: tau/sigma-hat not polynomial in x(s) "
            f"(residuals {tau_fit.residual:.2e}, {sh_fit.residual:.2e})"
        )
    spec = replace(spec, tau_lead=tau_fit.poly.leading(), sigma_hat_lead=sh_fit.poly.leading())
    for m in range(32):
        if abs(operator_leading(spec, m)) < 1e-300:
            raise DegeneracyError(f"{spec.name}: alpha_q({m}) tau' + [{m}] sigma''/2 vanishes")
    return spec


def _is_q_power(v, q, tol=1e-12):
    for m in range(-N_MAX_ROOT, N_MAX_ROOT + 1):
        qm = q.q**m
        if abs(v - qm) <= tol * max(1.0, abs(qm)):
            return m
    return None


def _pearson_weights(sigma, theta, anchor, support):
    """(weight, weight_ratio) generated by sigma(s+1) rho(s+1) = Theta(s) rho(s).

    rho is normalized to 1 at anchor + frac(s - anchor) on every coset and
    vanishes on integer points outside a discrete support.  Shifted weights
    use rho_k(s) = rho(s) Theta(s) ... Theta(s+k-1) for k >= 0 and
    rho_k(s) = rho_{k+1}(s-1) / sigma(s) for k < 0.
    """

    def outside(s):
        return support is not None and support.contains(s) is False

    def step_ratio(t, ref):
        # rho(t) / rho(ref) for integer t - ref, both on the support
        j = int(round((t - ref).real))
        val = 1 + 0j
        if j > 0:
            for i in range(j):
                den = sigma(ref + i + 1)
                if den == 0:
                    raise SingularWeightError(f"sigma vanishes at {ref + i + 1}", point=ref + i + 1)
                val *= theta(ref + i) / den
        elif j < 0:
            for i in range(1, -j + 1):
                den = theta(ref - i)
                if den == 0:
                    raise SingularWeightError(f"Theta vanishes at {ref - i}", point=ref - i)
                val *= sigma(ref - i + 1) / den
        return val

    def base(s):
        return s - int(round((s - anchor).real))

    def rho_ratio(t, ref):
        if outside(t):
            return 0j
        if outside(ref):
            raise SingularWeightError(f"reference weight vanishes at {ref}", point=ref)
        d = t - ref
        if d.imag == 0 and abs(d.real - round(d.real)) < 1e-12:
            return step_ratio(t, ref)
        return step_ratio(t, base(t)) / step_ratio(ref, base(ref))

    @lru_cache(maxsize=16384)
    def ratio(k, t, ref):
        t, ref = complex(t), complex(ref)
        if k >= 0:
            val = rho_ratio(t, ref)
            for i in range(k):
                val *= theta(t + i)
            return val
        den = sigma(t)
        if den == 0:
            raise SingularWeightError(f"rho_{k} needs sigma({t}) != 0", point=t)
        return ratio(k + 1, t - 1, ref) / den

    def weight(k, s):
        s = complex(s)
        return ratio(k, s, base(s))

    return weight, ratio


def _log_weights(log_rho, sigma):
    """(weight, weight_ratio) from a closed form log rho_k(s) = (sign_k, log|.|)."""

    @lru_cache(maxsize=16384)
    def ratio(k, t, ref):
        t, ref = complex(t), complex(ref)
        if k >= 0:
            sign_k, log_k = log_rho(k, t)
            sign_0, log_0 = log_rho(0, ref)
            return sign_k / sign_0 * cmath.exp(log_k - log_0)
        den = sigma(t)
        if den == 0:
            raise SingularWeightError(f"rho_{k} needs sigma({t}) != 0", point=t)
        return ratio(k + 1, t - 1, ref) / den

    @lru_cache(maxsize=16384)
    def weight(k, s):
        s = complex(s)
        if k >= 0:
            sign_k, log_k = log_rho(k, s)
            return sign_k * cmath.exp(log_k)
        den = sigma(s)
        if den == 0:
            raise SingularWeightError(f"rho_{k} needs sigma({s}) != 0", point=s)
        return weight(k + 1, s - 1) / den

    return weight, ratio


def _series_poly(builder, max_degree=None):
    @lru_cache(maxsize=8192)
    def poly(n, s):
        if n < 0:
            return 0j
        if max_degree is not None and n > max_degree:
            raise ParameterError(f"degree {n} exceeds the finite family's range {max_degree}")
        return builder(n, complex(s))

    return poly


def _cparams(**kw):
    return MappingProxyType({k: complex(v) for k, v in kw.items()})


def _extract_sum_product(spec, n):
    """(beta_n, alpha_{n-1} gamma_n) of the family's TTRR, or None on failure."""
    pts = spec.recurrence_grid.points()
    try:
        cur = ttrr_solve(spec.poly, spec.lattice, n, pts, tol=1e-7).coeffs
        beta = cur[1]
        if n >= 1:
            prev = ttrr_solve(spec.poly, spec.lattice, n - 1, pts, tol=1e-7).coeffs[0]
            prod = prev * cur[2]
        else:
            prod = None
    except QLatticeError:
        return None
    return beta, prod


# -- Askey-Wilson ------------------------------------------------------------


def askey_wilson(a, b, c, d, q):
    """Askey-Wilson polynomials on x(s) = (q^s + q^{-s})/2."""
    q = as_qparam(q)
    a, b, c, d = (complex(v) for v in (a, b, c, d))
    names = {"a": a, "b": b, "c": c, "d": d}
    for key, v in names.items():
        if v == 0:
            raise ParameterError(f"parameter {key} must be nonzero")
        if _is_q_power(v, q) is not None:
            raise ParameterError(f"parameter {key}={v} is a power of q")
    keys = list(names)
    for i in range(4):
        for j in range(i + 1, 4):
            prod = names[keys[i]] * names[keys[j]]
            if _is_q_power(prod, q) is not None:
                raise ParameterError(f"product {keys[i]}{keys[j]}={prod} is a power of q")
    lat = Lattice(0.5, 0.5, 0, q)
    kap2 = kappa(q) ** 2
    abcd = a * b * c * d
    vals = (a, b, c, d)

    def sigma(s):
        z = q.pow(s)
        return -kap2 * q.pow(-2 * s + 0.5) * (z - a) * (z - b) * (z - c) * (z - d)

    def theta(s):
        return sigma(-complex(s))

    def log_weight(k, s):
        # (-kappa^2)^k q^{-2s^2-2sk-k^2+3k/2} (a,b,c,d;q)_{s+k} (a,b,c,d;q)_{-s}
        logv = (-2 * s * s - 2 * s * k - k * k + 1.5 * k) * q.log
        for v in vals:
            logv += log_q_pochhammer_general(v, q, s + k) + log_q_pochhammer_general(v, q, -s)
        return (-kap2) ** k, logv

    def builder(n, s):
        pre = q_pochhammer_multi([a * b, a * c, a * d], q, n) / a**n
        spec = SeriesSpec.terminating(
            n, [abcd * q.q ** (n - 1), a * q.pow(s), a * q.pow(-s)], [a * b, a * c, a * d], q, q.q
        )
        return pre * eval_terminating(spec)

    def leading(n):
        return 2**n * q_pochhammer(abcd * q.q ** (n - 1), q, n)

    def bn(n):
        return 2.0**-n * kappa(q) ** -n * q.pow(n * (3 * n - 5) / 4)

    def density(x):
        theta_ = math.acos(max(-1.0, min(1.0, float(x))))
        return aw_theta_density(theta_, (a, b, c, d), q) / math.sqrt(max(1e-300, 1 - float(x) ** 2))

    weight, ratio = _log_weights(log_weight, sigma)
    spec = FamilySpec(
        name="askey_wilson",
        params=_cparams(**names),
        q=q,
        lattice=lat,
        sigma=sigma,
        theta=theta,
        weight=weight,
        weight_ratio=ratio,
        poly=_series_poly(builder),
        leading_coeff=leading,
        B=bn,
        support=ContinuousSupport((-1.0, 1.0), density),
    )
    spec = _finish(spec)

    def closed(n):
        if n < 1:
            return CoeffTriple(None, None, None)
        qn = lambda v: q_number(v, q)  # noqa: E731
        e = (2 * qn(n) * (1 - abcd * q.q ** (n - 1)) ** 2 - qn(2) * qn(n + 1) * (1 - abcd * q.q**n) ** 2) / (
            4 * qn(n) * (1 - abcd * q.q ** (n - 1)) * (1 - abcd * q.q ** (2 * n - 1)) * (1 - abcd * q.q ** (2 * n))
        )
        shifted = askey_wilson(*(v * q.pow(0.5) for v in vals), q)
        cur = _extract_sum_product(spec, n)
        low = _extract_sum_product(shifted, n - 1)
        f = g = None
        if cur is not None and low is not None:
            a_s = a * q.pow(0.5)
            ac_n = a + 1 / a - 2 * cur[0]
            ac_sh = a_s + 1 / a_s - 2 * low[0]
            f = (1 - q.q) / 4 * (a - 1 / (a * q.q)) - 0.5 * (ac_n - qn(2) / 2 * ac_sh)
            if n >= 2 and low[1] is not None:
                prod_n = 4 * cur[1]
                prod_sh = 4 * low[1]
                g = (
                    (1 - abcd * q.q ** (n - 2))
                    * (1 - abcd * q.q ** (2 * n - 2))
                    * (1 - abcd * q.q ** (2 * n - 1))
                    / (4 * qn(n) * (1 - abcd * q.q ** (n - 1)) ** 2)
                    * (
                        2 * qn(n) * prod_n / (1 - abcd * q.q ** (n - 2)) ** 2
                        - qn(2) * qn(n - 1) * prod_sh / (1 - abcd * q.q ** (n - 1)) ** 2
                    )
                )
        return CoeffTriple(e, f, g)

    return replace(spec, structure_closed=closed)


def aw_theta_density(theta, params, q):
    """|(e^{2i theta};q)_inf / prod (a e^{i theta};q)_inf|^2."""
    q = as_qparam(q)
    z = cmath.exp(1j * theta)
    num = q_pochhammer_infinite(z * z, q)
    den = 1 + 0j
    for v in params:
        den *= q_pochhammer_infinite(v * z, q)
    return abs(num / den) ** 2


# -- q-Racah -------------------------------------------------------------------


def q_racah(alpha, beta, a, b, q):
    """q-Racah polynomials on x(s) = [s]_q [s+1]_q with support a, ..., b-1."""
    q = as_qparam(q)
    alpha, beta = complex(alpha), complex(beta)
    a_, b_ = float(complex(a).real), float(complex(b).real)
    width = b_ - a_
    if abs(width - round(width)) > 1e-12 or round(width) < 1:
        raise SupportError(f"b - a = {width} must be a positive integer")
    width = int(round(width))
    kap = kappa(q)
    lat = Lattice(q.pow(0.5) / kap**2, q.pow(-0.5) / kap**2, -q_number(2, q) / kap**2, q)
    S = alpha + beta
    qn = lambda v: q_number(v, q)  # noqa: E731

    def sigma(s):
        return qn(s - a_) * qn(s + b_) * qn(s + a_ - beta) * qn(b_ + alpha - s)

    def theta(s):
        return sigma(-complex(s) - 1)

    def d_n(n):
        num = q.pow(-n * (2 * a_ + S + n + 1) / 2) * q_pochhammer_multi(
            [q.pow(a_ - b_ + 1), q.pow(beta + 1), q.pow(a_ + b_ + alpha + 1)], q, n
        )
        return num / (kap ** (2 * n) * q_pochhammer(q.q, q, n))

    lower = [q.pow(a_ - b_ + 1), q.pow(beta + 1), q.pow(a_ + b_ + alpha + 1)]

    def builder(n, s):
        spec = SeriesSpec.terminating(
            n, [q.pow(S + n + 1), q.pow(a_ - s), q.pow(a_ + s + 1)], lower, q, q.q
        )
        return d_n(n) * eval_terminating(spec)

    def leading(n):
        out = 1 + 0j
        for j in range(n):
            out *= qn(S + n + 1 + j)
        return out / q_factorial(n, q)

    support = DiscreteSupport(a_, b_)
    weight, ratio = _pearson_weights(sigma, theta, a_, support)
    spec = FamilySpec(
        name="q_racah",
        params=_cparams(alpha=alpha, beta=beta, a=a_, b=b_),
        q=q,
        lattice=lat,
        sigma=sigma,
        theta=theta,
        weight=weight,
        weight_ratio=ratio,
        poly=_series_poly(builder, max_degree=width - 1),
        leading_coeff=leading,
        B=lambda n: 1.0,
        support=support,
        max_degree=width - 1,
        # past the support the polynomials no longer oscillate
        safe_start=b_ + 0.3,
        near_start=0.3,
    )
    spec = _finish(spec)
    spec = replace(spec, B=lambda n, _s=spec: rodrigues_constant(_s, n))

    def closed(n):
        if n < 1:
            return CoeffTriple(None, None, None)
        e = (2 * qn(n + S + 1) - qn(2) * qn(n + S + 2)) / (2 * qn(2 * n + S + 1) * qn(2 * n + S + 2)) * qn(n + 1)
        g = (
            qn(a_ + b_ + alpha + n) * qn(a_ + b_ - beta - n) * qn(alpha + n) * qn(beta + n)
            * qn(b_ - a_ + S + n) * qn(b_ - a_ - n)
            / (2 * qn(S + 2 * n) * qn(S + 2 * n + 1) * qn(n + S + 1))
            * (2 * qn(n + S + 1) - qn(2) * qn(n + S))
        )
        f = None
        try:
            shifted = q_racah(alpha + 1, beta + 1, a_ + 0.5, b_ - 0.5, q)
        except QLatticeError:
            shifted = None
        cur = _extract_sum_product(spec, n)
        low = _extract_sum_product(shifted, n) if shifted is not None and n <= shifted.max_degree - 1 else None
        if cur is not None and low is not None:
            f = cur[0] - qn(2) / 2 * low[0]
        return CoeffTriple(e, f, g)

    return replace(spec, structure_closed=closed)


# -- q-Meixner -----------------------------------------------------------------


def q_meixner(b, c, q):
    """q-Meixner polynomials on the q-linear lattice x(s) = q^s."""
    q = as_qparam(q)
    b, c = complex(b), complex(c)
    if c == 0:
        raise ParameterError("c must be nonzero")
    if _is_q_power(b * q.q, q) is not None and (b * q.q).real >= 1:
        raise ParameterError(f"bq={b * q.q} makes the series denominator vanish")
    lat = Lattice(1, 0, 0, q)

    def sigma(s):
        return c / q.q * (lat.x(s) - b * q.q)

    def theta(s):
        x = lat.x(s)
        return (x - 1) * (x + b * c)

    def builder(n, s):
        pre = q_pochhammer(b * q.q, q, n) * (-c) ** n / q.q ** (n * n)
        spec = SeriesSpec.terminating(n, [lat.x(s)], [b * q.q], q, -(q.q ** (n + 1)) / c)
        return pre * eval_terminating(spec)

    support = DiscreteSupport(-math.inf, 1.0)
    weight, ratio = _pearson_weights(sigma, theta, 0.0, support)
    spec = FamilySpec(
        name="q_meixner",
        params=_cparams(b=b, c=c),
        q=q,
        lattice=lat,
        sigma=sigma,
        theta=theta,
        weight=weight,
        weight_ratio=ratio,
        poly=_series_poly(builder),
        leading_coeff=lambda n: 1.0 + 0j,
        B=lambda n: 1.0,
        support=support,
        safe_start=-0.7,
        direction=-1,
    )
    spec = _finish(spec)
    spec = replace(spec, B=lambda n, _s=spec: rodrigues_constant(_s, n))
    qq = q.q
    qn = lambda v: q_number(v, q)  # noqa: E731

    def closed(n):
        if n < 1:
            return CoeffTriple(None, None, None)
        e = 1 - qn(2) * qn(n + 1) / (2 * qn(n)) * q.pow(-0.5)
        f = (
            (1 - qq) / 2
            + qq ** (-2 * n - 1) / 2 * (c - c * b * qq ** (n + 1)) * (2 - qq - qq**2)
            + qq ** (-2 * n) / 2 * (c + qq**n) * (2 - qq - qq**2 + qq**n - qq ** (n - 1))
        )
        g = (
            c * qq ** (-4 * n + 1) * (1 - b * qq**n) * (c + qq**n) / (2 * qn(n))
            * (2 * qn(n) * (1 - qq**n) - (qq + qq**2) * qn(n - 1) * (1 - qq ** (n - 1)))
        )
        return CoeffTriple(e, f, g)

    return replace(spec, structure_closed=closed)


# -- Al-Salam & Carlitz ------------------------------------------------------------


def _asc_closed(a, q):
    qq = q.q
    qn = lambda v: q_number(v, q)  # noqa: E731

    def closed(n):
        if n < 1:
            return CoeffTriple(None, None, None)
        e = 1 - (1 + qq) * qn(n + 1) / (2 * qq * qn(n))
        f = (1 + a) * qq**n * (1 - qn(2) / 2 * q.pow(-1.5))
        g = (
            a * q.pow(n - 2.5) / (2 * qn(n))
            * (2 * qn(n) * q.pow(1.5) * (qq**n - 1) - qn(2) * qn(n - 1) * (qq ** (n - 1) - 1))
        )
        return CoeffTriple(e, f, g)

    return closed


def _asc(a, q, name, direction, user_q=None):
    a = complex(a)
    if a == 0:
        raise ParameterError("a must be nonzero")
    lat = Lattice(1, 0, 0, q)

    def sigma(s):
        x = lat.x(s)
        return (x - 1) * (x - a)

    def theta(s):
        return a + 0j

    def builder(n, s):
        x = lat.x(s)
        pre = (-a) ** n * q.q ** (n * (n - 1) // 2)
        spec = SeriesSpec.terminating(n, [1 / x], [0], q, q.q * x / a)
        return pre * eval_terminating(spec)

    weight, ratio = _pearson_weights(sigma, theta, 0.0, None)
    spec = FamilySpec(
        name=name,
        params=_cparams(a=a),
        q=q,
        lattice=lat,
        sigma=sigma,
        theta=theta,
        weight=weight,
        weight_ratio=ratio,
        poly=_series_poly(builder),
        leading_coeff=lambda n: 1.0 + 0j,
        B=lambda n: 1.0,
        support=None,
        structure_closed=_asc_closed(a, q),
        safe_start=0.7 * direction,
        direction=direction,
        user_q=user_q,
    )
    spec = _finish(spec)
    return replace(spec, B=lambda n, _s=spec: rodrigues_constant(_s, n))


def al_salam_carlitz_1(a, q):
    """Al-Salam & Carlitz I polynomials U_n^{(a)} on x(s) = q^s."""
    return _asc(a, as_qparam(q), "al_salam_carlitz_1", -1)


def al_salam_carlitz_2(a, q):
    """Al-Salam & Carlitz II: V_n^{(a)}(x; q) = U_n^{(a)}(x; 1/q)."""
    q = as_qparam(q)
    # x = q^{-s} here, so the large-x side is s > 0
    return _asc(a, q.inverse(), "al_salam_carlitz_2", 1, user_q=q.q)


FAMILIES = {
    "askey_wilson": (askey_wilson, ("a", "b", "c", "d")),
    "q_racah": (q_racah, ("alpha", "beta", "a", "b")),
    "q_meixner": (q_meixner, ("b", "c")),
    "al_salam_carlitz_1": (al_salam_carlitz_1, ("a",)),
    "al_salam_carlitz_2": (al_salam_carlitz_2, ("a",)),
}

DEFAULT_PARAMS = {
    "askey_wilson": {"a": 0.15, "b": 0.35, "c": 0.45, "d": 0.65},
    "q_racah": {"alpha": 0.2, "beta": 0.1, "a": 0, "b": 10},
    "q_meixner": {"b": 0.6, "c": 0.8},
    "al_salam_carlitz_1": {"a": 0.3},
    "al_salam_carlitz_2": {"a": 0.3},
}


def make_family(name, params, q):
    """Build a family by name from a parameter mapping."""
    if name not in FAMILIES:
        raise ParameterError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}")
    ctor, keys = FAMILIES[name]
    missing = [k for k in keys if k not in params]
    extra = [k for k in params if k not in keys]
    if missing or extra:
        raise ParameterError(f"{name} needs parameters {list(keys)}; missing {missing}, unexpected {extra}")
    return ctor(*(params[k] for k in keys), q)
