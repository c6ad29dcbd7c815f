"""Scalar q-calculus on q-quadratic lattices.

Everything here works on complex doubles.  Non-integer powers of q use the
principal branch, ``q**t = exp(t * log q)``.  Functions of ``s`` are plain
callables taking a complex scalar.
"""

import cmath
import math
import os
from dataclasses import dataclass

from .errors import ConvergenceError, DomainError, ParameterError, PoleError, StepError

N_MAX_ROOT = 64
DEFAULT_TOL = 1e-8
INFINITE_CAP = 100_000


def default_tolerance():
    """Library default tolerance, overridable through ``QLATTICE_TOL``."""
    raw = os.environ.get("QLATTICE_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise ParameterError(f"QLATTICE_TOL={raw!r} is not a number") from None
    if not (tol > 0 and math.isfinite(tol)):
        raise ParameterError(f"QLATTICE_TOL={raw!r} must be positive and finite")
    return tol


@dataclass(frozen=True)
class QParam:
    """The base q of all q-analogues.

    Real q in (0, 1) is accepted by default.  Anything else (q > 1, complex q)
    needs ``allow_any=True``; zero and roots of unity up to order 64 are always
    rejected.
    """

    q: complex
    allow_any: bool = False

    def __post_init__(self):
        try:
            q = complex(self.q)
        except (TypeError, ValueError):
            raise ParameterError(f"q={self.q!r} is not a number") from None
        if not (math.isfinite(q.real) and math.isfinite(q.imag)):
            raise ParameterError("q must be finite")
        if q == 0:
            raise ParameterError("q must be nonzero")
        for n in range(1, N_MAX_ROOT + 1):
            if abs(q**n - 1) < 1e-12:
                raise ParameterError(f"q={q} is (numerically) a root of unity of order {n}")
        if not self.allow_any and not (q.imag == 0 and 0 < q.real < 1):
            raise ParameterError(f"q={q} outside 0<q<1; pass allow_any=True to override")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "_log", cmath.log(q))

    @property
    def log(self):
        return self._log

    def pow(self, t):
        """Principal-branch power q**t."""
        return cmath.exp(complex(t) * self._log)

    def inverse(self):
        return QParam(1 / self.q, allow_any=True)


def as_qparam(q):
    """Coerce a bare number to QParam (default validation)."""
    return q if isinstance(q, QParam) else QParam(q)


def q_number(s, q):
    """Symmetric q-number [s]_q."""
    q = as_qparam(q)
    num = q.pow(s / 2) - q.pow(-s / 2)
    return num / (q.pow(0.5) - q.pow(-0.5))


def alpha_q(s, q):
    q = as_qparam(q)
    return (q.pow(s / 2) + q.pow(-s / 2)) / 2


def kappa(q):
    """kappa_q = q^{1/2} - q^{-1/2}."""
    q = as_qparam(q)
    return q.pow(0.5) - q.pow(-0.5)


def q_factorial(n, q):
    """[n]_q! with the symmetric q-numbers."""
    out = 1 + 0j
    for j in range(1, n + 1):
        out *= q_number(j, q)
    return out


def q_pochhammer(a, q, k):
    """Finite (a;q)_k for any integer k.

    For k < 0 this is 1 / prod_{j=1}^{|k|} (1 - a q^{-j}).
    """
    q = as_qparam(q)
    a = complex(a)
    k = int(k)
    out = 1 + 0j
    if k >= 0:
        for j in range(k):
            out *= 1 - a * q.q**j
        return out
    for j in range(1, -k + 1):
        factor = 1 - a * q.q ** (-j)
        if factor == 0 or abs(factor) < 1e-300:
            raise PoleError(f"(a;q)_{k} has a vanishing factor at j={j}", index=j)
        out /= factor
    return out


def q_pochhammer_multi(values, q, k):
    """(a1, a2, ...; q)_k as a product of single symbols."""
    out = 1 + 0j
    for a in values:
        out *= q_pochhammer(a, q, k)
    return out


def q_pochhammer_infinite(a, q, tol=1e-17, *, cap=INFINITE_CAP, full_output=False):
    """Truncated (a;q)_inf.

    Multiplies factors (1 - a q^k) until |a q^k| < tol with k >= 8.  With
    ``full_output`` the number of factors used is returned as well.
    """
    q = as_qparam(q)
    if abs(q.q) >= 1:
        raise DomainError("(a;q)_inf needs |q| < 1")
    a = complex(a)
    out = 1 + 0j
    term = a
    k = 0
    while not (abs(term) < tol and k >= 8):
        if k >= cap:
            raise ConvergenceError(f"(a;q)_inf did not converge within {cap} factors")
        out *= 1 - term
        term *= q.q
        k += 1
    return (out, k) if full_output else out


def _is_integer(s):
    s = complex(s)
    return s.imag == 0 and s.real == round(s.real)


def log_q_pochhammer_general(a, q, s, tol=1e-17):
    """log (a;q)_s for complex order s (sum of principal logs of factors).

    Integer orders use the finite products; otherwise
    (a;q)_s = (a;q)_inf / (a q^s; q)_inf, which needs |q| < 1.
    """
    q = as_qparam(q)
    a = complex(a)
    if _is_integer(s):
        k = int(round(complex(s).real))
        out = 0j
        if k >= 0:
            for j in range(k):
                out += _log_factor(1 - a * q.q**j, j)
        else:
            for j in range(1, -k + 1):
                out -= _log_factor(1 - a * q.q ** (-j), j)
        return out
    if abs(q.q) >= 1:
        raise DomainError("non-integer order (a;q)_s needs |q| < 1")
    return _log_infinite(a, q, tol) - _log_infinite(a * q.pow(s), q, tol)


def q_pochhammer_general(a, q, s, tol=1e-17):
    """(a;q)_s for complex order s; see log_q_pochhammer_general."""
    if _is_integer(s):
        return q_pochhammer(a, q, int(round(complex(s).real)))
    return cmath.exp(log_q_pochhammer_general(a, q, s, tol))


def _log_factor(factor, j):
    if factor == 0:
        raise PoleError(f"vanishing Pochhammer factor at j={j}", index=j)
    return cmath.log(factor)


def _log_infinite(a, q, tol):
    out = 0j
    term = a
    k = 0
    while not (abs(term) < tol and k >= 8):
        if k >= INFINITE_CAP:
            raise ConvergenceError("infinite product did not converge")
        out += _log_factor(1 - term, k)
        term *= q.q
        k += 1
    return out


@dataclass(frozen=True)
class Lattice:
    """x(s) = c1 q^s + c2 q^{-s} + c3, with shifted copies x_m(s) = x(s + m/2)."""

    c1: complex
    c2: complex
    c3: complex
    q: QParam

    def __post_init__(self):
        c1, c2, c3 = complex(self.c1), complex(self.c2), complex(self.c3)
        if c1 == 0 and c2 == 0:
            raise ParameterError("lattice needs c1 != 0 or c2 != 0")
        object.__setattr__(self, "c1", c1)
        object.__setattr__(self, "c2", c2)
        object.__setattr__(self, "c3", c3)
        object.__setattr__(self, "q", as_qparam(self.q))

    def x(self, s, m=0):
        t = complex(s) + m / 2
        out = self.c3
        if self.c1:
            out += self.c1 * self.q.pow(t)
        if self.c2:
            out += self.c2 * self.q.pow(-t)
        return out

    def __call__(self, s, m=0):
        return self.x(s, m)

    def s_of_x(self, x):
        """One preimage s with x(s) = x (principal logarithm)."""
        x = complex(x)
        if self.c2 == 0:
            z = (x - self.c3) / self.c1
        elif self.c1 == 0:
            z = self.c2 / (x - self.c3)
        else:
            # c1 z^2 + (c3 - x) z + c2 = 0 with z = q^s
            b = self.c3 - x
            root = cmath.sqrt(b * b - 4 * self.c1 * self.c2)
            z = (-b + root) / (2 * self.c1)
            if z == 0:
                z = (-b - root) / (2 * self.c1)
        if z == 0:
            raise DomainError(f"x={x} is not attained by the lattice")
        return cmath.log(z) / self.q.log


@dataclass(frozen=True)
class GridWindow:
    """Unit-step window s0, s0+1, ..., s0+count-1."""

    s0: complex
    count: int

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 1:
            raise ParameterError("grid count must be a positive integer")
        object.__setattr__(self, "s0", complex(self.s0))
        object.__setattr__(self, "count", int(self.count))

    def points(self):
        return [self.s0 + j for j in range(self.count)]

    def __iter__(self):
        return iter(self.points())

    def __len__(self):
        return self.count


def lattice_x(lat, m, s):
    return lat.x(s, m)


def _step(lat, k, a, b, stage=None):
    d = lat.x(b, k) - lat.x(a, k)
    scale = max(abs(lat.x(a, k)), abs(lat.x(b, k)), 1e-300)
    if d == 0 or abs(d) < 1e-14 * scale:
        where = "" if stage is None else f" at stage {stage}"
        raise StepError(f"degenerate lattice step x_{k}({b}) - x_{k}({a}){where}", stage=stage)
    return d


def delta_div(f, lat, k, s):
    """(f(s+1) - f(s)) / (x_k(s+1) - x_k(s))."""
    s = complex(s)
    return (f(s + 1) - f(s)) / _step(lat, k, s, s + 1)


def nabla_div(f, lat, k, s):
    """(f(s) - f(s-1)) / (x_k(s) - x_k(s-1))."""
    s = complex(s)
    return (f(s) - f(s - 1)) / _step(lat, k, s - 1, s)


def delta_chain(f, lat, m, s):
    """Delta^{(m)} f(s): divided differences on x_0, x_1, ..., x_{m-1}, x_0 first."""
    if m < 1:
        raise ParameterError("delta_chain needs m >= 1")
    s = complex(s)
    vals = [f(s + j) for j in range(m + 1)]
    for stage in range(m):
        vals = [
            (vals[j + 1] - vals[j]) / _step(lat, stage, s + j, s + j + 1, stage)
            for j in range(len(vals) - 1)
        ]
    return vals[0]


def nabla_chain(f, lat, n, k, s):
    """(nabla/nabla x_{k+1}) ... (nabla/nabla x_n) f at s, the x_n factor first."""
    if not 0 <= k < n:
        raise ParameterError("nabla_chain needs 0 <= k < n")
    s = complex(s)
    length = n - k
    # vals[j] holds the current stage evaluated at s - j
    vals = [f(s - j) for j in range(length + 1)]
    for stage, level in enumerate(range(n, k, -1)):
        vals = [
            (vals[j] - vals[j + 1]) / _step(lat, level, s - j - 1, s - j, stage)
            for j in range(len(vals) - 1)
        ]
    return vals[0]


def mean_op(f, s):
    """Forward mean (f(s+1) + f(s)) / 2."""
    s = complex(s)
    return (f(s + 1) + f(s)) / 2


def relative_error(residual, *terms, floor=1.0):
    """|residual| / max(floor, |terms|...)."""
    scale = max([floor] + [abs(t) for t in terms])
    return abs(residual) / scale
