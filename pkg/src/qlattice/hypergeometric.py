"""Basic hypergeometric series r-phi-s.

Terms follow the usual normalization

    (a_1,...,a_r; q)_k / ((b_1,...,b_s; q)_k (q; q)_k) * z^k * [(-1)^k q^{k(k-1)/2}]^{1+s-r}

and are accumulated with ``math.fsum`` on real and imaginary parts.  When the
terms cancel badly (sum of magnitudes far above the magnitude of the sum) a
terminating series is re-summed with mpmath, forming q^{-n} from q at the
working precision so that termination stays exact.
"""

import math
from dataclasses import dataclass, field

import mpmath

from .errors import ConvergenceError, DomainError, ParameterError, PoleError
from .lattice import as_qparam

TRUNCATION_CAP = 10_000
# re-sum when more than about 3 digits are lost to cancellation
CANCELLATION_LIMIT = 1e3


def _csum(terms):
    return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))


def _ratio(upper, lower, q, z, k, extra):
    """term_{k+1} / term_k."""
    qk = q**k
    num = z
    for a in upper:
        num *= 1 - a * qk
    den = 1 - qk * q
    for b in lower:
        f = 1 - b * qk
        if abs(f) < 1e-13:
            raise PoleError(f"lower parameter {b} gives a pole at k={k + 1}", index=k + 1)
        den *= f
    if extra:
        num *= (-qk) ** extra
    return num / den


@dataclass(frozen=True)
class SeriesSpec:
    """A terminating series with q^{-degree} as its first upper parameter.

    Build it with :meth:`terminating`; the terminating parameter is inserted
    from ``degree`` rather than detected numerically.
    """

    upper: tuple
    lower: tuple
    q: object
    z: complex
    degree: int
    _rest: tuple = field(default=(), repr=False, compare=False)

    @classmethod
    def terminating(cls, degree, upper, lower, q, z):
        """Series of order ``degree``; ``upper`` lists the non-terminating numerators."""
        if int(degree) != degree or degree < 0:
            raise ParameterError("degree must be a nonnegative integer")
        q = as_qparam(q)
        degree = int(degree)
        rest = tuple(complex(a) for a in upper)
        full = (q.q ** (-degree),) + rest
        return cls(full, tuple(complex(b) for b in lower), q, complex(z), degree, rest)

    def terms(self):
        q = self.q.q
        r, s = len(self.upper), len(self.lower)
        extra = 1 + s - r
        out = [1 + 0j]
        term = 1 + 0j
        for k in range(self.degree):
            term = term * _ratio(self.upper, self.lower, q, self.z, k, extra)
            out.append(term)
        return out


def cancellation(terms):
    """sum |t_k| / |sum t_k|, the amplification of per-term rounding."""
    total = abs(_csum(terms))
    mags = math.fsum(abs(t) for t in terms)
    return math.inf if total == 0 else mags / total


def _resum(spec, digits):
    with mpmath.workdps(digits):
        q = mpmath.mpc(spec.q.q)
        upper = [q ** (-spec.degree)] + [mpmath.mpc(a) for a in spec._rest]
        lower = [mpmath.mpc(b) for b in spec.lower]
        z = mpmath.mpc(spec.z)
        extra = 1 + len(lower) - len(upper)
        term = mpmath.mpc(1)
        total = mpmath.mpc(1)
        for k in range(spec.degree):
            qk = q**k
            num = z
            for a in upper:
                num *= 1 - a * qk
            den = 1 - qk * q
            for b in lower:
                den *= 1 - b * qk
            if extra:
                num *= (-qk) ** extra
            term = term * num / den
            total += term
        return complex(total)


def eval_terminating(spec):
    """Sum of the terminating series described by ``spec``."""
    terms = spec.terms()
    value = _csum(terms)
    cond = cancellation(terms)
    if cond > CANCELLATION_LIMIT:
        digits = 30 + int(math.log10(cond)) if math.isfinite(cond) else 60
        value = _resum(spec, digits)
    return value


def eval_truncated(upper, lower, q, z, tol=1e-16, *, cap=TRUNCATION_CAP, full_output=False):
    """Non-terminating r-phi-s summed until three consecutive small terms.

    A term is small when |term| < tol * |partial sum|.  Returns the sum, or
    ``(sum, n_terms)`` with ``full_output``.
    """
    q = as_qparam(q)
    if abs(q.q) >= 1:
        raise DomainError("eval_truncated needs |q| < 1")
    upper = [complex(a) for a in upper]
    lower = [complex(b) for b in lower]
    z = complex(z)
    extra = 1 + len(lower) - len(upper)
    terms = [1 + 0j]
    term = 1 + 0j
    running = 1 + 0j
    small = 0
    k = 0
    while small < 3:
        if k >= cap:
            raise ConvergenceError(f"series did not converge within {cap} terms")
        term = term * _ratio(upper, lower, q.q, z, k, extra)
        terms.append(term)
        k += 1
        running += term
        small = small + 1 if abs(term) <= tol * abs(running) else 0
    total = _csum(terms)
    return (total, len(terms)) if full_output else total
