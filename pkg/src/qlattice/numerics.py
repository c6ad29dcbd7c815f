"""Interpolation and generic-point linear solves with held-out validation."""

from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, InconsistencyError, SolverError

COND_LIMIT = 1e10
MAX_RESAMPLE = 5


class NewtonPoly:
    """Interpolating polynomial in Newton form."""

    def __init__(self, nodes, values):
        nodes = [complex(x) for x in nodes]
        coef = [complex(v) for v in values]
        n = len(nodes)
        if len(set(nodes)) != n:
            raise DegeneracyError("interpolation nodes must be distinct")
        for j in range(1, n):
            for i in range(n - 1, j - 1, -1):
                coef[i] = (coef[i] - coef[i - 1]) / (nodes[i] - nodes[i - j])
        self.nodes = nodes
        self.coef = coef

    @property
    def degree_bound(self):
        return len(self.nodes) - 1

    def leading(self):
        """Coefficient of x^{len(nodes)-1}."""
        return self.coef[-1]

    def __call__(self, x):
        x = complex(x)
        out = self.coef[-1]
        for c, node in zip(self.coef[-2::-1], self.nodes[-2::-1]):
            out = out * (x - node) + c
        return out


@dataclass
class PolyFit:
    poly: NewtonPoly
    residual: float


def fit_polynomial(xs, ys, degree, *, held_out=10, smallest_first=False):
    """Fit degree ``degree`` through the first degree+1 samples; score the rest.

    The residual is max |y - P(x)| / max(1, |y|) over up to ``held_out``
    remaining samples.  ``smallest_first`` reorders by |x| first, which keeps
    the Newton form from extrapolating downward when x spans many decades.
    """
    k = degree + 1
    if len(xs) < k + held_out:
        raise DegeneracyError(f"need {k + held_out} samples, got {len(xs)}")
    if smallest_first:
        order = sorted(range(len(xs)), key=lambda i: abs(complex(xs[i])))
        xs = [xs[i] for i in order]
        ys = [ys[i] for i in order]
    poly = NewtonPoly(xs[:k], ys[:k])
    resid = 0.0
    for x, y in list(zip(xs, ys))[k:k + held_out]:
        resid = max(resid, abs(y - poly(x)) / max(1.0, abs(y)))
    return PolyFit(poly, resid)


@dataclass
class SolveResult:
    coeffs: list
    residual: float
    indices: list
    attempts: int
    condition: float


def select_indices(count, k, start):
    """k indices spread over range(count) with a fixed stride, offset by start."""
    stride = max(1, count // k)
    return [(start + j * stride) % count for j in range(k)]


def solve_generic(columns, rhs, k, *, tol, start=0, min_held_out=10):
    """Solve sum_j c_j columns[j][i] = rhs[i] at k strided points.

    ``columns`` is a list of k value lists over the same grid as ``rhs``.  The
    system is column-scaled; selections with condition number above 1e10 are
    resampled by shifting the stride offset (up to five times).  The solution
    is then validated at the remaining points, relative to the largest term
    at each point.
    """
    count = len(rhs)
    if len(columns) != k:
        raise ValueError("need one column per unknown")
    if count - k < min_held_out:
        raise SolverError(f"grid of {count} points leaves fewer than {min_held_out} held-out points")
    cols = np.array(columns, dtype=complex).T
    b = np.array(rhs, dtype=complex)
    last_cond = np.inf
    for attempt in range(MAX_RESAMPLE + 1):
        idx = select_indices(count, k, start + attempt)
        if len(set(idx)) < k:
            continue
        a = cols[idx]
        if not np.all(np.isfinite(a)):
            continue
        rows = np.maximum(np.max(np.abs(a), axis=1), np.abs(b[idx]))
        if np.any(rows == 0):
            continue
        a = a / rows[:, None]
        scale = np.max(np.abs(a), axis=0)
        if np.any(scale == 0):
            continue
        a_scaled = a / scale
        cond = float(np.linalg.cond(a_scaled))
        last_cond = cond
        if not np.isfinite(cond) or cond > COND_LIMIT:
            continue
        c = np.linalg.solve(a_scaled, b[idx] / rows) / scale
        rest = [i for i in range(count) if i not in idx]
        terms = cols[rest] * c
        fitted = terms.sum(axis=1)
        mag = np.maximum(np.abs(b[rest]), np.max(np.abs(terms), axis=1))
        mag = np.maximum(mag, 1e-300)
        resid = float(np.max(np.abs(b[rest] - fitted) / mag))
        if not resid < tol:
            raise InconsistencyError(
                f"held-out residual {resid:.3e} exceeds {tol:.1e}", residual=resid
            )
        return SolveResult([complex(v) for v in c], resid, idx, attempt + 1, cond)
    raise SolverError(f"system ill-conditioned after {MAX_RESAMPLE} resamples (cond {last_cond:.3e})")
