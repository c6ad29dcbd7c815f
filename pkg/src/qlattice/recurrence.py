"""Generic-point solves for three-term and structure relations.

Both solvers work on any ``poly(n, s)`` callable and a :class:`Lattice`; they
do not depend on a particular family.
"""

from .lattice import delta_div
from .numerics import solve_generic


def order_points(lattice, points):
    """Grid points sorted by |x(s)|, so strided picks include the small-|x| end."""
    return sorted((complex(s) for s in points), key=lambda s: (abs(lattice.x(s)), s.real, s.imag))


def ttrr_solve(poly, lattice, n, points, *, tol, start=0):
    """Solve x p_n = alpha p_{n+1} + beta p_n + gamma p_{n-1} on ``points``.

    For n = 0 the gamma slot is dropped and a 2x2 system is solved.
    """
    k = 2 if n == 0 else 3
    points = order_points(lattice, points)
    columns = [[poly(n + 1 - j, s) for s in points] for j in range(k)]
    rhs = [lattice.x(s) * poly(n, s) for s in points]
    return solve_generic(columns, rhs, k, tol=tol, start=start)


def structure_unknowns(n):
    # Delta^{(1)} p_0 vanishes identically, so n = 0 and n = 1 lose slots
    return 1 if n == 0 else (2 if n == 1 else 3)


def structure_solve(poly, lattice, n, points, *, tol, start=0):
    """Solve M p_n = e D p_{n+1} + f D p_n + g D p_{n-1}, D = Delta^{(1)}."""
    k = structure_unknowns(n)
    points = order_points(lattice, points)
    columns = [
        [delta_div(lambda t, m=n + 1 - j: poly(m, t), lattice, 0, s) for s in points]
        for j in range(k)
    ]
    rhs = [(poly(n, s + 1) + poly(n, s)) / 2 for s in points]
    return solve_generic(columns, rhs, k, tol=tol, start=start)
