"""Composite Gauss-Legendre quadrature over subintervals of (0, 1).

The integrands here are either polynomials against piecewise-linear
densities (where a single rule of sufficient order is exact) or smooth
transforms against Beta densities that may blow up at an endpoint.  Cells
are therefore graded dyadically toward 0 and 1 and bisected adaptively
until two rule orders agree.
"""

import numpy as np


class QuadratureError(RuntimeError):
    """Quadrature failed to reach the requested tolerance."""

    def __init__(self, message, achieved):
        super().__init__(f"{message}; achieved tolerance {achieved:.3e}")
        self.achieved = achieved


_RULES = {}


def _rule(order):
    """Gauss-Legendre nodes/weights mapped to [0, 1], cached by order."""
    cached = _RULES.get(order)
    if cached is None:
        x, w = np.polynomial.legendre.leggauss(order)
        cached = (0.5 * (x + 1.0), 0.5 * w)
        _RULES[order] = cached
    return cached


def _cell_integral(f, lo, hi, order):
    x, w = _rule(order)
    return (hi - lo) * np.dot(f(lo + (hi - lo) * x), w)


def dyadic_cells(left, right, inner=8):
    """Cells on [left, right] graded dyadically toward both endpoints.

    `left` and `right` are the distances at which the grading stops, i.e.
    the integration runs on [left, 1 - right]; mass closer to an endpoint
    must be accounted for (or bounded) by the caller.
    """
    cells = []
    lo = left
    while lo < 0.25:
        hi = min(2.0 * lo, 0.25)
        cells.append((lo, hi))
        lo = hi
    mids = np.linspace(0.25, 0.75, inner + 1)
    cells.extend(zip(mids[:-1], mids[1:]))
    hi = 1.0 - right
    while hi > 0.75:
        lo = max(1.0 - 2.0 * (1.0 - hi), 0.75)
        cells.append((lo, hi))
        hi = lo
    cells.sort()
    return cells


def integrate_cells(f, cells, tol=1e-10, order=24, max_level=14):
    """Integrate ``f`` over ``cells`` with adaptive bisection.

    Each cell is evaluated at two rule orders; cells whose estimates
    disagree by more than their share of ``tol`` are bisected, up to
    ``max_level`` rounds.  Raises :class:`QuadratureError` with the
    achieved tolerance if the budget is exhausted.  Complex-valued
    integrands are supported.
    """
    order_hi = order + max(8, order // 2)
    total = 0.0
    stack = [(lo, hi, 0) for lo, hi in cells]
    leftovers = 0.0
    while stack:
        lo, hi, level = stack.pop()
        coarse = _cell_integral(f, lo, hi, order)
        fine = _cell_integral(f, lo, hi, order_hi)
        err = abs(fine - coarse)
        if err <= tol * max(hi - lo, 1e-3) or hi - lo < 1e-15:
            total += fine
        elif level >= max_level:
            total += fine
            leftovers += err
        else:
            mid = 0.5 * (lo + hi)
            stack.append((lo, mid, level + 1))
            stack.append((mid, hi, level + 1))
    if leftovers > tol:
        raise QuadratureError("adaptive quadrature did not converge", leftovers)
    return total
