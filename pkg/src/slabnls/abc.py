"""Local absorbing boundary conditions and their discrete rows.

Every condition is first written as a linear differential operator, stored
as a map ``{(order_x, order_y, order_t): coefficient}``. Coefficients may be
arrays with one entry per boundary row, which is how parameter profiles
along a 2D edge enter.

A single dictionary turns operators into rows that couple the unknowns
``psi^{n+1}`` near the boundary to the split-step values ``psi*``:

* time order 0 acts on the average ``(psi^{n+1} + psi*) / 2``, time order 1
  on the difference quotient ``(psi^{n+1} - psi*) / dt``;
* a direction normal to the boundary uses the two outermost layers, with
  ``D^-`` for first derivatives and the backward sum ``S^-`` for order 0
  (higher orders in ``fj`` widen the stencil, see :func:`normal_weights`);
* the tangential direction along an edge uses the point itself for order 0
  and ``D^+ D^-`` for order 2.

Conditions on boundaries facing the negative direction are the same
formulas with the expansion center negated.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .grid import ConfigurationError


class ParameterError(ValueError):
    pass


class UnsupportedOrder(ValueError):
    pass


@dataclass
class BoundaryRows:
    """A batch of linear rows, one per boundary grid point.

    ``cols[r]`` and ``coeffs[r]`` hold the flat grid ids and the
    coefficients multiplying ``psi^{n+1}`` for the row assigned to grid
    point ``row_ids[r]``; ``rhs[r]`` collects the ``psi*`` terms.
    """

    row_ids: np.ndarray
    cols: np.ndarray
    coeffs: np.ndarray
    rhs: np.ndarray

    def __len__(self):
        return len(self.row_ids)

    def residual(self, psi_next):
        """``A psi_next - rhs`` restricted to these rows."""
        flat = np.asarray(psi_next).ravel()
        return np.sum(self.coeffs * flat[self.cols], axis=1) - self.rhs


SIDES_1D = ("left", "right")
EDGES = ("east", "west", "north", "south")
CORNERS = ("ne", "nw", "se", "sw")


def _sign(side):
    if side in ("right", "east", "north"):
        return 1.0
    if side in ("left", "west", "south"):
        return -1.0
    raise ValueError(f"unknown side {side!r}")


# -- continuous operators ---------------------------------------------------

def abc11_operator(center, V=0.0):
    """ABC(1,1) in 1D, Pade expansion of ``k**2`` about ``k = center``.

    ``-psi_xt + i(3c^2 - V) psi_x + (c^3 - 3cV) psi + 3ic psi_t``
    """
    c = np.asarray(center, dtype=float)
    return {
        (1, 0, 1): -1.0,
        (1, 0, 0): 1j * (3 * c**2 - V),
        (0, 0, 0): c**3 - 3 * c * V,
        (0, 0, 1): 3j * c,
    }


def abc10_operator(alpha1, alpha2, V=0.0, sign=1.0):
    """Linear-interpolation condition ``i(a1+a2) psi_x + i psi_t - V psi + a1 a2 psi``.

    ``sign=-1`` negates both parameters (left boundary).
    """
    if not (np.all(np.asarray(alpha1) > 0) and np.all(np.asarray(alpha2) > 0)):
        raise ParameterError("kinetic energy parameters must be positive")
    a1, a2 = sign * np.asarray(alpha1, float), sign * np.asarray(alpha2, float)
    return {
        (1, 0, 0): 1j * (a1 + a2),
        (0, 0, 1): 1j + 0 * a1,
        (0, 0, 0): a1 * a2 - V,
    }


def fj_operator(velocities, sign=1.0):
    """Product ``prod_l (i d/dx + sign * C_l / 2)`` expanded in powers of ``d/dx``."""
    velocities = [float(c) for c in velocities]
    if not velocities:
        raise ParameterError("at least one group velocity is required")
    if len(velocities) > 3:
        raise UnsupportedOrder(f"order {len(velocities)} > 3 is not supported")
    if not all(np.isfinite(velocities)):
        raise ParameterError("group velocities must be finite")
    # coefficients of the polynomial in z = i d/dx, lowest power first
    poly = np.polynomial.polynomial.polyfromroots([-sign * c / 2 for c in velocities])
    return {(m, 0, 0): complex(a) * 1j**m for m, a in enumerate(poly) if a != 0}


def abc11_edge_operator(edge, center, V=0.0):
    """ABC(1,1) on a straight edge of a rectangle.

    ``center`` is the positive expansion point (``xi0`` for east/west,
    ``eta0`` for north/south); the sign follows from ``edge``. For the
    east edge::

        i psi_xyy - psi_xt + i(3c^2 - V) psi_x + (c^3 - 3cV) psi
            + 3c psi_yy + 3ic psi_t
    """
    c = _sign(edge) * np.asarray(center, dtype=float)
    normal = 1j * (3 * c**2 - V)
    const = c**3 - 3 * c * V
    if edge in ("east", "west"):
        return {(1, 2, 0): 1j, (1, 0, 1): -1.0, (1, 0, 0): normal,
                (0, 0, 0): const, (0, 2, 0): 3 * c, (0, 0, 1): 3j * c}
    return {(2, 1, 0): 1j, (0, 1, 1): -1.0, (0, 1, 0): normal,
            (0, 0, 0): const, (2, 0, 0): 3 * c, (0, 0, 1): 3j * c}


_CORNER_SIGNS = {"ne": (1.0, 1.0), "nw": (-1.0, 1.0), "se": (1.0, -1.0), "sw": (-1.0, -1.0)}


def abc11_corner_operator(corner, xi0, eta0, V=0.0):
    """ABC(1,1) at a corner, Pade in both directions about ``(+-xi0, +-eta0)``."""
    sx, sy = _CORNER_SIGNS[corner]
    a = sx * np.asarray(xi0, dtype=float)
    b = sy * np.asarray(eta0, dtype=float)
    return {
        (1, 1, 1): 1j,
        (0, 1, 1): 3 * a,
        (1, 0, 1): 3 * b,
        (1, 1, 0): 3 * a**2 + 3 * b**2 - V,
        (0, 0, 1): -9j * a * b,
        (0, 1, 0): -1j * (a**3 + 9 * a * b**2 - 3 * a * V),
        (1, 0, 0): -1j * (b**3 + 9 * a**2 * b - 3 * b * V),
        (0, 0, 0): 9 * a * b * V - 3 * a**3 * b - 3 * a * b**3,
    }


def operator_symbol(op, xi, eta=0.0, omega=0.0):
    """Operator applied to ``exp(i(xi x + eta y - omega t))``, divided by that wave."""
    total = 0.0
    for (ax, ay, at), c in op.items():
        total = total + c * (1j * xi) ** ax * (1j * eta) ** ay * (-1j * omega) ** at
    return total


# -- discretization ---------------------------------------------------------

def normal_weights(max_order, h):
    """Derivative weights at the center of ``max_order + 1`` equispaced points.

    For two points this is the backward sum (order 0) and backward
    difference (order 1) evaluated at the cell midpoint.
    """
    n = max_order + 1
    s = np.arange(n) - (n - 1) / 2.0
    vander = np.vander(s, increasing=True).T
    out = {}
    for m in range(n):
        rhs = np.zeros(n)
        rhs[m] = factorial(m)
        out[m] = np.linalg.solve(vander, rhs) / h**m
    return out


def tangential_weights(h):
    """Three-point weights centered on the row's own point."""
    return {0: np.array([0.0, 1.0, 0.0]),
            1: np.array([-0.5, 0.0, 0.5]) / h,
            2: np.array([1.0, -2.0, 1.0]) / h**2}


def _check_steps(dt, *steps):
    if not dt > 0 or not all(h > 0 for h in steps):
        raise ConfigurationError("dt, dx and dy must be positive")


def discretize(op, xw, yw, dt, cols, psi_star_flat, row_ids):
    """Rows for ``op`` with stencil weights ``xw``/``yw`` keyed by derivative order.

    ``cols`` has shape ``(nrows, ny_st, nx_st)``; weights are laid out the
    same way, y outer and x inner.
    """
    nrows = len(row_ids)
    shape = (nrows, len(next(iter(yw.values()))), len(next(iter(xw.values()))))
    w_time = np.zeros(shape, dtype=complex)
    w_avg = np.zeros(shape, dtype=complex)
    for (ax, ay, at), c in op.items():
        c = np.broadcast_to(np.asarray(c, dtype=complex), (nrows,))
        w = c[:, None, None] * np.outer(yw[ay], xw[ax])[None]
        if at == 0:
            w_avg += w
        elif at == 1:
            w_time += w
        else:
            raise ValueError("time derivatives above first order are not supported")
    star = psi_star_flat[cols]
    coeffs = w_time / dt + w_avg / 2
    rhs = np.sum((w_time / dt - w_avg / 2) * star, axis=(1, 2))
    return BoundaryRows(np.asarray(row_ids), cols.reshape(nrows, -1),
                        coeffs.reshape(nrows, -1), rhs)


def _rows_1d(op, side, dx, dt, psi_star, width):
    psi_star = np.asarray(psi_star, dtype=complex)
    n = psi_star.shape[0]
    if width > n:
        raise ConfigurationError("grid too small for the boundary stencil")
    if side == "right":
        cols, row = np.arange(n - width, n), n - 1
    elif side == "left":
        cols, row = np.arange(width), 0
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return discretize(op, normal_weights(width - 1, dx), {0: np.array([1.0])}, dt,
                      cols[None, None, :], psi_star, [row])


def abc11_rows_1d(side, k0, V, dx, dt, psi_star):
    """ABC(1,1) row at the ``side`` end of a 1D grid."""
    _check_steps(dt, dx)
    return _rows_1d(abc11_operator(_sign(side) * k0, V), side, dx, dt, psi_star, 2)


def abc10_rows_1d(side, alpha1, alpha2, V, dx, dt, psi_star):
    """Linear-interpolation (two kinetic energy parameters) row in 1D."""
    _check_steps(dt, dx)
    return _rows_1d(abc10_operator(alpha1, alpha2, V, _sign(side)), side, dx, dt, psi_star, 2)


def fj_rows_1d(side, velocities, dx, psi_star, dt=1.0):
    """Group-velocity product condition acting on the time average.

    Derivatives up to order ``p`` use the outermost ``p + 1`` points. The
    condition has no time derivative, so ``dt`` does not enter the row.
    """
    _check_steps(dt, dx)
    op = fj_operator(velocities, _sign(side))
    return _rows_1d(op, side, dx, dt, psi_star, len(velocities) + 1)


def abc11_edge_rows_2d(edge, profile, V, grid, dt, psi_star, points=None):
    """ABC(1,1) rows on the non-corner points of one edge.

    ``profile`` and ``V`` are sampled at every tangential grid point
    (corners included) and are read at ``points``, which default to all
    edge points except the two corners.
    """
    _check_steps(dt, grid.dx, grid.dy)
    ni, nj = grid.I, grid.J
    n_tan = nj if edge in ("east", "west") else ni
    if points is None:
        points = np.arange(1, n_tan)
    points = np.asarray(points, dtype=int)
    if np.any(points <= 0) or np.any(points >= n_tan):
        raise IndexError("edge rows exclude corners; use abc11_corner_rows")
    profile = np.broadcast_to(np.asarray(profile, dtype=float), (n_tan + 1,))[points]
    V = np.broadcast_to(np.asarray(V, dtype=float), (n_tan + 1,))[points]
    op = abc11_edge_operator(edge, profile, V)
    off = np.array([-1, 0, 1])
    if edge in ("east", "west"):
        xs = np.array([ni - 1, ni]) if edge == "east" else np.array([0, 1])
        js = points[:, None] + off[None, :]
        cols = js[:, :, None] * (ni + 1) + xs[None, None, :]
        row_ids = points * (ni + 1) + (ni if edge == "east" else 0)
        xw, yw = normal_weights(1, grid.dx), tangential_weights(grid.dy)
    elif edge in ("north", "south"):
        ys = np.array([nj - 1, nj]) if edge == "north" else np.array([0, 1])
        iis = points[:, None] + off[None, :]
        cols = ys[None, :, None] * (ni + 1) + iis[:, None, :]
        row_ids = (nj if edge == "north" else 0) * (ni + 1) + points
        xw, yw = tangential_weights(grid.dx), normal_weights(1, grid.dy)
    else:
        raise ValueError(f"unknown edge {edge!r}")
    return discretize(op, xw, yw, dt, cols, np.asarray(psi_star).ravel(), row_ids)


def abc11_corner_rows(corner, xi0, eta0, V, grid, dt, psi_star):
    """ABC(1,1) row on the 2x2 cell at one corner."""
    _check_steps(dt, grid.dx, grid.dy)
    if corner not in _CORNER_SIGNS:
        raise ValueError(f"unknown corner {corner!r}")
    ni, nj = grid.I, grid.J
    xs = np.array([ni - 1, ni]) if corner[1] == "e" else np.array([0, 1])
    ys = np.array([nj - 1, nj]) if corner[0] == "n" else np.array([0, 1])
    cols = (ys[:, None] * (ni + 1) + xs[None, :])[None]
    row = (ys[1] if corner[0] == "n" else ys[0]) * (ni + 1) + (xs[1] if corner[1] == "e" else xs[0])
    op = abc11_corner_operator(corner, xi0, eta0, V)
    return discretize(op, normal_weights(1, grid.dx), normal_weights(1, grid.dy), dt,
                      cols, np.asarray(psi_star).ravel(), [row])


def dirichlet_rows(row_ids):
    """Rows pinning ``psi^{n+1} = 0`` at the given points."""
    row_ids = np.asarray(row_ids, dtype=int)
    n = len(row_ids)
    return BoundaryRows(row_ids, row_ids[:, None], np.ones((n, 1), dtype=complex),
                        np.zeros(n, dtype=complex))
