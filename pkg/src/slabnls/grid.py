"""Uniform grids, two-level wave fields and the elementary difference operators.

Two-dimensional arrays are stored with shape ``(J + 1, I + 1)`` and indexed
``psi[j, i]``, so the x index runs fastest and the flattened id of grid point
``(i, j)`` is ``j * (I + 1) + i``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DimensionError(ValueError):
    """Raised when an operation asks for an axis the grid does not have."""


class ConfigurationError(ValueError):
    """Raised for inconsistent grid or scheme parameters."""


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid with ``I`` (and ``J``) uniform intervals.

    Use :meth:`line` or :meth:`rectangle` to build one from step sizes.
    """

    dim: int
    x_l: float
    x_r: float
    I: int
    dt: float
    y_l: float = 0.0
    y_r: float = 0.0
    J: int = 0

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ConfigurationError(f"dim must be 1 or 2, got {self.dim}")
        if self.I < 1 or not self.x_r > self.x_l:
            raise ConfigurationError("x axis needs x_r > x_l and I >= 1")
        if self.dim == 2 and (self.J < 1 or not self.y_r > self.y_l):
            raise ConfigurationError("y axis needs y_r > y_l and J >= 1")
        if not self.dt > 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")

    @classmethod
    def line(cls, x_l, x_r, dx, dt=None):
        """1D grid on ``[x_l, x_r]``; ``dt`` defaults to ``dx**2``."""
        n = _interval_count(x_r - x_l, dx, "x")
        spec_dx = (x_r - x_l) / n
        return cls(1, float(x_l), float(x_r), n, spec_dx**2 if dt is None else float(dt))

    @classmethod
    def rectangle(cls, x_l, x_r, y_l, y_r, dx, dy=None, dt=None):
        """2D grid; ``dy`` defaults to ``dx`` and ``dt`` to ``dx**2``."""
        dy = dx if dy is None else dy
        nx = _interval_count(x_r - x_l, dx, "x")
        ny = _interval_count(y_r - y_l, dy, "y")
        spec_dx = (x_r - x_l) / nx
        return cls(2, float(x_l), float(x_r), nx, spec_dx**2 if dt is None else float(dt),
                   float(y_l), float(y_r), ny)

    @property
    def dx(self) -> float:
        return (self.x_r - self.x_l) / self.I

    @property
    def dy(self) -> float:
        if self.dim == 1:
            raise DimensionError("1D grid has no y axis")
        return (self.y_r - self.y_l) / self.J

    @property
    def x(self) -> np.ndarray:
        return self.x_l + np.arange(self.I + 1) * self.dx

    @property
    def y(self) -> np.ndarray:
        if self.dim == 1:
            raise DimensionError("1D grid has no y axis")
        return self.y_l + np.arange(self.J + 1) * self.dy

    @property
    def shape(self) -> tuple:
        return (self.I + 1,) if self.dim == 1 else (self.J + 1, self.I + 1)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell_volume(self) -> float:
        return self.dx if self.dim == 1 else self.dx * self.dy

    def mesh(self):
        """``(X, Y)`` coordinate arrays with the field layout ``[j, i]``."""
        if self.dim == 1:
            raise DimensionError("mesh() needs a 2D grid")
        return np.meshgrid(self.x, self.y)

    def flat_id(self, i, j=0):
        return np.asarray(j) * (self.I + 1) + np.asarray(i)

    def with_dt(self, dt):
        return GridSpec(self.dim, self.x_l, self.x_r, self.I, float(dt),
                        self.y_l, self.y_r, self.J)


def _interval_count(length, step, name):
    if not step > 0:
        raise ConfigurationError(f"d{name} must be positive, got {step}")
    n = int(round(length / step))
    if n < 1 or abs(n * step - length) > 1e-9 * max(1.0, abs(length)):
        raise ConfigurationError(
            f"{name}-length {length} is not a whole number of steps {step}")
    return n


@dataclass
class WaveField:
    """Complex field at time levels ``n`` (``current``) and ``n - 1`` (``previous``)."""

    spec: GridSpec
    current: np.ndarray
    previous: np.ndarray = None
    time_index: int = 0

    def __post_init__(self):
        self.current = np.asarray(self.current, dtype=complex)
        if self.current.shape != self.spec.shape:
            raise ConfigurationError(
                f"field shape {self.current.shape} does not match grid {self.spec.shape}")
        if self.previous is None:
            self.previous = self.current.copy()
        self.previous = np.asarray(self.previous, dtype=complex)
        if self.previous.shape != self.spec.shape:
            raise ConfigurationError("previous level has the wrong shape")

    @property
    def time(self) -> float:
        return self.time_index * self.spec.dt

    def mass(self) -> float:
        """Discrete mass ``sum |psi|^2 * cell volume``."""
        return float(np.sum(np.abs(self.current) ** 2) * self.spec.cell_volume)

    def commit(self, new):
        """Shift levels: ``previous <- current <- new``."""
        self.previous = self.current
        self.current = np.asarray(new, dtype=complex).reshape(self.spec.shape)
        self.time_index += 1


DIFF_OPS = ("D_plus", "D_minus", "S_minus")


def apply_diff(values, op, axis="x", spacing=1.0):
    """Apply a two-point difference or sum along ``axis``.

    Returns a masked array of the input shape. Entries where the stencil
    does not fit are masked, so composing operators keeps track of the
    shrinking valid range.

    ``D_plus f[i] = (f[i+1] - f[i]) / h``, ``D_minus f[i] = (f[i] - f[i-1]) / h``
    and ``S_minus f[i] = (f[i] + f[i-1]) / 2``.
    """
    if op not in DIFF_OPS:
        raise ValueError(f"unknown operator {op!r}; expected one of {DIFF_OPS}")
    if not spacing > 0:
        raise ConfigurationError("spacing must be positive")
    f = np.ma.asarray(values)
    if axis == "x":
        ax = f.ndim - 1
    elif axis == "y":
        if f.ndim < 2:
            raise DimensionError("axis 'y' requested on a 1D field")
        ax = f.ndim - 2
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    if f.shape[ax] < 2:
        raise ValueError("need at least two points along the axis")

    mask = np.ma.getmaskarray(f).copy()
    data = np.ma.getdata(f).astype(np.result_type(f.dtype, float), copy=True)
    out = np.zeros_like(data)
    out_mask = np.ones(data.shape, dtype=bool)

    lo = [slice(None)] * f.ndim
    hi = [slice(None)] * f.ndim
    lo[ax] = slice(0, -1)
    hi[ax] = slice(1, None)
    lo, hi = tuple(lo), tuple(hi)
    pair_mask = mask[lo] | mask[hi]
    if op == "D_plus":
        out[lo] = (data[hi] - data[lo]) / spacing
        out_mask[lo] = pair_mask
    elif op == "D_minus":
        out[hi] = (data[hi] - data[lo]) / spacing
        out_mask[hi] = pair_mask
    else:
        out[hi] = 0.5 * (data[hi] + data[lo])
        out_mask[hi] = pair_mask
    return np.ma.masked_array(out, mask=out_mask)
