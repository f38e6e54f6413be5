"""Windowed Fourier spectra near an artificial boundary and wave-number estimators.

The transform of a boundary-adjacent slice of the field is taken on a
uniform grid of non-negative wave numbers. Boundaries facing the negative
direction (left, west, south) are handled by mirroring the slice, so the
same ``k >= 0`` machinery serves every side.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import ConfigurationError


class NoDominantMode(ValueError):
    """The spectrum vanishes, so no wave number can be picked from it."""


class DegenerateWindowError(ValueError):
    """The window holds fewer than four grid points."""


@dataclass(frozen=True)
class SpectrumSample:
    k_values: np.ndarray
    values: np.ndarray
    k_step: float

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(self.values)


@dataclass(frozen=True)
class FixedWindow:
    b: float


@dataclass(frozen=True)
class ProportionalWindow:
    """Window length ``beta * k0`` using the previous step's estimate."""

    beta: float


@dataclass(frozen=True)
class AdaptiveConfig:
    """How boundary wave numbers are estimated.

    ``window`` of ``None`` means a fixed window of a quarter of the domain
    length. ``k_max`` of ``None`` means the grid Nyquist number ``pi / dx``.
    """

    transform: str = "gabor"
    p: float = 4.0
    window: FixedWindow | ProportionalWindow | None = None
    k_max: float | None = None
    k_floor: float = 0.05
    refresh_every: int = 1
    oversample: int = 4

    def __post_init__(self):
        if self.transform not in ("fourier", "gabor"):
            raise ConfigurationError(f"transform must be fourier or gabor, got {self.transform!r}")
        if not self.p > 0:
            raise ConfigurationError("p must be positive")
        if self.k_floor < 0:
            raise ConfigurationError("k_floor must be non-negative")
        if self.refresh_every < 1:
            raise ConfigurationError("refresh_every must be a positive integer")
        if isinstance(self.window, FixedWindow) and not self.window.b > 0:
            raise ConfigurationError("fixed window length must be positive")
        if isinstance(self.window, ProportionalWindow) and not self.window.beta > 0:
            raise ConfigurationError("window beta must be positive")


def wavenumber_grid(length, dx, k_max=None, oversample=4):
    """Uniform grid ``0, dk, ..., <= k_max`` with ``dk = 2 pi / (length * oversample)``."""
    k_step = 2.0 * np.pi / length / oversample
    if k_max is None:
        k_max = np.pi / dx
    n = int(np.floor(k_max / k_step + 1e-9)) + 1
    return np.arange(n) * k_step, k_step


def trapezoid_weights(n, dx):
    w = np.full(n, dx)
    w[0] = w[-1] = 0.5 * dx
    return w


def _snap_window(x, window):
    x0, dx = x[0], x[1] - x[0]
    a, b_end = window
    tol = 1e-9 * max(1.0, abs(x[-1] - x0))
    if a < x0 - tol or b_end > x[-1] + tol or b_end - a > x[-1] - x0 + tol:
        raise ConfigurationError(f"window [{a}, {b_end}] does not fit in [{x0}, {x[-1]}]")
    i0 = int(round((a - x0) / dx))
    i1 = int(round((b_end - x0) / dx))
    if i1 - i0 + 1 < 4:
        raise DegenerateWindowError(f"window [{a}, {b_end}] holds {i1 - i0 + 1} points")
    return i0, i1


def windowed_dft(values, x, window, k_values, k_step=None):
    """Trapezoid quadrature of ``psi(x) exp(-i k x)`` over ``window``.

    ``window`` endpoints are snapped to the nearest grid points of ``x``.
    """
    x = np.asarray(x, dtype=float)
    values = np.asarray(values)
    k_values = np.asarray(k_values, dtype=float)
    i0, i1 = _snap_window(x, window)
    xs = x[i0:i1 + 1]
    w = trapezoid_weights(len(xs), x[1] - x[0])
    kernel = np.exp(-1j * np.outer(k_values, xs))
    spectrum = kernel @ (w * values[i0:i1 + 1])
    if k_step is None:
        k_step = k_values[1] - k_values[0] if len(k_values) > 1 else 1.0
    return SpectrumSample(k_values, spectrum, float(k_step))


def pick_k0_max(spectrum: SpectrumSample) -> float:
    """Wave number of the largest spectral magnitude; ties go to the smaller k."""
    mags = spectrum.magnitudes
    if mags.size == 0 or not np.any(mags > 0):
        raise NoDominantMode("spectrum is identically zero")
    return float(spectrum.k_values[int(np.argmax(mags))])


def _weighted_mean(k_values, mags, p):
    # rescaling by the peak leaves the ratio unchanged and keeps large p finite
    top = mags.max(axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        w = (mags / top) ** p
        return (w @ k_values) / w.sum(axis=-1), top[..., 0]


def pick_k0_weighted(spectrum: SpectrumSample, p: float) -> float:
    """Mean wave number weighted by ``|psi_hat|**p``."""
    if not p > 0:
        raise ValueError("p must be positive")
    mags = spectrum.magnitudes
    if mags.size == 0 or not np.any(mags > 0):
        raise NoDominantMode("spectrum is identically zero")
    k0, _ = _weighted_mean(spectrum.k_values, mags, p)
    return float(k0)


def adaptive_window(rule, k0_prev, domain_length, dx):
    """Window length for the next estimate, clamped to ``[4 dx, domain_length]``."""
    if rule is None:
        return domain_length / 4.0
    if isinstance(rule, FixedWindow):
        if rule.b > domain_length * (1 + 1e-12):
            raise ConfigurationError(f"window {rule.b} exceeds domain length {domain_length}")
        return rule.b
    return float(np.clip(rule.beta * k0_prev, 4.0 * dx, domain_length))


@dataclass
class BoundaryEstimator:
    """Per-grid wave-number estimator with a precomputed transform kernel.

    ``x`` is the coordinate along the normal direction of the boundaries
    being served. Each call receives slices ``rows[..., :]`` laid out along
    ``x`` and returns one estimate per leading index.
    """

    x: np.ndarray
    cfg: AdaptiveConfig
    k_values: np.ndarray = field(init=False)
    k_step: float = field(init=False)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.dx = self.x[1] - self.x[0]
        self.length = self.x[-1] - self.x[0]
        self.k_values, self.k_step = wavenumber_grid(
            self.length, self.dx, self.cfg.k_max, self.cfg.oversample)
        self.k_max = self.k_values[-1]
        # distance from the boundary, so mirrored slices share one kernel
        s = np.arange(len(self.x)) * self.dx
        self._kernel = np.exp(-1j * np.outer(s, self.k_values))

    def window_points(self, k0_prev):
        """Number of grid points in each row's window."""
        if self.cfg.transform == "fourier":
            return np.full(np.shape(k0_prev), len(self.x), dtype=int)
        b = np.vectorize(lambda k: adaptive_window(self.cfg.window, k, self.length, self.dx),
                         otypes=[float])(k0_prev)
        m = np.rint(b / self.dx).astype(int)
        return np.clip(m, 3, len(self.x) - 1) + 1

    def spectra(self, rows, side, k0_prev):
        """Complex spectra ``(..., nk)`` of each row's boundary window.

        ``side`` is ``'high'`` for boundaries at the right end of ``x`` and
        ``'low'`` for the left end (mirrored).
        """
        rows = np.atleast_2d(rows)
        k0_prev = np.broadcast_to(np.asarray(k0_prev, dtype=float), rows.shape[:1])
        npts = self.window_points(k0_prev)
        mmax = int(npts.max())
        if side == "high":
            block = rows[:, ::-1][:, :mmax]
        elif side == "low":
            block = rows[:, :mmax]
        else:
            raise ValueError(f"side must be 'high' or 'low', got {side!r}")
        # trapezoid weights per row, zero past each row's own window
        idx = np.arange(mmax)
        w = np.where(idx[None, :] < npts[:, None], self.dx, 0.0)
        w[:, 0] *= 0.5
        w[np.arange(len(npts)), npts - 1] *= 0.5
        if side == "high":
            # block runs inward from x_r: position x_r - s, kernel exp(-ik(x_r - s))
            phase = np.exp(-1j * self.k_values * self.x[-1])
            return (block * w) @ np.conj(self._kernel[:mmax]) * phase
        # mirrored slice: position -x_l - s after x -> -x
        phase = np.exp(-1j * self.k_values * (-self.x[0]))
        return (block * w) @ np.conj(self._kernel[:mmax]) * phase

    def estimate(self, rows, side, k0_prev, method="weighted"):
        """Clamped wave-number estimates; zero spectra fall back to ``k_floor``."""
        spec = self.spectra(rows, side, k0_prev)
        mags = np.abs(spec)
        if method == "weighted":
            k0, top = _weighted_mean(self.k_values, mags, self.cfg.p)
        elif method == "max":
            k0 = self.k_values[np.argmax(mags, axis=-1)]
            top = mags.max(axis=-1)
        else:
            raise ValueError(f"unknown method {method!r}")
        k0 = np.where((top > 0) & np.isfinite(k0), k0, self.cfg.k_floor)
        return np.clip(k0, self.cfg.k_floor, max(self.k_max, self.cfg.k_floor))


EDGES = ("east", "west", "north", "south")


def edge_wavenumber_profile(field2d, grid, edge, cfg, k0_prev=None):
    """Per-point wave-number profile along one edge of a 2D field.

    East/west profiles run over ``y_j`` (transform along x), north/south
    over ``x_i`` (transform along y).
    """
    field2d = np.asarray(field2d)
    if edge in ("east", "west"):
        est = BoundaryEstimator(grid.x, cfg)
        rows = field2d
    elif edge in ("north", "south"):
        est = BoundaryEstimator(grid.y, cfg)
        rows = field2d.T
    else:
        raise ValueError(f"unknown edge {edge!r}")
    if k0_prev is None:
        k0_prev = cfg.k_floor
    side = "high" if edge in ("east", "north") else "low"
    return est.estimate(rows, side, k0_prev)
