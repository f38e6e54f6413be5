"""Reflection ratio, L1 error, exact solitons and a PDE residual check."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class UndefinedRatioError(ZeroDivisionError):
    pass


@dataclass
class MetricSeries:
    times: list = field(default_factory=list)
    r: list = field(default_factory=list)
    E1: list = field(default_factory=list)
    k0_by_side: dict = field(default_factory=dict)
    iterations: list = field(default_factory=list)

    def append(self, t, r, e1, k0, iterations=0):
        self.times.append(t)
        self.r.append(r)
        self.E1.append(e1)
        for side, value in k0.items():
            self.k0_by_side.setdefault(side, []).append(value)
        self.iterations.append(iterations)

    def __len__(self):
        return len(self.times)


def reflection_ratio(psi_n, psi_0):
    """Remaining mass fraction ``sum |psi^n|^2 / sum |psi^0|^2``."""
    m0 = np.sum(np.abs(psi_0) ** 2)
    if m0 == 0:
        raise UndefinedRatioError("initial field has zero mass")
    return float(np.sum(np.abs(psi_n) ** 2) / m0)


def l1_error(numerical, exact):
    """Mean pointwise modulus of the difference.

    ``exact`` is either an array of samples or a callable returning them.
    """
    numerical = np.asarray(numerical)
    if callable(exact):
        exact = exact()
    return float(np.mean(np.abs(numerical - np.asarray(exact))))


def bright_soliton(x, t, A=1.0, B=0.0, g=-2.0, x_c=0.0, phase=None):
    """Bright soliton of ``i psi_t = -psi_xx + g|psi|^2 psi`` for ``g < 0``.

    ``A sqrt(-2/g) sech(A(x - 2Bt - x_c)) exp(i(Bx + (A^2 - B^2)t + phase))``
    with ``phase`` defaulting to ``-B x_c`` so that the initial profile is
    ``sech(x - x_c) exp(iB(x - x_c))`` for unit amplitude.
    """
    if not g < 0:
        raise ValueError("bright solitons need an attractive nonlinearity g < 0")
    if not A > 0:
        raise ValueError("amplitude A must be positive")
    if phase is None:
        phase = -B * x_c
    x = np.asarray(x, dtype=float)
    envelope = A * np.sqrt(-2.0 / g) / np.cosh(A * (x - 2 * B * t - x_c))
    return envelope * np.exp(1j * (B * x + (A**2 - B**2) * t + phase))


def soliton_train(x, t, solitons, g=-2.0):
    """Superposition of single solitons given as ``(A, B, x_c)`` triples."""
    return sum(bright_soliton(x, t, A, B, g, xc) for A, B, xc in solitons)


def _d1(fn, h):
    return (-fn(2 * h) + 8 * fn(h) - 8 * fn(-h) + fn(-2 * h)) / (12 * h)


def _d2(fn, h):
    return (-fn(2 * h) + 16 * fn(h) - 30 * fn(0.0) + 16 * fn(-h) - fn(-2 * h)) / (12 * h**2)


def pde_residual(candidate, g=0.0, potential=None, points=(), h_space=3e-3, h_time=1e-3):
    """Max of ``|i psi_t + lap psi - g|psi|^2 psi - V psi|`` over sample points.

    ``candidate`` takes ``(x, t)`` or ``(x, y, t)``; ``points`` is a
    sequence of matching tuples. Derivatives use fourth-order centered
    differences.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.size == 0:
        return 0.0
    worst = 0.0
    for pt in points:
        if len(pt) == 2:
            x, t = pt
            y = None
            psi = candidate(x, t)
            psi_t = _d1(lambda s: candidate(x, t + s), h_time)
            lap = _d2(lambda s: candidate(x + s, t), h_space)
        else:
            x, y, t = pt
            psi = candidate(x, y, t)
            psi_t = _d1(lambda s: candidate(x, y, t + s), h_time)
            lap = (_d2(lambda s: candidate(x + s, y, t), h_space)
                   + _d2(lambda s: candidate(x, y + s, t), h_space))
        V = 0.0 if potential is None else potential(x, y, t)
        res = abs(1j * psi_t + lap - g * abs(psi) ** 2 * psi - V * psi)
        worst = max(worst, float(res))
    return worst
