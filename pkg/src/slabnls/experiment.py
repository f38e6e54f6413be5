"""Run a configured simulation and compare it with exact or reference solutions."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .grid import ConfigurationError, GridSpec, WaveField
from .metrics import MetricSeries, l1_error, reflection_ratio, soliton_train
from .slab import (AbcConfig, ConstantPotential, GaussianPotential, PhysicsSpec,
                   SlabStepper, StepFailure)
from .spectral import AdaptiveConfig, FixedWindow, ProportionalWindow

logger = logging.getLogger(__name__)


# -- builders ----------------------------------------------------------------

def build_grid(cfg: RunConfig) -> GridSpec:
    cfg = cfg.resolve()
    if cfg.dim == 1:
        return GridSpec.line(cfg.x_l, cfg.x_r, cfg.dx, cfg.dt)
    return GridSpec.rectangle(cfg.x_l, cfg.x_r, cfg.y_l, cfg.y_r, cfg.dx, cfg.dy, cfg.dt)


def build_physics(cfg: RunConfig) -> PhysicsSpec:
    if cfg.potential == "gaussian":
        center = tuple(cfg.v_center[:cfg.dim])
        pot = GaussianPotential(cfg.v_amplitude, cfg.v_width, center)
    else:
        pot = ConstantPotential(cfg.v_value)
    return PhysicsSpec(cfg.g, pot)


def build_boundary(cfg: RunConfig) -> AbcConfig:
    if cfg.window_beta is not None:
        window = ProportionalWindow(cfg.window_beta)
    elif cfg.window_b is not None:
        window = FixedWindow(cfg.window_b)
    else:
        window = None
    adaptive = None
    if not cfg.fixed:
        adaptive = AdaptiveConfig(cfg.transform, cfg.p, window, cfg.k_max, cfg.k_floor,
                                  cfg.refresh_every)
    return AbcConfig(
        family=cfg.abc, k0=cfg.k0, adaptive=adaptive, fixed=cfg.fixed_side_map(),
        alpha=tuple(cfg.alpha) or None, velocities=tuple(cfg.velocities) or None,
        fj_order=cfg.fj_order)


def initial_field(cfg: RunConfig, grid: GridSpec) -> np.ndarray:
    if cfg.initial == "zero":
        return np.zeros(grid.shape, dtype=complex)
    if cfg.initial == "solitons":
        if grid.dim != 1:
            raise ConfigurationError("invalid value for initial: solitons are 1D only")
        return soliton_train(grid.x, 0.0, _solitons(cfg), cfg.g)
    # Gaussian packet amplitude * exp(-rate |r - c|^2) * exp(i k . (r - c))
    c, k = cfg.packet_center, cfg.packet_k
    if grid.dim == 1:
        d = grid.x - c[0]
        return cfg.packet_amplitude * np.exp(-cfg.packet_rate * d**2 + 1j * k[0] * d)
    X, Y = grid.mesh()
    dx_, dy_ = X - c[0], Y - c[1]
    return cfg.packet_amplitude * np.exp(-cfg.packet_rate * (dx_**2 + dy_**2)
                                         + 1j * (k[0] * dx_ + k[1] * dy_))


def _solitons(cfg):
    return list(zip(cfg.soliton_A, cfg.soliton_B, cfg.soliton_xc))


def probe_indices(cfg: RunConfig, grid: GridSpec):
    """Map probe labels ``"x"`` or ``"x:y"`` to grid indices."""
    out = {}
    for label in cfg.probes:
        coords = [float(v) for v in str(label).split(":")]
        if len(coords) != grid.dim:
            raise ConfigurationError(f"invalid value for probes: {label!r}")
        idx = []
        for value, axis in zip(coords, (grid.x, grid.y) if grid.dim == 2 else (grid.x,)):
            i = int(round((value - axis[0]) / (axis[1] - axis[0])))
            if not 0 <= i < len(axis) or abs(axis[i] - value) > 1e-9 * max(1.0, abs(value)):
                raise ConfigurationError(f"invalid value for probes: {label!r} is not a grid point")
            idx.append(i)
        out[label] = tuple(reversed(idx))   # field layout is [j, i]
    return out


def snapshot_steps(cfg: RunConfig, n_steps):
    cfg = cfg.resolve()
    times = list(cfg.snapshot_times) or list(np.arange(0.0, cfg.t_final, cfg.snapshot_every))
    steps = {int(round(t / cfg.dt)) for t in times if t <= cfg.t_final + 1e-12}
    steps.add(n_steps)
    return sorted(s for s in steps if 0 <= s <= n_steps)


# -- reference solution ------------------------------------------------------

@dataclass
class ReferenceSolution:
    """Enlarged-domain run restricted to the original region.

    ``fields`` maps step indices of the reference run to arrays on the
    reference grid over the original region; ``probes`` holds per-step
    probe values.
    """

    grid: GridSpec
    region: tuple
    fields: dict = field(default_factory=dict)
    probes: dict = field(default_factory=dict)

    def step_of(self, t):
        return int(round(t / self.grid.dt))

    def sample(self, t, grid: GridSpec):
        """Reference field at time ``t`` on the points of ``grid``."""
        step = self.step_of(t)
        if step not in self.fields:
            raise KeyError(f"reference has no record at t={t}")
        data = self.fields[step]
        sx = _stride(grid.dx, self.grid.dx)
        if grid.dim == 1:
            return data[::sx]
        sy = _stride(grid.dy, self.grid.dy)
        return data[::sy, ::sx]

    def probe(self, label, t):
        return self.probes[label][self.step_of(t)]


def _stride(coarse, fine):
    s = int(round(coarse / fine))
    if s < 1 or abs(s * fine - coarse) > 1e-9 * coarse:
        raise ConfigurationError("reference grid does not align with the run grid")
    return s


def enlarged_config(cfg: RunConfig, enlargement=None, anchor=None):
    """Same run on a domain ``enlargement`` times larger along each axis.

    The domain grows by whole cells, so the original points stay grid points.
    """
    cfg = cfg.resolve()
    enlargement = cfg.enlargement if enlargement is None else enlargement
    anchor = cfg.anchor if anchor is None else anchor
    if not enlargement > 1:
        raise ConfigurationError("invalid value for enlargement: must exceed 1")

    def grow(lo, hi, h):
        n = int(round((hi - lo) / h))
        extra = int(round((enlargement - 1) * n))
        before = extra // 2 if anchor == "center" else 0
        return lo - before * h, hi + (extra - before) * h

    x_l, x_r = grow(cfg.x_l, cfg.x_r, cfg.dx)
    changes = dict(x_l=x_l, x_r=x_r, exact="none")
    if cfg.window_b is None and cfg.window_beta is None:
        changes["window_b"] = (cfg.x_r - cfg.x_l) / 4.0
    if cfg.dim == 2:
        changes["y_l"], changes["y_r"] = grow(cfg.y_l, cfg.y_r, cfg.dy)
    return cfg.replace(**changes)


def reference_run(cfg: RunConfig, record_times=None, enlargement=None, anchor=None):
    """Run on the enlarged domain and keep the original region.

    ``record_times`` selects which full fields are stored (probe values are
    stored at every step).
    """
    cfg = cfg.resolve()
    big = enlarged_config(cfg, enlargement, anchor)
    grid = build_grid(big)
    i0 = int(round((cfg.x_l - grid.x_l) / grid.dx))
    i1 = i0 + int(round((cfg.x_r - cfg.x_l) / grid.dx))
    if grid.dim == 1:
        region = (slice(i0, i1 + 1),)
    else:
        j0 = int(round((cfg.y_l - grid.y_l) / grid.dy))
        j1 = j0 + int(round((cfg.y_r - cfg.y_l) / grid.dy))
        region = (slice(j0, j1 + 1), slice(i0, i1 + 1))
    ref = ReferenceSolution(grid, region)
    n_steps = int(round(cfg.t_final / grid.dt))
    wanted = set()
    if record_times is not None:
        wanted = {int(round(t / grid.dt)) for t in record_times}
    probes = probe_indices(big, grid)
    for label in probes:
        ref.probes[label] = {}

    def record(fld):
        n = fld.time_index
        if n in wanted:
            ref.fields[n] = fld.current[region].copy()
        for label, idx in probes.items():
            ref.probes[label][n] = fld.current[idx]

    stepper = SlabStepper(grid, build_physics(big), build_boundary(big),
                          big.solver_tol, big.solver_max_iter)
    fld = WaveField(grid, initial_field(big, grid))
    record(fld)
    logger.info("reference run on %s grid, %d steps", grid.shape, n_steps)
    for _ in range(n_steps):
        stepper.advance(fld)
        record(fld)
    return ref


# -- simulation ----------------------------------------------------------------

@dataclass
class Trajectory:
    config: RunConfig
    grid: GridSpec
    metrics: MetricSeries
    snapshots: dict
    probes: dict
    initial: np.ndarray
    final: WaveField
    failed: str | None = None
    elapsed: float = 0.0
    reference: ReferenceSolution | None = None

    @property
    def ok(self):
        return self.failed is None


def simulate(cfg: RunConfig, reference=None, progress=None) -> Trajectory:
    """Time loop from ``t = 0`` to ``t_final`` with metric recording.

    With ``cfg.exact == "reference"`` and no ``reference`` given, the
    enlarged-domain reference run is computed first.
    """
    cfg = cfg.resolve().validate()
    grid = build_grid(cfg)
    physics = build_physics(cfg)
    stepper = SlabStepper(grid, physics, build_boundary(cfg), cfg.solver_tol, cfg.solver_max_iter)
    psi0 = initial_field(cfg, grid)
    fld = WaveField(grid, psi0)
    n_steps = int(round(cfg.t_final / grid.dt))
    if abs(n_steps * grid.dt - cfg.t_final) > 1e-9 * max(1.0, cfg.t_final):
        logger.warning("t_final %.6g is not a multiple of dt; stopping at %.6g",
                       cfg.t_final, n_steps * grid.dt)
    every = cfg.metrics_every
    metric_steps = set(range(0, n_steps + 1, every)) | {n_steps}

    if cfg.exact == "reference" and reference is None:
        reference = reference_run(cfg, [s * grid.dt for s in sorted(metric_steps)])

    def exact_at(t):
        if cfg.exact == "solitons":
            return soliton_train(grid.x, t, _solitons(cfg), cfg.g)
        if cfg.exact == "reference" and reference is not None:
            return reference.sample(t, grid)
        return None

    metrics = MetricSeries()
    snaps = {}
    snap_steps = set(snapshot_steps(cfg, n_steps))
    probes = probe_indices(cfg, grid)
    probe_series = {label: [] for label in probes}

    def record(diag_k0, iterations):
        n, t = fld.time_index, fld.time
        for label, idx in probes.items():
            probe_series[label].append((t, fld.current[idx]))
        if n in metric_steps:
            ex = exact_at(t)
            e1 = l1_error(fld.current, ex) if ex is not None else float("nan")
            r = reflection_ratio(fld.current, psi0) if np.any(psi0) else float("nan")
            metrics.append(t, r, e1, diag_k0, iterations)
        if n in snap_steps:
            snaps[t] = fld.current.copy()

    record(stepper.k0_summary(), 0)
    failed = None
    start = time.perf_counter()
    for _ in range(n_steps):
        try:
            diag = stepper.advance(fld)
        except StepFailure as exc:
            failed = str(exc)
            logger.error("run aborted: %s", failed)
            break
        record(diag.k0, diag.iterations)
        if progress is not None:
            progress(fld, diag)
    elapsed = time.perf_counter() - start
    return Trajectory(cfg, grid, metrics, snaps, probe_series, psi0, fld, failed, elapsed,
                      reference)
