"""Acceptance gate: every criterion at its stated tolerance.

Each test records one PASS/FAIL line, printed in the terminal summary.
"""

import time

import numpy as np
import pytest

from slabnls.abc import (CORNERS, EDGES, _CORNER_SIGNS, _sign, abc10_operator,
                         abc11_corner_operator, abc11_edge_operator, abc11_operator,
                         fj_operator, operator_symbol)
from slabnls.config import preset
from slabnls.experiment import reference_run, simulate
from slabnls.grid import GridSpec, WaveField
from slabnls.metrics import bright_soliton, l1_error, pde_residual
from slabnls.slab import AbcConfig, ConstantPotential, PhysicsSpec, SlabStepper, nonlinear_phase_step
from slabnls.spectral import SpectrumSample, pick_k0_weighted, wavenumber_grid, windowed_dft


def final(traj):
    assert traj.ok, traj.failed
    return traj.metrics.E1[-1], traj.metrics.r[-1]


@pytest.fixture(scope="module")
def example1_runs():
    base = preset("example1")
    runs = {}
    t0 = time.perf_counter()
    runs["G4"] = simulate(base.replace(transform="gabor", p=4.0))
    runs["G4_time"] = time.perf_counter() - t0
    runs["F4"] = simulate(base.replace(transform="fourier", p=4.0))
    runs["G1"] = simulate(base.replace(transform="gabor", p=1.0))
    runs["k5"] = simulate(base.replace(fixed=True, k0=5.0))
    runs["k2"] = simulate(base.replace(fixed=True, k0=2.0))
    return runs


def test_criterion_1_adaptive_table(example1_runs, acceptance):
    e1, r = final(example1_runs["G4"])
    secs = example1_runs["G4_time"]
    acceptance.check("1  Gabor p=4 E1 in [0.6e-3, 6e-3]", 0.6e-3 <= e1 <= 6e-3, f"E1={e1:.3e}")
    acceptance.check("1  Gabor p=4 r in [2e-5, 3e-4]", 2e-5 <= r <= 3e-4, f"r={r:.3e}")
    acceptance.check("1  runtime <= 30 s", secs <= 30.0, f"{secs:.1f} s")
    e1_f, _ = final(example1_runs["F4"])
    acceptance.check("1  E1(Gabor p=4) < E1(Fourier p=4)", e1 < e1_f,
                     f"{e1:.3e} vs {e1_f:.3e}")
    _, r1 = final(example1_runs["G1"])
    acceptance.check("1  r(p=4) at least 5x below r(p=1)", 5 * r <= r1, f"{r:.3e} vs {r1:.3e}")


def test_criterion_2_fixed_parameters(example1_runs, acceptance):
    _, r = final(example1_runs["G4"])
    _, r5 = final(example1_runs["k5"])
    e2, _ = final(example1_runs["k2"])
    acceptance.check("2  fixed k0=5 r >= 10x adaptive r", r5 >= 10 * r, f"{r5:.3e} vs {r:.3e}")
    acceptance.check("2  fixed k0=2 E1 in [1e-3, 1e-2]", 1e-3 <= e2 <= 1e-2, f"E1={e2:.3e}")


def test_criterion_3_window_proportional_to_k0(acceptance):
    base = preset("example1").replace(dx=0.05, p=4.0)
    r = {}
    for beta in (0.5, 1.0, 2.0, 3.0, 4.0):
        r[beta] = final(simulate(base.replace(window_beta=beta)))[1]
    detail = " ".join(f"b{k:g}={v:.2e}" for k, v in r.items())
    plateau = [r[b] for b in (1.0, 2.0, 3.0, 4.0)]
    short = acceptance.record("3  r(beta=0.5) >= 2 r(beta=1)", r[0.5] >= 2 * r[1.0], detail)
    flat = acceptance.record("3  r(beta=1..4) within a 2x band", max(plateau) <= 2 * min(plateau),
                             f"max/min={max(plateau) / min(plateau):.2f}")
    assert short and flat, detail


def test_criterion_4_interior_convergence(acceptance):
    start = time.perf_counter()
    errors = []
    for dx in (0.2, 0.1, 0.05):
        grid = GridSpec.line(0.0, 40.0, dx)
        psi0 = bright_soliton(grid.x, 0.0, 1.0, 2.0, -2.0, 20.0)
        stepper = SlabStepper(grid, PhysicsSpec(-2.0), AbcConfig())
        field = WaveField(grid, psi0)
        for _ in range(int(round(1.0 / grid.dt))):
            stepper.advance(field)
        errors.append(l1_error(field.current, bright_soliton(grid.x, field.time, 1.0, 2.0,
                                                             -2.0, 20.0)))
    pairwise = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    # one order over the three grids: least-squares slope of log E1 against log dx
    order = np.polyfit(np.log([0.2, 0.1, 0.05]), np.log(errors), 1)[0]
    secs = time.perf_counter() - start
    acceptance.check("4  observed order in [1.7, 2.2], errors decreasing",
                     1.7 <= order <= 2.2 and errors[0] > errors[1] > errors[2],
                     f"E1={', '.join(f'{e:.2e}' for e in errors)} order={order:.3f} "
                     f"pairwise={np.round(pairwise, 3).tolist()}")
    acceptance.check("4  runtime <= 1 min", secs <= 60.0, f"{secs:.1f} s")


def test_criterion_5a_windowed_dft_oracle(acceptance):
    rng = np.random.default_rng(11)
    x = np.linspace(0.0, 8.0, 81)
    ks, dk = wavenumber_grid(8.0, 0.1)
    worst = 0.0
    for _ in range(100):
        psi = rng.normal(size=81) + 1j * rng.normal(size=81)
        i0 = int(rng.integers(0, 40))
        i1 = int(rng.integers(i0 + 4, 81))
        got = windowed_dft(psi, x, (x[i0], x[i1]), ks, dk).values
        w = np.full(i1 - i0 + 1, 0.1)
        w[[0, -1]] = 0.05
        # independent route: explicit sum over points for each k
        want = np.array([sum(w[m] * psi[i0 + m] * np.exp(-1j * k * x[i0 + m])
                             for m in range(len(w))) for k in ks])
        worst = max(worst, np.max(np.abs(got - want)) / np.max(np.abs(want)))
    acceptance.check("5a windowed_dft vs quadrature <= 1e-12", worst <= 1e-12, f"{worst:.1e}")


def test_criterion_5b_weighted_pick(acceptance):
    rng = np.random.default_rng(12)
    ks = np.arange(64) * 0.2
    ok = True
    for p in (1, 2, 4, 64):
        delta = np.zeros(64, complex)
        delta[23] = 0.3j
        ok &= pick_k0_weighted(SpectrumSample(ks, delta, 0.2), p) == ks[23]
        for _ in range(20):
            v = rng.normal(size=64) + 1j * rng.normal(size=64)
            s = 10 ** rng.uniform(-6, 6)
            a = pick_k0_weighted(SpectrumSample(ks, v, 0.2), p)
            b = pick_k0_weighted(SpectrumSample(ks, s * v, 0.2), p)
            ok &= abs(a - b) <= 1e-12 * abs(a)
    acceptance.check("5b pick_k0_weighted scale invariance and delta exactness", bool(ok))


def test_criterion_5c_plane_wave_annihilation(acceptance):
    rng = np.random.default_rng(13)
    worst = 0.0
    for _ in range(50):
        c, c2, V = rng.uniform(0.2, 6, 2).tolist() + [rng.uniform(-2, 2)]
        eta = rng.uniform(-6, 6)
        for s in (1.0, -1.0):
            w = c**2 + V
            worst = max(worst, abs(operator_symbol(abc11_operator(s * c, V), s * c, 0, w)) / (1 + c**3))
            op = abc10_operator(c, c2, V, s)
            for a in (c, c2):
                worst = max(worst, abs(operator_symbol(op, s * a, 0, a**2 + V)) / (1 + a**2))
            vel = rng.uniform(0.2, 10, 3)
            op = fj_operator(vel, s)
            for v in vel:
                worst = max(worst, abs(operator_symbol(op, s * v / 2, 0, v**2 / 4)) / (1 + vel.max())**3)
        for edge in EDGES:
            s = _sign(edge)
            xi, et = (s * c, eta) if edge in ("east", "west") else (eta, s * c)
            res = operator_symbol(abc11_edge_operator(edge, c, V), xi, et, xi**2 + et**2 + V)
            worst = max(worst, abs(res) / (1 + c + abs(eta))**3)
        for corner in CORNERS:
            sx, sy = _CORNER_SIGNS[corner]
            xi, et = sx * c, sy * c2
            res = operator_symbol(abc11_corner_operator(corner, c, c2, V), xi, et, xi**2 + et**2 + V)
            worst = max(worst, abs(res) / (1 + c + c2)**4)
    acceptance.check("5c plane-wave annihilation <= 1e-12 (all families, edges, corners)",
                     worst <= 1e-12, f"{worst:.1e}")


def test_criterion_5d_phase_step_modulus(acceptance):
    rng = np.random.default_rng(14)
    worst = 0.0
    for _ in range(100):
        psi = 3 * (rng.normal(size=200) + 1j * rng.normal(size=200))
        g, dt = rng.uniform(-50, 50), rng.uniform(1e-4, 1)
        out = nonlinear_phase_step(psi, lambda s: g * s, dt)
        worst = max(worst, np.max(np.abs(np.abs(out) - np.abs(psi)) / np.maximum(1, np.abs(psi))))
    acceptance.check("5d phase step modulus preserved <= 1e-14", worst <= 1e-14, f"{worst:.1e}")


def test_criterion_5e_interior_mass(acceptance):
    grid = GridSpec.line(0.0, 20.0, 0.1)
    psi0 = np.exp(-2 * (grid.x - 10.0) ** 2) * np.exp(2j * grid.x)
    tol = 1e-10
    stepper = SlabStepper(grid, PhysicsSpec(-2.0, ConstantPotential(0.0)),
                          AbcConfig(family="dirichlet", adaptive=None), tol=tol)
    field = WaveField(grid, psi0)
    m = [field.mass()]
    for _ in range(100):
        stepper.advance(field)
        m.append(field.mass())
    drift = np.max(np.abs(np.diff(m))) / m[0]
    acceptance.check("5e interior mass drift per step <= 10 x tol (1D)", drift <= 10 * tol,
                     f"{drift:.1e}")
    grid2 = GridSpec.rectangle(0.0, 6.0, 0.0, 6.0, 0.1)
    X, Y = grid2.mesh()
    psi2 = np.exp(-2 * ((X - 3) ** 2 + (Y - 3) ** 2)) * np.exp(1j * (X + Y))
    stepper = SlabStepper(grid2, PhysicsSpec(1.0), AbcConfig(family="dirichlet", adaptive=None),
                          tol=tol)
    field = WaveField(grid2, psi2)
    m = [field.mass()]
    for _ in range(100):
        stepper.advance(field)
        m.append(field.mass())
    drift2 = np.max(np.abs(np.diff(m))) / m[0]
    acceptance.check("5e interior mass drift per step <= 10 x tol (2D)", drift2 <= 10 * tol,
                     f"{drift2:.1e}")


def test_criterion_5f_soliton_residual(acceptance):
    rng = np.random.default_rng(15)
    pts = np.column_stack([rng.uniform(2, 38, 100), rng.uniform(0, 4, 100)])
    good = pde_residual(lambda x, t: bright_soliton(x, t, 1.0, 2.0, -2.0, 10.0), g=-2.0,
                        points=pts)

    def sextupled(x, t):
        env = 1 / np.cosh(x - 4 * t - 10)
        return env * np.exp(1j * (2 * x + 6 * (1 - 4) * t - 20))

    bad = pde_residual(sextupled, g=-2.0, points=[(10.2, 0.05), (12.0, 0.5), (14.0, 1.0)])
    acceptance.check("5f corrected soliton residual <= 1e-8", good <= 1e-8, f"{good:.1e}")
    acceptance.check("5f sextupled time phase residual >= 1e-1", bad >= 1e-1, f"{bad:.2f}")


def test_criterion_6_example2(acceptance):
    cfg = preset("example2")
    start = time.perf_counter()
    traj = simulate(cfg)
    secs = time.perf_counter() - start
    err = np.max(np.abs(traj.final.current - traj.reference.sample(traj.final.time, traj.grid)))
    acceptance.check("6  max |psi - ref| at t=6 <= 5e-2", traj.ok and err <= 5e-2, f"{err:.2e}")

    times = np.array(traj.metrics.times)
    dk = wavenumber_grid(cfg.x_r - cfg.x_l, cfg.dx)[1]
    # boundary contact: the reference |psi| at a boundary point reaches 1e-3
    ref = traj.reference
    contact = None
    for t in times:
        step = ref.step_of(t)
        if step in ref.fields and max(abs(ref.fields[step][0]), abs(ref.fields[step][-1])) >= 1e-3:
            contact = t
            break
    excess = 0.0
    for side in ("left", "right"):
        k = np.array(traj.metrics.k0_by_side[side])[times >= contact]
        running = np.minimum.accumulate(k)
        excess = max(excess, float(np.max(k - running)))
    acceptance.check("6  k0(t) non-increasing after contact within one k step",
                     contact is not None and excess <= dk,
                     f"contact t={contact}, max rise={excess:.3e}, dk={dk:.3e}")
    acceptance.check("6  runtime <= 2 min", secs <= 120.0, f"{secs:.1f} s")


def test_criterion_7_example3(acceptance):
    base = preset("example3")
    record = np.round(np.arange(0.0, 2.0 + 1e-9, 0.1), 10)
    fine = base.replace(dx=0.05, metrics_every=40)
    coarse = base.replace(dx=0.1, metrics_every=10)

    start = time.perf_counter()
    ref = reference_run(fine, record)
    ref_secs = time.perf_counter() - start
    start = time.perf_counter()
    run_c = simulate(coarse, reference=ref)
    secs_c = time.perf_counter() - start
    start = time.perf_counter()
    run_f = simulate(fine, reference=ref)
    secs_f = time.perf_counter() - start

    r_c = run_c.metrics.r[-1]
    acceptance.check("7  r(2) <= 0.05 at h=0.1", run_c.ok and r_c <= 0.05, f"r={r_c:.4f}")

    def probe_error(traj, label):
        return max(abs(v - ref.probe(label, t)) for t, v in traj.probes[label])

    for label in base.probes:
        e_c, e_f = probe_error(run_c, label), probe_error(run_f, label)
        acceptance.check(f"7  probe ({label.replace(':', ',')}) error decreases 0.1 -> 0.05",
                         e_f < e_c, f"{e_c:.2e} -> {e_f:.2e}")
    acceptance.check("7  runtime <= 1 min at h=0.1", secs_c <= 60.0, f"{secs_c:.1f} s")
    acceptance.check("7  runtime <= 10 min at h=0.05 (run + [0,20]^2 reference)",
                     secs_f + ref_secs <= 600.0,
                     f"run {secs_f:.0f} s + reference {ref_secs:.0f} s")
