"""Ten gated end-to-end checks, one verdict line per shipping requirement.

Each test drives the same entry points a user would: the experiment
harness for the tabulated studies and the library API for the kernel
calculus, dissipativity, and stability properties.  Gates are the
stated release tolerances; measured margins are printed so a verbose
run doubles as a report.
"""

import sys
import os
import time

import numpy as np
import pytest
from scipy.integrate import quad

sys.path.insert(0, os.path.dirname(__file__))
from _talbot import sigma_reference  # noqa: E402

from nrbk.cli import benchmark_convolution, recursive_convolution, run_experiment
from nrbk.kernel import KernelParams, build_kernel, eval_omega, eval_sigma
from nrbk.solver import (ModalProblem, assemble, energy_diagnostics,
                         solve_mode)
from nrbk.specfun import BesselOrder, find_zeros, zero_count

RADIUS = 3.0
SPEED = 5.0
AXIS_CROSSING = 0.66274


def make_kernel(dim, n, b=RADIUS, c=SPEED):
    return build_kernel(KernelParams(dim=dim, n=n, radius=b, speed=c))


def test_01_kernel_sample_table(tmp_path):
    start = time.perf_counter()
    report = run_experiment("table1", out_dir=str(tmp_path), threads=1)
    elapsed = time.perf_counter() - start
    assert report["passed"] is True
    assert report["results"]["compared_cells"] == 20
    assert report["results"]["max_rel_error"] <= 1e-8
    assert elapsed < 60.0
    print("kernel sample table: max rel error %.3e in %.1f s"
          % (report["results"]["max_rel_error"], elapsed))


def test_02_zero_sets():
    worst = 0.0
    for n in range(65):
        for order in (BesselOrder.integer(n), BesselOrder.half(n)):
            zs = find_zeros(order)
            assert len(zs) == zero_count(order)
            assert np.array_equal(zs.zeros, np.conj(zs.zeros[::-1]))
            if len(zs):
                worst = max(worst, float(zs.residuals.max()))
    assert worst < 1e-12

    lone = find_zeros(BesselOrder.half(1)).zeros
    assert lone.size == 1
    assert abs(lone[0] - (-1.0)) <= 1e-12

    # leftmost zero sits on the negative real axis near -0.66274 n
    for n in (10, 30, 60):
        up = find_zeros(BesselOrder.integer(n)).upper_half()
        leftmost = up[np.argmin(up.real)]
        assert abs(leftmost.real + AXIS_CROSSING * n) <= 0.05 * AXIS_CROSSING * n
    print("zero sets: 4128 zeros to n=64, max residual %.3e" % worst)


@pytest.mark.xfail(strict=True, reason=(
    "the stated imaginary-axis crossing 0.66274*n*i contradicts the "
    "computed curve: the extreme zeros approach n*i from below (0.776n, "
    "0.898n, 0.937n for n=10,30,60) and a curve ending near 0.66274*n*i "
    "could not hold the required zero counts; only the real-axis "
    "crossing carries the 0.66274 constant"))
def test_02_imaginary_axis_crossing_constant():
    for n in (10, 30, 60):
        up = find_zeros(BesselOrder.integer(n)).upper_half()
        extreme = up[np.argmax(up.imag)]
        assert abs(extreme - 1j * AXIS_CROSSING * n) <= 0.05 * AXIS_CROSSING * n


def test_03_boundary_rule_residuals(tmp_path):
    start = time.perf_counter()
    report = run_experiment("nrbc-accuracy", out_dir=str(tmp_path), threads=1)
    elapsed = time.perf_counter() - start
    assert report["passed"] is True
    assert report["results"]["cases"] == 4
    assert report["results"]["max_summed_residual"] <= 1e-9
    assert elapsed < 300.0
    print("boundary rule residuals: max summed %.3e in %.0f s"
          % (report["results"]["max_summed_residual"], elapsed))


def test_04_temporal_orders(tmp_path):
    report = run_experiment("time-convergence", out_dir=str(tmp_path),
                            threads=4)
    assert report["passed"] is True
    assert report["results"]["order_min"] >= 1.95
    assert report["results"]["order_max"] <= 2.05
    print("temporal orders: all %d in [%.4f, %.4f]"
          % (report["results"]["orders_checked"],
             report["results"]["order_min"],
             report["results"]["order_max"]))


def test_05_spatial_error_drop(tmp_path):
    report = run_experiment("space-convergence", out_dir=str(tmp_path),
                            threads=4)
    assert report["passed"] is True
    assert report["results"]["min_drop_8_to_16"] >= 1e3
    assert report["results"]["finest_l2_error"] <= 1e-6
    print("spatial error drop: 8->16 factor %.0f, finest %.3e"
          % (report["results"]["min_drop_8_to_16"],
             report["results"]["finest_l2_error"]))


def test_06_convolution_equivalence():
    dt = 1e-3
    grid = np.arange(10_001) * dt
    signal = np.sin(2.0 * grid) + 0.25 * np.cos(5.0 * grid)
    worst_dev = 0.0
    slopes = []
    sizes = (1_000, 10_000, 100_000)
    long_grid = np.arange(sizes[-1] + 1) * dt
    long_signal = np.sin(2.0 * long_grid) + 0.25 * np.cos(5.0 * long_grid)
    for dim in (2, 3):
        for n in (0, 3, 9):
            K = make_kernel(dim, n)
            worst_dev = max(worst_dev,
                            benchmark_convolution(K, signal, dt)["deviation"])
            seconds = []
            for m in sizes:
                runs = []
                for _ in range(3 if m < sizes[-1] else 1):
                    t0 = time.perf_counter()
                    recursive_convolution(K, long_signal[:m + 1], dt)
                    runs.append(time.perf_counter() - t0)
                seconds.append(np.median(runs))
            slopes.append(np.polyfit(np.log(sizes), np.log(seconds), 1)[0])
    assert worst_dev <= 1e-7
    assert all(0.9 <= s <= 1.1 for s in slopes)
    print("convolution equivalence: max deviation %.3e, slopes %.2f..%.2f"
          % (worst_dev, min(slopes), max(slopes)))


def test_07_kernel_laplace_cross_check():
    times = (0.1, 0.25, 0.5, 1.0, 1.6, 2.0)
    worst = 0.0
    for dim in (2, 3):
        for n in (0, 1, 5):
            K = make_kernel(dim, n)
            for t in times:
                ours = eval_sigma(K, t)
                ref = sigma_reference(dim, n, RADIUS, SPEED, t)
                if dim == 3 and n == 0:
                    # the spherical monopole kernel vanishes identically
                    assert ours == 0.0
                    assert abs(ref) < 1e-10
                    continue
                worst = max(worst, abs(ours - ref) / abs(ref))
    assert worst <= 1e-6
    print("independent inversion cross-check: max rel diff %.3e" % worst)


def test_08_omega_sigma_integral_identity():
    worst = 0.0
    for dim in (2, 3):
        for n in (0, 1, 5, 9):
            K = make_kernel(dim, n)
            for t in (0.5, 2.0):
                integral, err = quad(lambda u: eval_sigma(K, u), 0.0, t,
                                     epsabs=1e-11, epsrel=1e-11, limit=400)
                assert err < 1e-10
                want = -(dim - 1) * SPEED / (2.0 * RADIUS) + SPEED * integral
                got = eval_omega(K, t)
                worst = max(worst, abs(got - want) / max(1.0, abs(want)))
    assert worst <= 1e-8
    print("omega-sigma calculus: max defect %.3e" % worst)


def _random_piecewise_linear(rng, grid, zero_start):
    knots = np.sort(rng.uniform(grid[0], grid[-1], 6))
    knots = np.concatenate([[grid[0]], knots, [grid[-1]]])
    vals = rng.uniform(-1.0, 1.0, knots.size)
    if zero_start:
        vals[0] = 0.0
    return np.interp(grid, knots, vals)


def _trap_convolve(kvals, v, dt):
    full = np.convolve(kvals, v)[:v.size]
    full -= 0.5 * kvals * v[0]
    full -= 0.5 * kvals[0] * v
    return dt * full


def test_09_dissipativity_inequalities():
    cases = [(2, 0), (2, 3), (2, 9), (3, 1), (3, 5)]
    b, c = RADIUS, SPEED
    T = 4.0 * b / c
    m = 4000
    grid = np.linspace(0.0, T, m + 1)
    dt = T / m
    rng = np.random.default_rng(20_26)
    worst_omega = worst_sigma = np.inf
    for dim, n in cases:
        K = make_kernel(dim, n)
        om = eval_omega(K, grid)
        sg = eval_sigma(K, grid)
        for _ in range(20):
            # time-integrated [omega * v] v stays below the energy of v
            v = _random_piecewise_linear(rng, grid, zero_start=False)
            conv = _trap_convolve(om, v, dt)
            norm = np.trapezoid(v * v, dx=dt)
            slack = norm - np.trapezoid(conv * v, dx=dt)
            assert slack >= -1e-8 * norm
            worst_omega = min(worst_omega, slack / norm)

            # with v(0)=0: int [sigma * v] v' <= |v'|^2/c + (d-1) v(T)^2/(4b)
            v = _random_piecewise_linear(rng, grid, zero_start=True)
            dv = np.gradient(v, dt)
            conv = _trap_convolve(sg, v, dt)
            norm = np.trapezoid(dv * dv, dx=dt)
            bound = norm / c + (dim - 1) / (4.0 * b) * v[-1] ** 2
            slack = bound - np.trapezoid(conv * dv, dx=dt)
            assert slack >= -1e-8 * norm
            worst_sigma = min(worst_sigma, slack / norm)
    print("dissipativity: 100+100 signals, min scaled slack %.3e / %.3e"
          % (worst_omega, worst_sigma))


def _random_initial(rng, inner, outer):
    amps = rng.uniform(-1.0, 1.0, 4)
    width = outer - inner

    def shape(r):
        x = (np.asarray(r) - inner) / width
        return sum(a * np.sin((k + 1) * np.pi * x)
                   for k, a in enumerate(amps))

    return shape


def test_10_energy_stability():
    rng = np.random.default_rng(4242)
    inner, outer = 2.0, 5.0
    growth = 0.0
    for dim, mode in ((2, 2), (3, 1)):
        prob = ModalProblem(mode=mode, dim=dim, inner_radius=inner,
                            outer_radius=outer, speed=SPEED,
                            initial_value=_random_initial(rng, inner, outer),
                            initial_slope=_random_initial(rng, inner, outer))
        sol = solve_mode(prob, 24, 5e-4, 10_000 * 5e-4, record_energy=True)
        series = energy_diagnostics(sol)
        assert series[0] > 0.0
        assert series.max() <= series[0] * (1.0 + 1e-6)
        growth = max(growth, series.max() / series[0] - 1.0)

    # two orders of magnitude past the explicit stability scale: the
    # march must stay finite and non-increasing in energy
    prob = ModalProblem(mode=2, dim=2, inner_radius=inner,
                        outer_radius=outer, speed=SPEED,
                        initial_value=_random_initial(rng, inner, outer))
    op = assemble(prob, 24)
    grad2 = op.gradient_scale ** 2
    stiff = grad2 * (op.stiffness + prob.angular_factor * op.fractional)
    top = np.linalg.eigvalsh(np.linalg.solve(op.mass, stiff)).max()
    big_dt = 100.0 * 2.0 / np.sqrt(top)
    sol = solve_mode(prob, 24, big_dt, 10_000 * big_dt, operator=op,
                     record_energy=True)
    series = energy_diagnostics(sol)
    assert np.all(np.isfinite(series))
    assert series.max() <= series[0] * (1.0 + 1e-6)
    print("energy stability: max growth %.3e, large-step march finite"
          % growth)
