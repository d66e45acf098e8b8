"""Acceptance criteria, one test per criterion.

Each test prints a ``[PASS]``/``[FAIL]`` line (collected in the terminal
summary) before asserting.  Run with ``pytest tests/test_acceptance.py -v``
or directly as ``python3 tests/test_acceptance.py``.
"""

import math
import sys
import time

import numpy as np
import pytest

from pikfnn import (
    Beta1Mode,
    Deep,
    PulsatingSphere,
    Sediment,
    SeriesControl,
    Shallow,
    SolverSettings,
    TrainedNetwork,
    Unbounded,
    WaveContext,
    assemble,
    direct_least_squares,
    fibonacci_sphere,
    helmholtz_residual,
    kernel_deep,
    kernel_shallow,
    kernel_unbounded,
    l2_relative_error,
    lm_fit,
    loss,
    predict,
    pulsating_sphere_pressure,
    random_cloud,
    rect_grid,
    shallow_series,
    sonar_array,
    spl,
    synthetic_field,
)
from pikfnn.pipeline import RunConfig, load_network, load_samples, save_network, save_samples, verify_command
from pikfnn.pipeline.cli import main
from pikfnn.pipeline.workflows import fit_network, provide_samples

SED = Sediment(2600.0, 1620.0)


@pytest.fixture(scope="module")
def verify_report():
    return verify_command(RunConfig())


def test_c1_free_field_sphere_reproduction(criterion):
    t0 = time.perf_counter()
    ctx = WaveContext(6000.0)
    sphere = PulsatingSphere(1.0, 1e-4, ctx)
    arr = sonar_array()
    src = fibonacci_sphere(153, 0.5, axis="x")
    grid = rect_grid(10, 100, -10, 10, 91, 21)
    w, trace = lm_fit(assemble(src, arr, Unbounded(), ctx), pulsating_sphere_pressure(arr.points, sphere), SolverSettings(tol=1e-6))
    err = l2_relative_error(predict(TrainedNetwork(Unbounded(), ctx, src, w), grid), pulsating_sphere_pressure(grid.points, sphere))
    elapsed = time.perf_counter() - t0
    ok = err <= 1e-3 and elapsed < 10.0
    criterion(1, ok, f"Lrerr={err:.3e} (<= 1e-3), runtime {elapsed:.2f} s (< 10 s), {trace.iterations} iterations")
    assert ok


def test_c2_tolerance_trend(criterion, verify_report):
    e = [c["lrerr"] for c in verify_report["table1"]]
    ok = all(b <= a for a, b in zip(e, e[1:])) and e[-1] < e[0]
    criterion(2, ok, "Lrerr over tol 1e-1..1e-6: " + ", ".join(f"{v:.3e}" for v in e))
    assert ok


def test_c3_sample_count_trend(criterion, verify_report):
    e = {c["n"]: c["lrerr"] for c in verify_report["table2"]}
    ok = e[85] > e[153] > e[221] and 5.78e-3 / 100 <= e[85] <= 5.78e-3 * 100
    criterion(3, ok, "Lrerr by N: " + ", ".join(f"{n}:{v:.3e}" for n, v in e.items()) + " (N=85 within 100x of 5.78e-3)")
    assert ok


def test_c4_optimizer_oracle_equivalence(criterion):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(20, 201))
        m = int(rng.integers(5, int(0.8 * n) + 1))
        a = (rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))) / math.sqrt(2)
        p = (rng.normal(size=n) + 1j * rng.normal(size=n)) / math.sqrt(2)
        assert np.linalg.cond(a) < 1e10
        _, trace = lm_fit(a, p)
        ref = loss(a @ direct_least_squares(a, p), p)
        worst = max(worst, abs(trace.final_loss - ref) / (1 + ref))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 5.0
    criterion(4, ok, f"max |loss_LM - loss_SVD|/(1+loss_SVD) = {worst:.2e} (<= 1e-10), runtime {elapsed:.2f} s (< 5 s)")
    assert ok


def _random_direction(rng, n):
    d = rng.normal(size=(n, 3))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def _pde_cases(rng, n=100):
    """Admissible (x, s, k) triples for each kernel, well away from sources and images."""
    h_deep, h, H = 20.0, 10.0, 20.0
    cases = {}

    s = rng.uniform(-1, 1, size=(n, 3))
    x = s + _random_direction(rng, n) * rng.uniform(0.5, 20, size=(n, 1))
    cases["unbounded"] = (x, s, rng.uniform(1, 10, n), lambda x, s, ctx: kernel_unbounded(x, s, ctx))

    s = np.column_stack([rng.uniform(-2, 2, n), rng.uniform(-2, 2, n), rng.uniform(-10, 10, n)])
    x = np.column_stack([rng.uniform(-30, 30, n), rng.uniform(-30, 30, n), rng.uniform(-15, h_deep - 1, n)])
    x[np.linalg.norm(x - s, axis=1) < 0.5] += [0.0, 0.0, -1.0]
    cases["deep"] = (x, s, rng.uniform(1, 10, n), lambda x, s, ctx: kernel_deep(x, s, ctx, h_deep))

    env = Shallow(h, H, SED, Beta1Mode.NORMAL_INCIDENCE)
    fixed = SeriesControl(0.0, 20)
    s = np.column_stack([rng.uniform(-2, 2, n), rng.uniform(-2, 2, n), rng.uniform(-8, 8, n)])
    x = np.column_stack([rng.uniform(-40, 40, n), rng.uniform(-40, 40, n), rng.uniform(-9, 9, n)])
    x[np.linalg.norm(x - s, axis=1) < 0.5, 0] += 1.0
    cases["shallow"] = (x, s, rng.uniform(1, 10, n), lambda x, s, ctx: kernel_shallow(x, s, ctx, env, fixed))
    return cases


def test_c5_pde_residual_suite(criterion):
    rng = np.random.default_rng(5)
    summary, ok = [], True
    for name, (x, s, ks, fn) in _pde_cases(rng).items():
        fine, orders = [], []
        for xi, si, k in zip(x, s, ks):
            ctx = WaveContext(k * 1500.0 / (2 * math.pi))
            ev = lambda pts: fn(pts, si, ctx)
            r_fine = helmholtz_residual(ev, xi, ctx, 1e-3)
            r_coarse = helmholtz_residual(ev, xi, ctx, 1e-2)
            fine.append(r_fine)
            orders.append(math.log10(r_coarse / r_fine))
        case_ok = max(fine) <= 1e-3 and min(orders) >= 1.6
        ok &= case_ok
        summary.append(f"{name}: max residual {max(fine):.1e}, min order {min(orders):.2f}")
    criterion(5, ok, "; ".join(summary) + " (<= 1e-3, order >= 1.6)")
    assert ok


def test_c6_boundary_condition_exactness(criterion):
    rng = np.random.default_rng(6)
    n = 1000
    ctx = WaveContext(500.0)
    h, H = 10.0, 20.0
    x = np.column_stack([rng.uniform(-100, 100, n), rng.uniform(-100, 100, n), np.full(n, h)])
    s = np.column_stack([rng.uniform(-2, 2, n), rng.uniform(-2, 2, n), rng.uniform(-9.5, 9.5, n)])
    r_direct = np.linalg.norm(x - s, axis=1)
    worst = float(np.max(np.abs(kernel_deep(x, s, ctx, h)) * r_direct))
    for mode in Beta1Mode:
        env = Shallow(h, H, SED, mode)
        for series in (SeriesControl(), SeriesControl(0.0, 0), SeriesControl(0.0, 3), SeriesControl(0.0, 30)):
            v = shallow_series(x, s, ctx, env, series).values
            worst = max(worst, float(np.max(np.abs(v) * r_direct)))
    interior = np.column_stack([rng.uniform(-100, 100, n), rng.uniform(-5, 5, n), rng.uniform(-9.9, 9.9, n)])
    env = Shallow(h, H, SED)
    bitwise = np.array_equal(
        shallow_series(interior, s, ctx, env, beta1_override=0.0).values, kernel_deep(interior, s, ctx, h)
    )
    ok = worst <= 1e-13 and bitwise
    criterion(6, ok, f"max surface |psi|/max-term = {worst:.1e} (<= 1e-13); beta1=0 series equals deep-water kernel bitwise: {bitwise}")
    assert ok


def _held_out(rng, n, z_lo, z_hi):
    return np.column_stack([rng.uniform(10, 100, n), rng.uniform(-5, 5, n), rng.uniform(z_lo, z_hi, n)])


def _round_trip_error(env, seed, z_lo, z_hi):
    ctx = WaveContext(500.0)
    arr = sonar_array()
    src = fibonacci_sphere(153, 0.5, axis="x")
    cloud = random_cloud(env, n_monopoles=5, envelope_radius=0.3, strength_scale=100.0, seed=seed)
    w, _ = lm_fit(assemble(src, arr, env, ctx), synthetic_field(cloud, arr, ctx), SolverSettings(tol=1e-12))
    pts = _held_out(np.random.default_rng(100 + seed), 200, z_lo, z_hi)
    return l2_relative_error(predict(TrainedNetwork(env, ctx, src, w), pts), synthetic_field(cloud, pts, ctx))


def test_c7_representable_field_round_trip(criterion):
    deep = _round_trip_error(Deep(20.0), 1, -15.0, 19.0)
    shallow = _round_trip_error(Shallow(10.0, 20.0, SED, Beta1Mode.NORMAL_INCIDENCE), 2, -9.5, 9.5)
    # Per-image reflection is not an exact Helmholtz solution; reported, not graded.
    per_image = _round_trip_error(Shallow(10.0, 20.0, SED, Beta1Mode.PER_IMAGE_ANGLE), 2, -9.5, 9.5)
    ok = deep <= 1e-6 and shallow <= 1e-6
    criterion(
        7,
        ok,
        f"deep Lrerr={deep:.2e}, shallow (normal incidence) Lrerr={shallow:.2e} (<= 1e-6); "
        f"per-image-angle for information: {per_image:.2e}",
    )
    assert ok


def test_c8_frequency_sweep(criterion):
    arr = sonar_array()
    src = fibonacci_sphere(153, 0.5, axis="x")
    probe = np.array([[10.0, 0.0, 0.0]])
    worst, worst_f = 0.0, None
    for f in np.arange(100.0, 6000.0 + 1e-9, 100.0):
        ctx = WaveContext(float(f))
        sphere = PulsatingSphere(1.0, 1e-4, ctx)
        w, _ = lm_fit(assemble(src, arr, Unbounded(), ctx), pulsating_sphere_pressure(arr.points, sphere))
        p = predict(TrainedNetwork(Unbounded(), ctx, src, w), probe)[0]
        d = abs(spl(p) - spl(pulsating_sphere_pressure(probe[0], sphere)))
        if d > worst:
            worst, worst_f = d, f
    ok = worst <= 0.1
    criterion(8, ok, f"60 frequencies 100-6000 Hz, worst SPL error {worst:.4f} dB at {worst_f:g} Hz (<= 0.1 dB)")
    assert ok


def test_c9_determinism_and_round_trip(criterion, tmp_path):
    cfg = tmp_path / "c9.cfg"
    cfg.write_text("frequency.hz = 6000\n", encoding="utf-8")
    runs = []
    for name in ("a", "b"):
        assert main(["--config", str(cfg), "--out", str(tmp_path / name), "fit"]) == 0
        runs.append((tmp_path / name / "network.txt").read_bytes())
    same_fit = runs[0] == runs[1]

    net, net_cfg, _ = load_network(tmp_path / "a" / "network.txt")
    run_cfg = RunConfig.load(cfg)
    net.trace = fit_network(run_cfg, provide_samples(run_cfg, run_cfg.context())).trace
    network_exact = save_network(tmp_path / "again.txt", net, net_cfg).read_bytes() == runs[0]

    shallow = RunConfig.from_text(
        "environment.variant = shallow\nenvironment.h_m = 10\nenvironment.H_m = 20\nsamples.provider = synthetic\nfrequency.hz = 500\n"
    )
    samples = provide_samples(shallow, shallow.context(), seed=3)
    path = save_samples(tmp_path / "s.csv", samples)
    back = load_samples(path)
    samples_exact = np.array_equal(back.pressures, samples.pressures) and np.array_equal(back.points.points, samples.points.points)

    ok = same_fit and network_exact and samples_exact
    criterion(9, ok, f"repeated fit bit-identical: {same_fit}; network save/load exact: {network_exact}; samples round-trip exact: {samples_exact}")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
