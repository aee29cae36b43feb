"""
Acceptance battery: one test per criterion, each printing a single
PASS/FAIL line (run with -s to see them inline).
"""

import json
import os
import time

import numpy as np

from morreykit.atoms import make_atom, dual_identity_check, pair
from morreykit.cli import _ratio_matrix, _RATIO_COLUMNS, load_config, main
from morreykit.corpus import power_law_field
from morreykit.grid import (Field, Grid, ball_lp_deviation, ball_mean,
                            make_ball)
from morreykit.norms import g_function_ratio
from morreykit.operators import (GeneratorSpec, KernelProfile, apply_P,
                                 apply_Q, cross_validate_kernel,
                                 verify_kernel_bounds)
from morreykit.quadrature import (LogTimeGrid, calderon_constant_check,
                                  calderon_reproduce)


def _report(number, description, passed, elapsed, budget):
    ok = passed and elapsed < budget
    line = (f"ACCEPTANCE {number:02d} {'PASS' if ok else 'FAIL'}: "
            f"{description} ({elapsed:.2f}s / budget {budget:.0f}s)")
    print(line, flush=True)
    assert ok, line


def _band_limited(grid, rng, band):
    k = np.fft.fftfreq(grid.points_per_axis, d=1.0 / grid.points_per_axis)
    in_band = np.abs(k) <= band
    support = in_band if grid.dimension == 1 else in_band[:, None] & in_band[None, :]
    c = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    c[~support] = 0.0
    c[(0,) * grid.dimension] = 0.0
    return Field(grid, np.fft.ifftn(c * grid.size))


def test_criterion_01_calderon_constant():
    start = time.time()
    ok = True
    for m in (1, 2):
        grid = LogTimeGrid(1e-4, 100.0 ** (1.0 / m), 2048)
        _, rel = calderon_constant_check(m, grid)
        ok &= rel < 1e-6
    _report(1, "reconstruction constant 5/(36m) within 1e-6 for m in {1,2}",
            ok, time.time() - start, 1.0)


def test_criterion_02_reproducing_formula():
    start = time.time()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for gen in (GeneratorSpec.heat(), GeneratorSpec.poisson()):
        for dimension, points in ((1, 512), (2, 128)):
            grid = Grid(dimension, points, 2.0 * np.pi)
            tgrid = LogTimeGrid.auto_for(gen, grid, 512)
            for _ in range(5):
                f = _band_limited(grid, rng, band=points // 8)
                rebuilt = calderon_reproduce(gen, f, tgrid)
                err = (Field(grid, rebuilt.samples - f.samples).lp_norm(2)
                       / f.lp_norm(2))
                worst = max(worst, err)
    _report(2, f"20-field reconstruction, worst relative L2 error {worst:.2e} <= 1e-3",
            worst <= 1e-3, time.time() - start, 30.0)


def test_criterion_03_structure_identities():
    start = time.time()
    grid = Grid(1, 256, 2.0 * np.pi)
    rng = np.random.default_rng(3)
    f = _band_limited(grid, rng, 32)
    g = _band_limited(grid, rng, 32)
    ones = Field(grid, np.ones(grid.shape))
    worst = 0.0
    for gen in (GeneratorSpec.heat(), GeneratorSpec.poisson()):
        t1, t2 = 0.04, 0.09
        law = np.max(np.abs(apply_P(gen, t1, apply_P(gen, t2, f)).samples
                            - apply_P(gen, t1 + t2, f).samples))
        comm = np.max(np.abs(apply_P(gen, t2, apply_P(gen, t1, f)).samples
                             - apply_P(gen, t1, apply_P(gen, t2, f)).samples))
        sym = abs(pair(apply_P(gen, t1, f), g) - pair(f, apply_P(gen, t1, g)))
        cons = np.max(np.abs(apply_P(gen, t1, ones).samples - 1.0))
        qone = np.max(np.abs(apply_Q(gen, t1, ones).samples))
        a = gen.symbol(grid.frequency_magnitude())
        oracle = np.fft.ifftn(np.fft.fftn(f.samples)
                              * (t1 * a) * (t2 * a) * np.exp(-(t1 + t2) * a))
        comp = np.max(np.abs(apply_Q(gen, t1, apply_Q(gen, t2, f)).samples - oracle))
        worst = max(worst, law, comm, float(sym), cons, qone, comp)
    _report(3, f"semigroup/commutation/pairing/conservation/composition, worst gap {worst:.2e}",
            worst <= 1e-10, time.time() - start, 5.0)


def test_criterion_04_variance_identity():
    start = time.time()
    grid = Grid(1, 256, 2.0 * np.pi)
    gen = GeneratorSpec.poisson()
    rng = np.random.default_rng(4)
    f = _band_limited(grid, rng, 32)
    worst = 0.0
    t_values = np.logspace(-2, 0, 10)
    positions = np.arange(0, 256, 256 // 100)[:100]
    for t in t_values:
        smoothed = apply_P(gen, t, f)
        p_sq = apply_P(gen, t, Field(grid, np.abs(f.samples) ** 2))
        for pos in positions:
            centered = Field(grid, np.abs(f.samples - smoothed.flat[pos]) ** 2)
            lhs = apply_P(gen, t, centered).flat[pos].real
            rhs = p_sq.flat[pos].real - abs(smoothed.flat[pos]) ** 2
            worst = max(worst, abs(lhs - rhs))
    _report(4, f"pointwise variance identity on 1000 (x,t) samples, worst gap {worst:.2e}",
            worst <= 1e-10, time.time() - start, 5.0)


def test_criterion_05_exact_square_function_ratios():
    start = time.time()
    grid = Grid(1, 512, 2.0 * np.pi)
    rng = np.random.default_rng(5)
    f = _band_limited(grid, rng, 64)
    worst = 0.0
    for gen in (GeneratorSpec.heat(), GeneratorSpec.poisson()):
        a = gen.symbol(grid.frequency_magnitude())
        nonzero = a[a > 0]
        tgrid = LogTimeGrid(1e-3 / float(nonzero.max()),
                            30.0 / float(nonzero.min()), 512)
        err_g = abs(g_function_ratio(f, gen, 2.0, tgrid) - 0.5)
        err_ip = abs(g_function_ratio(f, gen, 2.0, tgrid, variant="q_ip")
                     - np.sqrt(13.0) / 12.0)
        worst = max(worst, err_g, err_ip)
    _report(5, f"L2 ratios 1/2 and sqrt(13)/12, worst deviation {worst:.2e}",
            worst <= 1e-4, time.time() - start, 5.0)


def test_criterion_06_kernel_cross_validation():
    start = time.time()
    grid = Grid(1, 512, 2.0 * np.pi)
    rng = np.random.default_rng(6)
    f = Field(grid, rng.normal(size=512) + 1j * rng.normal(size=512))
    err_heat = cross_validate_kernel(GeneratorSpec.heat(),
                                     KernelProfile("heat", 1), 0.01, f)
    err_poisson = cross_validate_kernel(GeneratorSpec.poisson(),
                                        KernelProfile("poisson", 1), 0.05, f)
    ok = err_heat <= 1e-6 and err_poisson <= 1e-4
    _report(6, f"multiplier vs periodized kernel: heat {err_heat:.2e} <= 1e-6, "
               f"poisson {err_poisson:.2e} <= 1e-4",
            ok, time.time() - start, 10.0)


def test_criterion_07_kernel_bounds():
    start = time.time()
    t_set = np.geomspace(0.02, 2.0, 20)
    x_set = np.linspace(-4.0, 4.0, 501)
    ok = True
    for kind in ("heat", "poisson"):
        for dim in (1, 2):
            result = verify_kernel_bounds(KernelProfile(kind, dim), t_set, x_set)
            ok &= result["sample_count"] >= 10_000
            ok &= result["all_pass"]
            ok &= all(np.isfinite(b["constant"]) for b in result["bounds"])
    _report(7, "kernel bounds hold on 10^4-point samples with finite constants",
            ok, time.time() - start, 10.0)


def test_criterion_08_morrey_scaling():
    start = time.time()
    grid = Grid(1, 512, 1.0)
    lam, p = 0.5, 1.0
    f = power_law_field(grid, lam, p)
    origin = grid.points_per_axis // 2
    values = []
    r = 8 * grid.spacing
    while r <= grid.domain_length / 8 + 1e-12:
        B = make_ball(grid, origin, r)
        values.append(ball_lp_deviation(f, B, ball_mean(f, B), p) / r**lam)
        r *= 2
    spread = max(values) / min(values)
    _report(8, f"power-law oscillation flat across dyadic radii, max/min {spread:.3f}",
            spread < 1.10, time.time() - start, 10.0)


def test_criterion_09_equivalence_bands():
    start = time.time()
    config = load_config(None, 0)
    rows = _ratio_matrix(config, Grid(1, 256, config["grid"]["domain_length"]), 1)
    refined = json.loads(json.dumps(config))
    refined["grid"]["points_per_axis"] = 512
    rows2 = _ratio_matrix(refined, Grid(1, 512, config["grid"]["domain_length"]), 1)
    ok = True
    for column in _RATIO_COLUMNS:
        base = [r[column] for r in rows if column in r]
        fine = [r[column] for r in rows2 if column in r]
        ok &= all(np.isfinite(v) and v > 0 for v in base + fine)
        drift = abs(max(fine) - max(base)) / max(base)
        ok &= drift < 0.20
    _report(9, "corpus equivalence ratios finite/positive, max drift < 20% at 2N",
            ok, time.time() - start, 300.0)


def test_criterion_10_dual_identity():
    start = time.time()
    grid = Grid(1, 512, 2.0 * np.pi)
    rng = np.random.default_rng(10)
    from morreykit.norms import MorreyParams
    params = MorreyParams(2.0, 0.5)
    worst = 0.0
    for gen in (GeneratorSpec.heat(), GeneratorSpec.poisson()):
        tgrid = LogTimeGrid.auto_for(gen, grid, 512)
        for _ in range(10):
            f = _band_limited(grid, rng, 64)
            center = int(rng.integers(0, 512))
            radius = float(rng.integers(8, 120)) * grid.spacing
            ball = make_ball(grid, center, radius)
            atom = make_atom(_band_limited(grid, rng, 64), ball, 2.0, params.lam)
            lhs, rhs, gap = dual_identity_check(f, atom.field, ball, gen,
                                                params, tgrid)
            worst = max(worst, gap / max(abs(lhs), abs(rhs), 1e-300))
    _report(10, f"dual pairing identity, worst relative gap {worst:.2e} <= 1e-3",
            worst <= 1e-3, time.time() - start, 60.0)


def test_criterion_11_atom_validity():
    start = time.time()
    grid = Grid(1, 256, 2.0 * np.pi)
    rng = np.random.default_rng(11)
    hn = grid.cell_measure
    ok = True
    for _ in range(100):
        center = int(rng.integers(0, 256))
        radius = float(rng.integers(6, 60)) * grid.spacing
        ball = make_ball(grid, center, radius)
        profile = _band_limited(grid, rng, 32)
        atom = make_atom(profile, ball, 2.0, 0.5)
        try:
            atom.validate()
        except AssertionError:
            ok = False
        ok &= atom.size_defect() <= 1e-12
        f = _band_limited(grid, rng, 32)
        lhs = abs(pair(f, atom.field))
        fp = float(np.sum(np.abs(f.flat[ball.member_indices]) ** 2) * hn) ** 0.5
        gq = float(np.sum(np.abs(atom.field.flat) ** 2) * hn) ** 0.5
        ok &= lhs <= fp * gq + 1e-12
    _report(11, "100 atoms satisfy support/cancellation/size with exact scaling",
            ok, time.time() - start, 5.0)


def test_criterion_12_determinism(tmp_path):
    start = time.time()
    config = {"grid": {"dimension": 1, "points_per_axis": 64,
                       "domain_length": 2 * np.pi},
              "time": {"count": 64}}
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config))
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    code1 = main(["norms", "--config", str(config_path), "--out", out1, "--seed", "7"])
    code2 = main(["norms", "--config", str(config_path), "--out", out2, "--seed", "7"])
    ok = code1 == 0 and code2 == 0
    names = sorted(os.listdir(out1))
    ok &= names == sorted(os.listdir(out2))
    for name in names:
        with open(os.path.join(out1, name), "rb") as a, \
             open(os.path.join(out2, name), "rb") as b:
            ok &= a.read() == b.read()
    _report(12, "norms command rerun is byte-identical for fixed config+seed",
            ok, time.time() - start, 60.0)
