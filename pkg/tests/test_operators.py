import numpy as np
import pytest

from morreykit.grid import Field, Grid
from morreykit.operators import (GeneratorSpec, KernelProfile, TruncationError,
                                 apply_P, apply_Q, cross_validate_kernel,
                                 kernel_eval, kernel_t_derivative,
                                 periodized_kernel, poisson_constant,
                                 verify_kernel_bounds)


@pytest.fixture(params=["heat", "poisson"])
def gen(request):
    return GeneratorSpec.from_name(request.param)


def random_field(grid, seed=0):
    rng = np.random.default_rng(seed)
    return Field(grid, rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape))


def test_generator_spec_parameters():
    heat, poisson = GeneratorSpec.heat(), GeneratorSpec.poisson()
    assert heat.m == 2 and poisson.m == 1
    assert np.isinf(heat.theta) and poisson.theta == 1.0
    xi = np.array([0.0, 2.0, 3.0])
    assert np.allclose(heat.symbol(xi), xi**2)
    assert np.allclose(poisson.symbol(xi), xi)
    with pytest.raises(ValueError):
        GeneratorSpec.from_name("wave")


def test_semigroup_law_and_identity(gen):
    g = Grid(1, 64, 2 * np.pi)
    f = random_field(g)
    assert apply_P(gen, 0.0, f) .samples == pytest.approx(f.samples)
    lhs = apply_P(gen, 0.2, apply_P(gen, 0.5, f))
    rhs = apply_P(gen, 0.7, f)
    assert np.allclose(lhs.samples, rhs.samples, atol=1e-12)
    with pytest.raises(ValueError):
        apply_P(gen, -0.1, f)
    with pytest.raises(ValueError):
        apply_Q(gen, 0.0, f)


def test_conservation_and_q_cancellation(gen):
    g = Grid(2, 16, 3.0)
    ones = Field(g, np.ones(g.shape))
    assert np.allclose(apply_P(gen, 0.4, ones).samples, 1.0, atol=1e-14)
    assert np.max(np.abs(apply_Q(gen, 0.4, ones).samples)) < 1e-14


def test_eigenfunction_decay(gen):
    g = Grid(1, 64, 2 * np.pi)
    x = g.axis_coordinates()
    f = Field(g, np.exp(3j * x))
    a = gen.symbol(np.array([3.0]))[0]
    t = 0.13
    assert np.allclose(apply_P(gen, t, f).samples, np.exp(-t * a) * f.samples,
                       atol=1e-13)
    assert np.allclose(apply_Q(gen, t, f).samples,
                       t * a * np.exp(-t * a) * f.samples, atol=1e-13)


def test_poisson_constant_values():
    # Gamma((n+1)/2) / pi^((n+1)/2) for n = 1, 2.
    assert poisson_constant(1) == pytest.approx(1.0 / np.pi, rel=1e-14)
    assert poisson_constant(2) == pytest.approx(1.0 / (2.0 * np.pi), rel=1e-14)


def test_kernel_closed_forms():
    t = 0.3
    x = np.array([0.0, 0.5, 1.7])
    heat1 = KernelProfile("heat", 1)
    expect = (4 * np.pi * t) ** -0.5 * np.exp(-(x**2) / (4 * t))
    assert np.allclose(kernel_eval(heat1, t, x), expect, rtol=1e-14)

    poisson2 = KernelProfile("poisson", 2)
    expect = poisson_constant(2) * t / (t**2 + x**2) ** 1.5
    assert np.allclose(kernel_eval(poisson2, t, x), expect, rtol=1e-14)


def test_kernel_t_derivative_matches_finite_difference():
    # kernel_t_derivative returns the scaled derivative t * d/dt of p_t.
    x = np.linspace(0.0, 2.0, 41)
    eps = 1e-6
    for kind in ("heat", "poisson"):
        for dim in (1, 2):
            profile = KernelProfile(kind, dim)
            t = 0.4
            analytic = kernel_t_derivative(profile, t, x)
            numeric = t * (kernel_eval(profile, t + eps, x)
                           - kernel_eval(profile, t - eps, x)) / (2 * eps)
            assert np.allclose(analytic, numeric, rtol=1e-6, atol=1e-9)


def test_periodized_kernel_has_unit_mass():
    # The discrete mass of the sampled periodization equals 1 up to sampling
    # aliasing of the free-space kernel: negligible for the Gaussian, about
    # 2 e^{-t pi/h} for the slowly decaying Poisson spectrum.
    for kind, t in (("heat", 0.05), ("poisson", 0.05)):
        for dim, n in ((1, 256), (2, 64)):
            g = Grid(dim, n, 2 * np.pi)
            profile = KernelProfile(kind, dim)
            k = periodized_kernel(profile, t, g)
            mass = np.sum(k) * g.cell_measure
            # Gaussian: essentially exact.  Poisson: limited by sampling
            # aliasing (~2 e^{-t pi/h}) plus the image-sum truncation floor.
            alias = 1e-12 if kind == "heat" else 8.0 * np.exp(-t * np.pi / g.spacing) + 1e-5
            assert mass == pytest.approx(1.0, abs=max(alias, 1e-12))


def test_periodized_kernel_peak_at_zero_offset():
    g = Grid(1, 256, 2 * np.pi)
    for kind in ("heat", "poisson"):
        k = periodized_kernel(KernelProfile(kind, 1), 0.05, g)
        assert int(np.argmax(k)) == 0


def test_cross_validation_heat_tight():
    g = Grid(1, 512, 2 * np.pi)
    f = random_field(g, seed=3)
    err = cross_validate_kernel(GeneratorSpec.heat(), KernelProfile("heat", 1), 0.01, f)
    assert err < 1e-6


def test_cross_validation_poisson():
    g = Grid(1, 512, 2 * np.pi)
    f = random_field(g, seed=4)
    err = cross_validate_kernel(GeneratorSpec.poisson(), KernelProfile("poisson", 1), 0.05, f)
    assert err < 1e-4


def test_cross_validation_2d():
    g = Grid(2, 64, 2 * np.pi)
    f = random_field(g, seed=5)
    err = cross_validate_kernel(GeneratorSpec.heat(), KernelProfile("heat", 2), 0.05, f)
    assert err < 1e-8


def test_verify_kernel_bounds_all_pass():
    t_set = np.array([0.05, 0.2, 1.0])
    x_set = np.linspace(-3.0, 3.0, 101)
    for kind in ("heat", "poisson"):
        for dim in (1, 2):
            result = verify_kernel_bounds(KernelProfile(kind, dim), t_set, x_set)
            assert result["all_pass"], result
            for bound in result["bounds"]:
                assert np.isfinite(bound["constant"])
                assert bound["violations"] == 0


def test_truncation_error_carries_estimate():
    err = TruncationError("boom", 0.25)
    assert err.estimate == 0.25
    assert "boom" in str(err)
