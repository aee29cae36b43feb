import numpy as np
import pytest

from morreykit.grid import Field, Grid
from morreykit.operators import GeneratorSpec, TruncationError
from morreykit.quadrature import (LogTimeGrid, calderon_constant_check,
                                  calderon_reproduce, integrate_dt_over_t,
                                  reproduction_constant)


def test_reproduction_constant_values():
    assert reproduction_constant(1) == pytest.approx(36.0 / 5.0)
    assert reproduction_constant(2) == pytest.approx(72.0 / 5.0)


def test_log_time_grid_weights_sum_exactly():
    grid = LogTimeGrid(1e-4, 10.0, 200)
    assert np.sum(grid.weights) == pytest.approx(np.log(10.0 / 1e-4), rel=1e-15)
    nodes = grid.nodes
    assert nodes[0] > grid.t_min and nodes[-1] < grid.t_max
    # Geometric midpoints: constant ratio between consecutive nodes.
    ratios = nodes[1:] / nodes[:-1]
    assert np.allclose(ratios, ratios[0], rtol=1e-12)


def test_log_time_grid_validation():
    with pytest.raises(ValueError):
        LogTimeGrid(1.0, 0.5, 64)
    with pytest.raises(ValueError):
        LogTimeGrid(0.1, 1.0, 8)


def test_integrate_dt_over_t_scalar_example():
    # integral of t e^{-2t} dt/t over (0, inf) = 1/2.
    grid = LogTimeGrid(1e-8, 50.0, 2048)
    values = grid.nodes * np.exp(-2.0 * grid.nodes)
    assert integrate_dt_over_t(values, grid) == pytest.approx(0.5, abs=1e-6)


def test_integrate_shape_mismatch():
    grid = LogTimeGrid(0.01, 1.0, 32)
    with pytest.raises(ValueError):
        integrate_dt_over_t(np.zeros(31), grid)


def test_calderon_constant_both_orders():
    for m in (1, 2):
        grid = LogTimeGrid(1e-4, 100.0 ** (1.0 / m), 2048)
        computed, rel = calderon_constant_check(m, grid)
        assert rel < 1e-6
        assert computed == pytest.approx(5.0 / (36.0 * m), rel=1e-6)
    with pytest.raises(ValueError):
        calderon_constant_check(3, grid)


@pytest.mark.parametrize("kind", ["heat", "poisson"])
def test_reproduce_eigenfunction(kind):
    gen = GeneratorSpec.from_name(kind)
    g = Grid(1, 128, 2 * np.pi)
    x = g.axis_coordinates()
    f = Field(g, np.exp(5j * x))
    tgrid = LogTimeGrid.auto_for(gen, g, 512)
    rebuilt = calderon_reproduce(gen, f, tgrid)
    err = np.max(np.abs(rebuilt.samples - f.samples))
    assert err < 1e-3


def test_reproduce_requires_mean_zero():
    gen = GeneratorSpec.heat()
    g = Grid(1, 64, 2 * np.pi)
    f = Field(g, np.ones(64))
    tgrid = LogTimeGrid.auto_for(gen, g, 64)
    with pytest.raises(ValueError):
        calderon_reproduce(gen, f, tgrid)


def test_span_violation_raises_truncation_error():
    gen = GeneratorSpec.heat()
    g = Grid(1, 64, 2 * np.pi)
    x = g.axis_coordinates()
    f = Field(g, np.sin(x))
    narrow = LogTimeGrid(0.5, 1.0, 64)
    with pytest.raises(TruncationError) as excinfo:
        calderon_reproduce(gen, f, narrow)
    assert excinfo.value.estimate > 0


def test_auto_span_covers_symbol_range():
    for kind in ("heat", "poisson"):
        gen = GeneratorSpec.from_name(kind)
        g = Grid(1, 128, 2 * np.pi)
        tgrid = LogTimeGrid.auto_for(gen, g, 64)
        a = gen.symbol(g.frequency_magnitude())
        nonzero = a[a > 0]
        assert tgrid.t_min**gen.m * nonzero.max() <= 0.1 + 1e-12
        assert tgrid.t_max**gen.m * nonzero.min() >= 20.0 - 1e-9
