"""
Logarithmic-in-time quadrature for dt/t integrals and the multi-scale
reconstruction identity.

The reconstruction normalization rests on the scalar integral

    integral over (0, inf) of u^2 e^(-2u) (1 - e^(-u)) du/u = 5/36,

so after the substitution u = t^m a the operator identity

    h = (36 m / 5) * integral of Q_{t^m}^2 (I - P_{t^m}) h dt/t

holds per Fourier mode with any nonzero symbol value a.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Field
from .operators import GeneratorSpec, TruncationError

__all__ = [
    "LogTimeGrid",
    "integrate_dt_over_t",
    "reproduction_constant",
    "calderon_constant_check",
    "calderon_reproduce",
]

# Span gates for the reconstruction sum: u = t^m a must reach well below and
# well above the unit scale for every nonzero symbol value on the grid.
SPAN_LOW = 0.1
SPAN_HIGH = 20.0


def reproduction_constant(m: float) -> float:
    """Normalization b_m = 36 m / 5 of the reconstruction identity."""
    return 36.0 * m / 5.0


@dataclass(frozen=True, eq=False)
class LogTimeGrid:
    """Geometric quadrature nodes for integrals against dt/t.

    Midpoint-in-log rule: K nodes at the geometric midpoints of a uniform
    partition of [log t_min, log t_max], each with weight log(rho) where
    rho = (t_max/t_min)^(1/K).  The weights sum to log(t_max/t_min) exactly.
    """

    t_min: float
    t_max: float
    count: int

    def __post_init__(self) -> None:
        if not (0 < self.t_min < self.t_max):
            raise ValueError(f"need 0 < t_min < t_max, got ({self.t_min}, {self.t_max})")
        if self.count < 16:
            raise ValueError(f"need at least 16 nodes, got {self.count}")

    @property
    def log_span(self) -> float:
        return float(np.log(self.t_max / self.t_min))

    @property
    def nodes(self) -> np.ndarray:
        step = self.log_span / self.count
        exponents = np.log(self.t_min) + step * (np.arange(self.count) + 0.5)
        return np.exp(exponents)

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.count, self.log_span / self.count)

    @classmethod
    def auto_for(cls, gen: GeneratorSpec, grid, count: int = 512) -> "LogTimeGrid":
        """Span rule: t_min^m a_max <= SPAN_LOW and t_max^m a_min >= SPAN_HIGH,
        where a_min/a_max are the extreme nonzero symbol values on the grid."""
        a = gen.symbol(grid.frequency_magnitude())
        nonzero = a[a > 0]
        a_min, a_max = float(np.min(nonzero)), float(np.max(nonzero))
        t_min = (SPAN_LOW / a_max) ** (1.0 / gen.m)
        t_max = (SPAN_HIGH / a_min) ** (1.0 / gen.m)
        return cls(t_min, t_max, count)


def integrate_dt_over_t(values: np.ndarray, grid: LogTimeGrid):
    """Quadrature of a dt/t integral from per-node integrand values."""
    values = np.asarray(values)
    if values.shape[0] != grid.count:
        raise ValueError(f"expected {grid.count} node values, got {values.shape[0]}")
    w = grid.weights
    return np.tensordot(w, values, axes=(0, 0))


def calderon_constant_check(m: float, grid: LogTimeGrid) -> tuple[float, float]:
    """Quadrature of t^(2m) e^(-2 t^m) (1 - e^(-t^m)) dt/t vs the exact 5/(36 m)."""
    if m not in (1.0, 2.0, 1, 2):
        raise ValueError(f"m must be 1 or 2, got {m}")
    t = grid.nodes
    u = t**m
    values = u * u * np.exp(-2.0 * u) * (1.0 - np.exp(-u))
    computed = float(integrate_dt_over_t(values, grid))
    exact = 1.0 / reproduction_constant(m)
    return computed, abs(computed - exact) / exact


def _span_check(gen: GeneratorSpec, field_grid, tgrid: LogTimeGrid) -> None:
    a = gen.symbol(field_grid.frequency_magnitude())
    nonzero = a[a > 0]
    a_min, a_max = float(np.min(nonzero)), float(np.max(nonzero))
    m = gen.m
    low = tgrid.t_min**m * a_max
    high = tgrid.t_max**m * a_min
    if low > SPAN_LOW or high < SPAN_HIGH:
        # Tail of the scalar reconstruction integral that the span misses.
        b = reproduction_constant(m)
        lower_tail = b / m * low**2 / 2.0
        upper_tail = b / m * np.exp(-2.0 * high) * (high + 0.5)
        raise TruncationError(
            f"time grid [{tgrid.t_min:.3e}, {tgrid.t_max:.3e}] does not span the "
            f"symbol range (t_min^m*a_max={low:.3g} > {SPAN_LOW} or "
            f"t_max^m*a_min={high:.3g} < {SPAN_HIGH})",
            float(lower_tail + upper_tail),
        )


def calderon_reproduce(gen: GeneratorSpec, h: Field, tgrid: LogTimeGrid) -> Field:
    """Reconstruct a mean-zero field from its multi-scale decomposition:
    b_m * sum_j Q_{t_j^m}^2 (I - P_{t_j^m}) h * w_j."""
    if abs(h.mean()) > 1e-12 * max(h.max_abs(), 1e-300):
        raise ValueError("input field must be mean-zero (constants are not reconstructible)")
    _span_check(gen, h.grid, tgrid)

    a = gen.symbol(h.grid.frequency_magnitude())
    m = gen.m
    multiplier = np.zeros_like(a)
    for t, w in zip(tgrid.nodes, tgrid.weights):
        u = t**m * a
        multiplier += w * u * u * np.exp(-2.0 * u) * (1.0 - np.exp(-u))
    multiplier *= reproduction_constant(m)

    coeff = np.fft.fftn(h.samples) * multiplier
    return Field(h.grid, np.fft.ifftn(coeff))
