"""
Deterministic test-function corpus: power laws with the critical Morrey
exponent, seeded band-limited trigonometric fields, indicator sums, plane
waves, and a constant control.

Randomized members derive their generator stream from (seed, crc32(id)), so
one corpus seed reproduces every member bit-for-bit regardless of evaluation
order.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .grid import Field, Grid

__all__ = [
    "CorpusFunction",
    "realize",
    "default_corpus",
    "power_law_field",
]

# Cell-averaging sub-sample counts by distance from the singularity, in units
# of the grid spacing.  Counts are even so the singular point is never hit.
_REFINE_LEVELS = ((1.5, 64), (8.0, 16), (32.0, 4), (np.inf, 2))


@dataclass(frozen=True, eq=False)
class CorpusFunction:
    """Named recipe for one corpus member."""

    id: str
    kind: str
    parameters: dict = dataclass_field(default_factory=dict)


def _rng_for(spec: CorpusFunction, seed: int) -> np.random.Generator:
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, zlib.crc32(spec.id.encode())])


def power_law_field(grid: Grid, lam: float, p: float) -> Field:
    """Cell averages of d(x, 0)^(-(n - lam)/p), the profile whose p-th power
    oscillation over balls around the origin scales exactly like r^lam.

    Point sampling would lose an O((h/r)^lam) fraction of the oscillation to
    the singular cell; averaging the profile over each cell (with sub-sampling
    refined near the origin) keeps the dyadic-radius ratios flat.
    """
    n = grid.dimension
    alpha = (n - lam) / p
    if not (0 < alpha < n):
        raise ValueError(f"power-law exponent {alpha} outside the integrable range (0, {n})")
    h = grid.spacing
    deltas = [grid.periodic_delta(c).reshape(-1) for c in grid.coordinate_arrays()]
    dist = np.abs(deltas[0]) if n == 1 else np.hypot(deltas[0], deltas[1])

    out = np.empty(grid.size)
    assigned = np.zeros(grid.size, dtype=bool)
    for cutoff, sub in _REFINE_LEVELS:
        mask = ~assigned & (dist <= cutoff * h)
        if not np.any(mask):
            continue
        offs = ((np.arange(sub) + 0.5) / sub - 0.5) * h
        if n == 1:
            pts = deltas[0][mask][:, None] + offs[None, :]
            out[mask] = np.mean(np.abs(pts) ** (-alpha), axis=1)
        else:
            px = deltas[0][mask][:, None, None] + offs[None, :, None]
            py = deltas[1][mask][:, None, None] + offs[None, None, :]
            out[mask] = np.mean((px * px + py * py) ** (-alpha / 2.0), axis=(1, 2))
        assigned |= mask
    return Field(grid, out.reshape(grid.shape))


def _trig_field(grid: Grid, band: int, rng: np.random.Generator) -> Field:
    """Real band-limited field with mean zero: random Hermitian spectrum
    supported on |k_i| <= band."""
    n = grid.points_per_axis
    k = np.fft.fftfreq(n, d=1.0 / n)
    in_band = np.abs(k) <= band
    if grid.dimension == 1:
        support = in_band
    else:
        support = in_band[:, None] & in_band[None, :]
    raw = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    raw[~support] = 0.0
    reflected = raw
    for axis in range(raw.ndim):
        reflected = np.roll(np.flip(reflected, axis=axis), 1, axis=axis)
    coeff = 0.5 * (raw + np.conj(reflected))
    coeff[(0,) * grid.dimension] = 0.0
    return Field(grid, np.fft.ifftn(coeff * grid.size).real)


def _indicator_sum_field(grid: Grid, pieces: int, rng: np.random.Generator) -> Field:
    """Sum of indicators of random periodic intervals (1D) or boxes (2D)."""
    out = np.zeros(grid.shape)
    coords = grid.coordinate_arrays()
    L = grid.domain_length
    for _ in range(pieces):
        center = rng.uniform(-L / 2, L / 2, size=grid.dimension)
        half = rng.uniform(L / 16, L / 6, size=grid.dimension)
        inside = np.ones(grid.shape, dtype=bool)
        for axis in range(grid.dimension):
            inside &= np.abs(grid.periodic_delta(coords[axis] - center[axis])) <= half[axis]
        out[inside] += 1.0
    return Field(grid, out)


def _plane_wave_field(grid: Grid, k: tuple[int, ...]) -> Field:
    xi = 2.0 * np.pi / grid.domain_length
    coords = grid.coordinate_arrays()
    phase = sum(xi * int(ki) * c for ki, c in zip(k, coords))
    return Field(grid, np.exp(1j * phase))


def realize(spec: CorpusFunction, grid: Grid, seed: int) -> Field:
    """Materialize one corpus member on a grid."""
    params = spec.parameters
    if spec.kind == "power_law":
        return power_law_field(grid, float(params["lam"]), float(params["p"]))
    if spec.kind == "trig":
        return _trig_field(grid, int(params.get("band", 16)), _rng_for(spec, seed))
    if spec.kind == "indicator_sum":
        return _indicator_sum_field(grid, int(params.get("pieces", 3)), _rng_for(spec, seed))
    if spec.kind == "plane_wave":
        k = params.get("k", (1,) * grid.dimension)
        if np.isscalar(k):
            k = (int(k),) * grid.dimension
        return _plane_wave_field(grid, tuple(int(v) for v in k))
    if spec.kind == "constant":
        return Field(grid, np.full(grid.shape, complex(params.get("value", 1.0))))
    raise ValueError(f"unknown corpus kind {spec.kind!r}")


def default_corpus(dimension: int, p: float) -> list[CorpusFunction]:
    """Eight functions: power laws at lam = n/4, n/2, 3n/4, two trig seeds,
    an indicator sum, a plane wave, and the constant control."""
    n = dimension
    members = []
    for frac in (0.25, 0.5, 0.75):
        lam = frac * n
        members.append(CorpusFunction(f"powerlaw-{frac:g}n", "power_law",
                                      {"lam": lam, "p": p}))
    members.append(CorpusFunction("trig-a", "trig", {"band": 16}))
    members.append(CorpusFunction("trig-b", "trig", {"band": 8}))
    members.append(CorpusFunction("indicators", "indicator_sum", {"pieces": 3}))
    members.append(CorpusFunction("planewave", "plane_wave", {"k": (2,) * n}))
    members.append(CorpusFunction("constant", "constant", {"value": 1.0}))
    return members
