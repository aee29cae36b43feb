"""
Periodic grid, sampled fields, discrete Fourier analysis and ball-local statistics.

The domain is the periodic box [-L/2, L/2)^n with n in {1, 2}, sampled on a
uniform lattice of N points per axis.  The discrete measure is h^n per grid
point (midpoint rule), which makes Parseval exact for trigonometric
polynomials and turns the semigroup operators into exact Fourier multipliers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid",
    "Field",
    "SpectralField",
    "Ball",
    "forward_transform",
    "inverse_transform",
    "ball_mean",
    "ball_lp_deviation",
    "make_ball",
    "ball_enumerate",
    "weighted_type_norm",
]


@dataclass(frozen=True)
class Grid:
    """Uniform lattice on the periodic box [-L/2, L/2)^n.

    Parameters
    ----------
    dimension : int
        Spatial dimension, 1 or 2.
    points_per_axis : int
        Points per axis N; a power of two, N >= 8.
    domain_length : float
        Side length L of the periodic box, centered at the origin.
    """

    dimension: int
    points_per_axis: int
    domain_length: float

    def __post_init__(self) -> None:
        if self.dimension not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.dimension}")
        n = self.points_per_axis
        if n < 8 or (n & (n - 1)) != 0:
            raise ValueError(f"points_per_axis must be a power of two >= 8, got {n}")
        if not (self.domain_length > 0):
            raise ValueError(f"domain_length must be positive, got {self.domain_length}")

    @property
    def spacing(self) -> float:
        return self.domain_length / self.points_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dimension

    @property
    def size(self) -> int:
        return self.points_per_axis**self.dimension

    @property
    def cell_measure(self) -> float:
        """Quadrature weight h^n of one grid point."""
        return self.spacing**self.dimension

    def axis_coordinates(self) -> np.ndarray:
        """Physical coordinates -L/2 + j*h along one axis."""
        n = self.points_per_axis
        return -0.5 * self.domain_length + self.spacing * np.arange(n)

    def coordinate_arrays(self) -> tuple[np.ndarray, ...]:
        """Meshgrid coordinate arrays, one per axis, each of grid shape."""
        x = self.axis_coordinates()
        if self.dimension == 1:
            return (x,)
        return tuple(np.meshgrid(x, x, indexing="ij"))

    def angular_frequencies(self) -> tuple[np.ndarray, ...]:
        """Angular frequencies xi_k = 2*pi*k/L per axis, in FFT layout."""
        xi = 2.0 * np.pi * np.fft.fftfreq(self.points_per_axis, d=self.spacing)
        if self.dimension == 1:
            return (xi,)
        return tuple(np.meshgrid(xi, xi, indexing="ij"))

    def frequency_magnitude(self) -> np.ndarray:
        """|xi| on the spectral lattice."""
        xi = self.angular_frequencies()
        if self.dimension == 1:
            return np.abs(xi[0])
        return np.hypot(xi[0], xi[1])

    def periodic_delta(self, values: np.ndarray) -> np.ndarray:
        """Wrap coordinate differences into [-L/2, L/2)."""
        L = self.domain_length
        return (values + 0.5 * L) % L - 0.5 * L

    def distance_from_origin(self) -> np.ndarray:
        """Periodic distance of every grid point from the origin."""
        deltas = [self.periodic_delta(c) for c in self.coordinate_arrays()]
        if self.dimension == 1:
            return np.abs(deltas[0])
        return np.hypot(deltas[0], deltas[1])

    def offset_distances(self) -> np.ndarray:
        """Periodic distance |wrap(o * h)| indexed by lattice offset o.

        Unlike `distance_from_origin`, which is indexed by grid position and
        is smallest at the physical origin, this array is smallest at offset
        zero; it is the right table for ball membership and for distances
        from an arbitrary grid point (roll by the point's index).
        """
        d = self.periodic_delta(self.spacing * np.arange(self.points_per_axis))
        if self.dimension == 1:
            return np.abs(d)
        return np.hypot(d[:, None], d[None, :])

    def periodic_distance(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Periodic Euclidean distance between points x and y (physical coords)."""
        d = self.periodic_delta(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
        if self.dimension == 1:
            return np.abs(d)
        return np.sqrt(np.sum(d * d, axis=-1))


def _as_locked(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples of a function on a periodic grid."""

    grid: Grid
    samples: np.ndarray

    def __post_init__(self) -> None:
        s = np.asarray(self.samples)
        if s.shape != self.grid.shape:
            raise ValueError(f"samples shape {s.shape} does not match grid shape {self.grid.shape}")
        if not np.all(np.isfinite(s.real)) or not np.all(np.isfinite(s.imag)):
            raise ValueError("field samples must be finite (no NaN/Inf)")
        object.__setattr__(self, "samples", _as_locked(s))

    @property
    def flat(self) -> np.ndarray:
        return self.samples.reshape(-1)

    def mean(self) -> complex:
        return complex(np.mean(self.samples))

    def lp_norm(self, p: float) -> float:
        """Discrete L^p norm over the whole box."""
        if p < 1:
            raise ValueError(f"p must be >= 1, got {p}")
        return float(np.sum(np.abs(self.samples) ** p) * self.grid.cell_measure) ** (1.0 / p)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.samples)))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients c_k of a field: f(x_j) = sum_k c_k e^{i xi_k . x_j}
    with x_j the physical coordinates, in DFT layout.

    Since x_j starts at -L/2 rather than 0, the coefficients differ from the
    raw DFT by the alternating phase e^{-i xi_k L/2} = (-1)^k per axis.
    Parseval reads sum |samples|^2 h^n = L^n sum |c_k|^2.
    """

    grid: Grid
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coefficients)
        if c.shape != self.grid.shape:
            raise ValueError(f"coefficient shape {c.shape} does not match grid shape {self.grid.shape}")
        object.__setattr__(self, "coefficients", _as_locked(c))


def _alternating_phase(grid: Grid) -> np.ndarray:
    s = (-1.0) ** np.arange(grid.points_per_axis)
    if grid.dimension == 1:
        return s
    return s[:, None] * s[None, :]


def forward_transform(f: Field) -> SpectralField:
    coeff = np.fft.fftn(f.samples) / f.grid.size * _alternating_phase(f.grid)
    return SpectralField(f.grid, coeff)


def inverse_transform(F: SpectralField) -> Field:
    samples = np.fft.ifftn(F.coefficients * _alternating_phase(F.grid) * F.grid.size)
    return Field(F.grid, samples)


@dataclass(frozen=True, eq=False)
class Ball:
    """Discrete periodic ball: lattice points within periodic distance radius of the center.

    `member_indices` are flat indices into the raveled sample array.
    """

    grid: Grid
    center_index: tuple[int, ...]
    radius: float
    member_indices: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if not (0 < self.radius <= self.grid.domain_length / 4):
            raise ValueError(f"radius must lie in (0, L/4], got {self.radius}")
        idx = np.asarray(self.member_indices, dtype=np.intp)
        if idx.size < 1:
            raise ValueError("ball must contain at least its center")
        idx = np.array(idx, copy=True)
        idx.setflags(write=False)
        object.__setattr__(self, "member_indices", idx)

    @property
    def count(self) -> int:
        return int(self.member_indices.size)

    @property
    def volume(self) -> float:
        return self.count * self.grid.cell_measure

    def center_point(self) -> np.ndarray:
        x0 = self.grid.axis_coordinates()
        return np.array([x0[i] for i in self.center_index])


def _member_offsets(grid: Grid, radius: float) -> np.ndarray:
    """Flat index offsets o such that |wrap(o * h)| <= radius."""
    mask = grid.offset_distances() <= radius + 1e-12 * grid.spacing
    return np.flatnonzero(mask.reshape(-1))


def _shift_indices(grid: Grid, center_index: tuple[int, ...], offsets_flat: np.ndarray) -> np.ndarray:
    n = grid.points_per_axis
    if grid.dimension == 1:
        return (offsets_flat + center_index[0]) % n
    rows = (offsets_flat // n + center_index[0]) % n
    cols = (offsets_flat % n + center_index[1]) % n
    return rows * n + cols


def make_ball(grid: Grid, center_index: tuple[int, ...] | int, radius: float) -> Ball:
    if isinstance(center_index, (int, np.integer)):
        center_index = (int(center_index),)
    center_index = tuple(int(i) % grid.points_per_axis for i in center_index)
    if len(center_index) != grid.dimension:
        raise ValueError("center index rank must equal grid dimension")
    offsets = _member_offsets(grid, radius)
    return Ball(grid, center_index, radius, _shift_indices(grid, center_index, offsets))


def ball_mean(f: Field, B: Ball) -> complex:
    """Discrete mean value of f over B."""
    if f.grid != B.grid:
        raise ValueError("field and ball live on different grids")
    return complex(np.mean(f.flat[B.member_indices]))


def ball_lp_deviation(f: Field, B: Ball, c: complex, p: float) -> float:
    """Discrete integral of |f - c|^p over B."""
    if f.grid != B.grid:
        raise ValueError("field and ball live on different grids")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    vals = np.abs(f.flat[B.member_indices] - c) ** p
    return float(np.sum(vals) * f.grid.cell_measure)


def ball_enumerate(grid: Grid, radii: list[float], center_stride: int) -> list[Ball]:
    """All balls with centers on the stride sub-lattice and each requested radius.

    Deterministic order: lexicographic center index, then ascending radius.
    """
    if center_stride < 1:
        raise ValueError(f"center_stride must be >= 1, got {center_stride}")
    h = grid.spacing
    L = grid.domain_length
    radii = sorted(float(r) for r in radii)
    for r in radii:
        if not (h < r <= L / 4):
            raise ValueError(f"radius {r} outside (h, L/4] = ({h}, {L / 4}]")

    # Offsets are shared by all balls of one radius; only the center shifts.
    offsets = {r: _member_offsets(grid, r) for r in radii}
    centers_1d = range(0, grid.points_per_axis, center_stride)
    if grid.dimension == 1:
        centers = [(i,) for i in centers_1d]
    else:
        centers = [(i, j) for i in centers_1d for j in centers_1d]

    balls = []
    for c in centers:
        for r in radii:
            balls.append(Ball(grid, c, r, _shift_indices(grid, c, offsets[r])))
    return balls


def weighted_type_norm(f: Field, p: float, beta: float) -> float:
    """Discrete norm of the polynomially weighted acting class on the box:
    (sum |f(x)|^p / (1 + d(x,0))^(n+beta) * h^n)^(1/p).
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    d = f.grid.distance_from_origin()
    w = (1.0 + d) ** (-(f.grid.dimension + beta))
    total = np.sum(np.abs(f.samples) ** p * w) * f.grid.cell_measure
    return float(total) ** (1.0 / p)
