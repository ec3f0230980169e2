"""Box domains, uniform tensor grids, grid functions, and piecewise-constant densities.

Strategies, losses, scores, and noise all live on the same uniform grid over a
box domain; integration is the midpoint rule, and sampling from a density is
categorical over cells followed by a uniform draw inside the chosen cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, GridMismatchError, ResolutionError

__all__ = [
    "BoxDomain",
    "Grid",
    "GridFunction",
    "Density",
    "ensure_same_grid",
    "integrate",
    "pair",
    "sup_norm",
    "l1_distance",
    "tv_distance",
    "sample",
    "eval_at",
    "ball_patch",
]


@dataclass(frozen=True, eq=False)
class BoxDomain:
    """Axis-aligned box X = prod_k [lower_k, upper_k] in R^d."""

    lower: np.ndarray
    upper: np.ndarray

    def __init__(self, lower, upper):
        lo = np.atleast_1d(np.asarray(lower, dtype=float))
        hi = np.atleast_1d(np.asarray(upper, dtype=float))
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise DomainError("lower and upper must be 1-d arrays of equal length")
        if lo.size < 1:
            raise DomainError("domain dimension must be >= 1")
        if not np.all(np.isfinite(lo)) or not np.all(np.isfinite(hi)):
            raise DomainError("domain bounds must be finite")
        if not np.all(hi > lo):
            raise DomainError("every axis must have strictly positive length")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def lengths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.lengths))

    def contains(self, x) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != self.lower.shape:
            return False
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform tensor grid with ``n`` cells per axis over a box domain.

    Cell centers are strictly interior; the cell volume ``w`` satisfies
    (number of cells) * w == volume(X) up to floating tolerance.
    """

    domain: BoxDomain
    n: int
    _centers: np.ndarray = field(default=None, repr=False, compare=False)

    def __init__(self, domain: BoxDomain, n: int):
        if int(n) < 1:
            raise DomainError("cells per axis must be >= 1")
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "_centers", None)

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dim

    @property
    def n_cells(self) -> int:
        return self.n ** self.dim

    @property
    def steps(self) -> np.ndarray:
        return self.domain.lengths / self.n

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.steps))

    @property
    def cell_diameter(self) -> float:
        return float(np.linalg.norm(self.steps))

    @property
    def centers(self) -> np.ndarray:
        """Cell centers as an (n_cells, d) array, C-ordered over axes."""
        if self._centers is None:
            axes = [
                self.domain.lower[k] + (np.arange(self.n) + 0.5) * self.steps[k]
                for k in range(self.dim)
            ]
            mesh = np.meshgrid(*axes, indexing="ij")
            centers = np.stack([m.ravel() for m in mesh], axis=-1)
            centers.setflags(write=False)
            object.__setattr__(self, "_centers", centers)
        return self._centers

    def cell_index(self, x) -> int:
        """Flat index of the cell containing ``x``.

        Points on a shared interior cell boundary resolve to the lower-index
        cell; the upper domain boundary maps to the last cell.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if not self.domain.contains(x):
            raise DomainError(f"point {x} outside domain")
        t = (x - self.domain.lower) / self.steps
        idx = np.floor(t).astype(int)
        on_boundary = (t == idx) & (idx > 0)
        idx[on_boundary] -= 1
        np.clip(idx, 0, self.n - 1, out=idx)
        return int(np.ravel_multi_index(tuple(idx), self.shape))


def ensure_same_grid(a: Grid, b: Grid) -> None:
    if a is b:
        return
    if (
        a.n != b.n
        or a.dim != b.dim
        or not np.array_equal(a.domain.lower, b.domain.lower)
        or not np.array_equal(a.domain.upper, b.domain.upper)
    ):
        raise GridMismatchError("grid functions live on different grids")


class GridFunction:
    """A real value per grid cell; stand-in for a bounded function on X."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values, copy: bool = True):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.n_cells,):
            values = values.reshape(grid.n_cells)
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function values must be finite")
        self.grid = grid
        self.values = values.copy() if copy else values

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "GridFunction":
        """Evaluate ``fn`` on all cell centers; ``fn`` maps (n_cells, d) -> (n_cells,)."""
        return cls(grid, np.asarray(fn(grid.centers), dtype=float), copy=False)

    @classmethod
    def constant(cls, grid: Grid, c: float) -> "GridFunction":
        return cls(grid, np.full(grid.n_cells, float(c)), copy=False)

    def _check_same_grid(self, other: "GridFunction") -> None:
        ensure_same_grid(self.grid, other.grid)

    def __add__(self, other):
        if isinstance(other, GridFunction):
            self._check_same_grid(other)
            return GridFunction(self.grid, self.values + other.values, copy=False)
        return GridFunction(self.grid, self.values + float(other), copy=False)

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            self._check_same_grid(other)
            return GridFunction(self.grid, self.values - other.values, copy=False)
        return GridFunction(self.grid, self.values - float(other), copy=False)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            self._check_same_grid(other)
            return GridFunction(self.grid, self.values * other.values, copy=False)
        return GridFunction(self.grid, self.values * float(other), copy=False)

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.grid, -self.values, copy=False)


class Density(GridFunction):
    """Nonnegative grid function integrating to one: a piecewise-constant strategy."""

    INTEGRAL_TOL = 1e-9

    def __init__(self, grid: Grid, values, copy: bool = True):
        super().__init__(grid, values, copy=copy)
        if np.any(self.values < 0):
            raise ValueError("density values must be nonnegative")
        total = float(self.values.sum() * grid.cell_volume)
        if abs(total - 1.0) > self.INTEGRAL_TOL:
            raise ValueError(f"density integrates to {total!r}, not 1")

    @classmethod
    def uniform(cls, grid: Grid) -> "Density":
        return cls(grid, np.full(grid.n_cells, 1.0 / grid.domain.volume), copy=False)

    @classmethod
    def uniform_on_cells(cls, grid: Grid, cells) -> "Density":
        """Uniform density supported on the given flat cell indices."""
        cells = np.asarray(cells, dtype=int)
        if cells.size == 0:
            raise ValueError("support must be nonempty")
        vals = np.zeros(grid.n_cells)
        vals[cells] = 1.0 / (cells.size * grid.cell_volume)
        return cls(grid, vals, copy=False)


def integrate(f: GridFunction) -> float:
    """Midpoint-rule integral of ``f`` over X."""
    return float(f.values.sum() * f.grid.cell_volume)


def pair(f: GridFunction, p: GridFunction) -> float:
    """Duality pairing <f, p> = integral of f*p; the expected value of f under a density p."""
    f._check_same_grid(p)
    return float(f.values @ p.values * f.grid.cell_volume)


def sup_norm(f: GridFunction) -> float:
    return float(np.abs(f.values).max())


def l1_distance(p: GridFunction, q: GridFunction) -> float:
    p._check_same_grid(q)
    return float(np.abs(p.values - q.values).sum() * p.grid.cell_volume)


def tv_distance(p: Density, q: Density) -> float:
    """Total-variation norm of p - q, i.e. the L1 distance (2 for disjoint supports)."""
    return l1_distance(p, q)


def sample(p: Density, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw point(s) from a density: categorical over cells, then uniform in the cell.

    Returns shape (d,) for ``size=None`` and (size, d) otherwise.
    """
    grid = p.grid
    probs = p.values * grid.cell_volume
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    m = 1 if size is None else int(size)
    u = rng.random(m)
    cells = np.searchsorted(cdf, u, side="left")
    np.clip(cells, 0, grid.n_cells - 1, out=cells)
    offsets = (rng.random((m, grid.dim)) - 0.5) * grid.steps
    points = grid.centers[cells] + offsets
    return points[0] if size is None else points


def eval_at(f: GridFunction, x) -> float:
    """Value of ``f`` at the cell containing ``x``."""
    return float(f.values[f.grid.cell_index(x)])


def ball_patch(grid: Grid, x, delta: float) -> tuple[np.ndarray, float]:
    """Cells whose centers lie within Euclidean distance ``delta`` of ``x``.

    Returns (flat cell indices, measured volume = count * cell volume).  The
    patch is automatically clipped at the boundary of X since the grid covers
    only X.  Ties at exactly ``delta`` are included.
    """
    if delta <= 0:
        raise DomainError("ball radius must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    dist2 = np.sum((grid.centers - x) ** 2, axis=1)
    indices = np.nonzero(dist2 <= delta * delta)[0]
    if indices.size == 0:
        raise ResolutionError(
            f"ball of radius {delta} around {x} contains no cell centers "
            f"(cell diameter {grid.cell_diameter:.3g})"
        )
    return indices, indices.size * grid.cell_volume
