"""Post-hoc regret accounting on recorded traces.

A trace stores per-round scalars (expected and realized value, per-round best
fixed value) plus cumulative-loss snapshots at geometric checkpoints; the
stream handle allows lazy recomputation at arbitrary horizons.  All regrets
are reported in the usual orientation (nonnegative when the learner is doing
worse than the benchmark), for loss streams and payoff streams alike.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError
from .grids import Density, Grid
from .losses import LossStream, variation

__all__ = [
    "RegretTrace",
    "TraceRecorder",
    "default_checkpoints",
    "static_regret",
    "regret_vs_comparator",
    "regret_vs_point",
    "neighborhood_comparator",
    "dynamic_regret",
    "window_decomposition",
    "WindowDecomposition",
    "SlopeFit",
    "fit_slope",
]


def default_checkpoints(T: int, start: int = 100, ratio: float = 1.3) -> np.ndarray:
    """Geometric checkpoint rounds from ``start`` with the given ratio, plus T."""
    if T < 1:
        raise ValueError("horizon must be >= 1")
    points = []
    c = float(start)
    while c <= T:
        points.append(int(round(c)))
        c *= ratio
    points.append(T)
    return np.unique(np.asarray(points, dtype=int))


@dataclass
class RegretTrace:
    """Per-round records of one run, sufficient for all regret accounting."""

    stream: LossStream
    grid: Grid
    horizon: int
    expected: np.ndarray
    realized: np.ndarray
    actions: np.ndarray
    round_best: np.ndarray
    checkpoints: np.ndarray
    cum_grid_checkpoints: np.ndarray
    extras: dict = field(default_factory=dict)

    @property
    def payoff_convention(self) -> bool:
        return self.stream.payoff_convention

    def cumulative_grid(self, T: int) -> np.ndarray:
        """Cumulative stream values over rounds 1..T on the grid."""
        pos = np.searchsorted(self.checkpoints, T)
        if pos < len(self.checkpoints) and self.checkpoints[pos] == T:
            return self.cum_grid_checkpoints[pos]
        cum = np.zeros(self.grid.n_cells)
        for t in range(1, T + 1):
            cum += self.stream.values(t)
        return cum


class TraceRecorder:
    """Accumulates per-round records and checkpoint snapshots during a run."""

    def __init__(self, stream: LossStream, grid: Grid, horizon: int,
                 checkpoints: np.ndarray | None = None):
        self.stream = stream
        self.grid = grid
        self.horizon = horizon
        self.checkpoints = (
            default_checkpoints(horizon) if checkpoints is None else np.asarray(checkpoints)
        )
        self.expected = np.zeros(horizon)
        self.realized = np.zeros(horizon)
        self.actions = np.zeros((horizon, grid.dim))
        self.round_best = np.zeros(horizon)
        self._cum = np.zeros(grid.n_cells)
        self._snapshots = np.zeros((len(self.checkpoints), grid.n_cells))
        self._cp_pos = 0

    def record(self, t: int, f_values: np.ndarray, expected: float,
               realized: float, action) -> None:
        i = t - 1
        self.expected[i] = expected
        self.realized[i] = realized
        self.actions[i] = action
        self.round_best[i] = (
            f_values.max() if self.stream.payoff_convention else f_values.min()
        )
        self._cum += f_values
        if self._cp_pos < len(self.checkpoints) and t == self.checkpoints[self._cp_pos]:
            self._snapshots[self._cp_pos] = self._cum
            self._cp_pos += 1

    def finish(self, extras: dict | None = None) -> RegretTrace:
        return RegretTrace(
            stream=self.stream,
            grid=self.grid,
            horizon=self.horizon,
            expected=self.expected,
            realized=self.realized,
            actions=self.actions,
            round_best=self.round_best,
            checkpoints=self.checkpoints,
            cum_grid_checkpoints=self._snapshots,
            extras=extras or {},
        )


def _check_horizon(trace: RegretTrace, T: int | None) -> int:
    T = trace.horizon if T is None else int(T)
    if not (1 <= T <= trace.horizon):
        raise ValueError(f"horizon {T} outside recorded trace of length {trace.horizon}")
    return T


def static_regret(trace: RegretTrace, T: int | None = None, realized: bool = False) -> float:
    """Cumulative (expected) value against the best fixed cell center in hindsight."""
    T = _check_horizon(trace, T)
    cum = trace.cumulative_grid(T)
    mine = float((trace.realized if realized else trace.expected)[:T].sum())
    if trace.payoff_convention:
        return float(cum.max()) - mine
    return mine - float(cum.min())


def regret_vs_comparator(trace: RegretTrace, mu: Density, T: int | None = None) -> float:
    """Reg_mu(T) = sum_t <f_t, x_t - mu> in the loss orientation."""
    T = _check_horizon(trace, T)
    cum = trace.cumulative_grid(T)
    mine = float(trace.expected[:T].sum())
    theirs = float(cum @ mu.values * trace.grid.cell_volume)
    if trace.payoff_convention:
        return theirs - mine
    return mine - theirs


def regret_vs_point(trace: RegretTrace, x, T: int | None = None) -> float:
    """Regret against the pure strategy at ``x`` (graded at x's cell center)."""
    T = _check_horizon(trace, T)
    cum = trace.cumulative_grid(T)
    mine = float(trace.expected[:T].sum())
    theirs = float(cum[trace.grid.cell_index(x)])
    if trace.payoff_convention:
        return theirs - mine
    return mine - theirs


def neighborhood_comparator(grid: Grid, x, radius: float) -> tuple[Density, float]:
    """Uniform density on the ball patch around ``x``, and its effective diameter.

    The diameter is measured between cell centers, anchored at the cell
    containing ``x``; that is the distance scale at which grid-sampled
    Lipschitz functions are compared.
    """
    from .grids import ball_patch

    cells, _ = ball_patch(grid, x, radius)
    anchor = grid.centers[grid.cell_index(x)]
    diam = float(np.linalg.norm(grid.centers[cells] - anchor, axis=1).max())
    return Density.uniform_on_cells(grid, cells), diam


def dynamic_regret(trace: RegretTrace, T: int | None = None) -> float:
    """Cumulative value against the per-round best fixed cell center."""
    T = _check_horizon(trace, T)
    gaps = trace.expected[:T] - trace.round_best[:T]
    if trace.payoff_convention:
        gaps = -gaps
    return float(gaps.sum())


@dataclass
class WindowDecomposition:
    """Per-window static regrets and the dynamic-regret bound they imply."""

    window_regrets: np.ndarray
    window_length: int
    dynamic: float
    variation: float
    bound: float
    holds: bool


def window_decomposition(trace: RegretTrace, delta: int, slack: float = 1e-4,
                         strict: bool = True) -> WindowDecomposition:
    """Split [1, T] into windows of length ``delta`` and check
    DynReg(T) <= sum of per-window static regrets + 2 * delta * V_T + slack.

    The inequality holds deterministically on any trace; ``strict`` raises if
    numerical slack is ever exceeded.
    """
    T = trace.horizon
    if not (1 <= delta <= T):
        raise ValueError("window length must lie in [1, T]")
    sign = -1.0 if trace.payoff_convention else 1.0
    regrets = []
    start = 1
    while start <= T:
        stop = min(start + delta - 1, T)
        cum = np.zeros(trace.grid.n_cells)
        for t in range(start, stop + 1):
            cum += trace.stream.values(t)
        mine = float(trace.expected[start - 1:stop].sum())
        best = float(cum.min()) if sign > 0 else float(cum.max())
        regrets.append(sign * mine - sign * best)
        start = stop + 1
    regrets = np.asarray(regrets)
    dyn = dynamic_regret(trace)
    var = variation(trace.stream, T)
    bound = float(regrets.sum()) + 2.0 * delta * var
    return WindowDecomposition(
        window_regrets=regrets,
        window_length=delta,
        dynamic=dyn,
        variation=var,
        bound=bound,
        holds=dyn <= bound + slack,
    )


@dataclass
class SlopeFit:
    """Least-squares slope of log(value) against log(horizon)."""

    slope: float
    intercept: float
    residual: float
    half_width: float
    horizons: np.ndarray
    values: np.ndarray


def fit_slope(horizons, values) -> SlopeFit:
    """Fit log-log growth rate over geometric checkpoints.

    Non-positive values are excluded; at least 4 checkpoints spanning at
    least 1.5 decades must remain.
    """
    horizons = np.asarray(horizons, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = values > 0
    horizons, values = horizons[keep], values[keep]
    if horizons.size < 4:
        raise NumericalError("slope fit needs >= 4 positive checkpoints")
    span = math.log10(horizons.max() / horizons.min())
    if span < 1.5:
        raise NumericalError(f"checkpoints span only {span:.2f} decades (need >= 1.5)")
    x = np.log(horizons)
    y = np.log(values)
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, _, _, _ = np.linalg.lstsq(A, y, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    resid = y - A @ coef
    rss = float(resid @ resid)
    n = x.size
    sxx = float(((x - x.mean()) ** 2).sum())
    se = math.sqrt(rss / max(n - 2, 1) / sxx) if sxx > 0 else float("inf")
    return SlopeFit(
        slope=slope,
        intercept=intercept,
        residual=math.sqrt(rss / n),
        half_width=2.0 * se,
        horizons=horizons,
        values=values,
    )
