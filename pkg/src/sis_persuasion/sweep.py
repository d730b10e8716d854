"""Batch experiment drivers: static-signal sweeps and the fidelity grid.

The static sweep classifies the SNE at each grid value of ``mu_s``.  The
two-dimensional fidelity grid relaxes the truthful infected signal: the
closed-form SNE theory needs mu_i = 1, so each (mu_s, mu_i) cell is instead
integrated to stationarity under the smoothed learning dynamics and the
stationary infected proportion recorded.  Grids are embarrassingly
parallel; cells are evaluated in one compiled batch and merged by index, so
reruns are bit-for-bit reproducible.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .equilibrium import SneResult, solve_sne
from .model import ModelParams, PopulationState
from .simulate import SmithConfig

logger = logging.getLogger(__name__)

__all__ = [
    "SweepCell",
    "StaticSweepTable",
    "static_sweep",
    "MuiRow",
    "MuiGrid",
    "grid_mui",
    "write_sweep_csv",
    "write_mui_matrix_csv",
    "write_mui_summary_csv",
]


@dataclass(frozen=True)
class SweepCell:
    """One grid point of a static sweep; ``error`` set when classification failed."""

    mu_s: float
    result: Optional[SneResult]
    error: Optional[str] = None


@dataclass(frozen=True)
class StaticSweepTable:
    """Per-``mu_s`` SNE table with the grid argmin flagged."""

    cells: tuple[SweepCell, ...]

    @property
    def mu_s(self) -> np.ndarray:
        return np.array([c.mu_s for c in self.cells])

    @property
    def y_star(self) -> np.ndarray:
        return np.array([c.result.y_star if c.result else np.nan for c in self.cells])

    @property
    def argmin_mu_s(self) -> float:
        y = self.y_star
        if np.all(np.isnan(y)):
            raise ValueError("sweep produced no valid cells")
        return float(self.mu_s[np.nanargmin(y)])


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    values = np.round(np.arange(lo, hi + step / 2.0, step), 10)
    return values[values <= hi + 1e-12]


def static_sweep(
    p: ModelParams, mu_range: tuple[float, float] = (0.01, 0.96), step: float = 0.005
) -> StaticSweepTable:
    """Classify the SNE at each ``mu_s`` on the grid; per-cell failures are
    recorded rather than raised."""
    cells = []
    for mu in _grid(mu_range[0], mu_range[1], step):
        try:
            cells.append(SweepCell(float(mu), solve_sne(float(mu), p)))
        except Exception as exc:  # noqa: BLE001 - cell errors are data here
            logger.warning("sweep cell mu_s=%s failed: %s", mu, exc)
            cells.append(SweepCell(float(mu), None, str(exc)))
    return StaticSweepTable(tuple(cells))


@dataclass(frozen=True)
class MuiRow:
    """Per-``mu_i`` summary: the best static signal and its infection level."""

    mu_i: float
    mu_s_opt: float
    min_y: float
    n_unconverged: int


@dataclass(frozen=True)
class MuiGrid:
    """Stationary infected proportion over the (mu_s, mu_i) grid.

    ``y[i, j]`` is the stationary level at mu_i = mu_i[i], mu_s = mu_s[j].
    """

    mu_s: np.ndarray
    mu_i: np.ndarray
    y: np.ndarray
    residual: np.ndarray
    converged: np.ndarray
    rows: tuple[MuiRow, ...]

    def symmetry_gaps(self) -> np.ndarray:
        """|y(mu_s, mu_i) - y(1 - mu_s, 1 - mu_i)| for every converged cell
        whose mirrored fidelities also lie on the grid (flattened)."""
        index_s = {round(v, 10): j for j, v in enumerate(self.mu_s)}
        index_i = {round(v, 10): i for i, v in enumerate(self.mu_i)}
        gaps = []
        for i, mi in enumerate(self.mu_i):
            im = index_i.get(round(1.0 - mi, 10))
            if im is None:
                continue
            for j, ms in enumerate(self.mu_s):
                jm = index_s.get(round(1.0 - ms, 10))
                if jm is None:
                    continue
                if self.converged[i, j] and self.converged[im, jm]:
                    gaps.append(abs(self.y[i, j] - self.y[im, jm]))
        return np.array(gaps)


def grid_mui(
    p: ModelParams,
    step: float = 0.005,
    smith: SmithConfig = SmithConfig(20.0),
    init_state: PopulationState = PopulationState(0.01, 0.5, 0.5),
    t_max: float = 500.0,
    h: float = 0.02,
    stationarity_tol: float = 1e-8,
) -> MuiGrid:
    """Stationary infected proportions over the full fidelity grid.

    Both fidelities run over [0.01, 1] in steps of ``step`` (the endpoint 1
    is always included).  Every cell is integrated until the sup norm of its
    derivative falls below ``stationarity_tol`` or ``t_max`` is reached;
    cells that never settle are flagged, excluded from the per-row optimum,
    and reported in ``residual``.
    """
    values = _grid(0.01, 1.0, step)
    if values[-1] < 1.0:
        values = np.append(values, 1.0)
    mu_s_axis = values
    mu_i_axis = values.copy()

    ms_flat, mi_flat = np.meshgrid(mu_s_axis, mu_i_axis)
    ms_flat = np.ascontiguousarray(ms_flat.ravel())
    mi_flat = np.ascontiguousarray(mi_flat.ravel())
    states, resid, done, _ = _kernels.stationary_batch(
        init_state.y,
        init_state.z_sbar,
        init_state.z_ibar,
        ms_flat,
        mi_flat,
        p.alpha,
        p.gamma,
        p.beta_p,
        p.beta_u,
        p.c_p,
        p.c_u,
        p.loss,
        smith.sigma,
        h,
        t_max,
        stationarity_tol,
        25,
    )
    shape = (len(mu_i_axis), len(mu_s_axis))
    y = states[:, 0].reshape(shape)
    residual = resid.reshape(shape)
    converged = done.reshape(shape)

    rows = []
    for i, mi in enumerate(mu_i_axis):
        row_y = np.where(converged[i], y[i], np.nan)
        n_bad = int(np.sum(~converged[i]))
        if np.all(np.isnan(row_y)):
            rows.append(MuiRow(float(mi), float("nan"), float("nan"), n_bad))
            continue
        j = int(np.nanargmin(row_y))
        rows.append(MuiRow(float(mi), float(mu_s_axis[j]), float(row_y[j]), n_bad))
    if any(r.n_unconverged for r in rows):
        logger.warning(
            "fidelity grid: %d cells did not reach stationarity by t=%s",
            sum(r.n_unconverged for r in rows),
            t_max,
        )
    return MuiGrid(mu_s_axis, mu_i_axis, y, residual, converged, tuple(rows))


def write_sweep_csv(table: StaticSweepTable, path) -> None:
    """Write ``mu_s, y_star, case_id, z_sbar_star, z_ibar_star, error`` rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mu_s", "y_star", "case_id", "z_sbar_star", "z_ibar_star", "error"])
        for cell in table.cells:
            if cell.result is None:
                writer.writerow([f"{cell.mu_s:.10g}", "", "", "", "", cell.error])
            else:
                r = cell.result
                writer.writerow(
                    [
                        f"{cell.mu_s:.10g}",
                        f"{r.y_star:.12g}",
                        r.case_id.name,
                        f"{r.z_sbar_star:.12g}",
                        f"{r.z_ibar_star:.12g}",
                        "",
                    ]
                )


def write_mui_matrix_csv(grid: MuiGrid, path) -> None:
    """Matrix of stationary infected proportions, mu_i rows by mu_s columns."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mu_i"] + [f"{v:.10g}" for v in grid.mu_s])
        for i, mi in enumerate(grid.mu_i):
            writer.writerow([f"{mi:.10g}"] + [f"{v:.12g}" for v in grid.y[i]])


def write_mui_summary_csv(grid: MuiGrid, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mu_i", "mu_s_opt", "min_y"])
        for row in grid.rows:
            writer.writerow([f"{row.mu_i:.10g}", f"{row.mu_s_opt:.10g}", f"{row.min_y:.12g}"])
