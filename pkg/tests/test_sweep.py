import numpy as np
import pytest

from sis_persuasion import (
    SneCase,
    complementarity_report,
    grid_mui,
    solve_sne,
    static_sweep,
    thresholds,
)
from sis_persuasion.sweep import (
    write_mui_matrix_csv,
    write_mui_summary_csv,
    write_sweep_csv,
)


class TestStaticSweep:
    def test_single_point_equals_direct_solve(self, params_cost_floor_ok):
        table = static_sweep(params_cost_floor_ok, (0.3, 0.3), 0.005)
        assert len(table.cells) == 1
        direct = solve_sne(0.3, params_cost_floor_ok)
        cell = table.cells[0].result
        assert cell == direct

    def test_argmin_near_threshold_when_floor_holds(self, params_cost_floor_ok):
        table = static_sweep(params_cost_floor_ok, (0.01, 0.96), 0.02)
        mu_max = thresholds(params_cost_floor_ok).mu_s_max
        assert abs(table.argmin_mu_s - mu_max) <= 0.02 + 1e-12

    def test_nondecreasing_when_floor_violated(self, params_cost_floor_violated):
        table = static_sweep(params_cost_floor_violated, (0.01, 0.96), 0.02)
        y = table.y_star
        assert not np.any(np.isnan(y))
        assert np.all(np.diff(y) >= -1e-9)

    def test_interior_then_plateau_when_floor_violated(self, params_cost_floor_violated):
        # past the point where told-susceptible agents become indifferent the
        # level pins at the indifference level and stops moving with mu_s
        table = static_sweep(params_cost_floor_violated, (0.6, 0.96), 0.05)
        cases = {c.result.case_id for c in table.cells}
        assert cases == {SneCase.SBAR_MIXED}
        assert np.ptp(table.y_star) < 1e-12

    def test_rerun_is_identical(self, params_cost_floor_ok):
        a = static_sweep(params_cost_floor_ok, (0.05, 0.9), 0.05)
        b = static_sweep(params_cost_floor_ok, (0.05, 0.9), 0.05)
        assert np.array_equal(a.y_star, b.y_star)
        assert np.array_equal(a.mu_s, b.mu_s)

    def test_cells_satisfy_complementarity(self, params_cost_floor_violated):
        table = static_sweep(params_cost_floor_violated, (0.05, 0.95), 0.05)
        for cell in table.cells:
            assert cell.error is None
            assert complementarity_report(cell.result, params_cost_floor_violated).ok

    def test_csv_export(self, tmp_path, params_cost_floor_ok):
        table = static_sweep(params_cost_floor_ok, (0.1, 0.3), 0.1)
        path = tmp_path / "sweep.csv"
        write_sweep_csv(table, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "mu_s,y_star,case_id,z_sbar_star,z_ibar_star,error"
        assert len(lines) == 1 + len(table.cells)


@pytest.fixture(scope="module")
def small_grid(params_cost_floor_ok):
    return grid_mui(params_cost_floor_ok, step=0.14)


class TestGridMui:
    def test_axes_include_truthful_endpoint(self, small_grid):
        assert small_grid.mu_i[-1] == 1.0
        assert small_grid.mu_s[-1] == 1.0

    def test_all_cells_converged(self, small_grid):
        assert small_grid.converged.all()
        assert float(small_grid.residual.max()) < 1e-8

    def test_levels_inside_unit_interval(self, small_grid):
        assert np.all(small_grid.y > 0.0) and np.all(small_grid.y < 1.0)

    def test_symmetry_of_mirrored_cells(self, small_grid):
        gaps = small_grid.symmetry_gaps()
        assert len(gaps) > 0
        assert float(gaps.max()) < 1e-3

    def test_truthful_row_matches_equilibrium_theory(self, params_cost_floor_ok, small_grid):
        i = len(small_grid.mu_i) - 1
        for j, mu in enumerate(small_grid.mu_s):
            sne = solve_sne(float(mu), params_cost_floor_ok)
            assert abs(small_grid.y[i, j] - sne.y_star) < 1e-2

    def test_csv_exports(self, tmp_path, small_grid):
        matrix = tmp_path / "y.csv"
        summary = tmp_path / "rows.csv"
        write_mui_matrix_csv(small_grid, matrix)
        write_mui_summary_csv(small_grid, summary)
        m_lines = matrix.read_text().strip().splitlines()
        assert len(m_lines) == 1 + len(small_grid.mu_i)
        assert m_lines[0].startswith("mu_i,")
        s_lines = summary.read_text().strip().splitlines()
        assert s_lines[0] == "mu_i,mu_s_opt,min_y"
        assert len(s_lines) == 1 + len(small_grid.rows)

    def test_rerun_identical(self, params_cost_floor_ok, small_grid):
        again = grid_mui(params_cost_floor_ok, step=0.14)
        assert np.array_equal(again.y, small_grid.y)
