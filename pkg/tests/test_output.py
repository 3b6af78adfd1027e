import numpy as np
import pandas as pd
import pytest

from config.settings import RunConfig
from core.errors import OutputError
from core.output import STATE_COLUMNS, cells_frame, run_label, write_curves, write_diagnostics, write_output, write_vtk
from core.problems import setup_problem


@pytest.fixture
def small_state():
    state, _, _ = setup_problem(RunConfig(problem="alfven2.5d", nx=2, ny=2, output_formats=[]))
    return state


def test_cells_frame_has_one_row_per_cell(small_state):
    frame = cells_frame(small_state)
    assert len(frame) == 4
    assert list(frame.columns) == ["i", "j", "x", "y"] + STATE_COLUMNS
    assert frame[["i", "j"]].values.tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]
    assert np.allclose(frame["rho"], 1.0)


def test_advection_frame_leaves_mhd_columns_empty():
    state, _, _ = setup_problem(RunConfig(problem="advect1d", nx=5, output_formats=[]))
    frame = cells_frame(state)
    assert frame["rho"].isna().all()
    assert not frame["A3"].isna().any()


def test_csv_snapshot_round_trip(small_state, tmp_path):
    paths = write_output(small_state, "alfven2.5d", tmp_path, ["csv"])
    assert paths == [tmp_path / "alfven2.5d_2x2_000000.csv"]
    frame = pd.read_csv(paths[0])
    assert len(frame) == 4
    assert frame["Bx"].tolist() == pytest.approx(cells_frame(small_state)["Bx"].tolist())


def test_vtk_header(small_state, tmp_path):
    path = write_vtk(small_state, tmp_path / "snap.vtk")
    lines = path.read_text().splitlines()
    assert lines[0] == "# vtk DataFile Version 3.0"
    assert "DATASET STRUCTURED_GRID" in lines
    assert "DIMENSIONS 3 3 1" in lines
    assert "POINTS 9 double" in lines
    assert "CELL_DATA 4" in lines
    assert "VECTORS B double" in lines


def test_curves_are_sorted_by_x(small_state, tmp_path):
    paths = write_curves(small_state, tmp_path / "curve")
    assert tmp_path / "curve_rho.dat" in paths
    data = np.loadtxt(tmp_path / "curve_By.dat")
    assert data.shape == (4, 2)
    assert np.all(np.diff(data[:, 0]) >= 0)


def test_diagnostics_file_name(tmp_path):
    path = write_diagnostics(pd.DataFrame({"step": [0]}), tmp_path, "shocktube", (8, 8))
    assert path.name == "shocktube_8x8_diagnostics.csv"
    assert run_label("alfven3d", (4, 8, 8)) == "alfven3d_4x8x8"


def test_unknown_format_is_rejected(small_state, tmp_path):
    with pytest.raises(ValueError):
        write_output(small_state, "alfven2.5d", tmp_path, ["hdf5"])


def test_unwritable_target_raises_output_error(small_state, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OutputError):
        write_output(small_state, "alfven2.5d", blocker / "sub", ["csv"])
