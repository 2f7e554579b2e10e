import numpy as np
import pytest

from qcpon import ChannelPlan, build_grid, plan_wavelengths
from qcpon.assignment import conventional_assignment
from qcpon.errors import GridMismatchError


def test_full_c_band_100ghz():
    grid = build_grid(1530.0, 1564.4, 0.8)
    assert grid.count == 44
    assert grid.wavelength_nm(43) == pytest.approx(1564.4, abs=1e-9)


def test_full_c_band_200ghz():
    # the end wavelength is an upper bound: 22 channels fit, the last at 1563.6
    grid = build_grid(1530.0, 1564.4, 1.6)
    assert grid.count == 22
    assert grid.wavelength_nm(21) == pytest.approx(1563.6, abs=1e-9)


def test_degenerate_single_channel():
    grid = build_grid(1530.0, 1530.0, 0.8)
    assert grid.count == 1
    assert list(grid.wavelengths_nm) == [1530.0]


def test_bad_grids_rejected():
    with pytest.raises(GridMismatchError):
        build_grid(1540.0, 1530.0, 0.8)
    with pytest.raises(GridMismatchError):
        build_grid(1530.0, 1564.4, 0.0)
    with pytest.raises(GridMismatchError):
        build_grid(1530.0, 1564.4, -0.8)


def test_wavelengths_are_exact_multiples():
    grid = build_grid(1530.0, 1564.4, 0.8)
    k = np.arange(grid.count)
    # bitwise equality: values are computed as start + k*delta, never accumulated
    assert np.all(grid.wavelengths_nm == 1530.0 + k * 0.8)
    spacing = np.diff(grid.wavelengths_nm)
    assert np.all(np.abs(spacing - 0.8) < 1e-9)


def test_plan_validation():
    grid = build_grid(1530.0, 1564.4, 0.8)
    with pytest.raises(ValueError, match="overlap"):
        ChannelPlan(grid, (0, 1), (1, 2))
    with pytest.raises(ValueError, match="outside"):
        ChannelPlan(grid, (0, 44), (1,))
    with pytest.raises(ValueError, match="duplicate"):
        ChannelPlan(grid, (0, 0), (1,))
    small = build_grid(1530.0, 1530.8, 0.8)
    with pytest.raises(ValueError, match="outside"):
        ChannelPlan(small, (0,), (1, 2))


def test_plan_wavelengths_conventional():
    grid = build_grid(1530.0, 1564.4, 0.8)
    plan = conventional_assignment(grid, 2)
    # classical vector starts at 1564.4 - delta*(P-1)
    assert plan_wavelengths(plan, 0) == (pytest.approx(1530.0), pytest.approx(1563.6))
    assert plan_wavelengths(plan, 1) == (pytest.approx(1530.8), pytest.approx(1564.4))

    single = conventional_assignment(grid, 1)
    assert plan_wavelengths(single, 0) == (pytest.approx(1530.0), pytest.approx(1564.4))

    with pytest.raises(IndexError):
        plan_wavelengths(plan, 2)
