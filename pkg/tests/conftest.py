import numpy as np
import pytest

from qcpon import (RamanSpectrum, Scenario, build_grid, default_spectrum_path,
                   load_spectrum_file)


@pytest.fixture(scope="session")
def shipped_spectrum():
    return load_spectrum_file(default_spectrum_path())


@pytest.fixture(scope="session")
def full_grid():
    return build_grid(1530.0, 1564.4, 0.8)


def three_valley_spectrum(rng, lo: float, hi: float) -> RamanSpectrum:
    """Random smooth spectrum with three low-value regions, stokes side heavier.

    Mirrors the qualitative silica shape the band assignment is designed
    around; used wherever a 'realistically shaped' random spectrum is needed.
    """
    s = np.linspace(lo, hi, 49)
    span = hi - lo
    env = np.where(s > 0, rng.uniform(1.5, 4.0), rng.uniform(0.3, 1.5)) * 1e-9
    env = env * (1.0 + 0.3 * np.sin(2 * np.pi * s / span + rng.uniform(0, 2 * np.pi)))
    centers = (rng.uniform(lo + 0.05 * span, lo + 0.3 * span),
               rng.uniform(lo + 0.35 * span, lo + 0.65 * span),
               rng.uniform(lo + 0.7 * span, lo + 0.95 * span))
    dip = np.ones_like(s)
    for c in centers:
        depth = rng.uniform(0.7, 0.95)
        width = rng.uniform(0.06, 0.15) * span
        dip *= 1.0 - depth * np.exp(-(((s - c) / width) ** 2))
    return RamanSpectrum(s, np.clip(env * dip, 1e-13, None))


def wireless_scenario(grid, spectrum, users: int, launch_power_dbm: float = -20.0,
                      ambient: float = 5e-5, block_size: float = 1e11) -> Scenario:
    """High-noise wireless operating point used across the heavy tests."""
    return Scenario(grid=grid, spectrum=spectrum, users=users, setup="wireless",
                    coupling_loss_db=16.0, launch_power_dbm=launch_power_dbm,
                    ambient_photons_per_gate=ambient, block_size=block_size)
