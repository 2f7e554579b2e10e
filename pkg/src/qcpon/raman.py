"""Raman crosstalk model: cross-section spectrum, the assignment weight
matrix, and per-gate background click probabilities on quantum channels.

Spontaneous-Raman noise from a classical pump at lambda_c landing in-band
on a quantum channel at lambda_q is governed by the normalized cross
section rho (per km per nm) evaluated at the wavelength shift
lambda_q - lambda_c (stokes side positive).  The single-pump link model:

    forward  (co-propagating):      P_f = I e^(-alpha L) rho L  bw
    backward (counter-propagating): P_b = I rho bw (1 - e^(-2 alpha L)) / (2 alpha)

with I the pump power at the fiber input, alpha the linear attenuation
(1/km), L the fiber length (km) and bw the receiver filter bandwidth (nm).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from . import units
from .errors import SpectrumError
from .grid import ChannelPlan, WavelengthGrid

if TYPE_CHECKING:  # pragma: no cover
    from .link import Scenario


@dataclass(frozen=True)
class RamanSpectrum:
    """Tabulated normalized Raman cross section vs wavelength shift.

    Shifts in nm (anti-stokes negative, stokes positive), cross sections in
    (km*nm)^-1, linearly interpolated; queries outside the table return 0.
    """

    shifts_nm: np.ndarray
    cross_sections: np.ndarray

    def __post_init__(self):
        shifts = np.asarray(self.shifts_nm, dtype=float)
        rho = np.asarray(self.cross_sections, dtype=float)
        object.__setattr__(self, "shifts_nm", shifts)
        object.__setattr__(self, "cross_sections", rho)
        if shifts.ndim != 1 or rho.shape != shifts.shape:
            raise SpectrumError("spectrum needs matching 1-D shift and cross-section columns")
        if shifts.size < 2:
            raise SpectrumError(f"spectrum needs at least 2 samples, got {shifts.size}")
        if not np.all(np.diff(shifts) > 0):
            raise SpectrumError("spectrum shifts must be strictly increasing")
        if np.any(rho < 0):
            raise SpectrumError("negative cross sections in spectrum")

    def rho(self, shift_nm):
        """Cross section at the given shift(s); 0 outside the table."""
        return np.interp(shift_nm, self.shifts_nm, self.cross_sections, left=0.0, right=0.0)

    def __eq__(self, other):
        if not isinstance(other, RamanSpectrum):
            return NotImplemented
        return (np.array_equal(self.shifts_nm, other.shifts_nm)
                and np.array_equal(self.cross_sections, other.cross_sections))

    __hash__ = None


def load_spectrum(text: str) -> RamanSpectrum:
    """Parse a two-column text table (shift_nm, rho) with '#' comments."""
    shifts = []
    rho = []
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise SpectrumError(f"line {lineno}: expected 2 columns, got {len(parts)}")
        try:
            shifts.append(float(parts[0]))
            rho.append(float(parts[1]))
        except ValueError as exc:
            raise SpectrumError(f"line {lineno}: {exc}") from exc
    return RamanSpectrum(np.array(shifts), np.array(rho))


def load_spectrum_file(path) -> RamanSpectrum:
    with open(path, "r", encoding="utf-8") as fh:
        return load_spectrum(fh.read())


@dataclass(frozen=True)
class CrosstalkMatrix:
    """D x D weight table U[i][j] = lambda_j * rho(lambda_j - lambda_i).

    Rows index classical wavelengths, columns quantum ones.  The diagonal
    is +inf: a channel can never serve both roles, and any sum that touches
    it trips immediately instead of silently passing.
    """

    u: np.ndarray
    grid: WavelengthGrid

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        object.__setattr__(self, "u", u)
        d = self.grid.count
        if u.shape != (d, d):
            raise ValueError(f"matrix shape {u.shape} does not match grid of {d} channels")

    def transposed(self) -> "CrosstalkMatrix":
        """Swapped orientation (rows quantum), for convention comparisons."""
        return CrosstalkMatrix(self.u.T.copy(), self.grid)


def build_crosstalk_matrix(grid: WavelengthGrid, spectrum: RamanSpectrum) -> CrosstalkMatrix:
    lam = grid.wavelengths_nm
    shift = lam[np.newaxis, :] - lam[:, np.newaxis]  # column (quantum) minus row (classical)
    u = lam[np.newaxis, :] * spectrum.rho(shift)
    np.fill_diagonal(u, math.inf)
    return CrosstalkMatrix(u, grid)


def forward_raman_power(power_w: float, rho: float, alpha_per_km: float,
                        length_km: float, bandwidth_nm: float) -> float:
    """Co-propagating spontaneous-Raman power at the fiber output (W)."""
    if min(power_w, rho, alpha_per_km, length_km, bandwidth_nm) < 0:
        raise ValueError("forward_raman_power arguments must be non-negative")
    return power_w * math.exp(-alpha_per_km * length_km) * rho * length_km * bandwidth_nm


def backward_raman_power(power_w: float, rho: float, alpha_per_km: float,
                         length_km: float, bandwidth_nm: float) -> float:
    """Counter-propagating spontaneous-Raman power at the pump input end (W)."""
    if min(power_w, rho, alpha_per_km, length_km, bandwidth_nm) < 0:
        raise ValueError("backward_raman_power arguments must be non-negative")
    x = 2.0 * alpha_per_km * length_km
    if x < 1e-12:  # lossless limit equals the forward expression at alpha = 0
        return power_w * rho * bandwidth_nm * length_km
    return power_w * rho * bandwidth_nm * (-math.expm1(-x)) / (2.0 * alpha_per_km)


def photons_per_gate(power_w: float, wavelength_nm: float, gate_s: float,
                     eta_rx: float) -> float:
    """Expected photon count in one detector gate from a noise power."""
    if min(power_w, wavelength_nm, gate_s, eta_rx) < 0:
        raise ValueError("photons_per_gate arguments must be non-negative")
    if power_w == 0.0:
        return 0.0
    return power_w * gate_s * eta_rx / units.photon_energy_j(wavelength_nm)


@dataclass(frozen=True)
class NoiseBreakdown:
    """Per-gate background click probabilities of one quantum channel.

    Components are per-detector probabilities: the dark rate is a detector
    property, while incoming noise flux (Raman, ambient) splits evenly
    across the receiver's two detectors.  The total background yield per
    gate follows the two-detector rule y0 = 1 - (1 - p_total)^2.
    """

    p_dark: float
    p_raman_fwd: float
    p_raman_bwd: float
    p_ambient: float
    y0: float

    def __post_init__(self):
        for name in ("p_dark", "p_raman_fwd", "p_raman_bwd", "p_ambient", "y0"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} = {v} outside [0, 1]")

    @classmethod
    def from_components(cls, p_dark: float, p_raman_fwd: float,
                        p_raman_bwd: float, p_ambient: float) -> "NoiseBreakdown":
        p_total = min(1.0, max(0.0, p_dark + p_raman_fwd + p_raman_bwd + p_ambient))
        y0 = 1.0 - (1.0 - p_total) ** 2
        return cls(p_dark, p_raman_fwd, p_raman_bwd, p_ambient, y0)


def channel_background(plan: ChannelPlan, qi: int, scenario: "Scenario") -> NoiseBreakdown:
    """Background clicks on quantum channel ``qi`` under the given scenario.

    Every classical channel contributes forward Raman (its uplink enters at
    the user, crosses the drop fiber, then co-propagates over the feeder)
    and backward Raman (its downlink counter-propagates over the feeder at
    full launch power).  Drop-fiber scattering itself is neglected: the
    feeder dominates (L0 >> L_k).  Dark counts always contribute; the
    ambient per-gate photon rate only in the wireless setup, referred to
    the detector.  Receiver-side narrowband filtering sets the bandwidth
    and removes adjacent-channel leakage entirely.
    """
    if qi not in plan.q:
        raise ValueError(f"channel index {qi} is not a quantum channel of the plan")
    dev = scenario.devices
    lam_q = plan.grid.wavelength_nm(qi)
    gate_s = dev.gate_ns * 1e-9
    bw_nm = units.ghz_to_nm(dev.nbf_bandwidth_ghz, lam_q)
    eta_rx = dev.detector_efficiency * units.db_to_linear(
        dev.awg_insertion_loss_db * dev.awg_passes
    )
    alpha_lin = units.db_per_km_to_linear(dev.fiber_attenuation_db_per_km)
    launch_w = units.dbm_to_watts(scenario.launch_power_dbm)
    drop_att = units.db_to_linear(dev.fiber_attenuation_db_per_km * scenario.drop_km)

    p_fwd_w = 0.0
    p_bwd_w = 0.0
    for ci in plan.c:
        rho = float(scenario.spectrum.rho(lam_q - plan.grid.wavelength_nm(ci)))
        p_fwd_w += forward_raman_power(launch_w * drop_att, rho, alpha_lin,
                                       scenario.feeder_km, bw_nm)
        p_bwd_w += backward_raman_power(launch_w, rho, alpha_lin,
                                        scenario.feeder_km, bw_nm)

    # photon fluxes split across the two detectors
    p_fwd = 0.5 * photons_per_gate(p_fwd_w, lam_q, gate_s, eta_rx)
    p_bwd = 0.5 * photons_per_gate(p_bwd_w, lam_q, gate_s, eta_rx)
    p_dark = dev.dark_count_rate_per_ns * dev.gate_ns
    p_ambient = 0.5 * scenario.ambient_photons_per_gate if scenario.is_wireless else 0.0
    return NoiseBreakdown.from_components(p_dark, p_fwd, p_bwd, p_ambient)
