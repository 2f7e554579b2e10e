"""Unit conversions (dB/dBm <-> linear, GHz <-> nm).

All conversions live here so that every module converts the same way;
configuration and scenario objects keep the field units they were given
(dB, dBm, nm) and the link/noise builders convert once when deriving
linear quantities.
"""

import math

PLANCK_C_JM = 1.98645e-25  # h*c in J*m
C_LIGHT_M_PER_S = 299792458.0
LN10 = math.log(10.0)


def db_to_linear(loss_db: float) -> float:
    """Transmission factor 10^(-dB/10) of a lumped loss."""
    return 10.0 ** (-loss_db / 10.0)


def dbm_to_watts(power_dbm: float) -> float:
    return 1e-3 * 10.0 ** (power_dbm / 10.0)


def watts_to_dbm(power_w: float) -> float:
    return 10.0 * math.log10(power_w / 1e-3)


def db_per_km_to_linear(alpha_db_per_km: float) -> float:
    """Attenuation coefficient in 1/km for exp(-alpha*L) propagation."""
    return alpha_db_per_km * LN10 / 10.0


def ghz_to_nm(bandwidth_ghz: float, wavelength_nm: float) -> float:
    """Optical bandwidth GHz -> nm at the given carrier wavelength."""
    lam_m = wavelength_nm * 1e-9
    return lam_m * lam_m * (bandwidth_ghz * 1e9) / C_LIGHT_M_PER_S * 1e9


def photon_energy_j(wavelength_nm: float) -> float:
    return PLANCK_C_JM / (wavelength_nm * 1e-9)
