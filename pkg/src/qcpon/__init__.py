"""Planning and simulation toolkit for quantum-classical DWDM passive
optical access networks: Raman-aware wavelength assignment plus finite-key
decoy-state BB84 rate analysis with full parameter optimization."""

from ._accel import BACKEND, USE_NUMBA
from .assignment import (AssignmentResult, BandSplit, band_layout,
                         conventional_assignment, count_cases,
                         exhaustive_assignment, hungarian_match, pair_users,
                         raman_objective, seven_band_assignment)
from .config import ResolvedConfig, SweepSpec, default_spectrum_path, parse_config
from .finite_key import (KeyResult, MeanBounds, SinglePhotonBounds, binary_entropy,
                         chernoff_mean_bounds, chernoff_observed_lower, key_length,
                         lambert_w0, lambert_wm1, phase_error_upper,
                         secret_key_length, single_photon_bit_error_upper,
                         single_photon_counts, single_photon_yield_lower, total_key)
from .grid import ChannelPlan, WavelengthGrid, build_grid, plan_wavelengths
from .link import (ChannelBudget, DeviceParams, ObservableSet, Scenario,
                   asymptotic_key_rate, asymptotic_observables, channel_budget,
                   sample_observables)
from .optimize import (NetworkRates, OptimizeResult, ProtocolParams,
                       cutoff_launch_power, min_block_size, network_rates,
                       optimize_params, optimize_params_asymptotic, rate_gain)
from .raman import (CrosstalkMatrix, NoiseBreakdown, RamanSpectrum,
                    backward_raman_power, build_crosstalk_matrix,
                    channel_background, forward_raman_power, load_spectrum,
                    load_spectrum_file, photons_per_gate)
from .sweep import CSV_COLUMNS, SweepResult, build_plan, emit_results, render_csv, run_sweep

__version__ = "0.1.0"
