"""JSON configuration: parsing, defaults, validation, round-trip emission.

A config carries sections topology / setup / channels / devices / protocol /
sweep plus a spectrum file path.  Every field is optional; omitted device
fields fall back to the nominal defaults and the resolution records which
fields were defaulted, so a result sidecar can state the full provenance
and be parsed back into the identical scenario.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .errors import ConfigError
from .grid import build_grid
from .link import DeviceParams, Scenario
from .raman import load_spectrum_file

SWEEP_VARIABLES = ("block_size", "launch_power", "users", "coupling_loss")
PLAN_CHOICES = ("conventional", "seven_band", "both")
OUTPUT_CHOICES = ("finite", "asymptotic")


def default_spectrum_path() -> str:
    return str(resources.files("qcpon").joinpath("data/raman_spectrum_synthetic.txt"))


# (section, field) -> (default, converter, validator or None)
def _positive(path):
    def check(v):
        if v <= 0:
            raise ConfigError(f"{path} must be > 0, got {v}")
        return v
    return check


def _non_negative(path):
    def check(v):
        if v < 0:
            raise ConfigError(f"{path} must be >= 0, got {v}")
        return v
    return check


def _unit_interval(path):
    def check(v):
        if not 0 < v <= 1:
            raise ConfigError(f"{path} must be in (0, 1], got {v}")
        return v
    return check


_SCHEMA = {
    "topology": {
        "feeder_km": (5.0, float, _non_negative("topology.feeder_km")),
        "drop_km": (0.5, float, _non_negative("topology.drop_km")),
        "users": (1, int, _positive("topology.users")),
    },
    "setup": {
        "kind": ("fiber", str, None),
        "coupling_loss_db": (16.0, float, _non_negative("setup.coupling_loss_db")),
        "ambient_photons_per_gate": (0.0, float,
                                     _non_negative("setup.ambient_photons_per_gate")),
    },
    "channels": {
        "lambda_start_nm": (1530.0, float, _positive("channels.lambda_start_nm")),
        "lambda_end_nm": (1564.4, float, _positive("channels.lambda_end_nm")),
        "delta_nm": (0.8, float, _positive("channels.delta_nm")),
        "launch_power_dbm": (-30.0, float, None),
    },
    "devices": {
        "detector_efficiency": (0.3, float, _unit_interval("devices.detector_efficiency")),
        "dark_count_rate_per_ns": (1e-6, float,
                                   _non_negative("devices.dark_count_rate_per_ns")),
        "error_correction_inefficiency": (1.22, float, None),
        "misalignment_probability": (0.033, float, None),
        "gate_ns": (0.1, float, _positive("devices.gate_ns")),
        "fiber_attenuation_db_per_km": (0.2, float,
                                        _non_negative("devices.fiber_attenuation_db_per_km")),
        "awg_insertion_loss_db": (2.0, float, _non_negative("devices.awg_insertion_loss_db")),
        "awg_passes": (1, int, _non_negative("devices.awg_passes")),
        "pulse_rate_ghz": (1.0, float, _positive("devices.pulse_rate_ghz")),
        "nbf_bandwidth_ghz": (25.0, float, _positive("devices.nbf_bandwidth_ghz")),
        "failure_probability": (1e-10, float, None),
    },
    "protocol": {
        "block_size": (1e11, float, _positive("protocol.block_size")),
    },
}


@dataclass(frozen=True)
class SweepSpec:
    """One study axis: which scenario variable to sweep, over which values,
    which plans to compare, and whether to add asymptotic-limit curves."""

    variable: str
    values: tuple[float, ...]
    plans: str = "both"
    outputs: tuple[str, ...] = ("finite",)

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ConfigError(
                f"sweep.variable must be one of {SWEEP_VARIABLES}, got {self.variable!r}"
            )
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if not values:
            raise ConfigError("sweep.values must not be empty")
        if list(values) != sorted(values):
            raise ConfigError("sweep.values must be sorted increasing")
        if self.plans not in PLAN_CHOICES:
            raise ConfigError(f"sweep.plans must be one of {PLAN_CHOICES}, got {self.plans!r}")
        outputs = tuple(self.outputs)
        object.__setattr__(self, "outputs", outputs)
        if not outputs or any(o not in OUTPUT_CHOICES for o in outputs):
            raise ConfigError(f"sweep.outputs must be a non-empty subset of {OUTPUT_CHOICES}")

    @property
    def plan_list(self) -> tuple[str, ...]:
        return ("conventional", "seven_band") if self.plans == "both" else (self.plans,)


@dataclass(frozen=True)
class ResolvedConfig:
    scenario: Scenario
    sweep: SweepSpec | None
    spectrum_file: str
    defaulted_fields: tuple[str, ...]
    raw: dict


def _resolve_section(data: dict, section: str, defaulted: list[str]) -> dict:
    spec = _SCHEMA[section]
    given = data.get(section, {})
    if not isinstance(given, dict):
        raise ConfigError(f"section '{section}' must be an object")
    for key in given:
        if key not in spec:
            raise ConfigError(f"unknown field '{section}.{key}'")
    out = {}
    for key, (default, conv, check) in spec.items():
        if key in given:
            try:
                v = conv(given[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{section}.{key}: {exc}") from exc
        else:
            v = default
            defaulted.append(f"{section}.{key}")
        if check is not None:
            v = check(v)
        out[key] = v
    return out


def parse_config(text: str) -> ResolvedConfig:
    """Parse a JSON configuration into a validated (Scenario, SweepSpec)."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("top-level config must be an object")
    known = set(_SCHEMA) | {"spectrum_file", "sweep"}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown field '{key}'")

    defaulted: list[str] = []
    topo = _resolve_section(data, "topology", defaulted)
    setup = _resolve_section(data, "setup", defaulted)
    channels = _resolve_section(data, "channels", defaulted)
    devices = _resolve_section(data, "devices", defaulted)
    protocol = _resolve_section(data, "protocol", defaulted)

    if setup["kind"] not in ("fiber", "wireless"):
        raise ConfigError(f"setup.kind must be 'fiber' or 'wireless', got {setup['kind']!r}")

    spectrum_file = data.get("spectrum_file")
    if spectrum_file is None:
        spectrum_file = default_spectrum_path()
        defaulted.append("spectrum_file")
    elif not isinstance(spectrum_file, str):
        raise ConfigError("spectrum_file must be a string path")
    try:
        spectrum = load_spectrum_file(spectrum_file)
    except OSError as exc:
        raise ConfigError(f"spectrum_file: {exc}") from exc

    try:
        grid = build_grid(channels["lambda_start_nm"], channels["lambda_end_nm"],
                          channels["delta_nm"])
        dev = DeviceParams(**devices)
        scenario = Scenario(
            grid=grid,
            spectrum=spectrum,
            users=topo["users"],
            feeder_km=topo["feeder_km"],
            drop_km=topo["drop_km"],
            setup=setup["kind"],
            coupling_loss_db=setup["coupling_loss_db"],
            ambient_photons_per_gate=setup["ambient_photons_per_gate"],
            launch_power_dbm=channels["launch_power_dbm"],
            block_size=protocol["block_size"],
            devices=dev,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    sweep = None
    if "sweep" in data:
        sw = data["sweep"]
        if not isinstance(sw, dict):
            raise ConfigError("section 'sweep' must be an object")
        allowed = {"variable", "values", "plans", "outputs"}
        for key in sw:
            if key not in allowed:
                raise ConfigError(f"unknown field 'sweep.{key}'")
        if "variable" not in sw or "values" not in sw:
            raise ConfigError("sweep needs 'variable' and 'values'")
        sweep = SweepSpec(
            variable=sw["variable"],
            values=tuple(sw["values"]),
            plans=sw.get("plans", "both"),
            outputs=tuple(sw.get("outputs", ("finite",))),
        )

    raw = {
        "topology": topo,
        "setup": setup,
        "channels": channels,
        "devices": devices,
        "protocol": protocol,
        "spectrum_file": spectrum_file,
    }
    if sweep is not None:
        raw["sweep"] = {
            "variable": sweep.variable,
            "values": list(sweep.values),
            "plans": sweep.plans,
            "outputs": list(sweep.outputs),
        }
    return ResolvedConfig(scenario, sweep, spectrum_file, tuple(defaulted), raw)
