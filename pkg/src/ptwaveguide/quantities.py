"""Physical constants, unit conversions, and run-configuration parsing.

Everything downstream works in SI (meters, rad/s, joules); electron-volts
and micrometers appear only here, at the configuration boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class PhysicalConstants:
    """2019 SI exact values."""

    c: float = 299792458.0
    hbar: float = 1.054571817e-34
    e_charge: float = 1.602176634e-19


CONSTANTS = PhysicalConstants()

C = CONSTANTS.c
HBAR = CONSTANTS.hbar
E_CHARGE = CONSTANTS.e_charge

PI = 3.141592653589793


def ev_to_angular(energy_ev: float) -> float:
    """Photon energy in eV to angular frequency in rad/s."""
    if energy_ev < 0:
        raise ValueError(f"energy must be non-negative, got {energy_ev} eV")
    return energy_ev * E_CHARGE / HBAR


def angular_to_ev(omega: float) -> float:
    """Angular frequency in rad/s to photon energy in eV."""
    if omega < 0:
        raise ValueError(f"angular frequency must be non-negative, got {omega}")
    return omega * HBAR / E_CHARGE


def cutoff_frequency(slab_width: float) -> float:
    """Lowest propagating angular frequency of the slab mode, c*pi / width.

    ``slab_width`` is the full gap between the mirrors, in meters.
    """
    if slab_width <= 0:
        raise ValueError(f"slab width must be positive, got {slab_width}")
    return C * PI / slab_width


class ConfigError(ValueError):
    """Base class for configuration failures."""


class ConfigParseError(ConfigError):
    """A line of the config file could not be parsed."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ConfigValidationError(ConfigError):
    """A config value violates its constraint."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class Config:
    """Resolved run configuration; defaults reproduce the reference sweep."""

    slab_width_um: float = 0.124
    hbar_omega0_ev: float = 5.0
    hbar_omegap_ev: float = 0.2
    hbar_delta_ev: float = 1.25
    region_length_um: float = 19.7
    sweep_start: float = 1.0005
    sweep_stop: float = 1.10
    sweep_points: int = 400
    output_path: str = "results.csv"

    def __post_init__(self):
        for key in ("slab_width_um", "hbar_omega0_ev", "hbar_omegap_ev",
                    "hbar_delta_ev", "region_length_um"):
            if getattr(self, key) <= 0:
                raise ConfigValidationError(key, "must be strictly positive")
        if self.sweep_start <= 1:
            raise ConfigValidationError(
                "sweep_start", "must exceed 1 (exterior waves propagate only above cutoff)")
        if self.sweep_stop <= self.sweep_start:
            raise ConfigValidationError("sweep_stop", "must exceed sweep_start")
        if self.sweep_points < 2:
            raise ConfigValidationError("sweep_points", "must be at least 2")


_FLOAT_KEYS = ("slab_width_um", "hbar_omega0_ev", "hbar_omegap_ev",
               "hbar_delta_ev", "region_length_um", "sweep_start", "sweep_stop")
_INT_KEYS = ("sweep_points",)
_STR_KEYS = ("output_path",)
CONFIG_KEYS = _FLOAT_KEYS + _INT_KEYS + _STR_KEYS


def parse_config(text: str) -> Config:
    """Parse ``key = value`` lines; ``#`` starts a comment; blank lines ignored.

    Unknown keys and malformed lines raise :class:`ConfigParseError` with the
    line number; constraint violations raise :class:`ConfigValidationError`
    naming the key.
    """
    values: dict[str, object] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(line_no, f"expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in CONFIG_KEYS:
            raise ConfigParseError(line_no, f"unknown key {key!r}")
        if not value:
            raise ConfigParseError(line_no, f"empty value for {key!r}")
        try:
            if key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key in _INT_KEYS:
                values[key] = int(value)
            else:
                values[key] = value
        except ValueError:
            raise ConfigParseError(line_no, f"cannot parse value {value!r} for {key!r}") from None
    return Config(**values)


def load_config(path: str) -> Config:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def with_overrides(config: Config, **kwargs) -> Config:
    """Return a copy with the given fields replaced (re-validated)."""
    return replace(config, **{k: v for k, v in kwargs.items() if v is not None})


def config_as_dict(config: Config) -> dict:
    return {f.name: getattr(config, f.name) for f in fields(config)}
