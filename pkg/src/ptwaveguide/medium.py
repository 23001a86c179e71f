"""Dispersive material model for the gain/loss bilayer.

A pumped (gain) and an unpumped (absorbing) section of the same atomic gas
fill adjacent regions of the waveguide; both follow a single-resonance
Lorentz permittivity with opposite sign of the resonant term.  The module
provides the exact squared wavenumber of the guided mode, its near-cutoff
first-order truncation, and the effective Schrodinger parameters (complex
potential and auxiliary mass) that the truncation is equivalent to.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

from .quantities import C, HBAR, PI

logger = logging.getLogger(__name__)

# Largest acceptable relative detuning between the waveguide cutoff and the
# medium resonance for the tuned model.
CUTOFF_TUNING_TOL = 1e-9

# The near-cutoff reduction assumes omega_p^2/delta << delta, omega_c.
# Above this ratio the truncation is dubious; we warn rather than refuse.
REGIME_WARN_LEVEL = 0.1


class ParameterError(ValueError):
    """Physically inconsistent medium parameters."""


class RegionKind(Enum):
    """Spatial regions; the enum value is the sign of the resonant term."""

    GAIN = -1
    ABSORBING = 1
    VACUUM = 0

    @property
    def sign(self) -> int:
        return self.value


@dataclass(frozen=True)
class MediumParams:
    """Medium and geometry parameters, all SI.

    ``omega_c`` is derived from the slab width.  The primary constructor
    rejects parameter sets where the cutoff does not coincide with the
    resonance frequency, because the near-cutoff truncation implemented
    here relies on that tuning; use :meth:`detuned` to bypass the check
    for exploratory work.
    """

    omega0: float
    omega_p: float
    delta: float
    slab_width: float
    region_length: float
    omega_c: float = field(init=False)

    def __post_init__(self):
        if self.omega0 <= 0 or self.delta <= 0 or self.slab_width <= 0 \
                or self.region_length <= 0:
            raise ParameterError("omega0, delta, slab_width, region_length must be positive")
        if self.omega_p < 0:
            raise ParameterError("omega_p must be non-negative")
        object.__setattr__(self, "omega_c", C * PI / self.slab_width)
        if not getattr(self, "_skip_tuning_check", False):
            rel = abs(self.omega_c - self.omega0) / self.omega0
            if rel > CUTOFF_TUNING_TOL:
                raise ParameterError(
                    f"cutoff c*pi/width = {self.omega_c:.6e} does not match the resonance "
                    f"omega0 = {self.omega0:.6e} (relative mismatch {rel:.2e}); "
                    f"use MediumParams.tuned(...) or MediumParams.detuned(...)")
        if self.regime_ratio > REGIME_WARN_LEVEL:
            logger.warning(
                "medium outside the weak-resonance regime: "
                "omega_p^2/delta^2 = %.3g, omega_p^2/(delta*omega_c) = %.3g",
                self.regime_ratio_damping, self.regime_ratio_cutoff)

    @classmethod
    def tuned(cls, omega0: float, omega_p: float, delta: float,
              region_length: float) -> "MediumParams":
        """Choose the slab width so the cutoff coincides with the resonance."""
        if omega0 <= 0:
            raise ParameterError("omega0 must be positive")
        return cls(omega0=omega0, omega_p=omega_p, delta=delta,
                   slab_width=C * PI / omega0, region_length=region_length)

    @classmethod
    def detuned(cls, omega0: float, omega_p: float, delta: float,
                slab_width: float, region_length: float) -> "MediumParams":
        """Construct without the cutoff-equals-resonance check (exploratory)."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "_skip_tuning_check", True)
        obj.__init__(omega0=omega0, omega_p=omega_p, delta=delta,
                     slab_width=slab_width, region_length=region_length)
        return obj

    # Diagnostics for the small-parameter assumption omega_p^2/delta << delta, omega_c.
    @property
    def regime_ratio_damping(self) -> float:
        return (self.omega_p / self.delta) ** 2

    @property
    def regime_ratio_cutoff(self) -> float:
        return self.omega_p ** 2 / (self.delta * self.omega_c)

    @property
    def regime_ratio(self) -> float:
        return max(self.regime_ratio_damping, self.regime_ratio_cutoff)


def region_sign(z: float, params: MediumParams) -> int:
    """Sign of the resonant permittivity term at position z.

    -1 (gain) on (-l, 0), +1 (absorbing) on (0, l), 0 (vacuum) outside.
    Boundary points take the value of the region to their right; the
    solvers consume layer lists, so the convention is unobservable.
    """
    l = params.region_length
    if z < -l:
        return 0
    if z < 0:
        return -1
    if z < l:
        return 1
    return 0


def region_at(z: float, params: MediumParams) -> RegionKind:
    return RegionKind(region_sign(z, params))


def permittivity(kind: RegionKind, omega: float, params: MediumParams) -> complex:
    """Single-resonance Lorentz relative permittivity.

    1 - sign * omega_p^2 / (omega^2 - omega0^2 + 2i*delta*omega); the pumped
    region enters with the opposite sign, flipping absorption into gain.
    """
    if omega <= 0:
        raise ValueError(f"frequency must be positive, got {omega}")
    if kind.sign == 0:
        return 1.0 + 0.0j
    denom = omega * omega - params.omega0 ** 2 + 2j * params.delta * omega
    return 1.0 - kind.sign * params.omega_p ** 2 / denom


def k_squared_exact(kind: RegionKind, omega: float, params: MediumParams) -> complex:
    """Squared longitudinal wavenumber of the guided mode, dispersive model."""
    eps = permittivity(kind, omega, params)
    return (omega * omega * eps - params.omega_c ** 2) / C ** 2


def k_squared_approx(kind: RegionKind, detuning: float, params: MediumParams) -> complex:
    """First-order near-cutoff truncation of the squared wavenumber.

    2*omega_c*detuning/c^2 + i*sign*omega_c*omega_p^2/(2 c^2 delta); exact at
    zero detuning when the cutoff is tuned to the resonance.  Negative
    detunings are allowed for diagnostics.
    """
    re = 2.0 * params.omega_c * detuning / C ** 2
    im = kind.sign * params.omega_c * params.omega_p ** 2 / (2.0 * C ** 2 * params.delta)
    return complex(re, im)


def effective_potential(kind: RegionKind, params: MediumParams) -> complex:
    """Complex potential of the equivalent Schrodinger problem, in joules.

    Purely imaginary: +i|V| in the gain region (amplifying), -i|V| in the
    absorbing region, 0 in vacuum.
    """
    return -1j * kind.sign * params.omega_p ** 2 * HBAR / (4.0 * params.delta)


def effective_mass(params: MediumParams) -> float:
    """Auxiliary mass of the equivalent Schrodinger problem: hbar*omega_c/c^2."""
    return HBAR * params.omega_c / C ** 2


def raw_pt_defect(omega: float, params: MediumParams) -> float:
    """|k2(gain) - conj(k2(absorbing))| for the dispersive model, 1/m^2.

    Vanishes at omega = omega_c = omega0 (the resonance makes the two
    regions exact complex conjugates) and grows with detuning.
    """
    g = k_squared_exact(RegionKind.GAIN, omega, params)
    a = k_squared_exact(RegionKind.ABSORBING, omega, params)
    return abs(g - a.conjugate())


def from_config(config) -> MediumParams:
    """Build tuned parameters from a run configuration.

    The resonance frequency is primary: the slab width is set to make the
    cutoff coincide with it.  The configured width is only checked for
    consistency (it is typically a rounded number); a mismatch above 0.5%
    is logged.
    """
    from .quantities import ev_to_angular

    omega0 = ev_to_angular(config.hbar_omega0_ev)
    params = MediumParams.tuned(
        omega0=omega0,
        omega_p=ev_to_angular(config.hbar_omegap_ev),
        delta=ev_to_angular(config.hbar_delta_ev),
        region_length=config.region_length_um * 1e-6,
    )
    mismatch = width_mismatch(params, config)
    if mismatch > 5e-3:
        logger.warning(
            "configured slab_width_um = %g is %.2f%% away from c*pi/omega0; "
            "the resonance-tuned width %.6g um is used",
            config.slab_width_um, 100 * mismatch, params.slab_width * 1e6)
    return params


def width_mismatch(params: MediumParams, config) -> float:
    """Relative difference between the configured and the tuned slab width."""
    configured = config.slab_width_um * 1e-6
    return abs(params.slab_width - configured) / configured
