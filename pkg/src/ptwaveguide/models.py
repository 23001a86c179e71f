"""The two concrete scattering models and the frequency sweep.

Exact: dispersive Maxwell wavenumbers of the guided mode.
Approximate: first-order near-cutoff truncation, equivalent to a stationary
Schrodinger problem at energy hbar*detuning with the purely imaginary
gain/loss potential.

Both reduce to the same two-layer stack geometry: gain over (-l, 0),
absorber over (0, l), vacuum outside.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from math import log10, sqrt
from typing import Mapping, Sequence

from .helmholtz import (Layer, LayerStack, ScatteringAmplitudes,
                        SpectralSingularityError, amplitudes, flux_sums)
from .medium import (MediumParams, RegionKind, k_squared_approx,
                     k_squared_exact, raw_pt_defect)
from .quantities import C

STATUS_OK = "ok"
STATUS_SINGULAR = "singular"


class BelowCutoffError(ValueError):
    """No propagating exterior solution at or below the cutoff."""


class ModelKind(Enum):
    EXACT = "exact"
    APPROXIMATE = "approx"


def build_exact_stack(params: MediumParams, omega: float) -> LayerStack:
    """Gain/absorber bilayer with the dispersive-model wavenumbers at omega."""
    if omega <= params.omega_c:
        raise BelowCutoffError(
            f"omega = {omega:.6e} is not above the cutoff {params.omega_c:.6e}")
    k_outer = sqrt(omega * omega - params.omega_c ** 2) / C
    l = params.region_length
    return LayerStack(k_outer, (
        Layer(k_squared_exact(RegionKind.GAIN, omega, params), l),
        Layer(k_squared_exact(RegionKind.ABSORBING, omega, params), l),
    ))


def build_approx_stack(params: MediumParams, detuning: float) -> LayerStack:
    """Bilayer with the truncated wavenumbers at the given detuning above cutoff.

    Identical to the stationary Schrodinger problem at energy E = hbar*detuning
    with mass hbar*omega_c/c^2 and the piecewise-imaginary potential:
    2m(E - V)/hbar^2 reproduces the truncated k^2 exactly.
    """
    if detuning <= 0:
        raise BelowCutoffError(f"detuning = {detuning:.6e} must be positive")
    k_outer = sqrt(2.0 * params.omega_c * detuning) / C
    l = params.region_length
    return LayerStack(k_outer, (
        Layer(k_squared_approx(RegionKind.GAIN, detuning, params), l),
        Layer(k_squared_approx(RegionKind.ABSORBING, detuning, params), l),
    ))


def build_stack(model: ModelKind, params: MediumParams, omega: float) -> LayerStack:
    if model is ModelKind.EXACT:
        return build_exact_stack(params, omega)
    return build_approx_stack(params, omega - params.omega_c)


def pt_defect(model: ModelKind, params: MediumParams, omega: float) -> float:
    """Deviation of the profile from k^2(-z) = conj(k^2(z)), dimensionless.

    Maximum over mirrored position pairs of |k^2(-z) - conj(k^2(z))|, scaled
    by the gain/loss wavenumber magnitude at cutoff (the strength of the
    non-Hermitian term, a frequency-independent yardstick).  Exactly zero
    for the approximate model; zero at cutoff and growing with detuning for
    the exact one.
    """
    if omega < params.omega_c:
        raise BelowCutoffError(
            f"omega = {omega:.6e} is below the cutoff {params.omega_c:.6e}")
    scale = abs(k_squared_approx(RegionKind.ABSORBING, 0.0, params))
    if scale == 0.0:
        return 0.0
    if model is ModelKind.APPROXIMATE:
        detuning = omega - params.omega_c
        g = k_squared_approx(RegionKind.GAIN, detuning, params)
        a = k_squared_approx(RegionKind.ABSORBING, detuning, params)
        defect = abs(g - a.conjugate())
    else:
        defect = raw_pt_defect(omega, params)
    return defect / scale


@dataclass(frozen=True)
class ModelResult:
    """Scattering outcome of one model at one frequency."""

    status: str
    amplitudes: ScatteringAmplitudes | None
    s_left: float | None
    s_right: float | None
    log10_s_left: float | None
    log10_s_right: float | None

    @classmethod
    def from_amplitudes(cls, amp: ScatteringAmplitudes) -> "ModelResult":
        s_left, s_right = flux_sums(amp)
        return cls(STATUS_OK, amp, s_left, s_right, log10(s_left), log10(s_right))

    @classmethod
    def singular(cls) -> "ModelResult":
        return cls(STATUS_SINGULAR, None, None, None, None, None)


@dataclass(frozen=True)
class SweepRow:
    omega_over_omegac: float
    results: Mapping[ModelKind, ModelResult]


def sweep_grid(start: float, stop: float, n: int) -> list[float]:
    """n uniformly spaced omega/omega_c values, endpoints included."""
    if not (1.0 < start < stop):
        raise ValueError(f"need 1 < start < stop, got start={start}, stop={stop}")
    if n < 2:
        raise ValueError(f"need at least 2 points, got {n}")
    step = (stop - start) / (n - 1)
    return [start + i * step for i in range(n)]


def evaluate_row(params: MediumParams, omega_over_omegac: float,
                 models: Sequence[ModelKind]) -> SweepRow:
    """Amplitudes and flux sums of the requested models at one frequency.

    A spectral singularity marks that model's result instead of aborting.
    """
    omega = omega_over_omegac * params.omega_c
    results: dict[ModelKind, ModelResult] = {}
    for model in models:
        try:
            amp = amplitudes(build_stack(model, params, omega))
        except SpectralSingularityError:
            results[model] = ModelResult.singular()
        else:
            results[model] = ModelResult.from_amplitudes(amp)
    return SweepRow(omega_over_omegac, results)


def sweep(params: MediumParams, start: float, stop: float, n: int,
          models: Sequence[ModelKind] = (ModelKind.EXACT, ModelKind.APPROXIMATE),
          max_workers: int = 1) -> list[SweepRow]:
    """Evaluate the grid; rows come back in ascending frequency order
    regardless of the degree of parallelism."""
    grid = sweep_grid(start, stop, n)
    models = tuple(models)
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(lambda x: evaluate_row(params, x, models), grid))
    return [evaluate_row(params, x, models) for x in grid]
