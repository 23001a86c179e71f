"""Piecewise-constant 1D Helmholtz scattering engine.

Solves phi'' + k^2(z) phi = 0 for a stack of uniform layers between two
identical semi-infinite propagating regions, by 2x2 transfer matrices over
plane-wave coefficient pairs, and independently by adaptive Runge-Kutta
integration of the same ODE (the cross-validation oracle).

Phase conventions: each region's coefficients multiply e^{+-ik(z - z_edge)}
with z_edge the region's left edge (the left exterior is referenced at the
first interface, the right exterior at the last).  This keeps every
exponential bounded by |k|*thickness and fixes the amplitude phases; all
|.|^2 observables and the PT bilinears are reference-independent.
"""

from __future__ import annotations

import cmath
import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

logger = logging.getLogger(__name__)

# Below |k|*d the +-k exponential basis is ill-conditioned (interface ratios
# ~ 1/(k d) amplify roundoff); cross such layers in the (phi, phi') basis,
# which degenerates smoothly to the {1, z} fundamental pair at k = 0.
DEGENERATE_KD = 1e-3


class SingularInterfaceError(ValueError):
    """Interface into a zero-wavenumber medium has no plane-wave basis."""


class SpectralSingularityError(ArithmeticError):
    """m22 = 0: amplitudes diverge at this real frequency (gain-induced pole)."""


class StiffnessError(RuntimeError):
    """Adaptive integration step size underflowed."""

    def __init__(self, z: float, message: str):
        super().__init__(f"integration stalled near z = {z:.6e}: {message}")
        self.z = z


@dataclass(frozen=True)
class Layer:
    """Uniform slab with complex squared wavenumber (1/m^2) and thickness (m)."""

    k2: complex
    thickness: float

    def __post_init__(self):
        if self.thickness < 0:
            raise ValueError(f"thickness must be non-negative, got {self.thickness}")


@dataclass(frozen=True)
class LayerStack:
    """Ordered layers between two identical propagating exterior regions."""

    k_outer: float
    layers: tuple[Layer, ...]

    def __post_init__(self):
        if self.k_outer <= 0:
            raise ValueError(f"k_outer must be positive, got {self.k_outer}")
        object.__setattr__(self, "layers", tuple(self.layers))

    @property
    def total_thickness(self) -> float:
        return sum(layer.thickness for layer in self.layers)


@dataclass(frozen=True)
class TransferMatrix:
    m11: complex
    m12: complex
    m21: complex
    m22: complex

    def det(self) -> complex:
        return self.m11 * self.m22 - self.m12 * self.m21

    def __matmul__(self, other: "TransferMatrix") -> "TransferMatrix":
        return TransferMatrix(
            self.m11 * other.m11 + self.m12 * other.m21,
            self.m11 * other.m12 + self.m12 * other.m22,
            self.m21 * other.m11 + self.m22 * other.m21,
            self.m21 * other.m12 + self.m22 * other.m22,
        )


IDENTITY = TransferMatrix(1.0, 0.0, 0.0, 1.0)


@dataclass(frozen=True)
class ScatteringAmplitudes:
    """Transmission/reflection amplitudes for left and right incidence."""

    t_left: complex
    r_left: complex
    t_right: complex
    r_right: complex


def wavenumber_from_k2(k2: complex) -> complex:
    """Principal square root; real-axis inputs resolve to the upper branch cut.

    Amplitudes are branch-independent (the coefficient basis is symmetric in
    +-k); a fixed choice just makes intermediates reproducible.
    """
    z = complex(k2)
    if z.imag == 0.0:
        z = complex(z.real, 0.0)
    return cmath.sqrt(z)


def interface_matrix(k_from: complex, k_to: complex) -> TransferMatrix:
    """Map coefficient pairs across an interface, enforcing continuity of
    phi and phi'.  Determinant is k_from / k_to."""
    if k_to == 0:
        raise SingularInterfaceError("cannot enter a k = 0 medium in the plane-wave basis")
    r = k_from / k_to
    return TransferMatrix(0.5 * (1 + r), 0.5 * (1 - r),
                          0.5 * (1 - r), 0.5 * (1 + r))


def propagation_matrix(k: complex, d: float) -> TransferMatrix:
    """Advance the coefficient reference point by d inside a uniform medium."""
    if d < 0:
        raise ValueError(f"thickness must be non-negative, got {d}")
    e = cmath.exp(1j * k * d)
    return TransferMatrix(e, 0.0, 0.0, 1.0 / e)


def _phi_basis_from_pm(k: complex) -> TransferMatrix:
    # (A+, A-) -> (phi, phi')
    return TransferMatrix(1.0, 1.0, 1j * k, -1j * k)


def _pm_basis_from_phi(k: complex) -> TransferMatrix:
    # (phi, phi') -> (A+, A-)
    inv = 1.0 / (1j * k)
    return TransferMatrix(0.5, 0.5 * inv, 0.5, -0.5 * inv)


def _degenerate_crossing(k: complex, d: float) -> TransferMatrix:
    # (phi, phi') transfer across a uniform layer:
    # [[cos(kd), sin(kd)/k], [-k sin(kd), cos(kd)]], regular at k = 0 where
    # it becomes the {1, z} pair [[1, d], [0, 1]].
    kd = k * d
    if abs(kd) < 1e-4:
        kd2 = kd * kd
        sinc = 1.0 - kd2 / 6.0 * (1.0 - kd2 / 20.0)
        cos = 1.0 - kd2 / 2.0 * (1.0 - kd2 / 12.0)
    else:
        sinc = cmath.sin(kd) / kd
        cos = cmath.cos(kd)
    return TransferMatrix(cos, d * sinc, -k * k * d * sinc, cos)


def total_transfer(stack: LayerStack) -> TransferMatrix:
    """Ordered product of interface and propagation matrices, left exterior
    to right exterior.

    Layers with |k|*thickness below ``DEGENERATE_KD`` are crossed in the
    (phi, phi') basis where the k -> 0 limit is regular; the affected layer
    indices are logged.
    """
    M = IDENTITY
    k_cur = complex(stack.k_outer)
    in_phi_basis = False
    for index, layer in enumerate(stack.layers):
        k = wavenumber_from_k2(layer.k2)
        if abs(k) * layer.thickness < DEGENERATE_KD:
            logger.info("layer %d: |k|*d = %.3e below threshold, using {1, z} limit basis",
                        index, abs(k) * layer.thickness)
            if not in_phi_basis:
                M = _phi_basis_from_pm(k_cur) @ M
                in_phi_basis = True
            M = _degenerate_crossing(k, layer.thickness) @ M
        else:
            if in_phi_basis:
                M = _pm_basis_from_phi(k) @ M
                in_phi_basis = False
            else:
                M = interface_matrix(k_cur, k) @ M
            M = propagation_matrix(k, layer.thickness) @ M
            k_cur = k
    if in_phi_basis:
        M = _pm_basis_from_phi(complex(stack.k_outer)) @ M
    else:
        M = interface_matrix(k_cur, complex(stack.k_outer)) @ M
    return M


def _amplitudes_from_transfer(m: TransferMatrix) -> ScatteringAmplitudes:
    # With equal exterior wavenumbers the determinant telescopes to exactly 1,
    # so t_left = det/m22 = 1/m22 = t_right; using the analytic value avoids
    # the catastrophic cancellation of the numeric 2x2 determinant when the
    # matrix entries reach e^{2 Im(k) d} ~ e^{40}.
    if m.m22 == 0:
        raise SpectralSingularityError(
            "m22 = 0: spectral singularity, no bounded scattering solution "
            "at this real frequency")
    t = 1.0 / m.m22
    if not (cmath.isfinite(t)):
        raise SpectralSingularityError(f"non-finite transmission from m22 = {m.m22!r}")
    return ScatteringAmplitudes(
        t_left=t,
        r_left=-m.m21 / m.m22,
        t_right=t,
        r_right=m.m12 / m.m22,
    )


def amplitudes(stack: LayerStack) -> ScatteringAmplitudes:
    """Scattering amplitudes of the stack for both incidence directions.

    Left incidence: phi = e^{ikz'} + r_left e^{-ikz'} on the left
    (z' referenced at the first interface) and t_left e^{ikz''} on the right
    (z'' referenced at the last).  Right incidence is the mirror image.
    Raises :class:`SpectralSingularityError` at a scattering pole.
    """
    return _amplitudes_from_transfer(total_transfer(stack))


def flux_sums(amp: ScatteringAmplitudes) -> tuple[float, float]:
    """(|t|^2 + |r|^2) for left and right incidence; 1 for unitary scattering."""
    s_left = abs(amp.t_left) ** 2 + abs(amp.r_left) ** 2
    s_right = abs(amp.t_right) ** 2 + abs(amp.r_right) ** 2
    return s_left, s_right


def stack_k2_profile(stack: LayerStack):
    """Piecewise k^2(z) of the stack laid out on [0, total_thickness].

    Returns (k2_of_z, (z_min, z_max), knots); knots are the interior
    interface positions, useful to segment the ODE oracle.
    """
    edges = [0.0]
    for layer in stack.layers:
        edges.append(edges[-1] + layer.thickness)
    k2_outer = complex(stack.k_outer) ** 2
    spans = [(edges[i], edges[i + 1], complex(stack.layers[i].k2))
             for i in range(len(stack.layers))]

    def k2_of_z(z: float) -> complex:
        for z0, z1, k2 in spans:
            if z0 < z <= z1:
                return k2
        return k2_outer

    return k2_of_z, (0.0, edges[-1]), tuple(edges[1:-1])


def ode_amplitudes(k2_of_z, z_span: tuple[float, float], k_outer: float, *,
                   knots: tuple[float, ...] = (), rtol: float = 1e-10,
                   atol: float = 1e-10, method: str = "RK45") -> ScatteringAmplitudes:
    """Scattering amplitudes by direct adaptive integration of the wave ODE.

    Independent cross-check of :func:`amplitudes`: integrates
    phi'' = -k^2(z) phi from the far boundary seeded with the outgoing wave,
    then decomposes the solution at the near boundary into incoming and
    outgoing plane waves.  ``knots`` (interior discontinuities of k^2) split
    the integration into smooth segments; the embedded 5(4) pair then
    controls the error properly.  Conventions match :func:`amplitudes`
    (references at z_min and z_max).
    """
    z_min, z_max = z_span
    if not z_max > z_min:
        raise ValueError("z_span must be increasing")
    ik = 1j * k_outer

    def run(points: list[float], y0) -> np.ndarray:
        y = np.asarray(y0, dtype=complex)
        for z0, z1 in zip(points[:-1], points[1:]):
            if z1 == z0:
                continue
            # Evaluations landing exactly on a segment endpoint are nudged
            # inward so a k^2 discontinuity at a knot never leaks the
            # neighbouring segment's value into this one.
            nudge = (z1 - z0) * 1e-12

            def rhs(z, state, z0=z0, z1=z1, nudge=nudge):
                if z == z0:
                    z = z0 + nudge
                elif z == z1:
                    z = z1 - nudge
                return [state[1], -k2_of_z(z) * state[0]]

            sol = solve_ivp(rhs, (z0, z1), y, method=method, rtol=rtol, atol=atol,
                            first_step=abs(z1 - z0) / 1000.0)
            if not sol.success:
                raise StiffnessError(float(sol.t[-1]), sol.message)
            y = sol.y[:, -1]
        return y

    interior = sorted(k for k in knots if z_min < k < z_max)
    forward = [z_min, *interior, z_max]
    backward = list(reversed(forward))

    # Left incidence: outgoing wave e^{ik(z - z_max)} seeded at z_max,
    # integrated to z_min, decomposed against e^{+-ik(z - z_min)}.
    phi, dphi = run(backward, [1.0, ik])
    a_in = 0.5 * (phi + dphi / ik)
    a_out = 0.5 * (phi - dphi / ik)
    t_left = 1.0 / a_in
    r_left = a_out / a_in

    # Right incidence: outgoing wave e^{-ik(z - z_min)} seeded at z_min.
    phi, dphi = run(forward, [1.0, -ik])
    b_out = 0.5 * (phi + dphi / ik)
    b_in = 0.5 * (phi - dphi / ik)
    t_right = 1.0 / b_in
    r_right = b_out / b_in

    return ScatteringAmplitudes(t_left=t_left, r_left=r_left,
                                t_right=t_right, r_right=r_right)


def ode_amplitudes_for_stack(stack: LayerStack, **kwargs) -> ScatteringAmplitudes:
    """ODE-oracle amplitudes of a LayerStack (same conventions as amplitudes)."""
    k2_of_z, z_span, knots = stack_k2_profile(stack)
    if z_span[1] == z_span[0]:
        return ScatteringAmplitudes(1.0, 0.0, 1.0, 0.0)
    return ode_amplitudes(k2_of_z, z_span, stack.k_outer, knots=knots, **kwargs)


def max_relative_difference(a: ScatteringAmplitudes, b: ScatteringAmplitudes) -> float:
    """Worst relative amplitude disagreement between two solutions."""
    worst = 0.0
    for x, y in ((a.t_left, b.t_left), (a.r_left, b.r_left),
                 (a.t_right, b.t_right), (a.r_right, b.r_right)):
        scale = max(abs(x), abs(y))
        if scale > 0:
            worst = max(worst, abs(x - y) / scale)
    return worst


def growth_exponent(stack: LayerStack) -> float:
    """Largest |Im k| * thickness over the stack.

    Transfer-matrix entries reach e^{2x} of this exponent; above ~17 the
    numeric 2x2 determinant is destroyed by cancellation (amplitudes remain
    accurate, as they only use entry ratios and the analytic determinant).
    """
    worst = 0.0
    for layer in stack.layers:
        k = wavenumber_from_k2(layer.k2)
        worst = max(worst, abs(k.imag) * layer.thickness)
    return worst
