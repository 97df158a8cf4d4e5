"""Closed-form calculators: level structure, couplings, emission and transfer
rates, Stark shifts, loss budgets and boundary-loss conversions.

Everything here is a pure function of its arguments.  Rates and frequencies
are *angular* throughout; any consistent unit works for the ratio-type
formulas (use rad/us internally, rad/s at the CLI boundary).  The two
calculators that involve hbar, the mass density and the cross-section
(`coupling_strength`, `emission_rate_compression`) expect plain SI.

Conventions baked in:

- reported phases are reduced to (-pi, pi]
- the reduced orbital Zeeman term (f*gamma_L*B_z*L_z) is dropped from the
  ground-state model; its effect is negligible for the regimes covered here
- the drive-phase offset uses atan2, so it stays on the correct branch for
  negative detunings
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .units import HBAR, wrap_phase

__all__ = [
    "GroundStateSpectrum",
    "RamanDriveParams",
    "OpticalRamanParams",
    "OpticalRamanResult",
    "RamanRateResult",
    "RateBundle",
    "QFactorResult",
    "ResonantFlipError",
    "ground_state_spectrum",
    "ground_state_hamiltonian",
    "ground_state_eigenvectors",
    "coupling_strength",
    "emission_rate_compression",
    "raman_rate",
    "effective_emission_rate",
    "residual_flip_ratio",
    "optical_raman_params",
    "reflectivity_to_q",
    "q_to_reflectivity",
    "mode_spacing",
    "boundary_decay_rate",
    "cavity_coupling",
    "single_mode_coupling",
    "cavity_mode_coupling",
]


class ResonantFlipError(ValueError):
    """The spurious spin-flip channel is resonant: |delta - 2*omega_B| ~ 0."""


@dataclass(frozen=True)
class RateBundle:
    """Named scalar outputs of the rate calculators, each with a unit.

    entries are (name, value, unit) rows.  Rates (units "kHz", "MHz", "GHz",
    "rad/us") must be >= 0; phases (unit "rad") must lie in (-pi, pi].
    Signed level shifts carry a ", signed" unit suffix and dimensionless
    outputs are unconstrained.
    """

    entries: tuple

    _RATE_UNITS = ("kHz", "MHz", "GHz", "rad/us")

    def __post_init__(self):
        for name, value, unit in self.entries:
            if unit == "rad" and not (-math.pi < value <= math.pi):
                raise ValueError(f"{name}: phase {value} outside (-pi, pi]")
            if unit in self._RATE_UNITS and not value >= 0.0:
                raise ValueError(f"{name}: rate {value} {unit} must be >= 0")

    def __iter__(self):
        return iter(self.entries)

    def value(self, name: str) -> float:
        for n, v, _ in self.entries:
            if n == name:
                return v
        raise KeyError(name)


# ---------------------------------------------------------------------------
# Ground-state level structure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroundStateSpectrum:
    """Eigenenergies and mixing angles of the four-level ground manifold.

    Energies satisfy e3 - e1 = e4 - e2 = splitting, with
    splitting = sqrt(lambda_so^2 + 4*(upsilon_x^2 + upsilon_y^2)).
    """

    e1: float
    e2: float
    e3: float
    e4: float
    splitting: float
    theta: float
    phi: float


def ground_state_spectrum(
    lambda_so: float,
    upsilon_x: float = 0.0,
    upsilon_y: float = 0.0,
    omega_b: float = 0.0,
) -> GroundStateSpectrum:
    """Diagonalize the spin-orbit + Jahn-Teller + Zeeman ground manifold.

    lambda_so > 0 is the spin-orbit coupling, upsilon_x/y the Jahn-Teller
    strengths, omega_b the axial Zeeman energy (all angular).  Without
    distortion (upsilon = 0) the orbital mixing angle is pi/4 and phi = 0,
    i.e. the eigenstates are the circular orbital states.
    """
    if lambda_so <= 0.0:
        raise ValueError("lambda_so must be > 0")
    splitting = math.sqrt(lambda_so**2 + 4.0 * (upsilon_x**2 + upsilon_y**2))
    theta = math.atan2(
        2.0 * upsilon_x + splitting,
        math.sqrt(lambda_so**2 + 4.0 * upsilon_y**2),
    )
    phi = math.atan2(2.0 * upsilon_y, lambda_so)
    return GroundStateSpectrum(
        e1=(-omega_b - splitting) / 2.0,
        e2=(omega_b - splitting) / 2.0,
        e3=(-omega_b + splitting) / 2.0,
        e4=(omega_b + splitting) / 2.0,
        splitting=splitting,
        theta=theta,
        phi=phi,
    )


def ground_state_hamiltonian(
    lambda_so: float,
    upsilon_x: float = 0.0,
    upsilon_y: float = 0.0,
    omega_b: float = 0.0,
) -> np.ndarray:
    """4x4 ground-manifold Hamiltonian in the {ex, ey} x {up, down} basis."""
    orb = 0.5 * np.array(
        [[omega_b, 1j * lambda_so], [-1j * lambda_so, omega_b]], dtype=complex
    )
    jt = np.array(
        [[upsilon_x, upsilon_y], [upsilon_y, -upsilon_x]], dtype=complex
    )
    sz = np.diag([1.0, -1.0]).astype(complex)
    return np.kron(orb, sz) + np.kron(jt, np.eye(2, dtype=complex))


def ground_state_eigenvectors(spec: GroundStateSpectrum) -> np.ndarray:
    """Closed-form eigenvectors (columns 1..4) in the {ex, ey} x {up, down}
    basis, ordered to match (e1, e2, e3, e4)."""
    ct, st = math.cos(spec.theta), math.sin(spec.theta)
    em, ep = cmath.exp(-1j * spec.phi), cmath.exp(1j * spec.phi)
    up = np.array([1.0, 0.0], dtype=complex)
    dn = np.array([0.0, 1.0], dtype=complex)

    def orb(a, b):
        return np.array([a, b], dtype=complex)

    v1 = np.kron(orb(ct, -1j * st * em), dn)
    v2 = np.kron(orb(ct, 1j * st * ep), up)
    v3 = np.kron(orb(st, 1j * ct * em), dn)
    v4 = np.kron(orb(st, -1j * ct * ep), up)
    return np.column_stack([v1, v2, v3, v4])


# ---------------------------------------------------------------------------
# Strain coupling and bare emission
# ---------------------------------------------------------------------------


def coupling_strength(
    d: float,
    rho: float,
    area: float,
    omega: float,
    k: float,
    xi: float = 1.0,
) -> float:
    """Per-mode strain coupling g = d*sqrt(hbar*k^2/(2*rho*area*omega))*xi.

    SI units: d in rad/s (orbital strain susceptibility), rho in kg/m^3,
    area in m^2, omega in rad/s, k in rad/m.  xi is the dimensionless strain
    profile at the node (1 for a homogeneous compression mode; computing it
    from mode shapes is out of scope, supply it per node/branch).  Result in
    rad/s*sqrt(m), matching a 1/sqrt(length) mode normalization.
    """
    if rho <= 0.0 or area <= 0.0 or omega <= 0.0:
        raise ValueError("rho, area and omega must be > 0")
    return d * math.sqrt(HBAR * k * k / (2.0 * rho * area * omega)) * xi


def emission_rate_compression(
    d: float, rho: float, area: float, v: float, omega: float
) -> float:
    """Bare emission rate Gamma = d^2*hbar*omega/(rho*area*v^3) into a single
    linear-dispersion compression branch (SI units, result rad/s).

    Equals 2*|g|^2/v with g from coupling_strength at k = omega/v, xi = 1.
    """
    if min(d, rho, area, v, omega) <= 0.0:
        raise ValueError("all inputs must be > 0")
    return d * d * HBAR * omega / (rho * area * v**3)


# ---------------------------------------------------------------------------
# Drive-induced transfer rates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RamanDriveParams:
    """Microwave Raman drive: Rabi frequency omega_rabi, detuning delta, bare
    total emission gamma_ph at the carrier, and its per-branch split."""

    omega_rabi: float
    delta: float
    gamma_ph: float
    gamma_ph_branches: Mapping[str, float]

    def __post_init__(self):
        total = sum(self.gamma_ph_branches.values())
        if self.gamma_ph_branches and not math.isclose(
            total, self.gamma_ph, rel_tol=1e-9, abs_tol=1e-30
        ):
            raise ValueError(
                f"per-branch rates sum to {total}, expected {self.gamma_ph}"
            )


@dataclass(frozen=True)
class RamanRateResult:
    """Effective qubit transfer rates, AC-Stark shift and drive-phase offset."""

    gamma_branches: Mapping[str, float]
    gamma_total: float
    stark_shift: float
    phase_offset: float


def raman_rate(p: RamanDriveParams) -> RamanRateResult:
    """Effective decay of the qubit state under a far-detuned Raman drive.

    gamma_n = omega_rabi^2/(4*delta^2 + gamma_ph^2) * gamma_ph_n, the
    AC-Stark shift omega_s = (omega_rabi^2/4)*delta/(delta^2 + gamma_ph^2/4)
    and the drive-phase offset atan2(gamma_ph, 2*delta), reduced to (-pi, pi].
    The Stark shift is assumed compensated by drive-frequency tracking and is
    reported here only; the dynamics module never applies it.
    """
    denom = p.delta**2 + p.gamma_ph**2 / 4.0
    if denom <= 0.0:
        raise ValueError("delta and gamma_ph cannot both vanish")
    scale = (p.omega_rabi**2 / 4.0) / denom
    branches = {lbl: scale * g for lbl, g in p.gamma_ph_branches.items()}
    return RamanRateResult(
        gamma_branches=branches,
        gamma_total=scale * p.gamma_ph,
        stark_shift=scale * p.delta,
        phase_offset=wrap_phase(math.atan2(p.gamma_ph, 2.0 * p.delta)),
    )


def effective_emission_rate(gamma: float, phase: float) -> float:
    """Emission rate of a node interfering with its own boundary reflection:
    2*gamma*sin^2(phase/2), with phase the full round trip 2*k_n*x."""
    return 2.0 * gamma * math.sin(phase / 2.0) ** 2


def residual_flip_ratio(
    delta: float,
    omega_b: float,
    gamma_ph_carrier: float,
    gamma_ph_shifted: float,
) -> float:
    """Rate ratio of the spurious opposite-spin flip channel to the intended
    one: delta^2/(delta - 2*omega_b)^2 * Gamma(omega0 - 2*omega_B)/Gamma(omega0).

    Raises ResonantFlipError when |delta - 2*omega_b| < 1e-3*|delta|: there the
    spurious channel is resonant and the perturbative ratio diverges.
    """
    if gamma_ph_carrier <= 0.0:
        raise ValueError("gamma_ph_carrier must be > 0")
    gap = delta - 2.0 * omega_b
    if abs(gap) < 1e-3 * abs(delta):
        raise ResonantFlipError(
            f"spurious channel resonant: |delta - 2 omega_B| = {abs(gap):.3g}"
        )
    return (delta / gap) ** 2 * gamma_ph_shifted / gamma_ph_carrier


# ---------------------------------------------------------------------------
# Optical two-tone Raman drive
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OpticalRamanParams:
    """Optical Raman scheme via the excited state: two Rabi frequencies, the
    optical detuning delta_e, radiative width gamma_rad, the perpendicular
    Zeeman energy omega_x, ground splitting and axial Zeeman omega_b."""

    omega_rabi_u: float
    omega_rabi_d: float
    delta_e: float
    gamma_rad: float
    omega_x: float
    splitting: float
    omega_b: float = 0.0


@dataclass(frozen=True)
class OpticalRamanResult:
    """Mixing amplitudes, effective Rabi frequency, radiative loss rates and
    drive-induced level shifts of the effective three-level reduction."""

    eta_minus: float
    eta_plus: float
    eta: float
    omega_eff: float
    gamma_rad_u: float
    gamma_rad_d: float
    shift_u: float
    shift_d: float


def optical_raman_params(p: OpticalRamanParams) -> OpticalRamanResult:
    """Reduce the optically driven five-level problem to the effective
    three-level quantities.

    eta_pm = (omega_x/2)/(splitting pm omega_b) are the opposite-spin mixing
    amplitudes from the perpendicular field; the effective two-photon Rabi
    frequency is (eta_-/2)*omega_d*omega_u/sqrt(delta_e^2 + gamma_rad^2/4);
    the radiative leakage rates scale as the respective single-beam
    populations of the excited state.
    """
    if p.splitting - abs(p.omega_b) == 0.0:
        raise ValueError("splitting pm omega_b must be nonzero")
    eta_minus = 0.5 * p.omega_x / (p.splitting - p.omega_b)
    eta_plus = 0.5 * p.omega_x / (p.splitting + p.omega_b)
    denom = p.delta_e**2 + p.gamma_rad**2 / 4.0
    root = math.sqrt(denom)
    return OpticalRamanResult(
        eta_minus=eta_minus,
        eta_plus=eta_plus,
        eta=eta_minus + eta_plus,
        omega_eff=0.5 * eta_minus * p.omega_rabi_d * p.omega_rabi_u / root,
        gamma_rad_u=(eta_minus**2 / 4.0)
        * p.omega_rabi_u**2
        / denom
        * p.gamma_rad,
        gamma_rad_d=0.25 * p.omega_rabi_d**2 / denom * p.gamma_rad,
        shift_u=(eta_minus**2 / 4.0) * p.omega_rabi_u**2 / denom * p.delta_e,
        shift_d=0.25 * p.omega_rabi_d**2 / denom * p.delta_e,
    )


# ---------------------------------------------------------------------------
# Boundary loss <-> quality factor, cavity-limit couplings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QFactorResult:
    """Exponential-decay mapping of boundary loss: kappa (rad per time unit)
    and the corresponding quality factor Q = carrier/kappa."""

    kappa: float
    q: float


def reflectivity_to_q(
    reflectivity: float, length: float, velocity: float, carrier: float
) -> QFactorResult:
    """Map end reflectivity to (kappa, Q): kappa = -ln(R)*v/L, Q = omega0/kappa.

    R = 1 gives kappa = 0 and Q = inf; R = 0 (fully absorbing) maps to the
    Q = 0 sentinel.  Units: any, as long as velocity/length matches carrier.
    """
    if not (0.0 <= reflectivity <= 1.0):
        raise ValueError("reflectivity must be in [0, 1]")
    if length <= 0.0 or velocity <= 0.0 or carrier <= 0.0:
        raise ValueError("length, velocity and carrier must be > 0")
    if reflectivity == 0.0:
        return QFactorResult(kappa=math.inf, q=0.0)
    if reflectivity == 1.0:
        return QFactorResult(kappa=0.0, q=math.inf)
    kappa = -math.log(reflectivity) * velocity / length
    return QFactorResult(kappa=kappa, q=carrier / kappa)


def q_to_reflectivity(q: float, length: float, velocity: float, carrier: float) -> float:
    """Inverse of reflectivity_to_q: R = exp(-kappa*L/v) with kappa = omega0/Q."""
    if q == 0.0:
        return 0.0
    if math.isinf(q):
        return 1.0
    if q < 0.0:
        raise ValueError("q must be >= 0")
    kappa = carrier / q
    return math.exp(-kappa * length / velocity)


def mode_spacing(velocity: float, length: float) -> float:
    """Standing-wave mode spacing pi*v/L (angular)."""
    if length <= 0.0 or velocity <= 0.0:
        raise ValueError("length and velocity must be > 0")
    return math.pi * velocity / length


def boundary_decay_rate(reflectivity: float, spacing: float) -> float:
    """kappa = -ln(R) * spacing / pi (the per-round-trip loss spread over the
    round-trip time 2L/v = 2pi/spacing)."""
    if not (0.0 < reflectivity <= 1.0):
        raise ValueError("reflectivity must be in (0, 1]")
    return -math.log(reflectivity) * spacing / math.pi


def cavity_coupling(gamma_max: float, spacing: float) -> float:
    """Effective standing-mode coupling g = sqrt(gamma_max*spacing/(2*pi)) of
    a maximally driven, maximally placed node in the cavity limit."""
    if gamma_max < 0.0 or spacing < 0.0:
        raise ValueError("gamma_max and spacing must be >= 0")
    return math.sqrt(gamma_max * spacing / (2.0 * math.pi))


def single_mode_coupling(
    g_branch: float,
    omega_rabi: float,
    delta: float,
    k: float,
    x: float,
    length: float,
) -> float:
    """Standing-mode coupling of one node:
    g_j = sqrt(2/L) * (g_branch*omega_rabi/(2*delta)) * sin(k*x)."""
    if length <= 0.0:
        raise ValueError("length must be > 0")
    if delta == 0.0:
        raise ValueError("delta must be nonzero")
    return (
        math.sqrt(2.0 / length)
        * g_branch
        * omega_rabi
        / (2.0 * delta)
        * math.sin(k * x)
    )


def cavity_mode_coupling(g0: float, wavelength: float, length: float) -> float:
    """Single standing-mode coupling g_L = g0*sqrt(wavelength/length)."""
    if wavelength <= 0.0 or length <= 0.0:
        raise ValueError("wavelength and length must be > 0")
    return g0 * math.sqrt(wavelength / length)
