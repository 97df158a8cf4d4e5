"""Drive-program library: constant drives, the exponential emission ramp and
the dark-state receiver controller.

The controller synthesizes (gamma_r(t), theta_r(t)) once per integration step
from the step-resolved incoming field and the receiver amplitude, solving

    Phi_in + sqrt(gamma_t/2) * c_r * e^{i theta} = 0

for the targeted branch whenever that is feasible, and clamping to the rate
cap otherwise.  It is causal by construction: outputs at t depend only on
state and fields at times <= t.
"""

from __future__ import annotations

import cmath
import math

from .config import DriveProgram

__all__ = [
    "constant_drive",
    "exponential_ramp",
    "exponential_ramp_fraction",
    "dark_state_program",
    "dark_state_update",
    "DarkStateController",
    "program_rate",
]


def constant_drive(
    gamma_target: float, gamma_max: float | None = None, theta: float = 0.0
) -> DriveProgram:
    """gamma(t) = gamma_target, theta(t) = theta for all t.

    gamma_target = 0 yields a passive node; mirror nodes run at the cap.
    """
    cap = gamma_target if gamma_max is None else gamma_max
    if gamma_target < 0.0 or gamma_target > cap:
        raise ValueError(f"need 0 <= gamma_target <= gamma_max, got {gamma_target}")
    return DriveProgram(
        kind="constant", gamma_target=gamma_target, gamma_max=cap, theta=theta
    )


def exponential_ramp_fraction(t: float, t_p: float) -> float:
    """Emission ramp min{1, e^[(t - 5*t_p)/t_p]}: e^-5 at t = 0, saturating
    at t = 5*t_p."""
    if t_p <= 0.0:
        raise ValueError("t_p must be > 0")
    if t >= 5.0 * t_p:
        return 1.0
    return math.exp((t - 5.0 * t_p) / t_p)


def exponential_ramp(
    gamma_target: float, t_p: float, gamma_max: float | None = None
) -> DriveProgram:
    """Emitter pulse gamma(t) = gamma_target * exponential_ramp_fraction(t, t_p),
    theta(t) = 0."""
    cap = gamma_target if gamma_max is None else gamma_max
    if gamma_target < 0.0 or gamma_target > cap:
        raise ValueError(f"need 0 <= gamma_target <= gamma_max, got {gamma_target}")
    if t_p <= 0.0:
        raise ValueError("t_p must be > 0")
    return DriveProgram(
        kind="exponential_ramp", gamma_target=gamma_target, gamma_max=cap, t_p=t_p
    )


def dark_state_program(
    gamma_max: float, target_branch: str | None = None, epsilon: float = 1e-6
) -> DriveProgram:
    """Receiver program whose rate/phase are synthesized online."""
    if gamma_max <= 0.0:
        raise ValueError("gamma_max must be > 0")
    return DriveProgram(
        kind="dark_state_controller",
        gamma_max=gamma_max,
        target_branch=target_branch,
        epsilon=epsilon,
    )


def program_rate(drive: DriveProgram, t: float) -> float:
    """gamma(t) for the programmed (non-controller) drive kinds."""
    if drive.kind == "constant":
        return drive.gamma_target
    if drive.kind == "exponential_ramp":
        return drive.gamma_target * exponential_ramp_fraction(t, drive.t_p)
    if drive.kind == "off":
        return 0.0
    raise ValueError(f"no closed-form rate for drive kind {drive.kind!r}")


def dark_state_update(
    phi_in: complex,
    c_r: complex,
    beta_t: float,
    gamma_max: float,
    prev_theta: float = 0.0,
    epsilon: float = 1e-6,
) -> tuple[float, float]:
    """One controller step: (total gamma_r, theta_r) from the incoming field
    in the targeted branch and the receiver amplitude.

    For |c_r| > epsilon the closed-form solution of the destructive-
    interference condition gives theta = arg(-phi_in/c_r) and a targeted-
    branch rate 2*|phi_in|^2/|c_r|^2, clamped to beta_t*gamma_max; the total
    rate is the targeted rate divided by beta_t.  During bootstrap
    (|c_r| <= epsilon) the controller runs the cap with theta frozen, which
    maximizes early absorption while the closed form is infeasible.
    """
    if beta_t <= 0.0:
        raise ValueError("beta_t must be > 0")
    if abs(c_r) <= epsilon:
        return gamma_max, prev_theta
    theta = cmath.phase(-phi_in / c_r)
    gamma_t = min(beta_t * gamma_max, 2.0 * abs(phi_in) ** 2 / abs(c_r) ** 2)
    return gamma_t / beta_t, theta


class DarkStateController:
    """Per-run controller state (the frozen-phase memory).

    Owned by a single simulation run; recomputed once per step and held
    constant across the integrator's internal stages.
    """

    def __init__(self, beta_t: float, gamma_max: float, epsilon: float = 1e-6):
        if beta_t <= 0.0:
            raise ValueError("beta_t must be > 0")
        self.beta_t = beta_t
        self.gamma_max = gamma_max
        self.epsilon = epsilon
        self.theta = 0.0
        self.gamma = 0.0

    def update(self, phi_in: complex, c_r: complex) -> tuple[float, float]:
        self.gamma, self.theta = dark_state_update(
            phi_in,
            c_r,
            self.beta_t,
            self.gamma_max,
            prev_theta=self.theta,
            epsilon=self.epsilon,
        )
        return self.gamma, self.theta
