"""Fidelity extraction, closed-form transfer estimates, interference/leakage
formulas, and sweep drivers (position sweeps, connectivity matrices).

The transfer figure of merit is F(t) = |c_r(t)|^2 of the designated receiver:
any deterministic phase picked up during the protocol is undone by a local
rotation, and F > 2/3 beats the classical measure-and-prepare bound.

Sweep drivers are embarrassingly parallel: scenarios are chunked over worker
processes and merged in deterministic index order, so results do not depend
on the worker count.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Mapping, Optional, Sequence

import numpy as np

from .config import (
    ConfigError,
    DriveProgram,
    NetworkConfig,
    with_receiver_position,
)
from .dynamics import Trajectory, simulate
from .protocols import dark_state_program, exponential_ramp

__all__ = [
    "CLASSICAL_BOUND",
    "FidelityResult",
    "fidelity",
    "single_mode_oracle",
    "detuned_fidelity_estimate",
    "detuned_fidelity_estimate_rate",
    "multimode_leak",
    "small_displacement_leak",
    "SweepResult",
    "position_sweep",
    "ConnectivityMatrix",
    "connectivity_matrix",
]

#: Fidelity above which quantum transfer beats measure-and-prepare.
CLASSICAL_BOUND = 2.0 / 3.0


# ---------------------------------------------------------------------------
# Fidelity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FidelityResult:
    """F(t) on the recorded grid plus the full-resolution running maximum."""

    t: np.ndarray
    f: np.ndarray
    f_peak: float
    t_peak: float
    f_final: float
    beats_classical_bound: bool


def fidelity(traj: Trajectory) -> FidelityResult:
    """Transfer fidelity F(t) = |c_r(t)|^2 of the receiver node.

    f_peak/t_peak come from the engine's per-step tracking, so they do not
    depend on the recording stride.  Raises if the trajectory has no
    designated receiver.
    """
    if traj.receiver_index is None:
        raise ValueError("trajectory has no receiver-role node")
    f = np.abs(traj.c[:, traj.receiver_index]) ** 2
    return FidelityResult(
        t=traj.t,
        f=f,
        f_peak=traj.f_peak,
        t_peak=traj.t_peak,
        f_final=traj.f_final,
        beats_classical_bound=traj.f_peak > CLASSICAL_BOUND,
    )


# ---------------------------------------------------------------------------
# Single standing-mode oracle
# ---------------------------------------------------------------------------


def single_mode_oracle(g: float, delta: float, kappa: float, t) -> tuple:
    """Exact two-node/one-mode amplitudes for initial (c_e, c_r, c_p) = (1,0,0).

    Dynamics: dc_j/dt = -i g c_p, dc_p/dt = -(i delta + kappa/2) c_p
    - i g (c_e + c_r); the eigenfrequencies are
    w_pm = delta/2 - i kappa/4 pm sqrt(2 g^2 + (delta - i kappa/2)^2 / 4).
    Resonant and lossless this gives |c_r|^2 = [1 - cos(sqrt(2) g t)]^2 / 4
    with unit fidelity at t = pi/(sqrt(2) g).  g = 0 returns the frozen
    initial state.

    Accepts scalar or array t; returns (c_e, c_r, c_p) complex arrays.
    """
    t = np.asarray(t, dtype=float)
    if g == 0.0:
        one = np.ones_like(t, dtype=complex)
        zero = np.zeros_like(t, dtype=complex)
        return one, zero, zero
    half = 0.5 * (delta - 0.5j * kappa)
    root = np.sqrt(2.0 * g * g + half * half + 0j)
    w_minus = half - root
    w_plus = half + root
    c_norm = 1.0 / (2.0 * g) / (1.0 / w_minus - 1.0 / w_plus)
    em = np.exp(-1j * w_minus * t)
    ep = np.exp(-1j * w_plus * t)
    c_e = 1.0 + c_norm * g / w_minus * (em - 1.0) - c_norm * g / w_plus * (ep - 1.0)
    c_r = -1.0 + c_norm * g / w_minus * (em + 1.0) - c_norm * g / w_plus * (ep + 1.0)
    c_p = c_norm * (em - ep)
    return c_e, c_r, c_p


def detuned_fidelity_estimate(
    reflectivity: float, spacing: float, g: float, t2_star: float
) -> float:
    """Virtual-phonon transfer estimate F = R - pi*spacing/(16 g^2 T2*) for a
    node pair detuned half a mode spacing from the nearest standing mode."""
    if t2_star <= 0.0:
        raise ValueError("t2_star must be > 0")
    if g <= 0.0:
        raise ValueError("g must be > 0")
    return reflectivity - math.pi * spacing / (16.0 * g * g * t2_star)


def detuned_fidelity_estimate_rate(
    reflectivity: float, gamma_max: float, t2_star: float
) -> float:
    """Equivalent estimate in terms of the drive cap:
    F = R - pi^2/(8 T2* gamma_max)."""
    if t2_star <= 0.0 or gamma_max <= 0.0:
        raise ValueError("t2_star and gamma_max must be > 0")
    return reflectivity - math.pi**2 / (8.0 * t2_star * gamma_max)


# ---------------------------------------------------------------------------
# Two-branch interference leak
# ---------------------------------------------------------------------------


def multimode_leak(
    phi_e_t: float,
    phi_e_l: float,
    phi_r_t: float,
    phi_r_l: float,
    phi_rt_t: float,
    phi_rt_l: float,
) -> float:
    """Norm fraction emitted into the second (longitudinal) branch while the
    receiver keeps the first (transverse) back-travelling field perfectly
    nulled:

        r_l = |1 - [sin(phi_e_t/2)/sin(phi_e_l/2)]
                   [sin(phi_r_l/2)/sin(phi_r_t/2)]
                   e^{i(phi_rt_t - phi_rt_l)/2}|^2

    phi_e_*/phi_r_* are node-boundary round-trip phases, phi_rt_* the full
    round-trip phases per branch.  Zero when both branches interfere alike
    (all node phases pi, equal round trips); up to 4 for a 2 pi round-trip
    offset at symmetric couplings.  Raises when a sin in a denominator
    vanishes (node decoupled from that branch).
    """
    s_el = math.sin(phi_e_l / 2.0)
    s_rt = math.sin(phi_r_t / 2.0)
    if abs(s_el) < 1e-12 or abs(s_rt) < 1e-12:
        raise ZeroDivisionError(
            "node decoupled (boundary round-trip phase is a multiple of 2 pi)"
        )
    ratio = (math.sin(phi_e_t / 2.0) / s_el) * (math.sin(phi_r_l / 2.0) / s_rt)
    return abs(1.0 - ratio * cmath.exp(0.5j * (phi_rt_t - phi_rt_l))) ** 2


def small_displacement_leak(
    k_l: float, k_t: float, dx_e: float, dx_r: float
) -> float:
    """Quoted small-displacement expansion of the leak around the symmetric
    point: (k_l - k_t)^2/4 * (dx_e^2 + dx_r^2)^2.

    Kept verbatim for comparison even though it is dimensionally surprising
    (k^2 x^4); expanding `multimode_leak` directly gives
    (k_l^2 - k_t^2)^2/4 * (dx_e^2 - dx_r^2)^2 instead.  Use the full formula
    for anything quantitative.
    """
    return (k_l - k_t) ** 2 / 4.0 * (dx_e**2 + dx_r**2) ** 2


# ---------------------------------------------------------------------------
# Sweep drivers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepResult:
    """Receiver-position sweep: F_peak (and its time) per position."""

    positions: np.ndarray
    f_peaks: np.ndarray
    t_peaks: np.ndarray


def _sweep_one(args) -> tuple[float, float]:
    config, x = args
    traj = simulate(with_receiver_position(config, x))
    return traj.f_peak, traj.t_peak


def position_sweep(
    config: NetworkConfig,
    positions: Sequence[float],
    jobs: int = 1,
) -> SweepResult:
    """One simulation per receiver position; deterministic merge order.

    Positions must lie inside the waveguide (validation of each scenario
    enforces this).  jobs > 1 runs scenario chunks in worker processes.
    """
    tasks = [(config, float(x)) for x in positions]
    results = _run_parallel(_sweep_one, tasks, jobs)
    f = np.array([r[0] for r in results])
    tp = np.array([r[1] for r in results])
    return SweepResult(
        positions=np.asarray(positions, dtype=float), f_peaks=f, t_peaks=tp
    )


@dataclass(frozen=True)
class ConnectivityMatrix:
    """Pairwise transfer fidelities: values[e, r] = F_peak for emitter e,
    receiver r (diagonal undefined, stored as NaN)."""

    labels: Sequence[str]
    values: np.ndarray
    metadata: Mapping[str, float]


def _pair_one(args) -> float:
    config, e_idx, r_idx, t_p, gamma_max, target_branch = args
    nodes = []
    for i, n in enumerate(config.nodes):
        if i == e_idx:
            nodes.append(
                replace(
                    n,
                    role="emitter",
                    drive=exponential_ramp(gamma_max, t_p),
                )
            )
        elif i == r_idx:
            nodes.append(
                replace(
                    n,
                    role="receiver",
                    drive=dark_state_program(gamma_max, target_branch),
                )
            )
        else:
            nodes.append(replace(n, role="passive", drive=DriveProgram()))
    traj = simulate(replace(config, nodes=tuple(nodes)))
    return traj.f_peak


def connectivity_matrix(
    config: NetworkConfig,
    gamma_max: float,
    t_p: float,
    t_max: Optional[float] = None,
    target_branch: Optional[str] = None,
    jobs: int = 1,
) -> ConnectivityMatrix:
    """Dark-state transfer fidelity for every ordered node pair.

    For each (e, r) the emitter runs the exponential ramp at the cap, the
    receiver runs the dark-state controller, and every other node is passive;
    F_peak within t_max is stored.  Needs >= 2 nodes.
    """
    if len(config.nodes) < 2:
        raise ConfigError("connectivity needs at least two nodes")
    if t_max is not None:
        config = replace(config, t_max=t_max)
    n = len(config.nodes)
    pairs = [(e, r) for e in range(n) for r in range(n) if e != r]
    tasks = [
        (config, e, r, t_p, gamma_max, target_branch) for e, r in pairs
    ]
    results = _run_parallel(_pair_one, tasks, jobs)
    values = np.full((n, n), np.nan)
    for (e, r), f in zip(pairs, results):
        values[e, r] = f
    return ConnectivityMatrix(
        labels=[nd.label for nd in config.nodes],
        values=values,
        metadata={
            "t_max": config.t_max,
            "t_p": t_p,
            "gamma_max": gamma_max,
        },
    )


def _run_parallel(fn, tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
