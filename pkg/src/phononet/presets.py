"""Bundled scenario presets.

These mirror the documented benchmark configurations: the resonant
constant-drive pair, the dark-state pitch-and-catch protocol at short and
long waveguide lengths, the receiver-position sweep base, the equally spaced
connectivity chain, and the switchable-mirror cell in an unbounded guide.

Phase engineering convention: only node-boundary and node-node phases modulo
2 pi matter, so presets use small wavevectors chosen to realize the intended
interference conditions exactly (e.g. k_t = 7.5 pi rad/um and unit end
distances give end phases of exactly pi).  Delays always come from the
physical group velocities.

Builders are the source of truth.  Equivalent TOML files for the single-run
presets ship under `presets_data/` and are kept in lockstep by tests.
"""

from __future__ import annotations

import math
from importlib import resources
from typing import Optional

from .config import BranchSpec, NetworkConfig, NodeSpec
from .protocols import constant_drive, dark_state_program, exponential_ramp
from .units import khz_to_angular, mhz_to_angular

__all__ = [
    "GAMMA_MAX",
    "V_TRANSVERSE",
    "V_LONGITUDINAL",
    "resonant_constant",
    "dark_state",
    "single_branch_dark_state",
    "sweep_base",
    "connectivity_chain",
    "mirror_cell",
    "mirror_reference",
    "trivial_idle",
    "PRESETS",
    "preset_config",
    "preset_file_text",
]

#: Drive-rate cap gamma_max = 2 pi x 250 kHz (rad/us).
GAMMA_MAX = khz_to_angular(250.0)
#: Transverse / longitudinal group velocities (um/us == m/s).
V_TRANSVERSE = 7000.0
V_LONGITUDINAL = 17100.0
#: Drive detuning 2 pi x 100 MHz used by every driven preset node (rad/us).
_DETUNING = mhz_to_angular(100.0)


def _branches(
    k_t: float,
    k_l: float,
    reflectivity: float,
    beta_t: float = 0.5,
    v_t: float = V_TRANSVERSE,
    v_l: float = V_LONGITUDINAL,
) -> tuple[BranchSpec, ...]:
    if beta_t >= 1.0:
        return (BranchSpec("t", v_t, k_t, 1.0, reflectivity),)
    return (
        BranchSpec("t", v_t, k_t, beta_t, reflectivity),
        BranchSpec("l", v_l, k_l, 1.0 - beta_t, reflectivity),
    )


def resonant_constant(t_max: float = 1.5) -> NetworkConfig:
    """Constant equal drives with only the transverse branch resonant.

    L = 100 um, nodes 1 um inside both ends.  k_t = pi/2 rad/um makes the
    end phases pi and the transverse round trip 100 pi = 0 (mod 2 pi);
    k_l = 1.5 pi + pi/200 keeps the longitudinal round trip at pi while
    detuning its end phases from pi by only pi/100 (coupling factor
    0.99975).  Mode spacing over drive cap: pi v_t / L / gamma_max = 140.
    """
    k_t = math.pi / 2.0
    k_l = 1.5 * math.pi + math.pi / 200.0
    drive = constant_drive(GAMMA_MAX, GAMMA_MAX)
    return NetworkConfig(
        branches=_branches(k_t, k_l, 0.92),
        nodes=(
            NodeSpec("e", 1.0, _DETUNING, drive, "emitter"),
            NodeSpec("r", 99.0, _DETUNING, drive, "receiver"),
        ),
        length=100.0,
        dt=5.8e-5,
        t_max=t_max,
    )


def dark_state(
    length: float = 101.0,
    t_p: float = 1.0 / GAMMA_MAX,
    reflectivity: float = 0.92,
    t_max: Optional[float] = None,
) -> NetworkConfig:
    """Exponential-ramp emitter plus dark-state receiver, both branches.

    Nodes sit 5 um inside the ends (retardation to the near end stays
    ~2e-3 of 1/gamma_max); k_t = 7.5 pi and k_l = 2.5 pi rad/um give end
    5 um end gaps with k_t = 7.5 pi and k_l = 5.5 pi rad/um give end phases
    of exactly pi on both branches, full round trips of pi on both branches
    (the off-resonant multimode setting), and an emitter-receiver phase
    difference (k_t - k_l)(x_r - x_e) = 0 (mod 2 pi), so the two branches
    arrive in phase at the receiver.  length = 101 um and 1001 um
    are the short/long benchmark pair.
    """
    if t_max is None:
        t_max = 12.0 / GAMMA_MAX
    return NetworkConfig(
        branches=_branches(7.5 * math.pi, 5.5 * math.pi, reflectivity),
        nodes=(
            NodeSpec(
                "e", 5.0, _DETUNING, exponential_ramp(GAMMA_MAX, t_p), "emitter"
            ),
            NodeSpec(
                "r",
                length - 5.0,
                _DETUNING,
                dark_state_program(GAMMA_MAX, "t"),
                "receiver",
            ),
        ),
        length=length,
        dt=2.5e-4,
        t_max=t_max,
    )


def single_branch_dark_state(
    t_p: float = 3.0 / GAMMA_MAX, t_max: Optional[float] = None
) -> NetworkConfig:
    """Ideal-limit protocol: one branch (beta_t = 1), lossless ends, slow
    pulse.  Transfer should be essentially perfect.  The step is finer than
    in the lossy presets because the saturated controller hold (|c_r| -> 1)
    carries an O(dt) excess from the per-step-frozen controls."""
    if t_max is None:
        t_max = 5.0 * t_p + 10.0 / GAMMA_MAX
    return NetworkConfig(
        branches=_branches(7.5 * math.pi, 0.0, 1.0, beta_t=1.0),
        nodes=(
            NodeSpec(
                "e", 5.0, _DETUNING, exponential_ramp(GAMMA_MAX, t_p), "emitter"
            ),
            NodeSpec(
                "r",
                96.0,
                _DETUNING,
                dark_state_program(GAMMA_MAX, "t"),
                "receiver",
            ),
        ),
        length=101.0,
        dt=5e-5,
        t_max=t_max,
    )


def sweep_base(t_max: Optional[float] = None) -> NetworkConfig:
    """Base scenario for receiver-position sweeps (receiver gets moved).

    Same interference setting as `dark_state`; the transverse half wave is
    pi / k_t ~ 133 nm, so destructive receiver positions (transverse end
    phase = 0 mod 2 pi) recur every 133 nm around the nominal spot 5 um
    inside the far end, with longitudinal decouplings every ~182 nm.
    """
    return dark_state(length=101.0, t_max=t_max)


def connectivity_chain(
    n_nodes: int = 49,
    spacing: float = 10.0,
    reflectivity: float = 0.92,
    k_t: float = 23.7,
    k_l: float = 23.7 - (2.0 * math.pi * 25.0 + 0.1) / 10.0,
    t_max: Optional[float] = None,
    dt: Optional[float] = None,
) -> NetworkConfig:
    """Equally spaced passive chain for connectivity studies.

    n_nodes nodes at spacing, spacing*2, ... in a guide of length
    spacing*(n_nodes + 1); pairwise roles/drives are assigned by the
    connectivity driver.  The default transverse wavevector is
    incommensurate with the spacing, so node end phases sample the circle
    quasi-uniformly (as physical dispersion would) and a few nodes land
    near-decoupled; the branch mismatch (k_t - k_l)*spacing is 0.1 rad
    mod 2 pi, so the two branches stay nearly aligned over the chain.
    """
    if t_max is None:
        t_max = 12.0 / GAMMA_MAX
    if dt is None:
        dt = 0.99 * spacing / V_LONGITUDINAL
    nodes = tuple(
        NodeSpec(f"n{i:02d}", spacing * (i + 1), _DETUNING)
        for i in range(n_nodes)
    )
    return NetworkConfig(
        branches=_branches(k_t, k_l, reflectivity),
        nodes=nodes,
        length=spacing * (n_nodes + 1),
        dt=dt,
        t_max=t_max,
    )


def mirror_cell(
    t_p: float = 1.0 / GAMMA_MAX, t_max: Optional[float] = None
) -> NetworkConfig:
    """Unbounded waveguide segmented by two constantly driven mirror nodes.

    Node-to-mirror spacings are 5 um with k_t = 2.1 pi, k_l = 1.3 pi rad/um,
    so the round-trip phase to each neighbouring mirror is pi on both
    branches (maximal coupling against the mirror's -beta reflection: a
    spacing with k d = pi would instead pin the node to a standing-wave
    node of its mirror image) and the emitter-receiver phase difference is
    a multiple of 2 pi.  Fields leaving past the mirrors never return.
    """
    if t_max is None:
        t_max = 5.0 * t_p + 12.0 / GAMMA_MAX
    mirror = constant_drive(GAMMA_MAX, GAMMA_MAX)
    return NetworkConfig(
        branches=_branches(2.1 * math.pi, 1.3 * math.pi, 0.0),
        nodes=(
            NodeSpec("m1", 0.0, _DETUNING, mirror, "mirror"),
            NodeSpec(
                "e", 5.0, _DETUNING, exponential_ramp(GAMMA_MAX, t_p), "emitter"
            ),
            NodeSpec(
                "r", 15.0, _DETUNING, dark_state_program(GAMMA_MAX, "t"), "receiver"
            ),
            NodeSpec("m2", 20.0, _DETUNING, mirror, "mirror"),
        ),
        length=None,
        dt=2.5e-4,
        t_max=t_max,
    )


def mirror_reference(
    t_p: float = 1.0 / GAMMA_MAX, t_max: Optional[float] = None
) -> NetworkConfig:
    """Finite-cavity counterpart of `mirror_cell`: lossless boundaries at the
    mirror positions (round-trip end phases 2 k d = pi on both branches,
    maximal coupling), same node spacing and wavevectors."""
    if t_max is None:
        t_max = 5.0 * t_p + 12.0 / GAMMA_MAX
    return NetworkConfig(
        branches=_branches(2.1 * math.pi, 1.3 * math.pi, 1.0),
        nodes=(
            NodeSpec(
                "e", 5.0, _DETUNING, exponential_ramp(GAMMA_MAX, t_p), "emitter"
            ),
            NodeSpec(
                "r", 15.0, _DETUNING, dark_state_program(GAMMA_MAX, "t"), "receiver"
            ),
        ),
        length=20.0,
        dt=2.5e-4,
        t_max=t_max,
    )


def trivial_idle() -> NetworkConfig:
    """Single undriven node in an unbounded guide: nothing happens."""
    return NetworkConfig(
        branches=_branches(math.pi / 2.0, 1.5 * math.pi + math.pi / 200.0, 0.0),
        nodes=(NodeSpec("n0", 0.0),),
        length=None,
        t_max=1.0,
    )


PRESETS = {
    "fig3b_resonant": resonant_constant,
    "fig3c_dark_state": dark_state,
    "fig3c_dark_state_long": lambda: dark_state(length=1001.0),
    "fig3e_sweep_base": sweep_base,
    "fig4a_chain_49": connectivity_chain,
    "fig4a_chain_9": lambda: connectivity_chain(n_nodes=9),
    "fig4b_mirrors": mirror_cell,
    "fig4b_reference": mirror_reference,
    "ideal_dark_state": single_branch_dark_state,
    "trivial_idle": trivial_idle,
}


def preset_config(name: str) -> NetworkConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise KeyError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        ) from None


_PRESET_FILES = {
    "fig3b_resonant": "fig3b_resonant.toml",
    "fig3c_dark_state": "fig3c_dark_state.toml",
    "fig3c_dark_state_long": "fig3c_dark_state_long.toml",
    "fig4b_mirrors": "fig4b_mirrors.toml",
    "trivial_idle": "trivial_idle.toml",
}


def preset_file_text(name: str) -> str:
    """TOML source of a bundled single-run preset (for echoes and export)."""
    fname = _PRESET_FILES[name]
    return (
        resources.files("phononet")
        .joinpath("presets_data", fname)
        .read_text(encoding="utf-8")
    )


def preset_file_config(name: str) -> NetworkConfig:
    """Parse the bundled TOML of a preset (tests pin it to the builder)."""
    from .config import parse_config

    return parse_config(preset_file_text(name))
