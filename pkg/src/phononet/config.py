"""Domain types and configuration validation for the phonon-network simulator.

A network is a 1D elastic waveguide (finite with lossy end reflections, or
unbounded with absorbing ends) hosting a line of defect nodes.  Each node
couples to one or more phonon branches; drive programs turn the nodes into
tunable emitters/absorbers of propagating phonon fields.

All types are immutable after validation and safe to share across concurrent
scenario runs; a single simulation run is strictly sequential.

Configuration files are TOML with four section groups::

    [waveguide]        length_um (omit for an unbounded guide), carrier_ghz,
                       scattering, dephasing
    [branches.<label>] velocity_m_per_s, wavevector_rad_per_um, beta,
                       reflectivity
    [nodes.<name>]     position_um, detuning_mhz, role, t2_star_us,
                       bare_emission_mhz.<branch>, drive.{kind, ...}
    [simulation]       t_max_us, dt_us, record_stride

All `_khz/_mhz/_ghz` values are ordinary frequencies (value = omega/2pi); see
`phononet.units`.  The full schema is documented in the README.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Optional, Sequence

try:
    import tomllib  # py >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .units import khz_to_angular, mhz_to_angular, ghz_to_angular

NODE_ROLES = ("emitter", "receiver", "mirror", "passive")
DRIVE_KINDS = ("off", "constant", "exponential_ramp", "dark_state_controller")

#: Relative slack for float comparisons in validation (beta sums, dt vs delay).
_REL_TOL = 1e-12


class ConfigError(ValueError):
    """A configuration violates an invariant.  Message names section/key."""


class FarDetuningWarning(UserWarning):
    """Drive detuning is not large against the bare emission rate.

    The effective-rate reduction behind the drive programs assumes a far
    detuned Raman drive; below ~5x the bare rate its accuracy degrades.
    """


@dataclass(frozen=True)
class BranchSpec:
    """One phonon branch of the waveguide.

    velocity is the group velocity (um/us == m/s), wavevector the branch
    wavevector evaluated at the carrier frequency (rad/um).  beta is the
    fraction of a node's spontaneous emission going into this branch;
    reflectivity is the end-mirror power reflectivity (1 = lossless,
    0 = perfectly absorbing end).
    """

    label: str
    velocity: float
    wavevector: float
    beta: float
    reflectivity: float = 1.0


@dataclass(frozen=True)
class DriveProgram:
    """Drive program for one node.

    kind:
        "off"                   gamma(t) = 0
        "constant"              gamma(t) = gamma_target
        "exponential_ramp"      gamma(t) = gamma_target * min{1, e^[(t-5tp)/tp]}
        "dark_state_controller" gamma, theta synthesized online to null the
                                back-travelling field in `target_branch`
    gamma_target, gamma_max in rad/us; t_p in us; theta in rad (constant
    phase for the programmed kinds).  epsilon is the controller bootstrap
    threshold on |c_r|.
    """

    kind: str = "off"
    gamma_target: float = 0.0
    gamma_max: float = 0.0
    t_p: float = 0.0
    theta: float = 0.0
    target_branch: Optional[str] = None
    epsilon: float = 1e-6


@dataclass(frozen=True)
class NodeSpec:
    """One defect node.

    position in um, detuning (drive detuning from the upper state) in rad/us.
    bare_emission optionally gives the node's bare per-branch emission rates
    Gamma_{j,n} (rad/us); when present it defines the node's branch split
    beta_{j,n} = Gamma_{j,n}/Gamma_j and enables elastic scattering off the
    node, otherwise the network-wide branch betas apply and the node does not
    scatter.  t2_star (us) feeds the optional pure-dephasing term.
    """

    label: str
    position: float
    detuning: float = 0.0
    drive: DriveProgram = field(default_factory=DriveProgram)
    role: str = "passive"
    bare_emission: Optional[Mapping[str, float]] = None
    t2_star: Optional[float] = None


@dataclass(frozen=True)
class NetworkConfig:
    """Waveguide geometry, branch set, node list and simulation controls.

    length None means an unbounded waveguide (absorbing ends); carrier is the
    central phonon frequency (rad/us), used only by reporting/Q conversions.
    dt None selects the default step min(tau_min/20, 1/(200*gamma_max)).
    """

    branches: Sequence[BranchSpec]
    nodes: Sequence[NodeSpec]
    length: Optional[float] = None
    carrier: float = ghz_to_angular(46.0)
    scattering_enabled: bool = False
    dephasing_enabled: bool = False
    dt: Optional[float] = None
    t_max: float = 1.0
    record_stride: Optional[int] = None


@dataclass(frozen=True)
class Segment:
    """A stretch of waveguide between consecutive ports on one branch."""

    x_lo: float
    x_hi: float
    delay: float  # us
    phase: float  # rad, k_n * (x_hi - x_lo), not wrapped


@dataclass(frozen=True)
class ValidatedConfig:
    """A NetworkConfig with all invariants checked and derived tables attached.

    segments maps branch label -> consecutive-port segments (node-node plus
    node-boundary for finite guides).  node_betas[j] maps branch label to the
    node's emission fraction.  dt is the resolved integration step.
    """

    network: NetworkConfig
    dt: float
    segments: Mapping[str, Sequence[Segment]]
    node_betas: Sequence[Mapping[str, float]]

    @property
    def branches(self) -> Sequence[BranchSpec]:
        return self.network.branches

    @property
    def nodes(self) -> Sequence[NodeSpec]:
        return self.network.nodes


def _drive_can_emit(drive: DriveProgram) -> bool:
    if drive.kind == "off":
        return False
    if drive.kind == "dark_state_controller":
        return drive.gamma_max > 0.0
    return drive.gamma_target > 0.0


def _max_drive_rate(drive: DriveProgram) -> float:
    if drive.kind == "off":
        return 0.0
    if drive.kind == "dark_state_controller":
        return drive.gamma_max
    return drive.gamma_target


def validate(config: NetworkConfig | ValidatedConfig) -> ValidatedConfig:
    """Check every invariant and attach derived delay/phase tables.

    Idempotent: validating a ValidatedConfig returns it unchanged.  Raises
    ConfigError naming the offending node/branch; emits FarDetuningWarning
    when a driven node's detuning is below 5x its bare emission rate.
    """
    if isinstance(config, ValidatedConfig):
        return config

    if not config.branches:
        raise ConfigError("at least one branch is required")
    labels = [b.label for b in config.branches]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"duplicate branch labels: {labels}")

    beta_sum = 0.0
    for b in config.branches:
        if b.velocity <= 0.0:
            raise ConfigError(f"[branches.{b.label}] velocity must be > 0")
        if not (0.0 < b.beta <= 1.0):
            raise ConfigError(f"[branches.{b.label}] beta must be in (0, 1]")
        if not (0.0 <= b.reflectivity <= 1.0):
            raise ConfigError(
                f"[branches.{b.label}] reflectivity must be in [0, 1]"
            )
        beta_sum += b.beta
    if abs(beta_sum - 1.0) > 1e-12:
        raise ConfigError(f"branch betas must sum to 1, got {beta_sum!r}")

    if config.length is not None and config.length <= 0.0:
        raise ConfigError("waveguide length must be positive (or None)")
    if config.t_max <= 0.0:
        raise ConfigError("[simulation] t_max_us must be > 0")
    if config.record_stride is not None and config.record_stride < 1:
        raise ConfigError("[simulation] record_stride must be >= 1")

    node_names = [n.label for n in config.nodes]
    if len(set(node_names)) != len(node_names):
        raise ConfigError(f"duplicate node labels: {node_names}")

    prev_x = -math.inf
    for n in config.nodes:
        if n.position <= prev_x:
            raise ConfigError(
                f"[nodes.{n.label}] positions must be strictly increasing"
            )
        prev_x = n.position
        if config.length is not None and not (0.0 <= n.position <= config.length):
            raise ConfigError(
                f"[nodes.{n.label}] position {n.position} um outside waveguide"
            )
        if n.role not in NODE_ROLES:
            raise ConfigError(f"[nodes.{n.label}] unknown role {n.role!r}")
        _check_drive(n, config)
        if n.t2_star is not None and n.t2_star <= 0.0:
            raise ConfigError(f"[nodes.{n.label}] t2_star must be > 0")
        if n.bare_emission is not None:
            for lbl, g in n.bare_emission.items():
                if lbl not in labels:
                    raise ConfigError(
                        f"[nodes.{n.label}] bare emission for unknown branch {lbl!r}"
                    )
                if g < 0.0:
                    raise ConfigError(
                        f"[nodes.{n.label}] bare emission rates must be >= 0"
                    )

    node_betas = [_node_betas(n, config.branches) for n in config.nodes]
    segments = {b.label: _branch_segments(b, config) for b in config.branches}

    tau_min = min(
        (s.delay for segs in segments.values() for s in segs), default=math.inf
    )
    if tau_min <= 0.0:
        raise ConfigError(
            "zero-length segment (node on a finite-waveguide boundary): no dt "
            "can satisfy dt <= smallest propagation delay; move the node "
            "strictly inside"
        )
    dt = config.dt if config.dt is not None else _default_dt(config, segments)
    if dt <= 0.0:
        raise ConfigError("[simulation] dt_us must be > 0")
    if dt > tau_min * (1.0 + _REL_TOL):
        raise ConfigError(
            f"dt = {dt} us exceeds the smallest propagation delay "
            f"{tau_min} us; retarded fields would be read ahead of history"
        )

    _far_detuning_guard(config)
    return ValidatedConfig(
        network=config, dt=dt, segments=segments, node_betas=node_betas
    )


def _check_drive(n: NodeSpec, config: NetworkConfig) -> None:
    d = n.drive
    if d.kind not in DRIVE_KINDS:
        raise ConfigError(f"[nodes.{n.label}] unknown drive kind {d.kind!r}")
    if d.gamma_target < 0.0 or d.gamma_max < 0.0:
        raise ConfigError(f"[nodes.{n.label}] drive rates must be >= 0")
    if d.gamma_max and d.gamma_target > d.gamma_max * (1.0 + _REL_TOL):
        raise ConfigError(
            f"[nodes.{n.label}] gamma_target {d.gamma_target} exceeds the "
            f"gamma_max cap {d.gamma_max}"
        )
    if d.kind == "exponential_ramp" and d.t_p <= 0.0:
        raise ConfigError(f"[nodes.{n.label}] ramp needs t_p > 0")
    if d.kind == "dark_state_controller":
        if d.gamma_max <= 0.0:
            raise ConfigError(
                f"[nodes.{n.label}] dark-state controller needs gamma_max > 0"
            )
        if d.target_branch is not None and d.target_branch not in (
            b.label for b in config.branches
        ):
            raise ConfigError(
                f"[nodes.{n.label}] controller target branch "
                f"{d.target_branch!r} does not exist"
            )
        if not (0.0 < d.epsilon < 1.0):
            raise ConfigError(f"[nodes.{n.label}] epsilon must be in (0, 1)")
    if _drive_can_emit(d) and n.detuning == 0.0:
        raise ConfigError(
            f"[nodes.{n.label}] detuning must be nonzero while the drive is "
            "active (far-detuned regime)"
        )


def _node_betas(n: NodeSpec, branches: Sequence[BranchSpec]) -> dict[str, float]:
    if n.bare_emission:
        total = sum(n.bare_emission.get(b.label, 0.0) for b in branches)
        if total <= 0.0:
            raise ConfigError(
                f"[nodes.{n.label}] bare emission rates sum to zero"
            )
        return {
            b.label: n.bare_emission.get(b.label, 0.0) / total for b in branches
        }
    return {b.label: b.beta for b in branches}


def _branch_segments(b: BranchSpec, config: NetworkConfig) -> tuple[Segment, ...]:
    xs = [n.position for n in config.nodes]
    if config.length is not None:
        xs = [0.0] + xs + [config.length]
    segs = []
    for lo, hi in zip(xs, xs[1:]):
        dx = hi - lo
        segs.append(Segment(lo, hi, dx / b.velocity, b.wavevector * dx))
    return tuple(segs)


def _default_dt(
    config: NetworkConfig, segments: Mapping[str, Sequence[Segment]]
) -> float:
    """min(tau_min/20, 1/(200*gamma_max)): resolves both retardation and the
    fastest amplitude dynamics.  Degenerate delay-free networks fall back to
    t_max/1000."""
    tau_min = min(
        (s.delay for segs in segments.values() for s in segs), default=math.inf
    )
    g_max = max((_max_drive_rate(n.drive) for n in config.nodes), default=0.0)
    dt = tau_min / 20.0
    if g_max > 0.0:
        dt = min(dt, 1.0 / (200.0 * g_max))
    if not math.isfinite(dt):
        dt = config.t_max / 1000.0
    return dt


def _far_detuning_guard(config: NetworkConfig) -> None:
    for n in config.nodes:
        if not _drive_can_emit(n.drive) or n.bare_emission is None:
            continue
        g_total = sum(n.bare_emission.values())
        if g_total > 0.0 and abs(n.detuning) < 5.0 * g_total:
            warnings.warn(
                f"node {n.label}: |detuning| = {abs(n.detuning):.4g} rad/us is "
                f"below 5x the bare emission rate {g_total:.4g} rad/us; the "
                "far-detuned effective-rate reduction degrades here",
                FarDetuningWarning,
                stacklevel=3,
            )


# ---------------------------------------------------------------------------
# TOML loading
# ---------------------------------------------------------------------------


def load_config(path: str | Path) -> NetworkConfig:
    """Parse a TOML scenario file into a NetworkConfig (not yet validated)."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_config(text)


def parse_config(text: str) -> NetworkConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML: {exc}") from None

    wg = raw.get("waveguide", {})
    sim = raw.get("simulation", {})
    branches_raw = raw.get("branches", {})
    nodes_raw = raw.get("nodes", {})
    if not branches_raw:
        raise ConfigError("missing [branches.<label>] sections")
    if not nodes_raw:
        raise ConfigError("missing [nodes.<name>] sections")

    branches = [
        BranchSpec(
            label=lbl,
            velocity=_need(tab, "velocity_m_per_s", f"branches.{lbl}"),
            wavevector=_need(tab, "wavevector_rad_per_um", f"branches.{lbl}"),
            beta=_need(tab, "beta", f"branches.{lbl}"),
            reflectivity=tab.get("reflectivity", 1.0),
        )
        for lbl, tab in branches_raw.items()
    ]

    nodes = []
    for name, tab in nodes_raw.items():
        bare = tab.get("bare_emission_mhz")
        if bare is not None:
            bare = {lbl: mhz_to_angular(v) for lbl, v in bare.items()}
        nodes.append(
            NodeSpec(
                label=name,
                position=_need(tab, "position_um", f"nodes.{name}"),
                detuning=mhz_to_angular(tab.get("detuning_mhz", 0.0)),
                drive=_parse_drive(tab.get("drive", {}), name),
                role=tab.get("role", "passive"),
                bare_emission=bare,
                t2_star=tab.get("t2_star_us"),
            )
        )

    length = wg.get("length_um")
    if wg.get("infinite", False):
        length = None
    return NetworkConfig(
        branches=tuple(branches),
        nodes=tuple(nodes),
        length=length,
        carrier=ghz_to_angular(wg.get("carrier_ghz", 46.0)),
        scattering_enabled=wg.get("scattering", False),
        dephasing_enabled=wg.get("dephasing", False),
        dt=sim.get("dt_us"),
        t_max=_need(sim, "t_max_us", "simulation"),
        record_stride=sim.get("record_stride"),
    )


def _parse_drive(tab: Mapping, node_name: str) -> DriveProgram:
    kind = tab.get("kind", "off")
    if kind not in DRIVE_KINDS:
        raise ConfigError(f"[nodes.{node_name}] unknown drive kind {kind!r}")
    return DriveProgram(
        kind=kind,
        gamma_target=khz_to_angular(tab.get("gamma_khz", 0.0)),
        gamma_max=khz_to_angular(tab.get("gamma_max_khz", 0.0)),
        t_p=tab.get("t_p_us", 0.0),
        theta=tab.get("phase_rad", 0.0),
        target_branch=tab.get("target_branch"),
        epsilon=tab.get("epsilon", 1e-6),
    )


def _need(tab: Mapping, key: str, section: str):
    try:
        return tab[key]
    except KeyError:
        raise ConfigError(f"[{section}] missing required key {key!r}") from None


def with_receiver_position(config: NetworkConfig, position: float) -> NetworkConfig:
    """Copy of config with the receiver-role node moved to `position`."""
    new_nodes = []
    moved = False
    for n in config.nodes:
        if n.role == "receiver" and not moved:
            new_nodes.append(replace(n, position=position))
            moved = True
        else:
            new_nodes.append(n)
    if not moved:
        raise ConfigError("config has no receiver node to move")
    new_nodes.sort(key=lambda n: n.position)
    return replace(config, nodes=tuple(new_nodes))
