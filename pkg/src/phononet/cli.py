"""Command-line front end.

Subcommands:

    rates         evaluate closed-form rate calculators, print a labeled table
    simulate      run a scenario (TOML file or bundled preset), write the
                  trajectory CSV and a one-line summary
    sweep         receiver-position sweep -> CSV curve (x_r, F_peak)
    connectivity  pairwise dark-state fidelity matrix -> CSV
    oracle        closed-form single-standing-mode amplitudes -> CSV

Every output file embeds a '#'-commented parameter echo (config text plus the
exact command line) sufficient to re-run it bit-identically.  CSV is written
with full double precision and '.' decimals; exit code 0 on success, 2 on
configuration/usage errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, analytics, presets, rates
from .config import ConfigError, load_config, parse_config
from .dynamics import simulate, trajectory_to_csv
from .units import TWO_PI, ghz_to_angular, khz_to_angular, mhz_to_angular


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ZeroDivisionError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="phononet",
        description="Phonon-network state-transfer simulator and rate tools",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(required=True)

    pr = sub.add_parser("rates", help="closed-form rate calculators")
    rsub = pr.add_subparsers(required=True, dest="quantity")

    raman = rsub.add_parser("raman", help="drive-induced qubit transfer rate")
    raman.add_argument("--omega-mhz", type=float, required=True)
    raman.add_argument("--delta-mhz", type=float, required=True)
    raman.add_argument("--gamma-mhz", type=float, required=True)
    raman.set_defaults(func=cmd_rates_raman)

    q = rsub.add_parser("q", help="reflectivity -> decay rate and Q factor")
    q.add_argument("--r", type=float, required=True)
    q.add_argument("--l-um", type=float, required=True)
    q.add_argument("--v", type=float, required=True, help="group velocity m/s")
    q.add_argument("--f0-ghz", type=float, default=46.0)
    q.set_defaults(func=cmd_rates_q)

    kap = rsub.add_parser("kappa", help="boundary decay from mode spacing")
    kap.add_argument("--r", type=float, required=True)
    kap.add_argument("--spacing-mhz", type=float, required=True)
    kap.set_defaults(func=cmd_rates_kappa)

    cav = rsub.add_parser("cavity-coupling", help="standing-mode coupling")
    cav.add_argument("--gamma-max-khz", type=float, required=True)
    cav.add_argument("--spacing-mhz", type=float, required=True)
    cav.set_defaults(func=cmd_rates_cavity)

    spec = rsub.add_parser("spectrum", help="ground-manifold level structure")
    spec.add_argument("--lambda-so-ghz", type=float, required=True)
    spec.add_argument("--upsilon-x-ghz", type=float, default=0.0)
    spec.add_argument("--upsilon-y-ghz", type=float, default=0.0)
    spec.add_argument("--omega-b-ghz", type=float, default=0.0)
    spec.set_defaults(func=cmd_rates_spectrum)

    em = rsub.add_parser("emission", help="bare emission rate (compression)")
    em.add_argument("--d-phz", type=float, required=True)
    em.add_argument("--rho", type=float, default=3500.0, help="kg/m^3")
    em.add_argument("--area-nm2", type=float, required=True)
    em.add_argument("--v", type=float, required=True, help="m/s")
    em.add_argument("--f-ghz", type=float, default=46.0)
    em.set_defaults(func=cmd_rates_emission)

    sc = rsub.add_parser("strain-coupling", help="per-mode strain coupling")
    sc.add_argument("--d-phz", type=float, required=True)
    sc.add_argument("--rho", type=float, default=3500.0, help="kg/m^3")
    sc.add_argument("--area-nm2", type=float, required=True)
    sc.add_argument("--f-ghz", type=float, default=46.0)
    sc.add_argument("--k-rad-per-um", type=float, required=True)
    sc.add_argument("--xi", type=float, default=1.0)
    sc.set_defaults(func=cmd_rates_strain_coupling)

    mc = rsub.add_parser("mode-coupling", help="standing-mode coupling g_L")
    mc.add_argument("--g0-mhz", type=float, required=True)
    mc.add_argument("--wavelength-nm", type=float, required=True)
    mc.add_argument("--l-um", type=float, required=True)
    mc.set_defaults(func=cmd_rates_mode_coupling)

    eff = rsub.add_parser("effective", help="boundary-interference rate")
    eff.add_argument("--gamma-khz", type=float, required=True)
    eff.add_argument("--phase-rad", type=float, required=True)
    eff.set_defaults(func=cmd_rates_effective)

    flip = rsub.add_parser("flip-ratio", help="spurious spin-flip suppression")
    flip.add_argument("--delta-mhz", type=float, required=True)
    flip.add_argument("--omega-b-mhz", type=float, required=True)
    flip.add_argument("--gamma-carrier-mhz", type=float, required=True)
    flip.add_argument("--gamma-shifted-mhz", type=float, required=True)
    flip.set_defaults(func=cmd_rates_flip)

    opt = rsub.add_parser("optical-raman", help="optical two-tone reduction")
    opt.add_argument("--omega-u-ghz", type=float, required=True)
    opt.add_argument("--omega-d-ghz", type=float, required=True)
    opt.add_argument("--delta-e-ghz", type=float, required=True)
    opt.add_argument("--gamma-rad-mhz", type=float, required=True)
    opt.add_argument("--eta-minus", type=float, default=None)
    opt.add_argument("--omega-x-ghz", type=float, default=None)
    opt.add_argument("--splitting-ghz", type=float, default=46.0)
    opt.add_argument("--omega-b-ghz", type=float, default=0.0)
    opt.set_defaults(func=cmd_rates_optical)

    sim = sub.add_parser("simulate", help="run one scenario")
    _scenario_args(sim)
    sim.add_argument("-o", "--output", type=Path, required=True)
    sim.set_defaults(func=cmd_simulate)

    sw = sub.add_parser("sweep", help="receiver-position sweep")
    _scenario_args(sw)
    sw.add_argument("--from-um", dest="x_from", type=float, required=True)
    sw.add_argument("--to-um", dest="x_to", type=float, required=True)
    sw.add_argument("--points", type=int, required=True)
    sw.add_argument("--jobs", type=int, default=1)
    sw.add_argument("-o", "--output", type=Path, required=True)
    sw.set_defaults(func=cmd_sweep)

    con = sub.add_parser("connectivity", help="pairwise fidelity matrix")
    grp = con.add_mutually_exclusive_group(required=True)
    grp.add_argument("config", nargs="?", type=Path, default=None)
    grp.add_argument("--nodes", type=int, default=None, help="build an "
                     "equally spaced chain with this many nodes")
    con.add_argument("--spacing-um", type=float, default=10.0)
    con.add_argument("--r", type=float, default=0.92)
    con.add_argument("--tmax", type=float, default=12.0,
                     help="protocol window in units of 1/gamma_max")
    con.add_argument("--t-p", dest="t_p", type=float, default=1.0,
                     help="emitter ramp time in units of 1/gamma_max")
    con.add_argument("--gamma-max-khz", type=float, default=250.0)
    con.add_argument("--jobs", type=int, default=1)
    con.add_argument("-o", "--output", type=Path, required=True)
    con.set_defaults(func=cmd_connectivity)

    orc = sub.add_parser("oracle", help="single-standing-mode closed form")
    orc.add_argument("--g-mhz", type=float, required=True)
    orc.add_argument("--delta-mhz", type=float, default=0.0)
    orc.add_argument("--kappa-mhz", type=float, default=0.0)
    orc.add_argument("--t-max-us", type=float, required=True)
    orc.add_argument("--points", type=int, default=400)
    orc.add_argument("-o", "--output", type=Path, required=True)
    orc.set_defaults(func=cmd_oracle)

    return p


def _scenario_args(sp) -> None:
    grp = sp.add_mutually_exclusive_group(required=True)
    grp.add_argument("config", nargs="?", type=Path, default=None)
    grp.add_argument("--preset", choices=sorted(presets.PRESETS), default=None)


def _table(rows) -> int:
    bundle = rates.RateBundle(tuple(rows))
    width = max(len(name) for name, _, _ in bundle)
    for name, value, unit in bundle:
        print(f"{name:<{width}}  {value!r:>24}  {unit}")
    return 0


# -- rates ------------------------------------------------------------------


def cmd_rates_raman(args) -> int:
    p = rates.RamanDriveParams(
        omega_rabi=mhz_to_angular(args.omega_mhz),
        delta=mhz_to_angular(args.delta_mhz),
        gamma_ph=mhz_to_angular(args.gamma_mhz),
        gamma_ph_branches={"total": mhz_to_angular(args.gamma_mhz)},
    )
    r = rates.raman_rate(p)
    return _table(
        [
            ("gamma_total", r.gamma_total / TWO_PI, "MHz"),
            ("stark_shift", r.stark_shift / TWO_PI, "MHz, signed"),
            ("phase_offset", r.phase_offset, "rad"),
        ]
    )


def cmd_rates_q(args) -> int:
    res = rates.reflectivity_to_q(
        args.r, args.l_um * 1e-6, args.v, ghz_to_angular(args.f0_ghz) * 1e6
    )
    return _table(
        [
            ("kappa", res.kappa / (TWO_PI * 1e6), "MHz"),
            ("q_factor", res.q, "dimensionless"),
        ]
    )


def cmd_rates_kappa(args) -> int:
    kappa = rates.boundary_decay_rate(args.r, mhz_to_angular(args.spacing_mhz))
    return _table([("kappa", kappa / TWO_PI, "MHz")])


def cmd_rates_cavity(args) -> int:
    g = rates.cavity_coupling(
        khz_to_angular(args.gamma_max_khz), mhz_to_angular(args.spacing_mhz)
    )
    return _table([("coupling", g / TWO_PI, "MHz")])


def cmd_rates_spectrum(args) -> int:
    s = rates.ground_state_spectrum(
        ghz_to_angular(args.lambda_so_ghz),
        ghz_to_angular(args.upsilon_x_ghz),
        ghz_to_angular(args.upsilon_y_ghz),
        ghz_to_angular(args.omega_b_ghz),
    )
    ghz = TWO_PI * 1e3
    return _table(
        [
            ("splitting", s.splitting / ghz, "GHz"),
            ("e1", s.e1 / ghz, "GHz, signed"),
            ("e2", s.e2 / ghz, "GHz, signed"),
            ("e3", s.e3 / ghz, "GHz, signed"),
            ("e4", s.e4 / ghz, "GHz, signed"),
            ("theta", s.theta, "rad"),
            ("phi", s.phi, "rad"),
        ]
    )


def cmd_rates_emission(args) -> int:
    gamma = rates.emission_rate_compression(
        d=TWO_PI * args.d_phz * 1e15,
        rho=args.rho,
        area=args.area_nm2 * 1e-18,
        v=args.v,
        omega=TWO_PI * args.f_ghz * 1e9,
    )
    return _table([("gamma_bare", gamma / (TWO_PI * 1e6), "MHz")])


def cmd_rates_strain_coupling(args) -> int:
    g = rates.coupling_strength(
        d=TWO_PI * args.d_phz * 1e15,
        rho=args.rho,
        area=args.area_nm2 * 1e-18,
        omega=TWO_PI * args.f_ghz * 1e9,
        k=args.k_rad_per_um * 1e6,
        xi=args.xi,
    )
    return _table([("coupling", g / (TWO_PI * 1e6), "MHz sqrt(m)")])


def cmd_rates_mode_coupling(args) -> int:
    g = rates.cavity_mode_coupling(
        TWO_PI * args.g0_mhz * 1e6, args.wavelength_nm * 1e-9, args.l_um * 1e-6
    )
    return _table([("coupling", g / (TWO_PI * 1e6), "MHz")])


def cmd_rates_effective(args) -> int:
    g = rates.effective_emission_rate(
        khz_to_angular(args.gamma_khz), args.phase_rad
    )
    return _table([("gamma_effective", g / TWO_PI * 1e3, "kHz")])


def cmd_rates_flip(args) -> int:
    ratio = rates.residual_flip_ratio(
        mhz_to_angular(args.delta_mhz),
        mhz_to_angular(args.omega_b_mhz),
        mhz_to_angular(args.gamma_carrier_mhz),
        mhz_to_angular(args.gamma_shifted_mhz),
    )
    return _table([("flip_ratio", ratio, "dimensionless")])


def cmd_rates_optical(args) -> int:
    if args.eta_minus is not None:
        omega_x = (
            2.0
            * args.eta_minus
            * (ghz_to_angular(args.splitting_ghz) - ghz_to_angular(args.omega_b_ghz))
        )
    elif args.omega_x_ghz is not None:
        omega_x = ghz_to_angular(args.omega_x_ghz)
    else:
        raise ValueError("give either --eta-minus or --omega-x-ghz")
    r = rates.optical_raman_params(
        rates.OpticalRamanParams(
            omega_rabi_u=ghz_to_angular(args.omega_u_ghz),
            omega_rabi_d=ghz_to_angular(args.omega_d_ghz),
            delta_e=ghz_to_angular(args.delta_e_ghz),
            gamma_rad=mhz_to_angular(args.gamma_rad_mhz),
            omega_x=omega_x,
            splitting=ghz_to_angular(args.splitting_ghz),
            omega_b=ghz_to_angular(args.omega_b_ghz),
        )
    )
    khz = TWO_PI * 1e-3
    return _table(
        [
            ("eta_minus", r.eta_minus, "dimensionless"),
            ("eta_plus", r.eta_plus, "dimensionless"),
            ("omega_eff", r.omega_eff / TWO_PI, "MHz"),
            ("gamma_rad_u", r.gamma_rad_u / khz, "kHz"),
            ("gamma_rad_d", r.gamma_rad_d / khz, "kHz"),
            ("shift_u", r.shift_u / TWO_PI, "MHz, signed"),
            ("shift_d", r.shift_d / TWO_PI, "MHz, signed"),
        ]
    )


# -- scenario commands --------------------------------------------------------


def _load_scenario(args) -> tuple:
    if args.config is not None:
        text = Path(args.config).read_text(encoding="utf-8")
        return parse_config(text), f"config: {args.config}\n{text}"
    cfg = presets.preset_config(args.preset)
    return cfg, f"preset: {args.preset}"


def _echo(args, extra: str) -> str:
    cmd = "phononet " + " ".join(sys.argv[1:]) if sys.argv else "phononet"
    return f"{cmd}\nphononet {__version__}\n{extra}"


def _write_sidecar(output: Path, title: str, x_label: str, y_label: str,
                   echo: str) -> None:
    """Plot-description sidecar: axis labels plus the parameter echo."""
    side = output.with_suffix(output.suffix + ".plot.txt")
    with open(side, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"title: {title}\n")
        fh.write(f"x: {x_label}\n")
        fh.write(f"y: {y_label}\n")
        fh.write("parameters:\n")
        for line in echo.splitlines():
            fh.write(f"  {line}\n")


def cmd_simulate(args) -> int:
    cfg, desc = _load_scenario(args)
    traj = simulate(cfg)
    trajectory_to_csv(traj, args.output, echo=_echo(args, desc))
    total = traj.norm_sites + traj.norm_flight + traj.norm_lost
    residual = float(np.max(np.abs(total - total[0]))) if len(total) else 0.0
    if traj.receiver_index is not None:
        print(
            f"F_peak = {traj.f_peak:.6f} at t = {traj.t_peak:.6f} us; "
            f"F(t_max) = {traj.f_final:.6f}; norm residual = {residual:.3e}"
        )
    else:
        print(f"no receiver node; norm residual = {residual:.3e}")
    print(f"wrote {args.output}")
    return 0


def cmd_sweep(args) -> int:
    cfg, desc = _load_scenario(args)
    if args.points < 0:
        raise ValueError("--points must be >= 0")
    positions = (
        np.linspace(args.x_from, args.x_to, args.points)
        if args.points
        else np.array([])
    )
    result = analytics.position_sweep(cfg, positions, jobs=args.jobs)
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        for line in _echo(args, desc).splitlines():
            fh.write(f"# {line}\n")
        fh.write("x_r_um,f_peak,t_peak_us\n")
        for x, f, tp in zip(result.positions, result.f_peaks, result.t_peaks):
            fh.write(f"{x!r},{f!r},{tp!r}\n")
    _write_sidecar(
        args.output,
        "transfer fidelity vs receiver position",
        "receiver position x_r (um)",
        "peak fidelity F",
        _echo(args, desc),
    )
    print(f"wrote {args.output} ({len(result.positions)} points)")
    return 0


def cmd_connectivity(args) -> int:
    gamma_max = khz_to_angular(args.gamma_max_khz)
    if args.config is not None:
        cfg = load_config(args.config)
        desc = f"config: {args.config}"
    else:
        cfg = presets.connectivity_chain(
            n_nodes=args.nodes,
            spacing=args.spacing_um,
            reflectivity=args.r,
        )
        desc = (
            f"chain: nodes={args.nodes} spacing={args.spacing_um} um "
            f"R={args.r}"
        )
    matrix = analytics.connectivity_matrix(
        cfg,
        gamma_max=gamma_max,
        t_p=args.t_p / gamma_max,
        t_max=args.tmax / gamma_max,
        jobs=args.jobs,
    )
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        for line in _echo(args, desc).splitlines():
            fh.write(f"# {line}\n")
        fh.write(
            f"# t_max = {matrix.metadata['t_max']!r} us, "
            f"t_p = {matrix.metadata['t_p']!r} us, "
            f"gamma_max = {matrix.metadata['gamma_max']!r} rad/us\n"
        )
        fh.write("emitter\\receiver," + ",".join(matrix.labels) + "\n")
        for lbl, row in zip(matrix.labels, matrix.values):
            cells = ",".join("" if math.isnan(v) else repr(float(v)) for v in row)
            fh.write(f"{lbl},{cells}\n")
    _write_sidecar(
        args.output,
        "pairwise transfer fidelity (dark-state protocol)",
        "receiver node (column)",
        "emitter node (row)",
        _echo(args, desc),
    )
    n = len(matrix.labels)
    off = matrix.values[~np.eye(n, dtype=bool)]
    print(
        f"wrote {args.output}: {n}x{n} matrix, "
        f"{int((off > analytics.CLASSICAL_BOUND).sum())}/{off.size} pairs "
        "beat the classical bound"
    )
    return 0


def cmd_oracle(args) -> int:
    t = np.linspace(0.0, args.t_max_us, args.points)
    c_e, c_r, c_p = analytics.single_mode_oracle(
        mhz_to_angular(args.g_mhz),
        mhz_to_angular(args.delta_mhz),
        mhz_to_angular(args.kappa_mhz),
        t,
    )
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        for line in _echo(args, "closed-form single-mode oracle").splitlines():
            fh.write(f"# {line}\n")
        fh.write("t_us,re_c_e,im_c_e,re_c_r,im_c_r,re_c_p,im_c_p,f\n")
        for i in range(len(t)):
            fh.write(
                ",".join(
                    repr(float(v))
                    for v in (
                        t[i],
                        c_e[i].real,
                        c_e[i].imag,
                        c_r[i].real,
                        c_r[i].imag,
                        c_p[i].real,
                        c_p[i].imag,
                        abs(c_r[i]) ** 2,
                    )
                )
                + "\n"
            )
    _write_sidecar(
        args.output,
        "single-standing-mode closed-form amplitudes",
        "time (us)",
        "amplitudes / fidelity",
        _echo(args, "closed-form single-mode oracle"),
    )
    print(f"wrote {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
