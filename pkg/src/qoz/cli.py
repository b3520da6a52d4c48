"""Command-line front end: ``qoz <subcommand> [--config FILE] [--set key=value] ...``.

Every run writes its outputs plus ``manifest.json`` (the fully resolved
configuration) into one directory: ``--out``, else ``$QOZ_DATA_DIR/<subcommand>``,
else ``./qoz-out/<subcommand>``.  Exit codes: 0 success, 1 usage error,
2 flagged numerical failure (blowup, non-convergence, failed check).
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import logging
import os
import sys as _sys
import time
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .grid import Axis, ComplexGrid

log = logging.getLogger("qoz")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

DEFAULTS = {
    "series-eval": {
        "beta": 0.1, "hbar": 1.0, "mass": 1.0, "order": 4,
        "trap_omega": 1.0, "pair": {"kind": "none"},
        "positions": [0.5], "momenta": [1.0], "input": "",
    },
    "linear-solve": {
        "beta": 1.0, "hbar": 1.0, "mass": 1.0,
        "pair": {"kind": "gaussian", "depth": 1.0, "width": 0.7},
        "regularization": {"r_cut": 0.8, "cap": 0.0},
        "grid": {"n": 256, "extent": 20.0},
        "momenta": {"count": 33, "max_kinetic": 25.0},
        "nonlinear_check": False,
    },
    "pde-integrate": {
        "mode": "singlet", "hbar": 1.0, "mass": 1.0, "method": "rk4", "steps": 400,
        "beta0": 0.0, "beta_final": 0.5, "blowup": 50.0, "checkpoint_every": 0,
        "singlet": {"omega": 1.0, "q_max": 6.0, "nodes": 241, "p_count": 31, "max_kinetic": 8.0},
        "pair": {"kind": "gaussian", "depth": 1.0, "width": 1.0},
        "regularization": {"r_cut": 0.8, "cap": 0.0},
        "grid": {"n": 64, "extent": 20.0},
        "p_z": [0.0, 1.5, -1.5, 3.0, -3.0],
        "nonlinear": True,
    },
    "eigen-table": {
        "system": "sho", "hbar": 1.0, "mass": 1.0,
        "beta": 0.5, "omega": 1.0, "n_states": 200,
        "q_half": 4.0, "p_half": 8.0, "table_nodes": 161,
        "epsilon": 1.0, "beta_hbar_omega": 0.5,
    },
    "weight-eval": {
        "figure": 1, "epsilon": 1.0, "beta_hbar_omega": 0.5,
        "q2_min": -0.7, "q2_max": 0.7, "q2_nodes": 57, "method": "direct",
    },
    "symmetrize": {
        "input": "", "positions": [0.0, 0.4, 1.1], "momenta": [0.3, -0.2, 0.5],
        "beta": 1.0, "hbar": 1.0, "mass": 1.0,
        "statistics": "bose", "lmax": 4, "cutoff_radius": 0.0, "damping_length": 0.0,
    },
    "oz-run": {
        "density": 0.1, "beta": 0.5, "hbar": 1.0, "mass": 1.0, "statistics": "boltzmann",
        "pair": {"kind": "lj", "epsilon": 1.0, "sigma": 1.0},
        "regularization": {"r_cut": 0.8, "cap": 0.0},
        "quantum": False, "q_max": 20.0, "n_half": 1000, "n_p": 5, "max_kinetic": 8.0,
        "alpha": 0.2, "tol": 1e-8, "max_iter": 5000, "damping_length": 0.0, "w_table": "",
    },
    "selfcheck": {"seed": 20240},
}

HELP = {
    "series-eval": "truncated hbar series of the commutation function at one configuration",
    "linear-solve": "linearized Fourier-space pair function; QOZGRID1 table + asymptote CSV",
    "pde-integrate": "beta-stepping of the nonlinear singlet or pair equation",
    "eigen-table": "eigenstate-sum singlet (and trapped pair) tables",
    "weight-eval": "three-particle weight curves for the two figure setups",
    "symmetrize": "loop sums and brute-force symmetrization for a configuration",
    "oz-run": "1D phase-space Ornstein-Zernike / HNC solution",
    "selfcheck": "fast invariant suite with a pass/fail table",
}


class UsageError(Exception):
    pass


# -- configuration --------------------------------------------------------------


def _merge(base, extra):
    out = copy.deepcopy(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def _parse_value(text):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def _set_dotted(cfg, key, value):
    parts = key.split(".")
    node = cfg
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise UsageError(f"cannot set {key}: {part} is not a table")
    node[parts[-1]] = value


def resolve_config(command, args):
    """Defaults <- TOML file (top level or ``[command]`` table) <- ``--set`` <- flags."""
    cfg = copy.deepcopy(DEFAULTS[command])
    if args.config:
        path = Path(args.config)
        if path.suffix == ".json":
            # a previous run's manifest reproduces that run
            section = json.loads(path.read_text())["config"]
        else:
            data = tomllib.loads(path.read_text())
            section = data.get(command, data)
        cfg = _merge(cfg, {k: v for k, v in section.items() if k not in DEFAULTS})
    for item in args.set or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        key, text = item.split("=", 1)
        _set_dotted(cfg, key.strip(), _parse_value(text.strip()))
    for key, value in vars(args).items():
        if key.startswith("opt_") and value is not None:
            _set_dotted(cfg, key[4:], value)
    return cfg


def output_dir(command, args):
    if args.out:
        path = Path(args.out)
    elif os.environ.get("QOZ_DATA_DIR"):
        path = Path(os.environ["QOZ_DATA_DIR"]) / command
    else:
        path = Path("qoz-out") / command
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_manifest(path, command, cfg, outputs, status):
    manifest = {"command": command, "version": __version__, "config": cfg,
                "outputs": sorted(outputs), "status": status}
    (path / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _fmt(v):
    return f"{v:.17g}"


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


# -- potentials -----------------------------------------------------------------


def build_pair(spec):
    from .potentials import GaussianWell, LennardJones

    kind = spec.get("kind", "none")
    if kind == "none":
        return None
    if kind == "gaussian":
        return GaussianWell(float(spec.get("depth", 1.0)), float(spec.get("width", 1.0)))
    if kind == "lj":
        if "epsilon" not in spec:
            raise UsageError("the Lennard-Jones depth 'pair.epsilon' must be given")
        return LennardJones(float(spec["epsilon"]), float(spec.get("sigma", 1.0)))
    raise UsageError(f"unknown pair potential kind {kind!r}")


def _regularization(pair, cfg):
    if pair is not None and getattr(pair, "singular", False):
        return dict(cfg.get("regularization", {}))
    return None


def _read_configuration(cfg):
    from .system import Configuration

    if cfg.get("input"):
        data = np.loadtxt(cfg["input"], delimiter=",", ndmin=2, comments="#")
        if data.shape[1] % 2:
            raise UsageError("configuration CSV needs q columns followed by p columns")
        d = data.shape[1] // 2
        return Configuration(data[:, :d], data[:, d:])
    return Configuration.from_1d(cfg["positions"], cfg["momenta"])


# -- subcommands ----------------------------------------------------------------


def cmd_series_eval(cfg, out):
    from .potentials import Harmonic, PotentialModel
    from .series import omega_coefficients, w_series_eval
    from .system import ThermalSystem, classical_hamiltonian

    sys = ThermalSystem(cfg["beta"], cfg["hbar"], cfg["mass"])
    config = _read_configuration(cfg)
    sys = ThermalSystem(sys.beta, sys.hbar, sys.mass, config.dim)
    trap = Harmonic(cfg["mass"], cfg["trap_omega"]) if cfg["trap_omega"] else None
    model = PotentialModel(trap, build_pair(cfg["pair"]))
    res = w_series_eval(config, model, sys, int(cfg["order"]))
    coords = [float(v) for v in config.positions.ravel()] + [float(v) for v in config.momenta.ravel()]
    labels = [f"q{j}_{a}" for j in range(config.n_particles) for a in range(config.dim)]
    labels += [f"p{j}_{a}" for j in range(config.n_particles) for a in range(config.dim)]
    rows, partial = [], 0j
    for n, term in enumerate(res.terms, start=1):
        partial += term
        rows.append(coords + [n, term.real, term.imag, partial.real, partial.imag])
    write_csv(out / "series.csv", labels + ["order", "term_re", "term_im", "partial_re", "partial_im"], rows)
    om = omega_coefficients(config, model, sys, 3)
    h = classical_hamiltonian(config, model, sys)
    write_csv(out / "omega.csv", ["n", "coef_re", "coef_im"],
              [[n, c.real, c.imag] for n, c in enumerate(om.coefficients)])
    print(f"W (order {res.order}) = {res.value:.10g}")
    print(f"W - beta H = {res.value - sys.beta * h:.10g}")
    return EXIT_OK, ["series.csv", "omega.csv"]


def cmd_linear_solve(cfg, out):
    from .linear_fourier import (asymptote_diagnostics, first_nonlinear_correction,
                                 inverse_to_table, linear_field, pair_potential_ft)
    from .spectral import SpectralGrid
    from .system import ThermalSystem

    sys = ThermalSystem(cfg["beta"], cfg["hbar"], cfg["mass"], 2)
    pair = build_pair(cfg["pair"])
    if pair is None:
        raise UsageError("linear-solve needs a pair potential")
    reg = _regularization(pair, cfg)
    grid = SpectralGrid(int(cfg["grid"]["n"]), float(cfg["grid"]["extent"]))
    from .linear_fourier import default_momentum_axis
    p_axis = default_momentum_axis(sys, int(cfg["momenta"]["count"]), float(cfg["momenta"]["max_kinetic"]))
    field = linear_field(pair, sys, sys.beta, grid, p_axis, reg)
    table = inverse_to_table(field)
    table.save(out / "linear.qozgrid")
    kx, kz = grid.mesh_k()
    u_hat = pair_potential_ft(pair, np.hypot(kx, kz), reg) * grid.nyquist_mask()
    rows = [[r["p"], r["small_k_error"], r["large_k_error"], r["k_large"]]
            for r in asymptote_diagnostics(field, u_hat, sys)]
    write_csv(out / "asymptotes.csv", ["p", "small_k_error", "large_k_error", "k_large"], rows)
    outputs = ["linear.qozgrid", "asymptotes.csv"]
    if cfg.get("nonlinear_check"):
        _, ratio = first_nonlinear_correction(field, u_hat, sys)
        write_csv(out / "correction.csv", ["ratio"], [[ratio]])
        outputs.append("correction.csv")
        print(f"first nonlinear correction ratio {ratio:.3e}")
    print(f"wrote {table!r}")
    return EXIT_OK, outputs


def cmd_pde_integrate(cfg, out):
    from .nonlinear_pde import integrate_pair_slice, integrate_singlet
    from .system import ThermalSystem

    steps = int(cfg["steps"])
    beta_final = float(cfg["beta_final"])
    beta0 = float(cfg["beta0"]) or None
    outputs = []
    if cfg["mode"] == "singlet":
        s = cfg["singlet"]
        sys = ThermalSystem(beta_final, cfg["hbar"], cfg["mass"])
        q = np.linspace(-s["q_max"], s["q_max"], int(s["nodes"]))
        p_max = float(sys.momentum_for_kinetic(s["max_kinetic"]))
        p = np.linspace(-p_max, p_max, int(s["p_count"]))
        omega = float(s["omega"])
        every = int(cfg["checkpoint_every"]) or steps
        traj = integrate_singlet(q, p, lambda x: 0.5 * cfg["mass"] * omega**2 * x * x, sys,
                                 beta_final, steps, beta0, cfg["method"], cfg["blowup"], every)
        axes = [Axis.from_nodes(p), Axis.from_nodes(q)]
        names = ["p", "q"]
    elif cfg["mode"] == "pair":
        from .linear_fourier import pair_potential_ft
        from .spectral import SpectralGrid

        sys = ThermalSystem(beta_final, cfg["hbar"], cfg["mass"], 2)
        pair = build_pair(cfg["pair"])
        grid = SpectralGrid(int(cfg["grid"]["n"]), float(cfg["grid"]["extent"]))
        kx, kz = grid.mesh_k()
        u_hat = pair_potential_ft(pair, np.hypot(kx, kz), _regularization(pair, cfg)) * grid.nyquist_mask()
        b0 = beta0 if beta0 is not None else beta_final / 100
        slices, flagged, nodes = [], False, None
        every = int(cfg["checkpoint_every"]) or steps
        for pz in cfg["p_z"]:
            tr = integrate_pair_slice(u_hat, float(pz), grid, sys, b0, beta_final, steps, cfg["method"],
                                      bool(cfg["nonlinear"]), cfg["blowup"], every)
            flagged |= tr.blowup
            slices.append(tr)
            nodes = tr.beta_nodes if nodes is None or len(tr.beta_nodes) < len(nodes) else nodes
        q_ax = Axis(grid.q0, grid.dq, grid.n)
        p_sorted = np.argsort(cfg["p_z"])
        p_vals = np.asarray(cfg["p_z"], dtype=float)[p_sorted]
        write_csv(out / "trajectory.csv", ["p_z", "beta", "max_norm", "blowup"],
                  [[float(cfg["p_z"][i]), b, m, int(tr.blowup)]
                   for i, tr in enumerate(slices) for b, m in zip(tr.beta_nodes, tr.max_norm)])
        outputs.append("trajectory.csv")
        if not flagged and np.allclose(np.diff(p_vals), np.diff(p_vals)[0] if p_vals.size > 1 else 1):
            data = np.stack([grid.inverse(slices[i].final) for i in p_sorted])
            ComplexGrid([Axis.from_nodes(p_vals), q_ax, q_ax], data, ["p", "qx", "qz"]).save(out / "final.qozgrid")
            outputs.append("final.qozgrid")
        print(f"pair integration to beta={beta_final}: blowup={flagged}")
        return (EXIT_NUMERIC if flagged else EXIT_OK), outputs
    else:
        raise UsageError(f"unknown mode {cfg['mode']!r}")
    for i, (b, field) in enumerate(zip(traj.beta_nodes, traj.fields)):
        name = f"checkpoint_{i:04d}.qozgrid"
        ComplexGrid(axes, field, names).save(out / name)
        outputs.append(name)
    write_csv(out / "trajectory.csv", ["beta", "max_norm"], list(zip(traj.beta_nodes, traj.max_norm)))
    outputs.append("trajectory.csv")
    print(f"singlet integration to beta={traj.final_beta:.6g}: blowup={traj.blowup}")
    return (EXIT_NUMERIC if traj.blowup else EXIT_OK), outputs


def cmd_eigen_table(cfg, out):
    from .eigensolver import sho_eigenstates, singlet_w_table
    from .system import ThermalSystem

    if cfg["system"] == "sho":
        sys = ThermalSystem(cfg["beta"], cfg["hbar"], cfg["mass"])
        omega, n = float(cfg["omega"]), int(cfg["n_states"])
        length = np.sqrt(sys.hbar / (sys.mass * omega))
        half = length * (np.sqrt(2 * n + 1) + 12)
        basis = sho_eigenstates(sys, omega, n, np.linspace(-half, half, 4001))
        nodes = int(cfg["table_nodes"])
        table = singlet_w_table(basis, sys, sys.beta, Axis.symmetric(cfg["p_half"], nodes),
                                Axis.symmetric(cfg["q_half"], nodes))
        table.grid.save(out / "singlet.qozgrid")
        table.grid.to_csv(out / "singlet.csv")
        return EXIT_OK, ["singlet.qozgrid", "singlet.csv"]
    if cfg["system"] == "trap-lj":
        from .figures import build_trap_tables

        setup = build_trap_tables(float(cfg["epsilon"]), float(cfg["beta_hbar_omega"]))
        setup.singlet.grid.save(out / "singlet.qozgrid")
        setup.pair.com.grid.save(out / "com.qozgrid")
        setup.pair.interaction.grid.save(out / "interaction.qozgrid")
        return EXIT_OK, ["singlet.qozgrid", "com.qozgrid", "interaction.qozgrid"]
    raise UsageError(f"unknown system {cfg['system']!r}")


def cmd_weight_eval(cfg, out):
    from .figures import FIG1_KINETIC, FIG2_P2, build_trap_tables, figure1_data, figure2_data

    setup = build_trap_tables(float(cfg["epsilon"]), float(cfg["beta_hbar_omega"]))
    q2 = np.linspace(cfg["q2_min"], cfg["q2_max"], int(cfg["q2_nodes"]))
    fig = int(cfg["figure"])
    if fig == 1:
        quantum, classical, info = figure1_data(setup, q2, method=cfg["method"])
        header = ["q2"] + [f"re_W_K{k:g}" for k in FIG1_KINETIC] + [f"classical_K{k:g}" for k in FIG1_KINETIC]
        write_csv(out / "figure1.csv", header, np.column_stack([q2, quantum, classical]).tolist())
        raw = ["q2"] + [f"raw_re_W_K{k:g}" for k in FIG1_KINETIC] + [f"raw_classical_K{k:g}" for k in FIG1_KINETIC]
        write_csv(out / "figure1_raw.csv", raw,
                  np.column_stack([q2, info["raw_quantum"], info["raw_classical"]]).tolist())
        return EXIT_OK, ["figure1.csv", "figure1_raw.csv"]
    if fig == 2:
        re_omega, _ = figure2_data(setup, q2, method=cfg["method"])
        header = ["q2"] + [f"re_Omega_p{p:g}" for p in FIG2_P2]
        write_csv(out / "figure2.csv", header, np.column_stack([q2, re_omega]).tolist())
        mins = re_omega.min(axis=0)
        print("min Re Omega per p2:", " ".join(f"{m:.4g}" for m in mins))
        return EXIT_OK, ["figure2.csv"]
    raise UsageError("--figure must be 1 or 2")


def cmd_symmetrize(cfg, out):
    from .symmetrization import eta_bruteforce, loop_sums
    from .system import ThermalSystem

    config = _read_configuration(cfg)
    sys = ThermalSystem(cfg["beta"], cfg["hbar"], cfg["mass"], config.dim)
    cutoff = cfg["cutoff_radius"] or None
    damping = cfg["damping_length"] or None
    exp = loop_sums(config, sys, cfg["statistics"], int(cfg["lmax"]), cutoff, damping)
    rows = [[f"eta{l}", v.real, v.imag] for l, v in sorted(exp.loop_sums.items())]
    rows.append(["truncated_sum", exp.truncated_sum.real, exp.truncated_sum.imag])
    rows.append(["exponential", exp.total_exponential.real, exp.total_exponential.imag])
    status = EXIT_OK
    if config.n_particles <= 8:
        brute = eta_bruteforce(config, sys, cfg["statistics"])
        rows.append(["bruteforce", brute.real, brute.imag])
        diff = brute - exp.truncated_sum
        rows.append(["discrepancy", diff.real, diff.imag])
    write_csv(out / "symmetrize.csv", ["quantity", "re", "im"], rows)
    for name, re, im in rows:
        print(f"{name:>14s}  {re: .12g} {im:+.12g}i")
    return status, ["symmetrize.csv"]


def cmd_oz_run(cfg, out):
    from .linear_fourier import pair_potential_ft
    from .oz import (PhaseSpaceAxes, asymptote_check, initial_guess, mayer_f, momentum_density,
                     pair_w_linear_1d, picard_solve)
    from .potentials import SmoothedCore
    from .system import ThermalSystem

    sys = ThermalSystem(cfg["beta"], cfg["hbar"], cfg["mass"])
    pair = build_pair(cfg["pair"])
    axes = PhaseSpaceAxes.build(cfg["q_max"], int(cfg["n_half"]), sys, int(cfg["n_p"]), cfg["max_kinetic"])
    rw = momentum_density(axes, sys, cfg["density"])
    w = None
    if cfg["w_table"]:
        # a stored pair function on this run's (p1, p2, q) axes
        table = ComplexGrid.load(cfg["w_table"])
        want = (axes.p.size, axes.p.size, axes.q.size)
        if table.data.shape != want:
            raise UsageError(f"w_table has shape {table.data.shape}, this run needs {want}")
        if not np.allclose(table.axes[2].nodes, axes.q) or not np.allclose(table.axes[0].nodes, axes.p):
            raise UsageError("w_table axes do not match the run's q and p axes")
        w = table.data
    elif cfg["quantum"] and pair is not None:
        reg = _regularization(pair, cfg)
        soft = SmoothedCore(pair, **reg) if reg is not None else pair
        w = pair_w_linear_1d(lambda k: pair_potential_ft(soft, k, dim=1), axes, sys, sys.beta)
        w = w + sys.beta * soft(np.abs(axes.q))[None, None, :]
    mayer = mayer_f(axes, sys, pair, w, cfg["statistics"], cfg["damping_length"] or None)
    res = picard_solve(initial_guess(mayer, rw), mayer, cfg["alpha"], int(cfg["max_iter"]), cfg["tol"])
    p_ax = Axis.from_nodes(axes.p) if axes.p.size > 1 else Axis(float(axes.p[0]), 1.0, 1)
    q_ax = Axis.from_nodes(axes.q)
    outputs = []
    for name, data in (("h", res.h), ("c", res.c), ("g", res.g)):
        ComplexGrid([p_ax, p_ax, q_ax], data, ["p1", "p2", "q"]).save(out / f"{name}.qozgrid")
        header = ["q"]
        cols = [axes.q]
        for a in range(axes.p.size):
            for b in range(axes.p.size):
                header += [f"re_{a}_{b}", f"im_{a}_{b}"]
                cols += [data[a, b].real, data[a, b].imag]
        write_csv(out / f"{name}.csv", header, np.column_stack(cols).tolist())
        outputs += [f"{name}.qozgrid", f"{name}.csv"]
    write_csv(out / "history.csv", ["iteration", "max_change"],
              [[i + 1, v] for i, v in enumerate(res.history)])
    outputs.append("history.csv")
    report = asymptote_check(res, mayer)
    print(f"converged={res.converged} iterations={res.iterations} "
          f"asymptote residual={report['max_residual']:.3e}")
    return (EXIT_OK if res.converged else EXIT_NUMERIC), outputs


def cmd_selfcheck(cfg, out):
    from .selfcheck import run_checks

    rows = run_checks(int(cfg["seed"]))
    width = max(len(r[0]) for r in rows)
    for name, ok, detail in rows:
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}")
    write_csv(out / "selfcheck.csv", ["check", "pass", "detail"], [[n, int(o), d] for n, o, d in rows])
    return (EXIT_OK if all(r[1] for r in rows) else EXIT_NUMERIC), ["selfcheck.csv"]


COMMANDS = {
    "series-eval": cmd_series_eval,
    "linear-solve": cmd_linear_solve,
    "pde-integrate": cmd_pde_integrate,
    "eigen-table": cmd_eigen_table,
    "weight-eval": cmd_weight_eval,
    "symmetrize": cmd_symmetrize,
    "oz-run": cmd_oz_run,
    "selfcheck": cmd_selfcheck,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(_sys.stderr)
        raise UsageError(message)


def build_parser():
    parser = _Parser(prog="qoz", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qoz {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    for name, helptext in HELP.items():
        p = sub.add_parser(name, help=helptext, description=helptext)
        p.add_argument("--config", help="TOML file (top level or a [%s] table) or a manifest.json" % name)
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config value (dotted keys, TOML values)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--threads", type=int, help="cap on worker threads (default: all cores)")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "weight-eval":
            p.add_argument("--figure", dest="opt_figure", type=int, choices=(1, 2))
            p.add_argument("--epsilon", dest="opt_epsilon", type=float)
        if name == "symmetrize":
            p.add_argument("--input", dest="opt_input", help="CSV of q,p rows")
            p.add_argument("--statistics", dest="opt_statistics", choices=("bose", "fermi"))
        if name == "pde-integrate":
            p.add_argument("--mode", dest="opt_mode", choices=("singlet", "pair"))
            p.add_argument("--method", dest="opt_method", choices=("euler", "rk4"))
            p.add_argument("--steps", dest="opt_steps", type=int)
            p.add_argument("--beta0", dest="opt_beta0", type=float)
            p.add_argument("--beta-final", dest="opt_beta_final", type=float)
        if name == "oz-run":
            p.add_argument("--statistics", dest="opt_statistics", choices=("bose", "fermi", "boltzmann"))
            p.add_argument("--density", dest="opt_density", type=float)
        if name == "eigen-table":
            p.add_argument("--system", dest="opt_system", choices=("sho", "trap-lj"))
    return parser


def run(argv=None):
    """Parse ``argv``, run the subcommand, return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(_sys.stderr)
            return EXIT_USAGE
        cfg = resolve_config(args.command, args)
    except UsageError as exc:
        print(f"qoz: error: {exc}", file=_sys.stderr)
        return EXIT_USAGE
    except (OSError, KeyError, json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        print(f"qoz: error: {exc}", file=_sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = output_dir(args.command, args)
    threads = args.threads or os.cpu_count() or 1
    from threadpoolctl import threadpool_limits

    start = time.perf_counter()
    try:
        with threadpool_limits(limits=threads):
            code, outputs = COMMANDS[args.command](cfg, out)
    except UsageError as exc:
        print(f"qoz: error: {exc}", file=_sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError, TypeError) as exc:
        print(f"qoz: error: {exc}", file=_sys.stderr)
        return EXIT_USAGE
    log.info("%s finished in %.2f s", args.command, time.perf_counter() - start)
    write_manifest(out, args.command, cfg, outputs, "ok" if code == EXIT_OK else "flagged")
    return code


def main():
    _sys.exit(run())


if __name__ == "__main__":
    main()
