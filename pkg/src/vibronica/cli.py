"""vibronica command-line interface.

    vibronica <subcommand> --config <path> [--out <dir>] [--jobs N] [--format csv|json]

Exit codes: 0 success, 2 config or usage error, 3 numerical failure.
"""
import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from vibronica import analytic, cavity, franck_condon, lindblad, ratelad
from vibronica.config import FREQUENCY_VARIABLES, parse_config
from vibronica.errors import ConfigError, NumericalError, VibronicaError
from vibronica.output import Envelope, emit_plot_script, provenance, write_csv, write_json

SUBCOMMANDS = ("fc", "spectrum", "population", "cavity", "correlate", "sweep")


# -- point workers (module level so they pickle) ----------------------------

def _population_chunk(p, n_fock, grid):
    return lindblad.population_scan(p, grid, n_fock)


def _absorption_chunk(p, n_fock, grid):
    return lindblad.numeric_absorption_spectrum(p, grid, n_fock, "population").values


def _cavity_chunk(p, c, photon_dim, vib_dim, grid):
    return cavity.transmission_numeric(p, c, grid, photon_dim, vib_dim).t_complex


def _population_point(p, n_fock):
    rho = lindblad.steady_state(lindblad.molecule_liouvillian(p, n_fock))
    return float(np.trace(rho.matrix[n_fock:, n_fock:]).real)


def _ladder_point(p, tail_tol):
    return float(ratelad.ladder_steady_state(p, tail_tol=tail_tol).p_e.sum())


def _transmission_row(p, c, grid, tail_tol):
    return cavity.transmission_analytic(p, c, grid, tail_tol).t_power


def _chunks(grid, jobs):
    n = max(1, min(jobs, grid.size))
    return np.array_split(grid, n)


def _map_chunks(fn, args, grid, jobs):
    """fn(*args, chunk) over contiguous chunks of grid, concatenated in order.

    Every point is computed independently, so the result does not depend on
    the chunking and the parallel run equals the serial one.
    """
    if jobs <= 1:
        return fn(*args, grid)
    parts = _chunks(grid, jobs)
    with ProcessPoolExecutor(max_workers=len(parts)) as ex:
        out = list(ex.map(fn, *[[a] * len(parts) for a in args], parts))
    return np.concatenate(out)


def _map_points(fn, items, jobs):
    if jobs <= 1:
        return [fn(*it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, *zip(*items)))


# -- subcommands -------------------------------------------------------------

def _scan_grid(cfg, command, allowed):
    if cfg.scan is None:
        raise ConfigError(f"'{command}' needs a scan block")
    if cfg.scan.variable not in allowed:
        raise ConfigError(f"'{command}' scans {sorted(allowed)}, not scan.variable "
                          f"{cfg.scan.variable!r}")
    return cfg.scan.grid()


def run_fc(cfg, jobs):
    p = cfg.molecule
    tol = cfg.numerics.tail_tol
    m_em = franck_condon.fc_series(p, "emission", tol).m_max
    m_ab = franck_condon.fc_series(p, "absorption", tol).m_max
    m_max = max(m_em, m_ab)
    em = franck_condon.fc_weights(p, "emission", m_max)
    ab = franck_condon.fc_weights(p, "absorption", m_max)
    rows = np.column_stack([np.arange(m_max + 1), em, ab])
    env = Envelope("fc", ["m", "S_em", "S_ab"], rows)
    return [(env, "bar")], {"m_max": m_max, "m_max_emission": m_em, "m_max_absorption": m_ab}


def _absorption_method(cfg):
    p = cfg.molecule
    meth = cfg.numerics.absorption_method
    weak = 0 < p.eta_l <= 0.1 * p.gamma + 1e-15
    if meth == "auto":
        return "population" if weak else "correlator"
    if meth == "population" and not weak:
        raise ConfigError("numerics.absorption_method 'population' needs "
                          "0 < molecule.eta_l <= 0.1 molecule.gamma")
    return meth


def run_spectrum(cfg, jobs):
    p = cfg.molecule
    num = cfg.numerics
    grid = _scan_grid(cfg, "spectrum", FREQUENCY_VARIABLES)
    out = []
    an_em = analytic.lineshape(p, grid, "emission", num.tail_tol)
    an_ab = analytic.lineshape(p, grid, "absorption", num.tail_tol)
    method = _absorption_method(cfg)
    if num.oracle:
        nu_em = lindblad.numeric_emission_spectrum(p, grid, num.n_fock).values
        if method == "population":
            nu_ab = _map_chunks(_absorption_chunk, (p, num.n_fock), grid, jobs)
        else:
            nu_ab = lindblad.numeric_absorption_spectrum(p, grid, num.n_fock, "correlator").values
    else:
        nu_em = nu_ab = np.full(grid.size, np.nan)
    cols = ["omega", "analytic", "numeric", "abs_diff"]
    for name, a, n in (("spectrum_emission", an_em, nu_em), ("spectrum_absorption", an_ab, nu_ab)):
        out.append((Envelope(name, cols, np.column_stack([grid, a, n, np.abs(a - n)])), None))
    trunc = {"n_fock": num.n_fock, "absorption_method": method, "units": "lineshape",
             "m_max_emission": franck_condon.fc_series(p, "emission", num.tail_tol).m_max,
             "m_max_absorption": franck_condon.fc_series(p, "absorption", num.tail_tol).m_max}
    return out, trunc


def run_population(cfg, jobs, ladder=False):
    p = cfg.molecule
    num = cfg.numerics
    var = cfg.scan.variable if cfg.scan is not None else None
    allowed = set(FREQUENCY_VARIABLES) | {k for k in p.__dataclass_fields__ if k != "omega_l"}
    grid = _scan_grid(cfg, "population", allowed)
    if var in FREQUENCY_VARIABLES:
        pts = [p.replace(omega_l=float(x)) for x in grid]
        an = analytic.steady_population_scan(p, grid, num.tail_tol)
        if num.oracle:
            nu = _map_chunks(_population_chunk, (p, num.n_fock), grid, jobs)
        else:
            nu = np.full(grid.size, np.nan)
    else:
        try:
            pts = [p.replace(**{var: float(x)}) for x in grid]
        except ValueError as exc:
            raise ConfigError(f"scan over {var}: {exc}") from exc
        an = np.array([analytic.steady_population(q, num.tail_tol) for q in pts])
        if num.oracle:
            nu = np.array(_map_points(_population_point, [(q, num.n_fock) for q in pts], jobs))
        else:
            nu = np.full(grid.size, np.nan)
    cols = ["omega" if var in FREQUENCY_VARIABLES else var, "analytic", "numeric", "abs_diff"]
    data = [grid, an, nu, np.abs(an - nu)]
    if ladder:
        lad = np.array(_map_points(_ladder_point, [(q, num.tail_tol) for q in pts], jobs))
        cols.append("ladder")
        data.append(lad)
    env = Envelope("population", cols, np.column_stack(data))
    trunc = {"n_fock": num.n_fock, "tail_tol": num.tail_tol}
    if ladder:
        trunc["ladder_m_max"] = ratelad.ladder_size(p, num.tail_tol)
    return [(env, "line")], trunc


def _need_cavity(cfg, command):
    if cfg.cavity is None:
        raise ConfigError(f"'{command}' needs a cavity block")
    return cfg.cavity


def run_cavity(cfg, jobs):
    p = cfg.molecule
    c = _need_cavity(cfg, "cavity")
    num = cfg.numerics
    grid = _scan_grid(cfg, "cavity", FREQUENCY_VARIABLES)
    t_an = cavity.transmission_analytic(p, c, grid, num.tail_tol).t_complex
    blocks = [(grid, t_an, "analytic")]
    numeric = num.oracle and c.n_molecules == 1
    if numeric:
        try:
            t_nu = _map_chunks(_cavity_chunk, (p, c, num.photon_dim, num.vib_dim), grid, jobs)
        except ValueError as exc:
            raise ConfigError(f"numeric cavity oracle: {exc}") from exc
        blocks.append((grid, t_nu, "numeric"))
    x = np.concatenate([b[0] for b in blocks])
    t = np.concatenate([b[1] for b in blocks])
    src = [s for b in blocks for s in [b[2]] * b[0].size]
    rows = np.column_stack([x, t.real, t.imag, np.abs(t) ** 2, np.zeros(x.size)])
    env = Envelope("cavity", ["omega_l", "T_re", "T_im", "T_power", "source"], rows,
                   text_columns={"source": src})
    trunc = {"photon_dim": num.photon_dim, "vib_dim": num.vib_dim, "numeric": numeric,
             "m_max_absorption": franck_condon.fc_series(p, "absorption", num.tail_tol).m_max}
    return [(env, "transmission")], trunc


def run_correlate(cfg, jobs):
    p = cfg.molecule
    num = cfg.numerics
    if cfg.scan is not None and cfg.scan.variable == "tau":
        taus = cfg.scan.grid()
        if taus[0] < 0:
            raise ConfigError("scan.start must be >= 0 for a tau scan")
    else:
        tau_max = num.tau_max if num.tau_max is not None else 5.0 / p.Gamma
        taus = np.linspace(0.0, tau_max, num.tau_points)
    corr, rho = lindblad.vibrational_correlations(p, taus, num.n_fock)
    pe = float(np.trace(rho.matrix[num.n_fock:, num.n_fock:]).real)
    gg = (1 - pe) * np.exp(-(1j * p.nu_g + p.Gamma) * taus)
    ee = pe * np.exp(-(1j * p.nu_e + p.Gamma) * taus)
    cols = ["tau"]
    data = [taus]
    for key in ("gg", "ee", "ge", "eg"):
        v = corr[key].values
        cols += [f"{key}_re", f"{key}_im"]
        data += [v.real, v.imag]
    for key, v in (("analytic_gg", gg), ("analytic_ee", ee)):
        cols += [f"{key}_re", f"{key}_im"]
        data += [v.real, v.imag]
    env = Envelope("correlate", cols, np.column_stack(data))
    return [(env, "line")], {"n_fock": num.n_fock, "p_e": pe}


def run_sweep(cfg, jobs):
    p = cfg.molecule
    c = _need_cavity(cfg, "sweep")
    num = cfg.numerics
    if cfg.sweep is None:
        raise ConfigError("'sweep' needs a sweep block")
    if cfg.sweep.variable != "n_molecules":
        raise ConfigError("sweep.variable must be 'n_molecules'")
    grid = _scan_grid(cfg, "sweep", FREQUENCY_VARIABLES)
    s = cfg.sweep
    n_values = np.unique(np.rint(np.linspace(s.start, s.stop, s.points)).astype(int))
    if n_values[0] < 1:
        raise ConfigError("sweep.start must be >= 1 molecule")
    items = [(p, c.replace(n_molecules=int(n)), grid, num.tail_tol) for n in n_values]
    z = np.array(_map_points(_transmission_row, items, jobs))
    env = Envelope("sweep", ["n_molecules"] + [format(float(x), ".17g") for x in grid],
                   np.column_stack([n_values, z]))
    return [(env, "heatmap")], {"n_values": [int(n_values[0]), int(n_values[-1]), len(n_values)]}


RUNNERS = {
    "fc": run_fc,
    "spectrum": run_spectrum,
    "population": run_population,
    "cavity": run_cavity,
    "correlate": run_correlate,
    "sweep": run_sweep,
}


def run_subcommand(name, cfg, out_dir=None, jobs=1, fmt=None, ladder=False):
    """Run one subcommand and write its files; returns the list of paths written."""
    if name not in RUNNERS:
        raise ConfigError(f"unknown subcommand {name!r}")
    out_dir = Path(out_dir if out_dir is not None else cfg.output.directory)
    formats = [fmt] if fmt else list(cfg.output.formats)
    t0 = time.perf_counter()
    if name == "population":
        results, trunc = run_population(cfg, jobs, ladder=ladder)
    else:
        results, trunc = RUNNERS[name](cfg, jobs)
    wall = time.perf_counter() - t0
    out_dir.mkdir(parents=True, exist_ok=True)
    command = name + (" --ladder" if ladder else "")
    written = []
    csvs = {}
    for env, style in results:
        env.provenance = provenance(command, cfg, trunc, wall)
        for f in formats:
            path = out_dir / f"{env.name}.{f}"
            written.append(write_csv(env, path) if f == "csv" else write_json(env, path))
            if f == "csv":
                csvs[env.name] = path
        if cfg.output.plots and style and env.name in csvs:
            written.append(emit_plot_script(csvs[env.name], style,
                                            out_dir / f"plot_{env.name}.py"))
    if name == "spectrum" and cfg.output.plots and len(csvs) == 2:
        written.append(emit_plot_script([csvs["spectrum_emission"], csvs["spectrum_absorption"]],
                                        "overlay", out_dir / "plot_spectrum.py"))
    return written


def build_parser():
    ap = argparse.ArgumentParser(prog="vibronica",
                                 description="Opto-vibronic spectra, populations and "
                                             "cavity transmission.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON run configuration")
        sp.add_argument("--out", default=None, help="output directory (default: output.directory)")
        sp.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                        help="worker processes (default: all cores)")
        sp.add_argument("--format", choices=("csv", "json"), default=None)
        if name == "population":
            sp.add_argument("--ladder", action="store_true",
                            help="add the vibrational-ladder rate-equation steady state")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(args.config)
        paths = run_subcommand(args.command, cfg, args.out, args.jobs, args.format,
                               getattr(args, "ladder", False))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except VibronicaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
