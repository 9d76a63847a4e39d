"""Command-line interface: evolve, modes, sweep, validate, fock.

Exit codes: 0 success, 1 validation or tolerance failure, 2 I/O failure.
Validation failures also emit a machine-readable JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import ConfigError, ConsistencyError, QuadratureError, RecurrenceWindowError
from .model import SolverOptions, build_config, config_to_dict, read_ini
from .modes import critical_coupling, find_localized_modes
from .greens import (
    PoleBranchDecomposition,
    TimeGrid,
    compute_v,
    compute_v_double_time,
    default_dt,
    propagate_u,
)
from .observables import (
    center_moments,
    entanglement_record,
    relative_moments,
    squeeze_parameter,
    symplectic_min,
    thermal_fock_distribution,
)
from .oracle import discretize, exact_propagator, single_particle_matrix
from .spectral import SpectralDensityHandle
from .sweep import AxisSpec, SweepGrid, run_sweep, steady_state
from . import reporting

_PARAM_FLAGS = ("eta", "s", "omega_c", "kappa", "r", "temperature", "omega0")


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _error_json("config", str(exc), field=exc.field)
        return 1
    except (QuadratureError, ConsistencyError, RecurrenceWindowError) as exc:
        _error_json(type(exc).__name__, str(exc))
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2


def _error_json(kind, message, **extra):
    doc = {"error": {"type": kind, "message": message, **extra}}
    print(json.dumps(doc), file=sys.stderr)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="entbath",
        description="Entanglement decoherence of two bosonic modes in a common "
                    "Ohmic-family environment.",
    )
    parser.add_argument("--version", action="version", version=f"entbath {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    evolve = sub.add_parser("evolve", help="time evolution at one parameter point")
    _add_common(evolve)
    evolve.add_argument("--t-max", type=float, default=None,
                        help="evolution horizon (default 50/omega0)")
    evolve.add_argument("--dt", type=float, default=None,
                        help="time step (default: automatic)")
    evolve.set_defaults(func=cmd_evolve)

    modes_p = sub.add_parser("modes", help="critical coupling and localized modes")
    _add_common(modes_p)
    modes_p.set_defaults(func=cmd_modes)

    sweep_p = sub.add_parser("sweep", help="steady-state phase-diagram sweep")
    _add_common(sweep_p)
    for axis, default in (("eta", (0.02, 0.4, 8)), ("s", (0.5, 1.5, 5)),
                          ("temp", (0.0, 0.3, 4))):
        lo, hi, n = default
        sweep_p.add_argument(f"--{axis}-min", type=float, default=lo)
        sweep_p.add_argument(f"--{axis}-max", type=float, default=hi)
        sweep_p.add_argument(f"--{axis}-count", type=int, default=n)
    sweep_p.add_argument("--t-max", type=float, default=None,
                         help="override the steady-state horizon verbatim")
    sweep_p.add_argument("--dt", type=float, default=None)
    sweep_p.add_argument("--jobs", type=int, default=1)
    sweep_p.add_argument("--eps-ent", type=float, default=1e-3)
    sweep_p.set_defaults(func=cmd_sweep)

    val = sub.add_parser("validate", help="oracle and route-equivalence checks")
    val.add_argument("--k", type=int, default=2000, help="discretized bath modes")
    val.add_argument("--t-span", type=float, default=20.0)
    val.add_argument("--dt-scale", type=float, default=1.0,
                     help="multiply the automatic dt (values > 1 coarsen the grid)")
    val.add_argument("--suite", choices=("all", "oracle", "routes"), default="all")
    val.add_argument("--out", default=None)
    val.set_defaults(func=cmd_validate)

    fock = sub.add_parser("fock", help="thermal-like Fock distribution")
    fock.add_argument("--nbar", type=float, required=True)
    fock.add_argument("--n-max", type=int, default=64)
    fock.add_argument("--out", default=None)
    fock.add_argument("--no-plot", action="store_true")
    fock.set_defaults(func=cmd_fock)
    return parser


def _add_common(p):
    p.add_argument("--config", default=None, help="INI config file")
    p.add_argument("--from-manifest", default=None,
                   help="re-run with the resolved parameters of a manifest JSON")
    for flag in _PARAM_FLAGS:
        p.add_argument(f"--{flag.replace('_', '-')}", type=float, default=None)
    p.add_argument("--out", default=None,
                   help="output directory (default: $ENTBATH_OUT or '.')")
    p.add_argument("--no-plot", action="store_true",
                   help="skip figure rendering")


def _resolve(args):
    """Config file < manifest < explicit flags; returns the parameter blocks."""
    raw = {}
    solver_file = SolverOptions()
    if getattr(args, "config", None):
        config, spectral, bath, solver_file = read_ini(args.config)
        raw.update(config_to_dict(config, spectral, bath))
    if getattr(args, "from_manifest", None):
        with open(args.from_manifest) as fh:
            manifest = json.load(fh)
        raw.update(manifest["parameters"])
    for flag in _PARAM_FLAGS:
        value = getattr(args, flag, None)
        if value is not None:
            raw[flag] = value
    config, spectral, bath = build_config(**raw)
    return config, spectral, bath, solver_file


def _out_dir(args):
    out = getattr(args, "out", None) or os.environ.get("ENTBATH_OUT") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _timestamp():
    return time.strftime("%Y-%m-%dT%H:%M:%S")


def cmd_evolve(args) -> int:
    config, spectral, bath, solver = _resolve(args)
    out = _out_dir(args)
    handle = SpectralDensityHandle(spectral)
    t_max = args.t_max if args.t_max is not None else (solver.t_max or 50.0)
    dt = args.dt if args.dt is not None else solver.dt
    grid = TimeGrid.for_span(config, handle, t_max, dt=dt)
    u = propagate_u(config, handle, grid)
    v = compute_v(config, handle, bath, grid, u,
                  n_nodes=solver.v_nodes, tol=solver.v_tol)

    times = grid.times
    rows = []
    series = {k: np.empty(len(times)) for k in
              ("abs_u", "v", "en_plus", "en_total", "en_naive")}
    for i, t in enumerate(times):
        m_plus = center_moments(u[i], v[i], config.r)
        m_minus = relative_moments(config.r, config.omega_minus, t)
        sq = squeeze_parameter(m_plus)
        lam = symplectic_min(m_plus)
        rec = entanglement_record(m_plus, config.r, m_minus)
        rows.append([
            t, u[i].real, u[i].imag, abs(u[i]), v[i], m_plus.n,
            abs(m_plus.sigma), sq.thermal_occupation, sq.magnitude, lam,
            rec.en_plus, rec.en_total, rec.en_naive,
        ])
        series["abs_u"][i] = abs(u[i])
        series["v"][i] = v[i]
        series["en_plus"][i] = rec.en_plus
        series["en_total"][i] = rec.en_total
        series["en_naive"][i] = rec.en_naive

    search = find_localized_modes(config, handle)
    st = steady_state(config, spectral, bath,
                      SolverOptions(dt=dt, t_max=None,
                                    t_max_steady=max(200.0, t_max),
                                    v_nodes=solver.v_nodes, v_tol=solver.v_tol))
    params = config_to_dict(config, spectral, bath)
    manifest = reporting.build_manifest(
        "evolve", params,
        extra={"t_max": grid.t_max, "dt": grid.dt},
        timestamp=_timestamp(),
    )
    csv_path = os.path.join(out, "evolve.csv")
    reporting.write_csv(csv_path, reporting.EVOLVE_COLUMNS, rows, manifest)
    reporting.write_json_rows(os.path.join(out, "evolve.json"),
                              reporting.EVOLVE_COLUMNS, rows, manifest)
    summary = {
        "eta_c": search.eta_c,
        "marginal_coupling": search.marginal,
        "localized_modes": [
            {"frequency": m.frequency, "residue": m.residue} for m in search.modes
        ],
        "u_inf_abs": st.u_inf_abs,
        "v_inf": st.v_inf,
        "sigma_inf_abs": st.sigma_inf_abs,
        "en_plus_steady": st.en_inf,
        "en_total_steady": st.en_total,
        "converged": st.converged,
        "t_max_steady_used": st.t_max_used,
        "manifest_hash": manifest["hash"],
    }
    with open(os.path.join(out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    reporting.write_manifest(os.path.join(out, "manifest.json"), manifest)
    if not args.no_plot:
        from .plotting import evolve_figure
        evolve_figure(os.path.join(out, "evolve.png"), times, series)
    print(f"evolve: {len(times)} steps -> {csv_path} "
          f"(en_total_steady = {st.en_total:.4f})")
    return 0


def cmd_modes(args) -> int:
    config, spectral, bath, _ = _resolve(args)
    handle = SpectralDensityHandle(spectral)
    search = find_localized_modes(config, handle)
    print(f"eta     = {spectral.eta:g}")
    print(f"eta_c   = {search.eta_c:.6f}")
    print(f"marginal = {search.marginal}")
    print(f"{'frequency':>14s} {'residue':>12s}")
    for m in search.modes:
        print(f"{m.frequency:14.9f} {m.residue:12.9f}")
    if not search.modes:
        print("(no localized modes)")
    doc = {
        "eta": spectral.eta,
        "eta_c": search.eta_c,
        "marginal": search.marginal,
        "modes": [{"frequency": m.frequency, "residue": m.residue}
                  for m in search.modes],
    }
    print(json.dumps(doc, sort_keys=True))
    if args.out:
        out = _out_dir(args)
        with open(os.path.join(out, "modes.json"), "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def cmd_sweep(args) -> int:
    config, spectral, bath, solver_file = _resolve(args)
    out = _out_dir(args)
    solver = SolverOptions(
        dt=args.dt if args.dt is not None else solver_file.dt,
        t_max=args.t_max if args.t_max is not None else solver_file.t_max,
        t_max_steady=solver_file.t_max_steady,
        tail_fraction=solver_file.tail_fraction,
        v_nodes=solver_file.v_nodes,
        v_tol=solver_file.v_tol,
    )
    grid = SweepGrid(
        eta=AxisSpec(args.eta_min, args.eta_max, args.eta_count),
        s=AxisSpec(args.s_min, args.s_max, args.s_count),
        temperature=AxisSpec(args.temp_min, args.temp_max, args.temp_count),
        solver=solver,
        eps_ent=args.eps_ent,
        omega0=config.omega0,
        kappa=config.kappa,
        r=config.r,
        omega_c=spectral.omega_c,
    )
    points = run_sweep(grid, jobs=args.jobs)
    manifest = reporting.build_manifest(
        "sweep",
        {"omega0": config.omega0, "kappa": config.kappa, "r": config.r,
         "omega_c": spectral.omega_c},
        extra={"grid": reporting.grid_to_dict(grid), "jobs": args.jobs},
        timestamp=_timestamp(),
    )
    rows = list(reporting.sweep_rows(points))
    csv_path = os.path.join(out, "sweep.csv")
    reporting.write_csv(csv_path, reporting.SWEEP_COLUMNS, rows, manifest)
    reporting.write_json_rows(os.path.join(out, "sweep.json"),
                              reporting.SWEEP_COLUMNS, rows, manifest)
    reporting.write_manifest(os.path.join(out, "manifest.json"), manifest)
    reporting.write_gnuplot_matrices(out, grid, points)
    if not args.no_plot:
        from .plotting import sweep_figure
        etas, svals = grid.eta.values(), grid.s.values()
        temps = grid.temperature.values()
        n_s, n_t = len(svals), len(temps)
        for i_t, temp in enumerate(temps):
            matrix = [[points[(i_e * n_s + i_s) * n_t + i_t].en_inf
                       for i_s in range(n_s)] for i_e in range(len(etas))]
            sweep_figure(os.path.join(out, f"phase_T{i_t}.png"), etas, svals,
                         matrix, temp, config.omega_plus, spectral.omega_c,
                         log_floor=1e-6)
    n_fail = sum(not p.converged for p in points)
    print(f"sweep: {len(points)} points -> {csv_path} "
          f"({n_fail} unconverged)")
    return 0


def cmd_validate(args) -> int:
    checks = []
    t_span = args.t_span

    def record(name, value, tol):
        ok = value <= tol
        checks.append((name, value, tol, ok))
        status = "pass" if ok else "FAIL"
        print(f"  [{status}] {name}: {value:.3e} (tol {tol:g})")

    if args.suite in ("all", "oracle"):
        print(f"oracle comparison (K = {args.k}, t <= {t_span:g}):")
        for s, eta, temp in ((1.0, 0.05, 0.0), (1.0, 0.05, 0.1),
                             (0.5, 0.3, 0.0), (0.5, 0.3, 0.1)):
            config, spectral, bath = build_config(s=s, eta=eta, temperature=temp)
            handle = SpectralDensityHandle(spectral)
            db = discretize(handle, args.k)
            dt = default_dt(config, handle) * args.dt_scale
            grid = TimeGrid.for_span(config, handle, t_span, dt=dt)
            step = max(1, grid.n_steps // 100)
            tsel = grid.times[::step]
            u_ref, v_ref = exact_propagator(db, config, bath, tsel)
            u = propagate_u(config, handle, grid)
            v = compute_v(config, handle, bath, grid, u)
            tag = f"s={s},eta={eta},T={temp}"
            record(f"u vs oracle [{tag}]", float(np.max(np.abs(u[::step] - u_ref))), 1e-3)
            record(f"v vs oracle [{tag}]", float(np.max(np.abs(v[::step] - v_ref))), 1e-3)
            evals, vecs = np.linalg.eigh(single_particle_matrix(db, config))
            mid = tsel[len(tsel) // 2]
            row = (np.exp(-1j * evals * mid) * vecs[0, :]) @ vecs.T
            record(f"unitarity [{tag}]", abs(float(np.sum(np.abs(row) ** 2)) - 1.0), 1e-10)

    if args.suite in ("all", "routes"):
        print(f"pole+branch route vs direct propagation (t <= {t_span:g}):")
        for s in (0.5, 1.0, 2.0):
            eta_c = critical_coupling(s, 1.5, 3.0)
            for ratio in (0.5, 2.0):
                config, spectral, bath = build_config(s=s, eta=ratio * eta_c)
                handle = SpectralDensityHandle(spectral)
                dt = default_dt(config, handle) * args.dt_scale
                grid = TimeGrid.for_span(config, handle, t_span, dt=dt)
                u = propagate_u(config, handle, grid)
                dec = PoleBranchDecomposition(config, handle)
                step = max(1, grid.n_steps // 100)
                us = dec.u_at(grid.times[::step])
                tag = f"s={s},eta/eta_c={ratio}"
                record(f"u routes [{tag}]",
                       float(np.max(np.abs(u[::step] - us))), 1e-3)
                record(f"completeness [{tag}]",
                       abs(dec.completeness_sum() - 1.0), 1e-6)

        config, spectral, bath = build_config(s=1.0, eta=0.05, temperature=0.1)
        handle = SpectralDensityHandle(spectral)
        grid = TimeGrid.for_span(config, handle, min(10.0, t_span),
                                 dt=default_dt(config, handle) * args.dt_scale)
        u = propagate_u(config, handle, grid)
        v = compute_v(config, handle, bath, grid, u)
        idx = [grid.n_steps // 4, grid.n_steps // 2, grid.n_steps]
        v_ref = compute_v_double_time(config, handle, bath, grid, u, idx)
        record("v routes [s=1,eta=0.05,T=0.1]",
               float(np.max(np.abs(v[idx] - v_ref))), 1e-3)

    n_fail = sum(not ok for *_, ok in checks)
    print(f"validate: {len(checks) - n_fail}/{len(checks)} checks passed")
    if args.out:
        out = _out_dir(args)
        doc = [{"check": n, "value": val, "tolerance": tol, "passed": ok}
               for n, val, tol, ok in checks]
        with open(os.path.join(out, "validate.json"), "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    if n_fail:
        _error_json("tolerance", f"{n_fail} validation check(s) failed")
        return 1
    return 0


def cmd_fock(args) -> int:
    if args.nbar < 0:
        raise ConfigError("nbar", f"nbar must be >= 0, got {args.nbar}")
    if args.n_max < 0:
        raise ConfigError("n_max", f"n-max must be >= 0, got {args.n_max}")
    probs = thermal_fock_distribution(args.nbar, args.n_max)
    out = _out_dir(args)
    manifest = reporting.build_manifest(
        "fock", {"nbar": args.nbar, "n_max": args.n_max}, timestamp=_timestamp()
    )
    rows = [[int(n), p] for n, p in enumerate(probs)]
    csv_path = os.path.join(out, "fock.csv")
    reporting.write_csv(csv_path, reporting.FOCK_COLUMNS, rows, manifest)
    reporting.write_manifest(os.path.join(out, "manifest.json"), manifest)
    if not args.no_plot:
        from .plotting import fock_figure
        fock_figure(os.path.join(out, "fock.png"), probs)
    print(f"fock: nbar={args.nbar:g} -> {csv_path} "
          f"(tail mass {1.0 - float(np.sum(probs)):.3e})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
