"""Command-line front end: frequency sweeps, plot scripts, packet runs.

Exit codes: 0 success, 1 failed --check assertions, 2 configuration or
domain errors, 3 I/O errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from datetime import datetime, timezone

from . import __version__
from .medium import MediumParams, from_config, width_mismatch
from .models import (STATUS_OK, ModelKind, SweepRow, pt_defect, sweep)
from .quantities import (E_CHARGE, Config, ConfigError, angular_to_ev,
                         config_as_dict, ev_to_angular, load_config,
                         with_overrides)
from .timeprop import (BoundaryContaminationError, IncompleteScatterError,
                       PlacementError, plan_packet_run, scatter_packet)

CSV_HEADER = ("omega_over_omegac,model,t_left_re,t_left_im,r_left_re,r_left_im,"
              "t_right_re,t_right_im,r_right_re,r_right_im,sum_left,sum_right,"
              "log10_sum_left,log10_sum_right,status")

_MODEL_CHOICES = {
    "exact": (ModelKind.EXACT,),
    "approx": (ModelKind.APPROXIMATE,),
    "both": (ModelKind.EXACT, ModelKind.APPROXIMATE),
}


def _fmt(x: float) -> str:
    return f"{x:.15g}"


def rows_to_csv(rows: list[SweepRow], models: tuple[ModelKind, ...]) -> str:
    """Render sweep rows in the fixed schema; singular rows keep empty
    numeric fields with status=singular."""
    lines = [CSV_HEADER]
    for row in rows:
        for model in models:
            res = row.results[model]
            if res.status == STATUS_OK:
                amp = res.amplitudes
                fields = [
                    _fmt(row.omega_over_omegac), model.value,
                    _fmt(amp.t_left.real), _fmt(amp.t_left.imag),
                    _fmt(amp.r_left.real), _fmt(amp.r_left.imag),
                    _fmt(amp.t_right.real), _fmt(amp.t_right.imag),
                    _fmt(amp.r_right.real), _fmt(amp.r_right.imag),
                    _fmt(res.s_left), _fmt(res.s_right),
                    _fmt(res.log10_s_left), _fmt(res.log10_s_right),
                    res.status,
                ]
            else:
                fields = [_fmt(row.omega_over_omegac), model.value] + [""] * 12 \
                    + [res.status]
            lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def render_plot_script(csv_path: str) -> str:
    """Gnuplot script: exact model as solid/dashed lines for left/right
    incidence, reduced model as symbols, versus omega/omega_c."""
    q = csv_path
    return (
        "# Flux sums |t|^2 + |r|^2 for left/right incidence.\n"
        "# Usage: gnuplot -p <this file>\n"
        'set datafile separator ","\n'
        'set xlabel "omega / omega_c"\n'
        'set ylabel "log10(|t|^2 + |r|^2)"\n'
        "set key top right\n"
        "plot \\\n"
        f'  "{q}" using (strcol(2) eq "exact" ? $1 : 1/0):13 '
        'with lines lc rgb "#1f77b4" lw 2 title "exact, left incidence", \\\n'
        f'  "{q}" using (strcol(2) eq "exact" ? $1 : 1/0):14 '
        'with lines lc rgb "#d62728" lw 2 dt 2 title "exact, right incidence", \\\n'
        f'  "{q}" using (strcol(2) eq "approx" ? $1 : 1/0):13 '
        'with points lc rgb "#1f77b4" pt 7 ps 0.4 title "reduced model, left", \\\n'
        f'  "{q}" using (strcol(2) eq "approx" ? $1 : 1/0):14 '
        'with points lc rgb "#d62728" pt 6 ps 0.4 title "reduced model, right"\n'
    )


def write_manifest(path: str, config: Config, params: MediumParams,
                   models: tuple[ModelKind, ...], rows: list[SweepRow]) -> None:
    singular = sum(1 for row in rows for m in models
                   if row.results[m].status != STATUS_OK)
    manifest = {
        "tool": "ptwaveguide",
        "version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "config": config_as_dict(config),
        "derived": {
            "omega_c_rad_s": params.omega_c,
            "hbar_omega_c_ev": angular_to_ev(params.omega_c),
            "slab_width_m": params.slab_width,
            "width_mismatch_rel": width_mismatch(params, config),
            "regime_ratio_damping": params.regime_ratio_damping,
            "regime_ratio_cutoff": params.regime_ratio_cutoff,
        },
        "models": [m.value for m in models],
        "rows": len(rows),
        "singular_rows": singular,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_checks(rows: list[SweepRow], models: tuple[ModelKind, ...],
               params: MediumParams, config: Config) -> list[str]:
    """Property assertions on the swept rows; returns failure messages."""
    failures: list[str] = []
    for row in rows:
        for model in models:
            res = row.results[model]
            if res.status != STATUS_OK:
                continue
            amp = res.amplitudes
            if abs(amp.t_left - amp.t_right) > 1e-10 * max(abs(amp.t_left), 1e-300):
                failures.append(
                    f"reciprocity violated at x={row.omega_over_omegac} ({model.value})")
            if model is ModelKind.APPROXIMATE:
                resid = abs(abs(amp.t_left) ** 2
                            + amp.r_left.conjugate() * amp.r_right - 1.0)
                if resid > 1e-8:
                    failures.append(
                        f"generalized unitarity residual {resid:.2e} at "
                        f"x={row.omega_over_omegac}")
            if row.omega_over_omegac <= 1.019:
                if not (res.s_left > 1.0 and res.s_right < 1.0):
                    failures.append(
                        f"low-energy asymmetry violated at x={row.omega_over_omegac} "
                        f"({model.value}): s_left={res.s_left}, s_right={res.s_right}")
    # Hermitian control: switching the resonant term off must give unit sums.
    control = MediumParams.tuned(
        omega0=params.omega0, omega_p=0.0, delta=params.delta,
        region_length=params.region_length)
    n_control = min(41, config.sweep_points)
    for row in sweep(control, config.sweep_start, config.sweep_stop, n_control):
        for model, res in row.results.items():
            if abs(res.s_left - 1.0) > 1e-10 or abs(res.s_right - 1.0) > 1e-10:
                failures.append(
                    f"unit flux sums violated with the medium off at "
                    f"x={row.omega_over_omegac} ({model.value})")
    return failures


def _load(args) -> Config:
    config = load_config(args.config) if args.config else Config()
    overrides = {}
    if getattr(args, "sweep", None):
        parts = args.sweep.split(":")
        if len(parts) != 3:
            raise ConfigError(f"--sweep expects START:STOP:N, got {args.sweep!r}")
        overrides = dict(sweep_start=float(parts[0]), sweep_stop=float(parts[1]),
                         sweep_points=int(parts[2]))
    if getattr(args, "output", None):
        overrides["output_path"] = args.output
    return with_overrides(config, **overrides)


def cmd_sweep(args) -> int:
    config = _load(args)
    params = from_config(config)
    models = _MODEL_CHOICES[args.models]
    rows = sweep(params, config.sweep_start, config.sweep_stop,
                 config.sweep_points, models=models, max_workers=args.jobs)
    csv_text = rows_to_csv(rows, models)
    with open(config.output_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(csv_text)
    write_manifest(config.output_path + ".manifest.json", config, params, models, rows)
    singular = sum(1 for row in rows for m in models
                   if row.results[m].status != STATUS_OK)
    max_defect = max(pt_defect(ModelKind.EXACT, params,
                               row.omega_over_omegac * params.omega_c)
                     for row in rows)
    print(f"wrote {config.output_path}: {len(rows)} frequencies x "
          f"{len(models)} model(s), {singular} singular row(s)")
    print(f"max mirror-conjugation defect of the exact profile: {max_defect:.6g}")
    if args.plot:
        plot_path = config.output_path + ".gp"
        with open(plot_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render_plot_script(config.output_path))
        print(f"wrote {plot_path}")
    if args.check:
        failures = run_checks(rows, models, params, config)
        if failures:
            for message in failures:
                print(f"CHECK FAILED: {message}", file=sys.stderr)
            return 1
        print("all sweep checks passed")
    return 0


def cmd_plot(args) -> int:
    with open(args.csv_path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        print(f"error: {args.csv_path} does not carry the expected header",
              file=sys.stderr)
        return 2
    if len(lines) < 2:
        print(f"error: {args.csv_path} has no data rows", file=sys.stderr)
        return 2
    script = render_plot_script(args.csv_path)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(script)
    else:
        sys.stdout.write(script)
    return 0


def cmd_packet(args) -> int:
    config = _load(args)
    params = from_config(config)
    plan = plan_packet_run(params, sigma=args.sigma_um * 1e-6,
                           energy=args.energy_ev * E_CHARGE,
                           from_left=(args.incidence == "left"))
    if args.t_final_ps is not None:
        plan = replace(plan, t_final=args.t_final_ps * 1e-12)
    record = tuple(float(t) * 1e-12 for t in args.snapshot_times_ps.split(",")) \
        if args.snapshot_times_ps else ()
    guards = {}
    if args.interior_tol is not None:
        guards["interior_tol"] = args.interior_tol
    result = scatter_packet(params, plan.spec, plan.grid, plan.t_final,
                            record_times=record, **guards)
    x_carrier = 1.0 + ev_to_angular(args.energy_ev) / params.omega_c
    print(f"carrier: {args.energy_ev:g} eV (omega/omega_c = {x_carrier:.4f}), "
          f"sigma = {args.sigma_um:g} um, incidence {args.incidence}")
    print(f"bandwidth ratio Omega/delta = {result.bandwidth_ratio:.4f}")
    dev_t = abs(result.transmitted - result.predicted_transmitted) \
        / result.predicted_transmitted
    dev_r = abs(result.reflected - result.predicted_reflected) \
        / max(result.predicted_reflected, 1e-300)
    print(f"transmitted fraction: {result.transmitted:.6f} "
          f"(stationary prediction {result.predicted_transmitted:.6f}, "
          f"deviation {100 * dev_t:.3f}%)")
    print(f"reflected fraction:   {result.reflected:.6f} "
          f"(stationary prediction {result.predicted_reflected:.6f}, "
          f"deviation {100 * dev_r:.3f}%)")
    print(f"interior residual:    {result.interior_norm:.6f}")
    print(f"total norm:           {result.total:.6f} "
          f"(norm gain {result.norm_gain:+.6f})")
    if args.snapshots:
        with open(args.snapshots, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("t,z,re_psi,im_psi,abs2_psi\n")
            for state in result.states:
                z = state.grid.z
                for i in range(state.psi.size):
                    p = state.psi[i]
                    fh.write(f"{_fmt(state.t)},{_fmt(z[i])},{_fmt(p.real)},"
                             f"{_fmt(p.imag)},{_fmt(abs(p) ** 2)}\n")
        print(f"wrote {args.snapshots}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ptwaveguide",
        description="Scattering off a gain/loss bilayer in a planar slab "
                    "waveguide: dispersive model, near-cutoff reduction, "
                    "and wavepacket propagation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run a frequency sweep and write CSV")
    p_sweep.add_argument("--config", help="config file (key = value lines)")
    p_sweep.add_argument("--models", choices=sorted(_MODEL_CHOICES), default="both")
    p_sweep.add_argument("--sweep", metavar="START:STOP:N",
                         help="override the omega/omega_c grid")
    p_sweep.add_argument("--output", help="override the CSV path")
    p_sweep.add_argument("--plot", action="store_true",
                         help="also write a gnuplot script next to the CSV")
    p_sweep.add_argument("--check", action="store_true",
                         help="run property assertions on the sweep")
    p_sweep.add_argument("--jobs", type=int, default=1,
                         help="parallel row evaluation (result is identical)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_plot = sub.add_parser("plot", help="emit a gnuplot script for a sweep CSV")
    p_plot.add_argument("csv_path")
    p_plot.add_argument("--output", help="write the script here instead of stdout")
    p_plot.set_defaults(func=cmd_plot)

    p_packet = sub.add_parser("packet", help="scatter a wavepacket off the bilayer")
    p_packet.add_argument("--config", help="config file (key = value lines)")
    p_packet.add_argument("--sigma-um", type=float, default=3.0,
                          help="packet width sigma in micrometers")
    p_packet.add_argument("--energy-ev", type=float, default=0.2,
                          help="carrier kinetic energy in eV")
    p_packet.add_argument("--from", dest="incidence", choices=("left", "right"),
                          default="left")
    p_packet.add_argument("--t-final-ps", type=float, default=None,
                          help="override the planned run duration")
    p_packet.add_argument("--interior-tol", type=float, default=None,
                          help="override the interior-clearance guard "
                               "(useful for mid-flight snapshots)")
    p_packet.add_argument("--snapshots", help="write field snapshots to this CSV")
    p_packet.add_argument("--snapshot-times-ps",
                          help="comma separated times (ps) to snapshot")
    p_packet.set_defaults(func=cmd_packet)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (PlacementError, BoundaryContaminationError, IncompleteScatterError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
