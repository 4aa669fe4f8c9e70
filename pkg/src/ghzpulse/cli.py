"""Command-line front end: ``ghzpulse {design,simulate,scan,chain}``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 convergence failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import platform
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .chain import CA40_RECOIL, chain_table
from .config import ConfigError, ExperimentConfig, load_config
from .design import (
    WORKERS_ENV,
    amplitude_scan,
    eta_sweep,
    lemniscate_scan_2d,
    n_sweep,
)
from .perturbative import contribution_table
from .pulses import make_lemniscate
from .tdse import ConvergenceError, SimulationConfig, simulate
from .trajectory import (
    integrate_trajectory,
    lemniscate_design_point,
    lemniscate_shape_polynomial,
    magnus_coefficients,
)

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 1, 2, 3

REFERENCE_A0 = 0.7274789
REFERENCE_BIG_A0 = 0.95778915


def _num(x) -> str:
    return repr(float(x))


def _write_csv(path: Path, header, rows) -> Path:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def _emit(rows: list[dict], fmt: str, stream=None) -> None:
    stream = stream or sys.stdout
    if fmt == "json":
        json.dump(rows, stream, indent=2)
        stream.write("\n")
        return
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(list(rows[0]))
    for row in rows:
        w.writerow([_num(v) if isinstance(v, float) else v for v in row.values()])


def _write_sidecar(out: Path, command: str, extra: dict) -> None:
    meta = {
        "command": command,
        "version": __version__,
        "finished_utc": datetime.now(timezone.utc).isoformat(),
        "python": platform.python_version(),
        **extra,
    }
    (out / f"{command}_run_metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True))


def design_report(eta: float = 0.03) -> dict:
    t0 = time.perf_counter()
    a0, A0 = lemniscate_design_point()
    coeffs = magnus_coefficients(integrate_trajectory(make_lemniscate(a0, A0, 1.0, eta), eta))
    checks = {
        "a0": abs(a0 - REFERENCE_A0) <= 1e-6,
        "A0": abs(A0 - REFERENCE_BIG_A0) <= 1e-6,
        "cubic_root": abs(lemniscate_shape_polynomial(a0)) <= 1e-5,
        "chi": abs(coeffs.chi - math.pi / 4) <= 1e-8,
        "theta4": abs(coeffs.theta4) <= 1e-8 * eta ** 2,
    }
    return {
        "a0": a0,
        "A0": A0,
        "eta": eta,
        "chi": coeffs.chi,
        "chi_target": math.pi / 4,
        "theta4": coeffs.theta4,
        "cubic_at_a0": lemniscate_shape_polynomial(a0),
        "checks": checks,
        "ok": all(checks.values()),
        "seconds": time.perf_counter() - t0,
    }


def cmd_design(args) -> int:
    rep = design_report(args.eta)
    if args.format == "json":
        print(json.dumps(rep, indent=2))
    else:
        print(f"a0     = {rep['a0']:.10f}")
        print(f"A0     = {rep['A0']:.10f}")
        print(f"chi    = {rep['chi']:.12f}  (pi/4 = {math.pi / 4:.12f})")
        print(f"theta4 = {rep['theta4']:.3e}  at eta = {rep['eta']}")
        for name, ok in rep["checks"].items():
            print(f"  {'PASS' if ok else 'FAIL'}  {name}")
    return EXIT_OK if rep["ok"] else EXIT_VERIFY


def _out_dir(args, cfg: ExperimentConfig) -> Path:
    out = Path(args.out or cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    eta = cfg.physics.eta
    pulse = cfg.pulse.build(eta)
    sim_cfg = SimulationConfig(
        n=cfg.physics.n,
        eta=eta,
        pulse=pulse,
        cutoff=None if cfg.solver.cutoff == "auto" else cfg.solver.cutoff,
        time_steps=cfg.solver.time_steps,
        rtol=cfg.solver.rtol,
        atol=cfg.solver.atol,
        check_convergence=cfg.solver.check_convergence,
        max_refinements=cfg.solver.max_refinements,
    )
    code = EXIT_OK
    try:
        result = simulate(sim_cfg)
    except ConvergenceError as err:
        print(f"convergence failure: {err}", file=sys.stderr)
        result, code = err.result, EXIT_CONVERGENCE
    record = result.to_record(sim_cfg)
    record["config"]["pulse"]["family"] = cfg.pulse.family
    if "json" in cfg.output.formats:
        (out / "result.json").write_text(json.dumps(record, indent=2, sort_keys=True))
    if "csv" in cfg.output.formats:
        pulse.to_csv(out / "pulse.csv")
        integrate_trajectory(pulse, eta).to_csv(out / "trajectory.csv")
    _write_sidecar(out, "simulate", {"config": str(args.config)})
    print(f"infidelity = {result.infidelity:.6e}  phonon = {result.phonon_prob:.6e}")
    return code


def _fig2(spec, workers, out: Path) -> None:
    rows = []
    for n in spec.n_values:
        res = amplitude_scan(n, spec.eta, spec.k, spec.family, spec.grid.values(),
                             workers=workers, refine=spec.refine)
        errs = dict(res.errors)
        for x, y in zip(res.axes["delta_omega_rel"], res.infidelity):
            rows.append([n, _num(x), _num(y), 0, errs.get(float(x), "")])
        rows.append([n, _num(res.optimum["delta_omega_rel"]), _num(res.optimum["infidelity"]), 2, ""])
        rows.append([n, _num(res.analytic["delta_omega_rel"]), _num(res.analytic["infidelity"]), 1, ""])
        theta4, abs_g = res.analytic["theta4"], res.analytic["abs_g"]
    _write_csv(out / "fig2.csv", ["n", "delta_omega_rel", "infidelity", "analytic_cross_flag", "error"], rows)
    inset = contribution_table(spec.n_values, theta4, abs_g)
    _write_csv(out / "fig2_inset.csv", ["n", "sx4_contribution", "phonon_contribution"],
               [[n, _num(a), _num(b)] for n, a, b in inset])


def _fig3(spec, workers, out: Path) -> dict:
    res = lemniscate_scan_2d(spec.n, spec.eta, spec.da.values(), spec.dA_rel.values(),
                             family=spec.family, workers=workers, refine=spec.refine)
    errs = {(d, s): e for d, s, e in res.errors}
    rows = []
    for i, d in enumerate(res.axes["da"]):
        for j, s in enumerate(res.axes["dA_rel"]):
            rows.append([_num(d), _num(s), _num(res.infidelity[i, j]), errs.get((float(d), float(s)), "")])
    _write_csv(out / "fig3.csv", ["da", "dA_rel", "infidelity", "error"], rows)
    _write_csv(out / "fig3_valley.csv", ["da", "dA_rel", "infidelity"],
               [[_num(d), _num(s), _num(v)] for d, s, v in res.valley])
    return res.optimum


def _fig4(spec, workers, out: Path) -> dict:
    res = eta_sweep(spec.n, spec.etas, [f.as_tuple() for f in spec.families], workers=workers)
    _write_csv(out / "fig4.csv", ["family", "eta", "infidelity", "phonon_prob", "error"],
               [[r["family"], _num(r["eta"]), _num(r["infidelity"]), _num(r["phonon_prob"]), r["error"]]
                for r in res["rows"]])
    return res["slopes"]


def _fig5(spec, workers, out: Path) -> None:
    res = n_sweep(spec.eta, spec.n_values, [f.as_tuple() for f in spec.families], workers=workers)
    _write_csv(out / "fig5.csv", ["family", "n", "infidelity", "error"],
               [[r["family"], r["n"], _num(r["infidelity"]), r["error"]] for r in res["rows"]])


def cmd_scan(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    scans = cfg.scan
    if not any((scans.fig2, scans.fig3, scans.fig4, scans.fig5)):
        raise ConfigError("scan: no scan section (fig2, fig3, fig4, fig5) given")
    summary = {}
    if scans.fig2:
        _fig2(scans.fig2, args.workers, out)
    if scans.fig3:
        summary["fig3_optimum"] = _fig3(scans.fig3, args.workers, out)
    if scans.fig4:
        summary["fig4_slopes"] = _fig4(scans.fig4, args.workers, out)
    if scans.fig5:
        _fig5(scans.fig5, args.workers, out)
    _write_sidecar(out, "scan", {"config": str(args.config), "summary": summary})
    for key, val in summary.items():
        print(f"{key}: {json.dumps(val)}")
    return EXIT_OK


def cmd_chain(args) -> int:
    rows = chain_table(args.n, args.radial_freq, args.recoil_freq)
    _emit(rows, args.format)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ghzpulse", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (overrides output.directory)")
    common.add_argument("--workers", type=int, default=None,
                        help=f"worker processes (default: ${WORKERS_ENV} or 1)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", parents=[common], help="lemniscate design point and its checks")
    p.add_argument("--eta", type=float, default=0.03)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("simulate", parents=[common], help="single TDSE run from a config file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scan", parents=[common], help="figure scans from a config file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("chain", parents=[common], help="stability and Lamb-Dicke table")
    p.add_argument("--n", type=int, nargs="+", default=[2, 5, 10, 15, 20])
    p.add_argument("--radial-freq", type=float, default=2 * math.pi * 3e6, help="rad/s")
    p.add_argument("--recoil-freq", type=float, default=CA40_RECOIL, help="rad/s")
    p.set_defaults(func=cmd_chain)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.workers is not None:
        if args.workers < 1:
            parser.error("--workers must be positive")
        os.environ[WORKERS_ENV] = str(args.workers)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
