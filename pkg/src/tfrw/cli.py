"""Command-line front end: ``tfrw <subcommand> --scenario FILE --out DIR``.

Exit codes: 0 success, 2 unreadable or invalid scenario, 3 numerical failure.
Set ``TFRW_LOG_LEVEL`` (e.g. ``INFO``) for progress messages on stderr.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import MultimodalError, NumericalError, TfrwError
from .grid import moments
from .io import write_csv, write_json
from .kernel import kernel_table, peak_ratio
from .optomech import (conformal_trajectory, displacement_packet, hubble_mirror_velocity,
                       integrate_trajectory, mirror_posterior_update,
                       rotating_frame_frequencies)
from .pipeline import measure_k
from .scenario import REQUIRED, ScenarioError, load

log = logging.getLogger("tfrw")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


def _summary(scn, subcommand, results):
    return {"tool": "tfrw", "version": __version__, "subcommand": subcommand,
            "config": scn.config, "results": results}


def run_kernel(scn, out):
    kc = scn.config["kernel"]
    q = scn.measurement_kernel()
    r, re, im, mag = kernel_table(q, kc["r_min"], kc["r_max"], kc["n"])
    write_csv(out / "kernel.csv", ("r [1]", "Re q [1]", "Im q [1]", "|q| [1]"), [r, re, im, mag])
    i = int(np.argmax(mag))
    results = {"backend": type(q).__name__, "table_argmax_r": r[i], "table_max_abs_q": mag[i]}
    try:
        peak = peak_ratio(q, (kc["r_min"], kc["r_max"]))
        results["peak"] = {"r_star": peak.r_star, "q_abs_max": peak.q_abs_max}
    except MultimodalError as exc:
        results["peak"] = None
        results["multimodal_brackets"] = exc.brackets
    except TfrwError as exc:
        results["peak"] = None
        results["peak_note"] = str(exc)
    write_json(out / "summary.json", _summary(scn, "kernel", results))


def run_measure(scn, out):
    grid = scn.grid()
    psi0 = scn.prior(grid)
    res = measure_k(psi0, scn.evolution(grid), scn.event(), scn.config["k"],
                    kernel=scn.measurement_kernel())
    psi0.to_csv(out / "prior.csv")
    res.posterior.to_csv(out / "posterior.csv")
    post = moments(res.posterior)
    results = {**post.to_dict(), "detect_weight": res.detect_weight, "history": res.history,
               "prior": moments(psi0).to_dict(),
               "grid_step_at_mean": grid.step_at(post.mean_a)}
    write_json(out / "summary.json", _summary(scn, "measure", results))


def run_optomech(scn, out):
    oc = scn.config["optomech"]
    p = scn.optomech_params()
    s0 = scn.optomech_initial()
    log.info("integrating %d steps with %s", oc["steps"], oc["method"])
    tr = integrate_trajectory(s0, p, oc["dt"], oc["steps"], oc["method"])
    energy = tr.energy(p)
    drift = np.abs(energy - energy[0]) / abs(energy[0]) if energy[0] != 0 else np.abs(energy)
    stride = oc["output_stride"]
    keep = np.arange(0, len(tr), stride)
    if keep[-1] != len(tr) - 1:
        keep = np.append(keep, len(tr) - 1)
    write_csv(out / "trajectory.csv",
              ("t [time]", "a_om [1]", "a_dot [1/time]", "energy [energy]"),
              [tr.t[keep], tr.a_om[keep], tr.a_dot[keep], energy[keep]])
    results = {"final": {"t": tr.t[-1], "a_om": tr.a_om[-1], "a_dot": tr.a_dot[-1]},
               "energy_initial": energy[0], "energy_drift_max": drift.max(),
               "energy_drift_final": drift[-1]}
    if oc["params"]["potential"]["kind"] == "free":
        results["asymptotic_a_dot"] = float(np.sqrt(2 * energy[0] / p.mass) / p.x0)
        if p.radiation_constant > 0:
            law = tr.accel(p) * tr.a_om ** 2
            results["force_law_deviation_max"] = float(
                np.max(np.abs(law - p.radiation_constant)) / p.radiation_constant)
    write_json(out / "summary.json", _summary(scn, "optomech", results))


def run_hubble(scn, out):
    hc = scn.config["hubble"]
    cfg = scn.rotating_frame()
    frame = rotating_frame_frequencies(cfg)
    eta = np.linspace(0.0, hc["eta_max"], hc["n"])
    traj = conformal_trajectory(hc["H"], cfg, eta, hc["a0"])
    traj.to_csv(out / "hubble.csv")
    velocity = hubble_mirror_velocity(hc["H"], cfg)
    slope = np.diff(traj.x) / np.diff(traj.eta)
    results = {"mirror_velocity": velocity,
               "finite_difference_slope_max_deviation": float(np.max(np.abs(slope - velocity))),
               "rotating_frame_nu": frame.nu, "effective_frequency": frame.omega_tilde}
    write_json(out / "summary.json", _summary(scn, "hubble", results))


def run_mirror(scn, out):
    mc = scn.config["mirror"]
    cfg = scn.rotating_frame()
    x = np.linspace(mc["x_min"], mc["x_max"], mc["n"])
    psi = displacement_packet(x, mc["center"], mc["sigma"])
    evolution = scn.evolution() if mc["use_evolution"] else None
    upd = mirror_posterior_update(psi, cfg, scn.event(), evolution)
    psi.to_csv(out / "mirror_prior.csv")
    upd.posterior.to_csv(out / "mirror_posterior.csv")
    results = {"detect_weight": upd.detect_weight, "prior": _x_moments(psi),
               "posterior": _x_moments(upd.posterior)}
    write_json(out / "summary.json", _summary(scn, "mirror-measure", results))


def _x_moments(psi):
    return {k.replace("_a", "_x"): v for k, v in psi.moments().to_dict().items()}


RUNNERS = {"kernel": run_kernel, "measure": run_measure, "optomech": run_optomech,
           "hubble": run_hubble, "mirror-measure": run_mirror}


def run(scenario_file, subcommand, out_dir) -> int:
    """Validate then execute one scenario; returns the process exit status."""
    try:
        scn = load(scenario_file)
    except ScenarioError as exc:
        print(f"error: invalid scenario {scenario_file}\n{exc}", file=sys.stderr)
        return EXIT_INVALID
    problems = scn.problems(None if subcommand == "validate" else subcommand)
    if subcommand == "validate":
        for d in problems:
            print(d)
        return EXIT_INVALID if problems else EXIT_OK
    if problems:
        print(f"error: invalid scenario {scenario_file}", file=sys.stderr)
        for d in problems:
            print(d, file=sys.stderr)
        return EXIT_INVALID
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    log.info("running %s on %s", subcommand, scenario_file)
    try:
        RUNNERS[subcommand](scn, out)
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except TfrwError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tfrw", description="Quantized scale-factor toy cosmology and its optomechanical analogue.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in (*REQUIRED, "validate"):
        sp = sub.add_parser(name, help=f"run the '{name}' scenario step" if name != "validate"
                            else "check a scenario without running it")
        sp.add_argument("--scenario", required=True, help="scenario JSON file")
        if name != "validate":
            sp.add_argument("--out", required=True, help="output directory")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("TFRW_LOG_LEVEL", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    return run(args.scenario, args.subcommand, getattr(args, "out", None))


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
