"""Command-line front end: batch simulation runs and verification suites.

    gaudin-lab simulate <config.json>
    gaudin-lab verify <suite> [--seed N] [--out DIR]

Exit codes: 0 success, 1 verification check failed, 2 configuration error,
3 numerical abort (a flow ran into a pole; the reason and last good time
are recorded in the diagnostics JSON).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .errors import ConfigError, GaudinLabError, NumericalAbort
from .flows import FlowCurve, diagnostics, evolve, write_trajectory_csv
from .models import (
    model_from_dict,
    orbit_elements,
    random_phase_state,
    state_from_dict,
)
from .verify import SUITES, run_suite

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc


def _build_run(cfg):
    for key in ("model", "initial_state", "curve", "step", "outputs"):
        if key not in cfg:
            raise ConfigError(f"config is missing required key {key!r}")
    model = model_from_dict(cfg["model"])
    st_cfg = cfg["initial_state"]
    seed = None
    if isinstance(st_cfg, dict) and st_cfg.get("random"):
        seed = int(st_cfg.get("seed", 0))
        rng = np.random.default_rng(seed)
        state = random_phase_state(model, rng, spread=float(st_cfg.get("spread", 0.4)))
    else:
        state = state_from_dict(st_cfg, model)
        seed = cfg.get("seed")
    curve = FlowCurve(cfg["curve"])
    h = float(cfg["step"])
    if h <= 0:
        raise ConfigError("step must be positive")
    z_samples = [complex(z[0], z[1]) for z in cfg.get("z_samples", [])]
    projection = cfg.get("projection", "monitor")
    if projection not in ("monitor", "project"):
        raise ConfigError("projection must be 'monitor' or 'project'")
    if projection == "monitor" and model.genus == 0:
        # the residue-sum constraint is monitored, not projected, so a
        # grossly violating initial state is a configuration error
        Ls = orbit_elements(model, state)
        total = np.linalg.norm(sum(Ls))
        scale = max(np.linalg.norm(L) for L in Ls) or 1.0
        if total > 1e-6 * scale:
            raise ConfigError(
                f"initial state violates sum L_a = 0 (|sum| = {total:.2e}); "
                "fix the state or set projection = 'project'")
    method = cfg.get("method", "rk4")
    margin = float(cfg.get("resonance_margin", 1e-3))
    checks = cfg.get("checks", [])
    unknown = [c for c in checks if c != "all" and c not in SUITES]
    if unknown:
        raise ConfigError(f"unknown verification suites in 'checks': {unknown}")
    return model, state, curve, h, z_samples, projection, method, margin, \
        checks, seed


def cmd_simulate(args):
    cfg = _load_config(args.config)
    model, state, curve, h, z_samples, projection, method, margin, checks, \
        seed = _build_run(cfg)
    outputs = cfg["outputs"]
    csv_path = outputs.get("trajectory_csv", "trajectory.csv")
    json_path = outputs.get("diagnostics_json", "diagnostics.json")
    try:
        traj = evolve(model, state, curve, h, method=method,
                      project_residue_sum=(projection == "project"),
                      resonance_margin_min=margin)
    except NumericalAbort as exc:
        payload = {"abort_reason": exc.reason,
                   "last_good_time": float(exc.last_good_time),
                   "seed": seed}
        with open(json_path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
        print(f"numerical abort: {exc.reason} (t = {exc.last_good_time:g})",
              file=sys.stderr)
        return EXIT_NUMERICAL
    write_trajectory_csv(csv_path, model, traj, z_samples, seed=seed)
    report = diagnostics(model, traj, z_samples)
    payload = report.to_dict()
    payload["seed"] = seed
    checks_failed = 0
    if checks:
        payload["checks"] = {}
        for name in checks:
            rows = run_suite(name, seed=seed or 0)
            checks_failed += sum(not r.passed for r in rows)
            payload["checks"][name] = [r.to_dict() for r in rows]
    with open(json_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    print(f"wrote {csv_path} and {json_path}")
    return EXIT_OK if checks_failed == 0 else EXIT_CHECK_FAILED


def cmd_verify(args):
    try:
        rows = run_suite(args.suite, seed=args.seed)
    except GaudinLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    payload = {
        "suite": args.suite,
        "seed": args.seed,
        "checks": [r.to_dict() for r in rows],
        "n_checks": len(rows),
        "n_failed": sum(not r.passed for r in rows),
        "all_passed": all(r.passed for r in rows),
    }
    os.makedirs(args.out, exist_ok=True)
    out = os.path.join(args.out, f"{args.suite}_report.json")
    with open(out, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for r in rows:
        flag = "PASS" if r.passed else "FAIL"
        print(f"{flag} {r.name}: measured {r.measured:.3e} "
              f"(tolerance {r.tolerance:g}) [{r.law}]")
    print(f"{payload['n_checks'] - payload['n_failed']}/{payload['n_checks']} "
          f"checks passed; report: {out}")
    return EXIT_OK if payload["all_passed"] else EXIT_CHECK_FAILED


def main(argv=None):
    parser = argparse.ArgumentParser(prog="gaudin-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a configured trajectory")
    sim.add_argument("config", help="path to a JSON run configuration")
    sim.set_defaults(func=cmd_simulate)

    ver = sub.add_parser("verify", help="run a named verification suite")
    ver.add_argument("suite", help="weierstrass | rational | elliptic | "
                                   "univar | multiform | all")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--out", default=".", help="directory for the JSON report")
    ver.set_defaults(func=cmd_verify)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GaudinLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
