"""Batch front end.

    magtunnel <stage> --config run.toml [--out DIR] [--stages LIST]
                      [--threads N] [--hbar LIST]

Stages: band, geometry, eikonal, wkb, predict, validate, all.  Exit codes:
0 ok, 2 config error, 3 assumption violation, 4 solver failure.  Failures
also emit machine-readable JSON on stderr and into <out>/error.json.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .config import load_config
from .errors import AssumptionError, ConfigError, SolverError
from .pipeline import Pipeline


def build_parser():
    p = argparse.ArgumentParser(prog="magtunnel", description=__doc__)
    p.add_argument("stage", choices=["band", "geometry", "eikonal", "wkb",
                                     "predict", "validate", "all"])
    p.add_argument("--config", required=True, help="TOML run configuration")
    p.add_argument("--out", default=None, help="override run.out_dir")
    p.add_argument("--stages", default=None,
                   help="comma-separated stage list (with stage=all)")
    p.add_argument("--threads", type=int, default=None,
                   help="thread budget hint for BLAS backends")
    p.add_argument("--hbar", default=None,
                   help="comma-separated hbar override for predict")
    return p


def _emit_error(exc, out_dir):
    code = getattr(exc, "exit_code", 1)
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    sys.stderr.write(json.dumps(payload) + "\n")
    if out_dir:
        try:
            os.makedirs(out_dir, exist_ok=True)
            with open(os.path.join(out_dir, "error.json"), "w") as fh:
                json.dump(payload, fh, indent=1, sort_keys=True)
        except OSError:
            pass
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, str(args.threads))
    out_dir = args.out
    try:
        cfg = load_config(args.config)
        if args.out:
            cfg.out_dir = args.out
        out_dir = cfg.out_dir
        if args.hbar:
            cfg.predict["hbar_values"] = [float(x) for x in args.hbar.split(",")]
        if args.stage == "all":
            stages = cfg.stages
            if args.stages:
                stages = [s.strip() for s in args.stages.split(",")]
        else:
            stages = [args.stage]
        # every stage needs its upstream artifacts; the pipeline computes
        # (or loads from cache) prerequisites on demand
        Pipeline(cfg).run(stages)
    except ConfigError as exc:
        return _emit_error(exc, out_dir)
    except AssumptionError as exc:
        return _emit_error(exc, out_dir)
    except SolverError as exc:
        return _emit_error(exc, out_dir)
    return 0


if __name__ == "__main__":
    sys.exit(main())
