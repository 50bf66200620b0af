"""Command-line entry point: scenario runners and the design solver.

Usage:
    rkhs-oed <scenario> --config <path.json> --out <dir> [--seed N]
    rkhs-oed design --config <path.json> --out <path.json>
"""

import argparse
import json
import sys

import numpy as np

from .design import DesignObjective, greedy_design, mirror_descent_design, \
    round_allocation
from .functionals import LinearFunctional
from .scenarios import RUNNERS, SCENARIOS, ScenarioConfig


def _run_scenario(name, args):
    if args.config:
        cfg = ScenarioConfig.from_json(args.config)
        if cfg.scenario != name:
            raise SystemExit(
                f"config is for scenario {cfg.scenario!r}, not {name!r}")
    else:
        cfg = ScenarioConfig(name)
    if args.seed is not None:
        cfg.seed = args.seed
    out = args.out or cfg.output_dir
    if out is None:
        raise SystemExit("need --out (or output_dir in the config)")
    RUNNERS[name](cfg, out)
    print(f"{name}: wrote outputs to {out}")


def _run_design(args):
    with open(args.config) as fh:
        spec = json.load(fh)
    allowed = {"objective", "candidates", "estimator", "lam", "sigma",
               "solver", "iters", "budget", "functional"}
    unknown = set(spec) - allowed
    if unknown:
        raise SystemExit(f"unknown design config keys: {sorted(unknown)}")
    C = LinearFunctional(np.asarray(spec["functional"], dtype=float))
    obj = DesignObjective(spec.get("objective", "E"),
                          spec.get("estimator", "ridge"), C,
                          lam=spec.get("lam"), sigma=spec.get("sigma"))
    candidates = [np.atleast_1d(np.asarray(c, dtype=float))
                  for c in spec["candidates"]]
    X = np.stack(candidates)
    solver = spec.get("solver", "mirror")
    budget = spec.get("budget")
    if solver == "mirror":
        alloc = mirror_descent_design(obj, candidates, X_S=X,
                                      iters=int(spec.get("iters", 300)))
        if budget:
            alloc = round_allocation(alloc, int(budget))
    elif solver == "greedy":
        if not budget:
            raise SystemExit("greedy solver needs a budget")
        alloc = greedy_design(obj, candidates, int(budget), X_cand=X)
    else:
        raise SystemExit(f"unknown solver {solver!r}; use mirror or greedy")
    result = {
        "eta": alloc.eta.tolist(),
        "counts": None if alloc.counts is None else alloc.counts.tolist(),
        "objective_value": alloc.objective_value,
        "trace": alloc.trace,
    }
    text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="rkhs-oed",
        description="Bias-aware optimal experimental design for linear "
                    "functionals of an RKHS element.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SCENARIOS:
        sp = sub.add_parser(name, help=f"run the {name} scenario")
        sp.add_argument("--config", help="scenario config JSON")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    dp = sub.add_parser("design", help="solve an allocation problem")
    dp.add_argument("--config", required=True, help="design problem JSON")
    dp.add_argument("--out", help="output JSON path (default: stdout)")
    args = parser.parse_args(argv)
    if args.command == "design":
        _run_design(args)
    else:
        _run_scenario(args.command, args)


if __name__ == "__main__":
    main()
