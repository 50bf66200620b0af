"""Gradient-estimation scenario: bias/variance sweep over the finite-difference
step size h plus the allocation-optimization stage on the 5-point support."""

import json
import os
import warnings

import numpy as np

from ..confidence import fixed_interp_ellipsoid, l2_error_bound, xi
from ..design import DesignObjective, mirror_descent_design
from ..estimators import info_matrix_interp
from ..features import PriorOperator, evaluate_design_matrix, \
    qff_squared_exponential
from ..functionals import gradient_functional, relative_bias
from ..linalg import IllConditionedWarning
from .common import ensure_dir, timer, write_csv, write_meta

CSV_HEADER = ("h", "nu", "variance_term", "bias_term", "total_error", "T",
              "flagged")


def support_points(x0, h):
    """The 5-point design {x, x+h e1, x+2h e1, x-h e1, x-h e2}."""
    e1 = np.zeros_like(x0)
    e2 = np.zeros_like(x0)
    e1[0] = 1.0
    e2[1] = 1.0
    return [x0, x0 + h * e1, x0 + 2 * h * e1, x0 - h * e1, x0 - h * e2]


def run_gradient_scenario(cfg, out_dir=None):
    out_dir = ensure_dir(out_dir or cfg.output_dir or ".")
    p = cfg.params
    with timer() as tm:
        fm = qff_squared_exponential(
            p["lengthscale"], p["m"],
            [[-1.0, 1.0]] * p["input_dim"])
        x0 = np.zeros(p["input_dim"])
        C = gradient_functional(fm, x0)
        V0 = PriorOperator(dim=fm.dim)

        rows = []
        for h in p["h_grid"]:
            pts = support_points(x0, float(h))
            X = evaluate_design_matrix(fm, pts)
            flagged = 0
            try:
                with warnings.catch_warnings(record=True) as caught:
                    warnings.simplefilter("always", IllConditionedWarning)
                    nu = relative_bias(C, X, V0)
                    W = info_matrix_interp(X, C, V0)
                    if any(issubclass(w.category, IllConditionedWarning)
                           for w in caught):
                        flagged = 1
            except ValueError:
                for T in p["T_list"]:
                    rows.append((float(h), float("nan"), float("nan"),
                                 float("nan"), float("nan"), int(T), 1))
                continue
            bias_term = nu / np.sqrt(cfg.lam)
            for T in p["T_list"]:
                var_term = (cfg.sigma / np.sqrt(T)) * np.sqrt(
                    xi(cfg.delta, W.p))
                e = fixed_interp_ellipsoid(np.zeros(W.p), W, nu, cfg.lam,
                                           cfg.sigma, T, cfg.delta)
                total = l2_error_bound(e)
                rows.append((float(h), float(nu), float(var_term),
                             float(bias_term), float(total), int(T), flagged))

        # per-T certified-error minimizer over unflagged rows
        h_star = {}
        for T in p["T_list"]:
            cand = [(r[4], r[0]) for r in rows
                    if r[5] == T and r[6] == 0 and np.isfinite(r[4])]
            if cand:
                h_star[str(T)] = min(cand)[1]

        # allocation stage: weight optimization on the 5-point support
        pts = support_points(x0, p["design_h"])
        obj = DesignObjective("E", "ridge", C, lam=p["design_lam"],
                              sigma=cfg.sigma)
        alloc = mirror_descent_design(obj, pts, iters=p["design_iters"],
                                      feature_map=fm)
        design = {
            "support": [pt.tolist() for pt in pts],
            "eta": alloc.eta.tolist(),
            "objective_value": alloc.objective_value,
            "trace": alloc.trace,
        }
        with open(os.path.join(out_dir, "design.json"), "w") as fh:
            json.dump(design, fh, indent=2, sort_keys=True)
            fh.write("\n")

        csv_path = write_csv(os.path.join(out_dir, "gradient.csv"),
                             CSV_HEADER, rows)
    write_meta(out_dir, cfg, tm.seconds, {"h_star": h_star})
    return {"csv": csv_path, "rows": rows, "h_star": h_star, "design": design}
