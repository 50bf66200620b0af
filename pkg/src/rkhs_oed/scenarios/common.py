"""Shared scenario plumbing: deterministic CSV/JSON output and RNG streams."""

import json
import os
import subprocess
import time

import numpy as np


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows):
    """Deterministic CSV writer: repr floats, LF newlines, no quoting."""
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row has {len(row)} fields, header {len(header)}")
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def git_hash():
    try:
        out = subprocess.run(["git", "rev-parse", "HEAD"],
                             capture_output=True, text=True, timeout=10)
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unknown"


def write_meta(out_dir, cfg, runtime_s, extra=None):
    meta = {
        "config": cfg.to_dict(),
        "git_hash": git_hash(),
        "runtime_seconds": round(float(runtime_s), 3),
    }
    if extra:
        meta.update(extra)
    path = os.path.join(out_dir, "meta.json")
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o)}")


def spawn_rngs(seed, n):
    """n independent deterministic generators from one 64-bit seed."""
    return [np.random.default_rng(s)
            for s in np.random.SeedSequence(seed).spawn(n)]


class timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0
        return False


def exact_counts(eta, budget):
    """Largest-remainder rounding of simplex weights to counts summing to budget."""
    eta = np.asarray(eta, dtype=float)
    base = np.floor(eta * budget).astype(int)
    frac = eta * budget - base
    missing = int(budget - base.sum())
    if missing > 0:
        base[np.argsort(-frac)[:missing]] += 1
    return base


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
