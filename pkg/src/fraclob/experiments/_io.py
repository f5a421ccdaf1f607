"""Artifact writing shared by the experiments, plus the worker pool."""
from __future__ import annotations

import csv
import hashlib
import json
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"))


def config_hash(params) -> str:
    return hashlib.sha256(canonical_json(params).encode()).hexdigest()[:16]


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n")


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def write_manifest(out_dir, experiment: str, params, seeds, files) -> dict:
    """The only artifact carrying a timestamp."""
    doc = {
        "experiment": experiment,
        "params": _plain(params),
        "seeds": [int(s) for s in seeds],
        "config_hash": config_hash({"experiment": experiment, "params": params, "seeds": list(seeds)}),
        "files": sorted(files),
        "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "python": platform.python_version(),
    }
    write_json(Path(out_dir) / "manifest.json", doc)
    return doc


def run_jobs(fn, jobs, workers: int = 1):
    """Map ``fn`` over ``jobs``; results come back in job order for any pool size."""
    jobs = list(jobs)
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    workers = min(workers, len(jobs))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))
