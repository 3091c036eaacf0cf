"""Seeded Monte-Carlo experiments over grids of model settings.

Replicate ``r`` of cell ``c`` draws its dataset from stream
``(base_seed, c, r, 0)`` and method ``m`` draws its k-means seeding from
``(base_seed, c, r, 1 + index of m in METHOD_ORDER)``. Results are stored
by slot, so reports do not depend on execution order or worker count.
"""
import csv
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .cluster import METHOD_LABELS, METHODS, KMeansConfig
from .exceptions import IhgmmError, ValidationError
from .metrics import misclassification
from .model import NoiseSpec, compute_diagnostics, generate_dataset, separation_delta
from .rng import substream

log = logging.getLogger(__name__)

METHOD_ORDER = ("ihsc", "psc", "kmeans")
DESK_REPLICATES = 50
FULL_REPLICATES = 200
DIAGNOSTIC_KEYS = ("delta", "beta", "tau", "kappa", "mu")


@dataclass(frozen=True)
class Cell:
    """One model setting. Give either ``C`` (separation constant) or ``delta``."""

    n: int
    p: int
    K: int
    R: float = 20.0
    beta: float = 1.0
    noise: str = "GHe"
    C: float = None
    delta: float = None
    sigma_low: float = 0.5
    sigma_high: float = 1.5

    def __post_init__(self):
        if self.C is not None and self.delta is not None:
            raise ValidationError("a cell takes either C or delta, not both")
        if self.C is None and self.delta is None:
            object.__setattr__(self, "C", 3.0)
        if not (self.p >= self.K >= 2 and self.n >= self.K):
            raise ValidationError(f"infeasible cell n={self.n}, p={self.p}, K={self.K}")
        if self.R < 1 or not 0 < self.beta <= 1:
            raise ValidationError("need R >= 1 and 0 < beta <= 1")
        if self.delta is not None and self.delta <= 0:
            raise ValidationError("delta must be positive")
        if self.C is not None and self.C <= 0:
            raise ValidationError("C must be positive")
        self.noise_spec()

    def resolved_delta(self):
        if self.delta is not None:
            return float(self.delta)
        return separation_delta(self.C, self.K, self.p, self.n)

    def noise_spec(self):
        return NoiseSpec(self.noise, self.sigma_low, self.sigma_high)


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    cells: tuple
    replicates: int = DESK_REPLICATES
    base_seed: int = 20240101
    methods: tuple = METHOD_ORDER
    kmeans: KMeansConfig = field(default_factory=KMeansConfig)
    diagnostics: bool = True

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.replicates < 1:
            raise ValidationError("replicates must be >= 1")
        if not self.cells:
            raise ValidationError("experiment has no cells")
        if not self.methods:
            raise ValidationError("method list is empty")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValidationError(f"unknown methods {bad}; choose from {list(METHODS)}")
        if len(set(self.methods)) != len(self.methods):
            raise ValidationError("duplicate methods")
        if not 0 <= int(self.base_seed) < 2**64:
            raise ValidationError("base_seed must be an unsigned 64-bit integer")

    def to_dict(self):
        return {
            "name": self.name,
            "cells": [asdict(c) for c in self.cells],
            "replicates": self.replicates,
            "base_seed": int(self.base_seed),
            "methods": list(self.methods),
            "kmeans": asdict(self.kmeans),
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_dict(cls, d):
        try:
            cells = [Cell(**c) for c in d["cells"]]
            return cls(
                name=d.get("name", "custom"),
                cells=cells,
                replicates=int(d.get("replicates", DESK_REPLICATES)),
                base_seed=int(d.get("base_seed", 20240101)),
                methods=tuple(d.get("methods", METHOD_ORDER)),
                kmeans=KMeansConfig(**d.get("kmeans", {})),
                diagnostics=bool(d.get("diagnostics", True)),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed experiment config: {exc}") from exc

    def replace(self, **changes):
        d = self.to_dict()
        d.update(changes)
        return ExperimentConfig.from_dict(d)


def _grid(name, cells, **kw):
    return ExperimentConfig(name=name, cells=tuple(cells), **kw)


def _both_noises(**kw):
    return [Cell(noise=s, **kw) for s in ("GHe", "SHe")]


def named_config(name):
    """Built-in experiment grids, looked up by name (see ``NAMED_CONFIGS``)."""
    if name not in NAMED_CONFIGS:
        raise ValidationError(f"unknown experiment {name!r}; known: {sorted(NAMED_CONFIGS)}")
    return NAMED_CONFIGS[name]()


def _exp1(kind):
    if kind == "nggp":
        pts = [dict(n=n, p=200) for n in (500, 1000, 1500, 2000, 2500)]
    elif kind == "neqp":
        pts = [dict(n=n, p=n) for n in (100, 200, 300, 400, 500)]
    else:
        pts = [dict(n=200, p=p) for p in (1000, 2000, 3000, 4000, 5000)]
    cells = [c for kw in pts for c in _both_noises(K=4, R=20.0, beta=1.0, **kw)]
    return _grid(f"exp1-{kind}", cells)


def _exp2(kind):
    n, p = {"nggp": (5000, 1000), "neqp": (1000, 1000), "pggn": (1000, 5000)}[kind]
    cells = [c for K in range(2, 9) for c in _both_noises(n=n, p=p, K=K, R=20.0, beta=1.0)]
    return _grid(f"exp2-{kind}", cells)


def _exp3():
    delta = separation_delta(3.0, 3, 1000, 500)
    cells = [
        Cell(n=500, p=1000, K=3, R=float(R), beta=1.0, noise="GHe", delta=delta)
        for R in range(5, 101, 5)
    ]
    return _grid("exp3", cells)


def _exp4():
    delta = separation_delta(3.0, 3, 1000, 200)
    cells = [
        Cell(n=200, p=1000, K=3, R=20.0, beta=b / 10, noise="GHe", delta=delta)
        for b in range(1, 11)
    ]
    return _grid("exp4", cells)


NAMED_CONFIGS = {
    "exp1-nggp": lambda: _exp1("nggp"),
    "exp1-neqp": lambda: _exp1("neqp"),
    "exp1-pggn": lambda: _exp1("pggn"),
    "exp2-nggp": lambda: _exp2("nggp"),
    "exp2-neqp": lambda: _exp2("neqp"),
    "exp2-pggn": lambda: _exp2("pggn"),
    "exp3": _exp3,
    "exp4": _exp4,
}


def run_replicate(cfg, cell_index, replicate):
    """One dataset, every selected method on it; returns a JSON-ready record."""
    cell = cfg.cells[cell_index]
    data_rng = substream(cfg.base_seed, cell_index, replicate, 0)
    X, truth = generate_dataset(
        cell.n, cell.p, cell.K, cell.resolved_delta(), cell.R, cell.beta, cell.noise_spec(), data_rng
    )
    rec = {"cell": cell_index, "replicate": replicate, "methods": {}, "seconds": {}}
    for m in cfg.methods:
        alg_rng = substream(cfg.base_seed, cell_index, replicate, 1 + METHOD_ORDER.index(m))
        t0 = time.perf_counter()
        try:
            est = METHODS[m](X, cell.K, cfg.kmeans, alg_rng)
            ev = misclassification(est.z_hat, truth.labels, K=cell.K)
            rec["methods"][m] = {"loss": ev.loss, "rate": ev.rate, "exact": ev.exact}
        except (IhgmmError, ArithmeticError, np.linalg.LinAlgError) as exc:
            log.warning("cell %d replicate %d method %s failed: %s", cell_index, replicate, m, exc)
            rec["methods"][m] = {"failed": True, "error": str(exc)}
        rec["seconds"][m] = time.perf_counter() - t0
    if cfg.diagnostics:
        try:
            diag = compute_diagnostics(truth)
            rec["diagnostics"] = {k: getattr(diag, k) for k in DIAGNOSTIC_KEYS}
        except (IhgmmError, ArithmeticError) as exc:
            rec["diagnostics"] = {"error": str(exc)}
    return rec


def _run_slot(args):
    cfg_dict, c, r = args
    return run_replicate(ExperimentConfig.from_dict(cfg_dict), c, r)


@dataclass
class ExperimentReport:
    """Aggregated outcome of an experiment plus the raw per-replicate log.

    Everything is stored as JSON-compatible values so that a report
    survives a round trip through :meth:`to_json` unchanged.
    """

    config: dict
    rows: list
    replicate_log: list
    diagnostics: list
    meta: dict

    def to_dict(self, include_timing=True):
        d = asdict(self)
        if not include_timing:
            for row in d["rows"]:
                row.pop("wall_time_s", None)
            for rec in d["replicate_log"]:
                rec.pop("seconds", None)
        return d

    def to_json(self, include_timing=True):
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: d[k] for k in ("config", "rows", "replicate_log", "diagnostics", "meta")})

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def row(self, cell, method):
        for r in self.rows:
            if r["cell"] == cell and r["method"] == method:
                return r
        raise KeyError((cell, method))


def _summarise(cfg, records):
    rows, diags = [], []
    for c, cell in enumerate(cfg.cells):
        recs = [rec for rec in records if rec["cell"] == c]
        for m in cfg.methods:
            outs = [rec["methods"][m] for rec in recs]
            ok = [o for o in outs if not o.get("failed")]
            rates = [o["rate"] for o in ok]
            rows.append(
                {
                    "cell": c,
                    "n": cell.n,
                    "p": cell.p,
                    "K": cell.K,
                    "R": cell.R,
                    "beta": cell.beta,
                    "noise": cell.noise,
                    "delta": cell.resolved_delta(),
                    "method": METHOD_LABELS[m],
                    "mean_rate": float(np.mean(rates)) if rates else None,
                    "rate_se": float(np.std(rates, ddof=1) / np.sqrt(len(rates)))
                    if len(rates) > 1
                    else 0.0,
                    "exact_proportion": sum(o["exact"] for o in ok) / len(outs),
                    "replicates": len(outs),
                    "failures": len(outs) - len(ok),
                    "wall_time_s": float(sum(rec["seconds"][m] for rec in recs)),
                }
            )
        entry = {"cell": c}
        good = [rec["diagnostics"] for rec in recs if "diagnostics" in rec and "error" not in rec["diagnostics"]]
        for k in DIAGNOSTIC_KEYS:
            entry[f"mean_{k}"] = float(np.mean([g[k] for g in good])) if good else None
        diags.append(entry)
    return rows, diags


def run_experiment(cfg, jobs=1, progress=None):
    """Run every (cell, replicate) slot of ``cfg`` and aggregate per cell and method."""
    slots = [(c, r) for c in range(len(cfg.cells)) for r in range(cfg.replicates)]
    if jobs > 1:
        cfg_dict = cfg.to_dict()
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_slot, [(cfg_dict, c, r) for c, r in slots]))
    else:
        records = []
        for c, r in slots:
            records.append(run_replicate(cfg, c, r))
            if progress is not None:
                progress(c, r)
    rows, diags = _summarise(cfg, records)
    meta = {"package_version": __version__, "kernel_backend": kernels.BACKEND, "rng": "Philox/SeedSequence"}
    return ExperimentReport(config=cfg.to_dict(), rows=rows, replicate_log=records, diagnostics=diags, meta=meta)


CSV_FIELDS = (
    "experiment",
    "cell",
    "n",
    "p",
    "K",
    "R",
    "beta",
    "noise",
    "delta",
    "method",
    "mean_rate",
    "rate_se",
    "exact_proportion",
    "replicates",
    "failures",
    "wall_time_s",
)


def report_csv(report, include_timing=True):
    """One row per (cell, method), RFC 4180 with a header."""
    fields = [f for f in CSV_FIELDS if include_timing or f != "wall_time_s"]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\r\n", extrasaction="ignore")
    w.writeheader()
    for row in report.rows:
        w.writerow({"experiment": report.config["name"], **row})
    return buf.getvalue()


def emit_outputs(report, out_dir, formats=("csv", "json")):
    """Write ``<name>.csv`` and/or ``<name>.json`` into ``out_dir``; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    stem = report.config["name"]
    for fmt in formats:
        if fmt == "csv":
            path = out / f"{stem}.csv"
            path.write_text(report_csv(report), encoding="utf-8", newline="")
        elif fmt == "json":
            path = out / f"{stem}.json"
            path.write_text(report.to_json(), encoding="utf-8")
        else:
            raise ValidationError(f"unknown output format {fmt!r}")
        paths.append(path)
    return paths
