"""Benchmark machinery: seeded experiment construction, method runners, sweeps.

Everything here is deterministic given the experiment seed: one generator
per seed drives covariates, the true model, labels, the adversary and the
initialization, in that order.  The CLI in :mod:`svam.cli` is a thin
argparse shell over these functions.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field, replace
import json
import time

import numpy as np

from . import baselines, tuning
from .data import AdversarySpec, Dataset, corrupt, gen_covariates, gen_labels, gen_points, random_unit_vector
from .engine import RunTrace, SvamConfig, run_svam
from .errors import SvamError

__all__ = [
    "ExperimentConfig",
    "ResultRow",
    "DEFAULT_SVAM_CONFIGS",
    "build_dataset",
    "run_methods",
    "run_experiment",
    "sweep",
    "grid_init",
    "summarize",
    "rows_to_csv",
]

METHODS = ("svam", "vam", "mle", "oracle", "torrent", "tukey", "coord_median", "geo_median")

# Benchmark-tuned loop configurations per task (chosen by held-out
# validation on the standard corruption benchmarks; see README).
DEFAULT_SVAM_CONFIGS = {
    "rr": SvamConfig(beta1=0.1, xi=20.0, max_iters=50),
    "me": SvamConfig(beta1=0.05, xi=2.0, max_iters=6),
    "lr": SvamConfig(beta1=0.5, xi=2.0, max_iters=15),
    "gamma": SvamConfig(beta1=1.0, xi=2.0, max_iters=10),
}

_INITS = ("origin", "adversarial", "perturbed_truth")


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """One benchmark setting: data shape, adversary, methods, loop config.

    ``init`` picks the starting model: the origin, the adversarial model
    itself, or a random perturbation of the truth with radius
    ``init_radius`` (the gamma benchmark regime).  ``svam=None`` uses the
    task default from ``DEFAULT_SVAM_CONFIGS``; ``tune=True`` selects
    (beta1, xi) per seed on a held-out split first.
    """

    task: str
    n: int
    d: int
    adversary: AdversarySpec
    methods: tuple[str, ...] = ("svam", "mle", "oracle")
    svam: SvamConfig | None = None
    tune: bool = False
    tune_grid: tuning.TuneGrid = field(default_factory=tuning.TuneGrid)
    vam_beta: float = 1.0
    noise_beta_star: float | None = None
    gamma_shape_phi: float = 0.5
    init: str = "origin"
    init_radius: float = 0.5
    seeds: tuple[int, ...] = (0,)

    def __post_init__(self):
        if self.task not in ("rr", "me", "gamma", "lr"):
            raise ValueError(f"unknown task {self.task!r}")
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be at least 1")
        if not self.methods:
            raise ValueError("methods must be nonempty")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}; expected one of {METHODS}")
            if m in ("torrent", "tukey") and self.task != "rr":
                raise ValueError(f"method {m!r} applies only to the rr task")
            if m in ("coord_median", "geo_median") and self.task != "me":
                raise ValueError(f"method {m!r} applies only to the me task")
        if not self.seeds:
            raise ValueError("seeds must be nonempty")
        if self.init not in _INITS:
            raise ValueError(f"unknown init {self.init!r}; expected one of {_INITS}")

    def resolved_svam(self) -> SvamConfig:
        return self.svam if self.svam is not None else DEFAULT_SVAM_CONFIGS[self.task]


@dataclass
class ResultRow:
    """One CSV row: per-iteration state of one method on one seed.

    ``beta`` is empty for methods without a scale schedule.  For the
    classification task ``l2_error`` is the distance between unit-
    normalized models (an angular-error proxy); other tasks report the
    plain distance to the truth.
    """

    seed: int
    method: str
    iteration: int
    beta: float | None
    l2_error: float | None
    wall_ms: float
    converged: bool


def build_dataset(config: ExperimentConfig, seed: int) -> tuple[Dataset, np.ndarray]:
    """Generate the corrupted dataset and the initial model for one seed."""
    rng = np.random.default_rng(seed)
    task = config.task
    if task == "me":
        mu_star = 2.0 * random_unit_vector(config.d, rng)
        X = gen_points(config.n, config.d, mu_star, rng)
        ds = Dataset(X=X, w_true=mu_star)
    else:
        dist = "unit_sphere" if task == "gamma" else "std_normal"
        X = gen_covariates(config.n, config.d, dist, rng)
        w_star = random_unit_vector(config.d, rng)
        phi = config.gamma_shape_phi if task == "gamma" else None
        y = gen_labels(X, w_star, task, noise_beta_star=config.noise_beta_star,
                       phi=phi, seed=rng)
        ds = Dataset(X=X, y=y, w_true=w_star, gamma_shape_phi=phi)
    ds = corrupt(ds, config.adversary, rng, task=task)

    if config.init == "origin":
        init = np.zeros(config.d)
    elif config.init == "adversarial":
        if ds.w_adv is None:
            raise ValueError("adversarial init requires an adversarial-model corruption")
        init = ds.w_adv.copy()
    else:  # perturbed_truth
        init = ds.w_true + config.init_radius * random_unit_vector(config.d, rng)
    return ds, init


def _model_error(model, truth, task: str) -> float:
    if task == "lr":
        a = model / max(np.linalg.norm(model), 1e-300)
        b = truth / np.linalg.norm(truth)
        return float(np.linalg.norm(a - b))
    return float(np.linalg.norm(model - truth))


def _trace_rows(seed, method, trace: RunTrace, truth, task) -> list[ResultRow]:
    rows = []
    for rec in trace.records:
        err = None if truth is None else _model_error(rec.model, truth, task)
        rows.append(ResultRow(seed, method, rec.iteration, rec.beta, err, rec.wall_ms,
                              not rec.degenerate))
    return rows


def run_methods(ds: Dataset, config: ExperimentConfig, seed: int,
                init: np.ndarray) -> list[ResultRow]:
    """Run every requested method on one dataset; failures become rows.

    A method that raises is recorded as a single ``converged=False`` row
    and the run continues.
    """
    rows: list[ResultRow] = []
    truth = ds.w_true
    task = config.task
    for method in config.methods:
        t0 = time.perf_counter()
        try:
            if method == "svam":
                cfg = replace(config.resolved_svam(), init_model=init)
                if config.tune:
                    tuned = tuning.tune(ds, task, config.tune_grid, seed,
                                        max_iters=cfg.max_iters, init_model=init)
                    cfg = replace(cfg, beta1=tuned.beta1, xi=tuned.xi)
                trace = run_svam(ds, task, cfg)
                rows.extend(_trace_rows(seed, method, trace, truth, task))
            elif method == "vam":
                res = baselines.vam(ds, task, config.vam_beta,
                                    max_iters=config.resolved_svam().max_iters,
                                    init_model=init)
                rows.extend(_trace_rows(seed, method, res.run_trace, truth, task))
            elif method == "torrent":
                res = baselines.torrent(ds, config.adversary.alpha)
                for it, model in res.trace:
                    rows.append(ResultRow(seed, method, it, None,
                                          _model_error(model, truth, task),
                                          res.wall_ms / len(res.trace), True))
            elif method == "tukey":
                res = baselines.tukey_bisquare(ds)
                for it, model in res.trace:
                    rows.append(ResultRow(seed, method, it, None,
                                          _model_error(model, truth, task),
                                          res.wall_ms / len(res.trace), True))
            elif method == "coord_median":
                model = baselines.coordinate_median(ds.X)
                rows.append(ResultRow(seed, method, 1, None,
                                      _model_error(model, truth, task),
                                      (time.perf_counter() - t0) * 1e3, True))
            elif method == "geo_median":
                model = baselines.geometric_median(ds.X)
                rows.append(ResultRow(seed, method, 1, None,
                                      _model_error(model, truth, task),
                                      (time.perf_counter() - t0) * 1e3, True))
            else:  # mle | oracle
                fn = baselines.mle_all if method == "mle" else baselines.oracle
                res = fn(ds, task)
                rows.append(ResultRow(seed, method, 1, None,
                                      _model_error(res.model, truth, task),
                                      res.wall_ms, True))
        except SvamError:
            rows.append(ResultRow(seed, method, 0, None, None,
                                  (time.perf_counter() - t0) * 1e3, False))
    return rows


def _run_one_seed(args) -> list[ResultRow]:
    config, seed = args
    ds, init = build_dataset(config, seed)
    return run_methods(ds, config, seed, init)


def _map_jobs(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> list[ResultRow]:
    """All methods on all seeds; rows sorted deterministically."""
    results = _map_jobs(_run_one_seed, [(config, s) for s in config.seeds], jobs)
    rows = [row for chunk in results for row in chunk]
    rows.sort(key=lambda r: (r.seed, r.method, r.iteration))
    return rows


def final_errors(rows: list[ResultRow]) -> dict[tuple[int, str], float | None]:
    """Last recorded error per (seed, method); rows must be sorted."""
    out: dict[tuple[int, str], float | None] = {}
    for row in rows:
        out[(row.seed, row.method)] = row.l2_error
    return out


def summarize(rows: list[ResultRow]) -> dict:
    """Per-method median final error, mean wall time and convergence rate."""
    finals = final_errors(rows)
    methods = sorted({m for (_, m) in finals})
    summary = {}
    for m in methods:
        errs = [v for (s, mm), v in finals.items() if mm == m and v is not None]
        walls = [r.wall_ms for r in rows if r.method == m]
        conv = [r.converged for r in rows if r.method == m]
        summary[m] = {
            "median_final_error": float(np.median(errs)) if errs else None,
            "mean_wall_ms": float(np.mean(walls)) if walls else None,
            "convergence_rate": float(np.mean(conv)) if conv else None,
        }
    return summary


_SWEEPABLE = ("alpha", "dim", "beta1", "xi")


def _config_for_value(config: ExperimentConfig, param: str, value: float) -> ExperimentConfig:
    if param == "alpha":
        return replace(config, adversary=replace(config.adversary, alpha=value))
    if param == "dim":
        return replace(config, d=int(value))
    svam_cfg = config.resolved_svam()
    if param == "beta1":
        return replace(config, svam=replace(svam_cfg, beta1=value))
    if param == "xi":
        return replace(config, svam=replace(svam_cfg, xi=value))
    raise ValueError(f"unknown sweep parameter {param!r}; expected one of {_SWEEPABLE}")


def _sweep_worker(args):
    config, param, value, seed = args
    cfg = _config_for_value(config, param, value)
    ds, init = build_dataset(cfg, seed)
    return [(param, value, row) for row in run_methods(ds, cfg, seed, init)]


def sweep(config: ExperimentConfig, param: str, values, jobs: int = 1):
    """One run per (value, seed); returns tagged rows plus aggregates.

    Aggregate rows carry, per (value, method): mean and median final
    error and the convergence rate over seeds.
    """
    if param not in _SWEEPABLE:
        raise ValueError(f"unknown sweep parameter {param!r}; expected one of {_SWEEPABLE}")
    items = [(config, param, float(v), s) for v in values for s in config.seeds]
    chunks = _map_jobs(_sweep_worker, items, jobs)
    tagged = [entry for chunk in chunks for entry in chunk]
    tagged.sort(key=lambda e: (e[1], e[2].seed, e[2].method, e[2].iteration))

    aggregates = []
    for v in sorted(float(x) for x in values):
        rows_v = [row for (_, vv, row) in tagged if vv == v]
        finals = final_errors(rows_v)
        for m in sorted({mm for (_, mm) in finals}):
            errs = [val for (s, mm), val in finals.items() if mm == m and val is not None]
            conv = [r.converged for r in rows_v if r.method == m]
            aggregates.append({
                "param": param,
                "value": v,
                "method": m,
                "mean_final_error": float(np.mean(errs)) if errs else None,
                "median_final_error": float(np.median(errs)) if errs else None,
                "convergence_rate": float(np.mean(conv)) if conv else None,
            })
    return tagged, aggregates


# Success threshold for the initialization study: recovery error below
# 1e-6 within at most 8 iterations.
GRID_SUCCESS_ERROR = 1e-6
GRID_SUCCESS_ITERS = 8


def grid_init(config: ExperimentConfig, inits: np.ndarray, seed: int) -> list[dict]:
    """Run the loop from every given initialization on one seeded dataset.

    Returns one record per initialization with its success flag (error
    below ``GRID_SUCCESS_ERROR`` within ``GRID_SUCCESS_ITERS``
    iterations) and the iteration count that first achieved it.
    """
    ds, _ = build_dataset(config, seed)
    base = config.resolved_svam()
    out = []
    for init in inits:
        cfg = replace(base, max_iters=GRID_SUCCESS_ITERS, init_model=np.asarray(init, dtype=float))
        trace = run_svam(ds, config.task, cfg)
        it = trace.iterations_to(GRID_SUCCESS_ERROR)
        out.append({
            "init": np.asarray(init, dtype=float),
            "success": it is not None,
            "iterations": it,
            "final_error": trace.final_dist,
        })
    return out


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def rows_to_csv(rows: list[ResultRow], path, tagged_param: str | None = None) -> None:
    """Write result rows; sweep rows get leading param/value columns."""
    with open(path, "w") as fh:
        cols = "seed,method,iteration,beta,l2_error,wall_ms,converged"
        if tagged_param is None:
            fh.write(cols + "\n")
            for r in rows:
                fh.write(",".join([
                    str(r.seed), r.method, str(r.iteration), _fmt(r.beta),
                    _fmt(r.l2_error), _fmt(r.wall_ms), str(int(r.converged)),
                ]) + "\n")
        else:
            fh.write("param,value," + cols + "\n")
            for (param, value, r) in rows:
                fh.write(",".join([
                    param, _fmt(value), str(r.seed), r.method, str(r.iteration),
                    _fmt(r.beta), _fmt(r.l2_error), _fmt(r.wall_ms), str(int(r.converged)),
                ]) + "\n")


def summary_to_json(summary: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
