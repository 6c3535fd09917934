"""Command-line benchmark harness.

Subcommands: ``gen`` (write a dataset CSV), ``run`` (methods x seeds ->
results CSV + summary JSON), ``sweep`` (grid over alpha/dim/beta1/xi),
``grid-init`` (initialization study), ``tune`` (hyperparameter search).
All stochastic behavior is determined by ``--seed``/``--seeds``; flags
override values from ``--config`` JSON.  Exit codes: 0 ok, 1 config
error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bench, tuning
from .data import AdversarySpec, save_csv
from .engine import SvamConfig
from .errors import SvamError


class _ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; the harness contract wants 1.
    def error(self, message):
        raise _ConfigError(message)


def _parse_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _parse_seeds(args) -> tuple[int, ...]:
    if getattr(args, "seeds", None):
        return tuple(int(t) for t in args.seeds.split(",") if t.strip())
    if getattr(args, "num_seeds", None):
        base = args.seed if args.seed is not None else 0
        return tuple(range(base, base + args.num_seeds))
    return (args.seed if args.seed is not None else 0,)


_CONFIG_KEYS = (
    "task", "n", "d", "alpha", "location", "kind", "constant_value", "awareness",
    "multiplicative_low", "multiplicative_high", "noise_beta_star", "gamma_shape_phi",
    "init", "init_radius", "methods", "beta1", "xi", "max_iters", "beta_cap",
    "tune", "vam_beta", "seeds",
)

_FLAG_TO_KEY = {
    "task": "task", "n": "n", "d": "d", "alpha": "alpha", "location": "location",
    "kind": "kind", "const": "constant_value", "awareness": "awareness",
    "mult_low": "multiplicative_low", "mult_high": "multiplicative_high",
    "noise_beta_star": "noise_beta_star", "phi": "gamma_shape_phi",
    "init": "init", "init_radius": "init_radius", "beta1": "beta1", "xi": "xi",
    "max_iters": "max_iters", "beta_cap": "beta_cap", "vam_beta": "vam_beta",
}

_DEFAULTS = {
    "task": "rr", "n": 1000, "d": 10, "alpha": 0.15, "location": "random",
    "kind": "adversarial_model", "constant_value": None,
    "awareness": "partially_adaptive", "multiplicative_low": 10.0,
    "multiplicative_high": 1000.0, "noise_beta_star": None, "gamma_shape_phi": 0.5,
    "init": "origin", "init_radius": 0.5, "methods": ["svam", "mle", "oracle"],
    "beta1": None, "xi": None, "max_iters": None, "beta_cap": None,
    "tune": False, "vam_beta": 1.0, "seeds": None,
}


def _merged_settings(args) -> dict:
    """Defaults <- config file <- command-line flags (flag wins)."""
    settings = dict(_DEFAULTS)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            loaded = json.load(fh)
        unknown = set(loaded) - set(_CONFIG_KEYS)
        if unknown:
            raise _ConfigError(f"unknown config keys: {sorted(unknown)}")
        settings.update(loaded)
    for flag, key in _FLAG_TO_KEY.items():
        value = getattr(args, flag, None)
        if value is not None:
            settings[key] = value
    if getattr(args, "methods", None):
        settings["methods"] = [m.strip() for m in args.methods.split(",") if m.strip()]
    if getattr(args, "tune", False):
        settings["tune"] = True
    if getattr(args, "seeds", None) or getattr(args, "num_seeds", None) \
            or getattr(args, "seed", None) is not None:
        settings["seeds"] = list(_parse_seeds(args))
    elif settings["seeds"] is None:
        settings["seeds"] = [0]
    return settings


def _experiment_config(settings: dict) -> bench.ExperimentConfig:
    adversary = AdversarySpec(
        alpha=settings["alpha"],
        location=settings["location"],
        kind=settings["kind"],
        constant_value=settings["constant_value"],
        awareness=settings["awareness"],
        multiplicative_range=(settings["multiplicative_low"], settings["multiplicative_high"]),
    )
    svam_cfg = None
    overrides = {k: settings[k] for k in ("beta1", "xi", "max_iters", "beta_cap")
                 if settings[k] is not None}
    if overrides:
        base = bench.DEFAULT_SVAM_CONFIGS[settings["task"]]
        svam_cfg = SvamConfig(
            beta1=overrides.get("beta1", base.beta1),
            xi=overrides.get("xi", base.xi),
            max_iters=int(overrides.get("max_iters", base.max_iters)),
            beta_cap=overrides.get("beta_cap", base.beta_cap),
        )
    return bench.ExperimentConfig(
        task=settings["task"],
        n=int(settings["n"]),
        d=int(settings["d"]),
        adversary=adversary,
        methods=tuple(settings["methods"]),
        svam=svam_cfg,
        tune=bool(settings["tune"]),
        vam_beta=settings["vam_beta"],
        noise_beta_star=settings["noise_beta_star"],
        gamma_shape_phi=settings["gamma_shape_phi"],
        init=settings["init"],
        init_radius=settings["init_radius"],
        seeds=tuple(int(s) for s in settings["seeds"]),
    )


def _add_data_flags(p):
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--task", choices=("rr", "me", "gamma", "lr"))
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--location", choices=("random", "magnitude", "leverage"))
    p.add_argument("--kind", choices=("adversarial_model", "sign_flip", "constant",
                                      "multiplicative"))
    p.add_argument("--const", type=float, help="constant corruption value")
    p.add_argument("--awareness", choices=("oblivious", "partially_adaptive", "fully_adaptive"))
    p.add_argument("--mult-low", dest="mult_low", type=float)
    p.add_argument("--mult-high", dest="mult_high", type=float)
    p.add_argument("--noise-beta-star", dest="noise_beta_star", type=float)
    p.add_argument("--phi", type=float, help="gamma shape parameter")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)


def _add_run_flags(p):
    p.add_argument("--methods", help="comma list from "
                   "svam,vam,mle,oracle,torrent,tukey,coord_median,geo_median")
    p.add_argument("--beta1", type=float)
    p.add_argument("--xi", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--beta-cap", dest="beta_cap", type=float)
    p.add_argument("--init", choices=("origin", "adversarial", "perturbed_truth"))
    p.add_argument("--init-radius", dest="init_radius", type=float)
    p.add_argument("--tune", action="store_true", default=False)
    p.add_argument("--vam-beta", dest="vam_beta", type=float)
    p.add_argument("--seeds", help="comma list of seeds")
    p.add_argument("--num-seeds", dest="num_seeds", type=int,
                   help="use seeds seed..seed+N-1")
    p.add_argument("--summary-out", dest="summary_out", help="summary JSON path")


def build_parser() -> _Parser:
    parser = _Parser(prog="svam-bench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a dataset CSV")
    _add_data_flags(p_gen)
    p_gen.add_argument("--out", required=True)

    p_run = sub.add_parser("run", help="run methods over seeds")
    _add_data_flags(p_run)
    _add_run_flags(p_run)
    p_run.add_argument("--out", required=True, help="results CSV path")

    p_sweep = sub.add_parser("sweep", help="sweep one parameter")
    _add_data_flags(p_sweep)
    _add_run_flags(p_sweep)
    p_sweep.add_argument("--param", required=True, choices=("alpha", "dim", "beta1", "xi"))
    p_sweep.add_argument("--values", required=True, help="comma list of grid values")
    p_sweep.add_argument("--out", required=True)

    p_grid = sub.add_parser("grid-init", help="initialization study")
    _add_data_flags(p_grid)
    _add_run_flags(p_grid)
    p_grid.add_argument("--grid-lo", dest="grid_lo", type=float, default=-3.0)
    p_grid.add_argument("--grid-hi", dest="grid_hi", type=float, default=3.0)
    p_grid.add_argument("--grid-points", dest="grid_points", type=int, default=20)
    p_grid.add_argument("--random-inits", dest="random_inits", type=int,
                        help="use N random inits (plus origin and the adversarial model)")
    p_grid.add_argument("--out", required=True)

    p_tune = sub.add_parser("tune", help="hyperparameter search")
    _add_data_flags(p_tune)
    _add_run_flags(p_tune)
    p_tune.add_argument("--beta1-grid", dest="beta1_grid")
    p_tune.add_argument("--xi-grid", dest="xi_grid")
    p_tune.add_argument("--trim-grid", dest="trim_grid")
    p_tune.add_argument("--val-fraction", dest="val_fraction", type=float)
    p_tune.add_argument("--out", help="score table CSV path")
    return parser


def cmd_gen(args) -> int:
    settings = _merged_settings(args)
    config = _experiment_config(settings)
    seed = config.seeds[0]
    ds, _ = bench.build_dataset(config, seed)
    save_csv(ds, args.out)
    k = int(ds.corrupted_mask.sum())
    print(f"n={ds.n} d={ds.d} k={k}")
    return 0


def cmd_run(args) -> int:
    config = _experiment_config(_merged_settings(args))
    rows = bench.run_experiment(config, jobs=args.jobs)
    bench.rows_to_csv(rows, args.out)
    summary = bench.summarize(rows)
    for method, stats in summary.items():
        med = stats["median_final_error"]
        med_s = "nan" if med is None else f"{med:.6e}"
        print(f"method={method} median_final_error={med_s} "
              f"convergence_rate={stats['convergence_rate']:.2f}")
    if args.summary_out:
        bench.summary_to_json(summary, args.summary_out)
    return 0


def cmd_sweep(args) -> int:
    config = _experiment_config(_merged_settings(args))
    values = _parse_floats(args.values)
    if not values:
        raise _ConfigError("--values must list at least one grid value")
    tagged, aggregates = bench.sweep(config, args.param, values, jobs=args.jobs)
    bench.rows_to_csv(tagged, args.out, tagged_param=args.param)
    agg_path = str(args.out)
    agg_path = agg_path[:-4] + "_summary.csv" if agg_path.endswith(".csv") \
        else agg_path + "_summary.csv"
    with open(agg_path, "w") as fh:
        fh.write("param,value,method,mean_final_error,median_final_error,convergence_rate\n")
        for a in aggregates:
            fh.write(f"{a['param']},{a['value']:.17g},{a['method']},"
                     f"{'' if a['mean_final_error'] is None else format(a['mean_final_error'], '.17g')},"
                     f"{'' if a['median_final_error'] is None else format(a['median_final_error'], '.17g')},"
                     f"{'' if a['convergence_rate'] is None else format(a['convergence_rate'], '.17g')}\n")
    for a in aggregates:
        print(f"{a['param']}={a['value']:g} method={a['method']} "
              f"mean_final_error={a['mean_final_error']:.6e}")
    if args.summary_out:
        bench.summary_to_json({"aggregates": aggregates}, args.summary_out)
    return 0


def cmd_grid_init(args) -> int:
    settings = _merged_settings(args)
    config = _experiment_config(settings)
    seed = config.seeds[0]
    if args.random_inits:
        rng = np.random.default_rng(seed + 1)
        inits = [rng.standard_normal(config.d) * 2.0 for _ in range(args.random_inits)]
        inits.append(np.zeros(config.d))
        ds, _ = bench.build_dataset(config, seed)
        if ds.w_adv is not None:
            inits.append(ds.w_adv)
        inits = np.asarray(inits)
    else:
        if config.d != 2:
            raise _ConfigError("the init grid mode requires d=2 (use --random-inits otherwise)")
        axis = np.linspace(args.grid_lo, args.grid_hi, args.grid_points)
        inits = np.array([(gx, gy) for gx in axis for gy in axis])
    records = bench.grid_init(config, inits, seed)
    with open(args.out, "w") as fh:
        dims = ",".join(f"init_x{j}" for j in range(config.d))
        fh.write(f"{dims},success,iterations,final_error\n")
        for rec in records:
            coords = ",".join(format(v, ".17g") for v in rec["init"])
            iters = "" if rec["iterations"] is None else str(rec["iterations"])
            fh.write(f"{coords},{int(rec['success'])},{iters},"
                     f"{format(rec['final_error'], '.17g')}\n")
    rate = np.mean([rec["success"] for rec in records])
    print(f"inits={len(records)} success_rate={rate:.4f}")
    return 0


def cmd_tune(args) -> int:
    settings = _merged_settings(args)
    config = _experiment_config(settings)
    seed = config.seeds[0]
    grid_kw = {}
    if args.beta1_grid:
        grid_kw["beta1_candidates"] = tuple(_parse_floats(args.beta1_grid))
    if args.xi_grid:
        grid_kw["xi_candidates"] = tuple(_parse_floats(args.xi_grid))
    if args.trim_grid:
        grid_kw["alpha_trim_candidates"] = tuple(_parse_floats(args.trim_grid))
    if args.val_fraction is not None:
        grid_kw["val_fraction"] = args.val_fraction
    grid = tuning.TuneGrid(**grid_kw)
    ds, init = bench.build_dataset(config, seed)
    result = tuning.tune(ds, config.task, grid, seed, init_model=init)
    print(f"beta1={result.beta1:g} xi={result.xi:g} alpha_trim={result.alpha_trim:g} "
          f"val_error={result.val_error:.6e}")
    if args.out:
        tuning.score_table_csv(result.table, args.out)
    return 0


_COMMANDS = {
    "gen": cmd_gen,
    "run": cmd_run,
    "sweep": cmd_sweep,
    "grid-init": cmd_grid_init,
    "tune": cmd_tune,
}


def main(argv=None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, SvamError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
