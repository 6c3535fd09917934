"""Scratch calibration for benchmark hyperparameters (not shipped)."""
import numpy as np
from svam.data import Dataset, AdversarySpec, gen_covariates, gen_labels, corrupt, random_unit_vector
from svam.engine import SvamConfig, run_svam


def make_rr(seed, n=1000, d=10, alpha=0.15, location="random", kind="adversarial_model"):
    rng = np.random.default_rng(seed)
    X = gen_covariates(n, d, "std_normal", rng)
    w_star = random_unit_vector(d, rng)
    y = gen_labels(X, w_star, "rr")
    ds = Dataset(X=X, y=y, w_true=w_star)
    spec = AdversarySpec(alpha=alpha, location=location, kind=kind)
    return corrupt(ds, spec, rng, task="rr")


def trial(cfg_kw, seeds=range(20), **mk):
    iters, finals = [], []
    for s in seeds:
        ds = make_rr(s, **mk)
        cfg = SvamConfig(init_model=ds.w_adv, **cfg_kw)
        tr = run_svam(ds, "rr", cfg)
        it = tr.iterations_to(1e-6)
        iters.append(it if it is not None else -1)
        finals.append(tr.final_dist)
    iters = np.array(iters)
    finals = np.array(finals)
    ok8 = np.sum((iters > 0) & (iters <= 8))
    return ok8, iters.max(), np.median(finals), finals.max()


print("== criterion 1 candidates (alpha=0.15, init=w_adv, 20 seeds) ==")
for b1, xi in [(0.01, 10), (0.1, 10), (0.05, 10), (0.01, 20), (0.1, 20), (0.2, 8), (0.1, 8)]:
    ok8, worst, med, mx = trial(dict(beta1=b1, xi=xi, max_iters=40))
    print(f"b1={b1:<5} xi={xi:<3} ok<=8iter: {ok8}/20 worst_iters={worst} med_final={med:.2e} max_final={mx:.2e}")
