"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as
they complete.  Wall-clock comparisons between methods are reported
informationally only; iteration counts and error levels are the gates.
"""

import numpy as np
import pytest

from svam import families, objectives
from svam.baselines import coordinate_median, geometric_median, mle_all, oracle, vam
from svam.bench import DEFAULT_SVAM_CONFIGS, ExperimentConfig, build_dataset, grid_init
from svam.data import AdversarySpec, gen_covariates, leverage_scores
from svam.diagnostics import invariant_flags
from svam.engine import SvamConfig, run_svam
from svam.solvers import weighted_least_squares, weighted_mean

RESULTS = []


def _report(criterion: int, ok: bool, detail: str):
    line = f"[criterion {criterion:2d}] {'PASS' if ok else 'FAIL'} - {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def _rr_config(**kw) -> ExperimentConfig:
    base = dict(
        task="rr", n=1000, d=10,
        adversary=AdversarySpec(alpha=0.15, location="random", kind="adversarial_model"),
        methods=("svam",), init="adversarial", seeds=tuple(range(20)),
    )
    base.update(kw)
    return ExperimentConfig(**base)


def _angle(a, b):
    c = float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def test_criterion_01_exact_recovery_rr():
    """n=1000, d=10, alpha=0.15, adversarial model, init at the adversary:
    error < 1e-6 within <= 8 iterations on >= 18 of 20 seeds, < 1 s/run."""
    config = _rr_config()
    hits, iter_counts, walls = 0, [], []
    for seed in config.seeds:
        ds, init = build_dataset(config, seed)
        cfg = SvamConfig(beta1=0.1, xi=20.0, max_iters=50, init_model=init)
        trace = run_svam(ds, "rr", cfg)
        it = trace.iterations_to(1e-6)
        walls.append(sum(r.wall_ms for r in trace.records))
        if it is not None and it <= 8:
            hits += 1
            iter_counts.append(it)
    ok = hits >= 18 and max(walls) < 1000.0
    _report(1, ok, f"{hits}/20 seeds < 1e-6 within <= 8 iters "
                   f"(median iters {np.median(iter_counts):.0f}, max wall {max(walls):.1f} ms)")


def test_criterion_02_breakdown_sweep():
    """alpha in {0, 0.05, 0.10, 0.15, 0.18}: mean final error <= 1e-6 each."""
    means = {}
    for alpha in (0.0, 0.05, 0.10, 0.15, 0.18):
        errs = []
        config = _rr_config(adversary=AdversarySpec(alpha=alpha, location="random",
                                                    kind="adversarial_model"))
        for seed in config.seeds:
            ds, init = build_dataset(config, seed)
            cfg = SvamConfig(beta1=0.1, xi=20.0, max_iters=50, init_model=init)
            errs.append(run_svam(ds, "rr", cfg).final_dist)
        means[alpha] = float(np.mean(errs))
    ok = all(v <= 1e-6 for v in means.values())
    worst = max(means.values())
    _report(2, ok, f"mean final error per alpha {[f'{v:.1e}' for v in means.values()]} "
                   f"(worst {worst:.2e})")


def test_criterion_03_dimension_insensitivity():
    """d in {10, 50, 100} at alpha=0.15 with fixed hyperparameters."""
    worst = {}
    for d in (10, 50, 100):
        errs = []
        config = _rr_config(d=d, seeds=tuple(range(5)))
        for seed in config.seeds:
            ds, init = build_dataset(config, seed)
            cfg = SvamConfig(beta1=0.1, xi=20.0, max_iters=50, init_model=init)
            errs.append(run_svam(ds, "rr", cfg).final_dist)
        worst[d] = max(errs)
    ok = all(v < 1e-6 for v in worst.values())
    _report(3, ok, f"worst final error per d: " +
                   ", ".join(f"d={d}: {v:.1e}" for d, v in worst.items()))


def test_criterion_04_hyperparameter_robustness():
    """beta1 spanning 3 decades x xi in [1.1, 3] all converge below 1e-6."""
    fails, worst = [], 0.0
    config = _rr_config(seeds=(0, 1))
    for beta1 in (1e-3, 1e-2, 1e-1, 1.0):
        for xi in (1.1, 1.5, 2.0, 3.0):
            for seed in config.seeds:
                ds, init = build_dataset(config, seed)
                cfg = SvamConfig(beta1=beta1, xi=xi, max_iters=400, init_model=init)
                err = run_svam(ds, "rr", cfg).final_dist
                worst = max(worst, err)
                if err >= 1e-6:
                    fails.append((beta1, xi, seed, err))
    _report(4, not fails, f"16 (beta1, xi) combos x 2 seeds, worst error {worst:.2e}"
                          + (f", failures {fails}" if fails else ""))


def test_criterion_05_svam_beats_every_fixed_scale():
    """Best fixed-scale run over a 7-point log grid is >= 10x worse."""
    vam_best, svam_final = [], []
    config = _rr_config(seeds=tuple(range(10)))
    for seed in config.seeds:
        ds, init = build_dataset(config, seed)
        cfg = SvamConfig(beta1=0.1, xi=20.0, max_iters=50, init_model=init)
        svam_final.append(run_svam(ds, "rr", cfg).final_dist)
        best = min(
            float(np.linalg.norm(vam(ds, "rr", b, max_iters=50, init_model=init).model
                                 - ds.w_true))
            for b in (1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0)
        )
        vam_best.append(best)
    med_vam, med_svam = float(np.median(vam_best)), float(np.median(svam_final))
    ok = med_vam >= 10.0 * med_svam
    _report(5, ok, f"median best-VAM {med_vam:.2e} vs median SVAM {med_svam:.2e} "
                   f"(ratio {med_vam / med_svam:.1e})")


def test_criterion_06_mean_estimation_oracle_level():
    """d=10, n=2000, alpha=0.15, far cluster: <= 2x oracle, beats medians."""
    svam_e, oracle_e, coord_e, geo_e = [], [], [], []
    config = ExperimentConfig(task="me", n=2000, d=10,
                              adversary=AdversarySpec(alpha=0.15),
                              methods=("svam",), seeds=tuple(range(10)))
    for seed in config.seeds:
        ds, init = build_dataset(config, seed)
        trace = run_svam(ds, "me", SvamConfig(beta1=0.05, xi=2.0, max_iters=6,
                                              init_model=init))
        svam_e.append(float(np.linalg.norm(trace.final_model - ds.w_true)))
        oracle_e.append(float(np.linalg.norm(oracle(ds, "me").model - ds.w_true)))
        coord_e.append(float(np.linalg.norm(coordinate_median(ds.X) - ds.w_true)))
        geo_e.append(float(np.linalg.norm(geometric_median(ds.X) - ds.w_true)))
    med = {k: float(np.median(v)) for k, v in
           [("svam", svam_e), ("oracle", oracle_e), ("coord", coord_e), ("geo", geo_e)]}
    ok = (med["svam"] <= 2.0 * med["oracle"]
          and med["svam"] < med["coord"] and med["svam"] < med["geo"])
    _report(6, ok, f"median errors svam {med['svam']:.3f}, oracle {med['oracle']:.3f}, "
                   f"coord {med['coord']:.3f}, geo {med['geo']:.3f}")


def test_criterion_07_logistic_beats_plain_mle():
    """alpha=0.15 label flips: angular error <= 0.5x the unweighted MLE's."""
    svam_a, mle_a = [], []
    config = ExperimentConfig(task="lr", n=1000, d=10,
                              adversary=AdversarySpec(alpha=0.15, kind="sign_flip"),
                              methods=("svam",), seeds=tuple(range(10)))
    for seed in config.seeds:
        ds, init = build_dataset(config, seed)
        trace = run_svam(ds, "lr", SvamConfig(beta1=0.5, xi=2.0, max_iters=15,
                                              init_model=init))
        svam_a.append(_angle(trace.final_model, ds.w_true))
        mle_a.append(_angle(mle_all(ds, "lr").model, ds.w_true))
    med_svam, med_mle = float(np.median(svam_a)), float(np.median(mle_a))
    ok = med_svam <= 0.5 * med_mle
    _report(7, ok, f"median angular error {med_svam:.4f} vs MLE {med_mle:.4f} "
                   f"(ratio {med_svam / med_mle:.2f})")


def test_criterion_08_gamma_bounded_recovery():
    """alpha = 0.002/sqrt(d), multiplicative corruption, beta1 >= 1,
    init within ln 2: final error <= initial error and <= 0.1."""
    d = 10
    alpha = 0.002 / np.sqrt(d)
    config = ExperimentConfig(
        task="gamma", n=2000, d=d,
        adversary=AdversarySpec(alpha=alpha, kind="multiplicative"),
        methods=("svam",), init="perturbed_truth", init_radius=0.5,
        seeds=tuple(range(5)),
    )
    finals, inits = [], []
    for seed in config.seeds:
        ds, init = build_dataset(config, seed)
        e0 = float(np.linalg.norm(init - ds.w_true))
        assert e0 <= np.log(2.0)
        trace = run_svam(ds, "gamma", SvamConfig(beta1=1.0, xi=2.0, max_iters=10,
                                                 init_model=init))
        finals.append(trace.final_dist)
        inits.append(e0)
    ok = all(f <= e0 and f <= 0.1 for f, e0 in zip(finals, inits))
    _report(8, ok, f"k={int(np.floor(alpha * config.n))} corruptions; "
                   f"max final {max(finals):.2e} (inits {max(inits):.2f})")


def test_criterion_09_global_convergence_grid():
    """2-d toy problem, 20x20 init grid: >= 99% reach 1e-6 within 8 iters."""
    config = ExperimentConfig(
        task="rr", n=200, d=2,
        adversary=AdversarySpec(alpha=0.15, kind="adversarial_model"),
        methods=("svam",),
        svam=SvamConfig(beta1=0.05, xi=20.0, max_iters=8),
        seeds=(0,),
    )
    axis = np.linspace(-3.0, 3.0, 20)
    inits = np.array([(gx, gy) for gx in axis for gy in axis])
    records = grid_init(config, inits, seed=0)
    rate = float(np.mean([rec["success"] for rec in records]))
    iters = [rec["iterations"] for rec in records if rec["iterations"] is not None]
    _report(9, rate >= 0.99, f"success rate {rate:.4f} over {len(records)} inits "
                             f"(max iterations {max(iters)})")


class TestCriterion10PropertySuite:
    """Always-runnable property battery; each sub-check is gated, and the
    summary line prints once all parts pass."""

    CHECKS = []

    def test_order_and_mode_preservation(self):
        rng = np.random.default_rng(100)
        for _ in range(1000):
            eta = rng.normal()
            y1, y2 = rng.normal(eta, 2.0, size=2)
            beta = float(np.exp(rng.uniform(np.log(1e-2), np.log(1e3))))
            s_cmp = -0.5 * (y1 - eta) ** 2 > -0.5 * (y2 - eta) ** 2
            a_cmp = -0.5 * beta * (y1 - eta) ** 2 > -0.5 * beta * (y2 - eta) ** 2
            assert s_cmp == a_cmp
            m = rng.normal()
            assert (families.bernoulli_weight_margin(m, 1.0) > 0.5) == \
                   (families.bernoulli_weight_margin(m, beta) > 0.5)
            eta_g = float(np.exp(rng.normal()))
            phi = rng.uniform(0.05, 0.95)
            ya, yb = np.exp(rng.normal(size=2))
            eta_t, phi_t = families.gamma_altered_params(eta_g, phi, beta)
            sa = families.gamma_log_density(ya, eta_g, phi)
            sb = families.gamma_log_density(yb, eta_g, phi)
            aa = families.gamma_log_density(ya, eta_t, phi_t)
            ab = families.gamma_log_density(yb, eta_t, phi_t)
            if not np.isclose(sa, sb):
                assert (sa > sb) == (aa > ab)
            # modes coincide to 1e-12 relative
            assert (1 - phi_t) / eta_t == pytest.approx((1 - phi) / eta_g, rel=1e-12)
        self.CHECKS.append("order/mode (3 x 1000 cases)")

    def test_beta_one_identity(self):
        rng = np.random.default_rng(101)
        for _ in range(300):
            y, eta = rng.normal(size=2)
            standard = np.sqrt(1.0 / (2.0 * np.pi)) * np.exp(-0.5 * (y - eta) ** 2)
            assert families.gaussian_weight(y, eta, 1.0, normalized=True) == pytest.approx(
                standard, rel=1e-12)
            margin = rng.normal()
            plain = 1.0 / (1.0 + np.exp(-margin))
            assert families.bernoulli_weight_margin(margin, 1.0) == pytest.approx(
                plain, rel=1e-12)
            eta_g = float(np.exp(rng.normal()))
            phi = rng.uniform(0.05, 0.95)
            eta_t, phi_t = families.gamma_altered_params(eta_g, phi, 1.0)
            assert eta_t == pytest.approx(eta_g, rel=1e-12)
            assert phi_t == pytest.approx(phi, rel=1e-12)
        self.CHECKS.append("beta=1 identity")

    def test_variance_formulas_vs_monte_carlo(self):
        rng = np.random.default_rng(102)
        for beta in (0.5, 4.0):
            samples = rng.normal(0.3, 1.0 / np.sqrt(beta), size=100_000)
            spec = families.FamilySpec("gaussian")
            assert families.altered_variance(spec, 0.3, beta) == pytest.approx(
                float(np.var(samples)), rel=0.05)
        eta, phi, beta = 1.3, 0.5, 3.0
        eta_t, phi_t = families.gamma_altered_params(eta, phi, beta)
        g = rng.gamma(shape=1.0 / phi_t, scale=phi_t / eta_t, size=100_000)
        spec = families.FamilySpec("gamma", gamma_shape_phi=phi)
        assert families.altered_variance(spec, eta, beta) == pytest.approx(
            float(np.var(g)), rel=0.05)
        self.CHECKS.append("variance vs Monte Carlo (5%)")

    def test_gradients_vs_finite_differences(self):
        rng = np.random.default_rng(103)
        for task in ("rr", "me", "lr", "gamma"):
            X = rng.standard_normal((30, 3)) / 2
            s = rng.uniform(0.1, 1.0, 30)
            y = {"rr": rng.standard_normal(30), "me": None,
                 "lr": np.where(rng.standard_normal(30) > 0, 1.0, -1.0),
                 "gamma": np.exp(rng.normal(0, 0.5, 30))}[task]
            w = rng.standard_normal(3) / 2
            _, g = objectives.weighted_value_grad(task, X, y, s, w, phi=0.5)
            h = 1e-6
            for i in range(3):
                e = np.zeros(3)
                e[i] = h
                fd = (objectives.weighted_value_grad(task, X, y, s, w + e, phi=0.5)[0]
                      - objectives.weighted_value_grad(task, X, y, s, w - e, phi=0.5)[0]) / (2 * h)
                assert g[i] == pytest.approx(fd, rel=1e-5, abs=1e-7)
        self.CHECKS.append("analytic vs finite-difference gradients (1e-5)")

    def test_closed_form_solvers_vs_brute_force(self):
        X = np.array([[1.0], [1.0]])
        y = np.array([0.0, 2.0])
        s = np.array([3.0, 1.0])
        grid = np.linspace(-1, 3, 2_000_001)
        obj = np.outer(grid, X[:, 0])
        vals = s[0] * (y[0] - grid * X[0, 0]) ** 2 + s[1] * (y[1] - grid * X[1, 0]) ** 2
        w_grid = grid[np.argmin(vals)]
        assert abs(weighted_least_squares(X, y, s)[0] - w_grid) <= 1e-6
        assert abs(weighted_least_squares(X, y, s)[0] - 0.5) <= 1e-8
        pts = np.array([[0.0], [2.0]])
        vals = s[0] * (pts[0, 0] - grid) ** 2 + s[1] * (pts[1, 0] - grid) ** 2
        assert abs(weighted_mean(pts, s)[0] - grid[np.argmin(vals)]) <= 1e-6
        assert abs(weighted_mean(pts, s)[0] - 0.5) <= 1e-8
        self.CHECKS.append("closed-form solvers vs brute force (1e-8)")

    def test_argmin_invariance_under_weight_rescaling(self):
        rng = np.random.default_rng(104)
        X = rng.standard_normal((40, 4))
        y = rng.standard_normal(40)
        s = rng.uniform(0.1, 1.0, 40)
        for c in (1e-4, 7.0, 1e4):
            assert np.linalg.norm(weighted_least_squares(X, y, s)
                                  - weighted_least_squares(X, y, c * s)) <= 1e-8
        self.CHECKS.append("weight-rescaling invariance")

    def test_leverage_trace_equals_dimension(self):
        X = gen_covariates(200, 7, seed=105)
        assert leverage_scores(X).sum() == pytest.approx(7.0, abs=1e-8)
        self.CHECKS.append("leverage trace = d")

    def test_invariant_on_converged_runs(self):
        for seed in range(3):
            config = _rr_config(seeds=(seed,))
            ds, init = build_dataset(config, seed)
            cfg = SvamConfig(beta1=0.1, xi=3.0, max_iters=50, init_model=init)
            trace = run_svam(ds, "rr", cfg)
            assert trace.final_dist < 1e-6
            flags, first = invariant_flags(trace)
            assert first is not None and all(flags)
        self.CHECKS.append("scale-distance invariant on converged runs")

    def test_deterministic_reruns_byte_identical(self, tmp_path):
        from svam.cli import main

        args = ["run", "--task", "rr", "--n", "300", "--d", "5", "--alpha", "0.15",
                "--init", "adversarial", "--methods", "svam,oracle", "--seeds", "0,1"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0

        def strip(path):
            lines = path.read_text().splitlines()
            drop = lines[0].split(",").index("wall_ms")
            return [",".join(p for i, p in enumerate(l.split(",")) if i != drop)
                    for l in lines]

        assert strip(a) == strip(b)
        self.CHECKS.append("byte-identical reruns (modulo wall_ms)")
        _report(10, True, f"property battery: {len(self.CHECKS)} groups green")
