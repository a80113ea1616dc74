"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Trend criteria run at desk scale (small arrays, reduced trials) where the
documented operating points were chosen so the effect under test is not
masked by noise-limited operation; exact criteria run at their stated
tolerances.  Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import math
import time

import numpy as np
import pytest

from simrsma.ao import evaluate, make_solve_options, solve
from simrsma.baselines import SchemeId, run_scheme
from simrsma.channel import (
    draw_sim_ue_channel,
    effective_channel,
    inter_layer_matrix,
    stream_gains,
    synthesize_channels,
)
from simrsma.grouping import brute_force_grouping, greedy_refine, kmeans_partition, user_features
from simrsma.harness import SweepSpec, run_sweep, write_results
from simrsma.rsma import Grouping, rate_report, user_rate_vector
from simrsma.scenario import SPEED_OF_LIGHT, Vec3, build_upa_layout, make_scenario
from simrsma.seeding import STREAM_SOLVER, child_seed
from simrsma.spsa import SpsaGains, gradient_estimate, project_power, spsa_step, wrap_phase

from test_rsma import random_instance, scalar_rates

LAM = SPEED_OF_LIGHT / 28e9

DESK = {
    "num_layers": 4,
    "elements_per_layer": 16,
    "num_users": 4,
    "num_groups": 2,
}


def report(criterion: str, passed: bool, detail: str) -> None:
    print(f"{criterion}: {'PASS' if passed else 'FAIL'} ({detail})")
    assert passed, f"{criterion}: {detail}"


def paired_min_rates(scheme: SchemeId, config: dict, trials: int, seed_base: int, solver: dict):
    """Per-trial incumbent minimum rates for one scheme, paired by trial seed."""
    out = []
    for trial in range(trials):
        trial_seed = child_seed(seed_base, 0, trial)
        scen = make_scenario({**config, "master_seed": trial_seed})
        opts = make_solve_options(
            {**solver, "solver_seed": child_seed(trial_seed, STREAM_SOLVER, list(SchemeId).index(scheme))}
        )
        _, rep = run_scheme(scheme, scen, opts)
        out.append(rep.min_rate)
    return np.asarray(out)


# --- P3/P4 share one batch of paired desk trials ---
DESK_TRIALS = 30
DESK_SOLVER = {"max_iterations": 1500, "stagnation_window": 500}
_desk_cache: dict = {}


def desk_rates(scheme: SchemeId) -> np.ndarray:
    if scheme not in _desk_cache:
        _desk_cache[scheme] = paired_min_rates(scheme, DESK, DESK_TRIALS, 8101, DESK_SOLVER)
    return _desk_cache[scheme]


class TestP1IncumbentMonotonicity:
    def test_p1(self):
        start = time.perf_counter()
        ok = True
        worst = 0.0
        for seed in range(20):
            scen = make_scenario({**DESK, "master_seed": child_seed(4242, 0, seed)})
            channels = synthesize_channels(scen)
            opts = make_solve_options(
                {"max_iterations": 3000, "stagnation_window": "none", "solver_seed": seed}
            )
            state = solve(scen, channels, opts)
            trace = np.asarray(state.trace_best)
            dips = np.diff(trace)
            ok &= len(trace) == 3000 and bool(np.all(dips >= 0.0))
            worst = min(worst, float(dips.min()) if dips.size else 0.0)
        elapsed = time.perf_counter() - start
        report(
            "P1 incumbent monotonicity",
            ok and elapsed < 300.0,
            f"20 seeds x 3000 iterations, worst step {worst:.3e}, {elapsed:.0f}s",
        )


class TestP2LayerTrend:
    def test_p2(self):
        solver = {"max_iterations": 3000, "stagnation_window": 500}
        r2 = paired_min_rates(SchemeId.SIM_HRSMA, {**DESK, "num_layers": 2}, 30, 777, solver)
        r5 = paired_min_rates(SchemeId.SIM_HRSMA, {**DESK, "num_layers": 5}, 30, 777, solver)
        wins = int(np.sum(r5 > r2))
        ok = (r5.mean() > r2.mean()) and wins >= 21
        report(
            "P2 layer trend",
            ok,
            f"mean L=5 {r5.mean():.3f} vs L=2 {r2.mean():.3f}, wins {wins}/30 (need >= 21)",
        )


class TestP3HierarchyGain:
    def test_p3(self):
        hrsma = desk_rates(SchemeId.SIM_HRSMA)
        rsma = desk_rates(SchemeId.SIM_RSMA)
        wins = int(np.sum(hrsma >= rsma))
        ok = wins >= 18
        report(
            "P3 hierarchy gain",
            ok,
            f"HRSMA >= RSMA in {wins}/30 pairs (need >= 18); means {hrsma.mean():.3f} vs {rsma.mean():.3f}",
        )


class TestP4SimVersusNonPrecoding:
    def test_p4(self):
        sim = desk_rates(SchemeId.SIM_HRSMA)
        nop = desk_rates(SchemeId.NP_HRSMA)
        ratio = sim.mean() / nop.mean()
        ok = ratio >= 2.0
        report(
            "P4 metasurface vs non-precoding",
            ok,
            f"mean ratio {ratio:.2f} (need >= 2.0); {sim.mean():.3f} vs {nop.mean():.3f} at 20 dBm",
        )


class TestP5SpsaEstimator:
    def test_p5(self):
        start = time.perf_counter()
        # unbiasedness: frozen well-conditioned instance, 1e5 two-sided estimates
        rng = np.random.default_rng(46)
        dim = 20
        a_mat = rng.standard_normal((dim, dim))
        q = a_mat @ a_mat.T / dim + 0.5 * np.eye(dim)
        b = rng.uniform(2.5, 3.5, dim) * rng.choice([-1.0, 1.0], dim)
        x0 = 0.3 * rng.standard_normal(dim)
        grad = b - 2 * q @ x0

        def f(x):
            return float(-x @ q @ x + b @ x)

        draws = 100_000
        acc = np.zeros(dim)
        for _ in range(draws):
            g_hat, *_ = gradient_estimate(f, x0, 1e-4, rng)
            acc += g_hat
        rel = np.abs(acc / draws - grad) / np.abs(grad)
        estimator_ok = bool(rel.max() < 0.02)

        # convergence: 20-D quadratic peak, 2000 steps, 100 seeds
        wins = 0
        gains = SpsaGains(a=0.5, c=0.1, A=100.0)
        for seed in range(100):
            rng_c = np.random.default_rng(seed)
            target = rng_c.uniform(-1, 1, 20)
            x = rng_c.uniform(-1, 1, 20)

            def f_quad(z):
                return -float(np.sum((z - target) ** 2))

            for t in range(2000):
                x, _ = spsa_step(f_quad, x, t, gains, lambda v: v, rng_c)
            if np.linalg.norm(x - target) < 0.1:
                wins += 1
        elapsed = time.perf_counter() - start
        ok = estimator_ok and wins >= 95 and elapsed < 60.0
        report(
            "P5 perturbation estimator",
            ok,
            f"max per-coordinate rel err {rel.max():.4f} (need < 0.02), "
            f"convergence {wins}/100 (need >= 95), {elapsed:.0f}s",
        )


class TestP6ProjectionContracts:
    def test_p6(self):
        rng = np.random.default_rng(99)
        z = rng.uniform(-50.0, 50.0, 100_000)
        w = wrap_phase(z)
        wrap_ok = bool(np.all(w >= 0.0) and np.all(w < 2 * math.pi) and np.array_equal(wrap_phase(w), w))

        budget = 0.1
        vectors = rng.uniform(-1.0, 2.0, size=(100_000, 9))
        projected = project_power(vectors, budget)
        sums = projected.sum(axis=1)
        has_positive = np.maximum(vectors, 0.0).sum(axis=1) > 1e-12 * budget
        again = project_power(projected, budget)
        power_ok = bool(
            np.all(projected >= 0.0)
            and np.all(np.abs(sums[has_positive] - budget) <= 1e-9)
            and np.max(np.abs(again - projected)) < 1e-12
        )
        report(
            "P6 projection contracts",
            wrap_ok and power_ok,
            f"wrap range/idempotence {wrap_ok}, budget scaling/idempotence {power_ok}, 1e5 samples each",
        )


class TestP7RateMathOracle:
    def test_p7(self):
        rng = np.random.default_rng(321)
        worst = 0.0
        for i in range(100):
            k = int(rng.integers(1, 4))
            num_groups = int(rng.integers(0, k + 1))
            gains, p_vec, group_of = random_instance(rng, k, num_groups)
            grouping = Grouping(tuple(int(g) for g in group_of), num_groups) if num_groups else None
            rep = rate_report(gains, p_vec, grouping, 0.31)
            ref = scalar_rates(gains, p_vec, group_of, num_groups, 0.31)
            worst = max(worst, float(np.max(np.abs(rep.rate_users - ref[5]))))
            worst = max(worst, float(np.max(np.abs(rep.sinr_common - ref[0]))))
            worst = max(worst, float(np.max(np.abs(rep.sinr_private - ref[2]))))
        ok = worst < 1e-12
        report("P7 rate-math oracle", ok, f"100 instances K<=3, max |delta| {worst:.2e} (need < 1e-12)")


class TestP8ChannelOracles:
    def test_p8(self):
        # (a) inter-layer symmetry for identical parallel layouts
        a = build_upa_layout(4, 4, LAM / 2, Vec3(0.0, 0.0, 0.0))
        b = build_upa_layout(4, 4, LAM / 2, Vec3(0.0, LAM / 4, 0.0))
        w = inter_layer_matrix(a, b, (LAM / 2) ** 2, LAM)
        asym = float(np.max(np.abs(w - w.T)))
        sym_ok = asym < 1e-12

        # (b) two-layer effective channel vs brute-force summation
        rng = np.random.default_rng(5)
        q2 = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        w2 = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        theta2 = rng.uniform(0, 2 * math.pi, (2, 2))
        got = effective_channel(q2, theta2, [w2])
        brute = np.zeros((2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                for m in range(2):
                    brute[i, j] += (
                        q2[i, m]
                        * np.exp(1j * theta2[1, m])
                        * w2[m, j]
                        * np.exp(1j * theta2[0, j])
                    )
        brute_err = float(np.max(np.abs(got - brute)))
        brute_ok = brute_err < 1e-12

        # (c) single layer with identity phases
        q1 = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
        identity_ok = bool(np.array_equal(effective_channel(q1, np.zeros((1, 4)), []), q1))

        # (d) Rician second moment: E|q|^2 = amplitude^2 for any factor
        variance_ok = True
        detail_var = []
        for k_r in (0.0, 10**1.3):
            scen = make_scenario(
                {"num_users": 2, "num_groups": 0, "elements_per_layer": 16, "num_layers": 2,
                 "rician_factor": k_r, "master_seed": 12}
            )
            rng_d = np.random.default_rng(77)
            draws = 3200  # 3200 draws x 2 users x 16 entries > 1e5 samples
            acc = np.zeros(scen.num_users)
            amplitudes = None
            for _ in range(draws):
                q, amplitudes, _ = draw_sim_ue_channel(scen, rng_d)
                acc += (np.abs(q) ** 2).mean(axis=1)
            rel = np.abs(acc / draws / amplitudes**2 - 1.0)
            detail_var.append(float(rel.max()))
            variance_ok &= bool(np.all(rel < 0.02))

        ok = sym_ok and brute_ok and identity_ok and variance_ok
        report(
            "P8 channel oracles",
            ok,
            f"asymmetry {asym:.1e}, brute-force err {brute_err:.1e}, identity {identity_ok}, "
            f"Rician rel dev {max(detail_var):.4f} (need < 0.02)",
        )


class TestP9GroupingOracle:
    def test_p9(self):
        # instances are converged desk operating points (the context the
        # grouping pass actually runs in), one per random trial seed
        rng = np.random.default_rng(2718)
        dominated = 0
        improved = 0
        near_optimal = 0
        instances = 50
        for i in range(instances):
            scen = make_scenario(
                {"num_users": 6, "num_groups": 2, "num_layers": 2, "elements_per_layer": 16,
                 "master_seed": child_seed(31337, 0, i)}
            )
            channels = synthesize_channels(scen)
            opts = make_solve_options(
                {"max_iterations": 800, "stagnation_window": "none", "solver_seed": i}
            )
            state = solve(scen, channels, opts)
            theta, power = state.best_theta, state.best_power
            gains = stream_gains(channels, theta)

            def rate_eval(grouping):
                return user_rate_vector(
                    gains, power, np.asarray(grouping.group_of, dtype=int), 2, scen.noise_power
                )

            h_eff = effective_channel(channels.sim_ue, theta, channels.inter_layer) @ channels.feed
            init = kmeans_partition(user_features(h_eff), 2, rng)
            refined = greedy_refine(rate_eval, init, max_rounds=5)
            _, oracle_min = brute_force_grouping(rate_eval, 6, 2)
            init_min = float(rate_eval(init).min())
            refined_min = float(rate_eval(refined).min())
            dominated += oracle_min >= refined_min - 1e-12
            improved += refined_min >= init_min - 1e-15
            near_optimal += refined_min >= 0.9 * oracle_min
        ok = dominated == instances and improved == instances and near_optimal >= instances // 2
        report(
            "P9 grouping oracle",
            ok,
            f"oracle dominates {dominated}/50, greedy >= init {improved}/50, "
            f">=90% of oracle in {near_optimal}/50 (need >= 25)",
        )


class TestP10ComplexityScaling:
    def test_p10(self):
        # chain-dominated shape: many users and layers so the per-layer U x U
        # products dwarf the feed composition and the rate math
        k_users, layers = 128, 32
        sizes = (16, 36, 64, 100)
        works = {}
        for u in sizes:
            scen = make_scenario(
                {"num_users": k_users, "num_groups": 2, "num_layers": layers,
                 "elements_per_layer": u, "master_seed": 1000 + u}
            )
            channels = synthesize_channels(scen)
            rng = np.random.default_rng(u)
            theta = rng.uniform(0, 2 * math.pi, (layers, u))
            power = project_power(rng.uniform(0, 1, scen.num_streams), scen.transmit_budget)
            grouping = Grouping(tuple(int(g) for g in rng.integers(0, 2, k_users)), 2)
            works[u] = (scen, channels, theta, power, grouping)
            evaluate(theta, power, grouping, channels, scen)

        inner = {}
        for u in sizes:
            scen, channels, theta, power, grouping = works[u]
            t0 = time.perf_counter()
            evaluate(theta, power, grouping, channels, scen)
            inner[u] = max(2, int(0.003 / max(time.perf_counter() - t0, 1e-7)))

        best = {u: np.inf for u in sizes}
        for _ in range(14):  # interleaved rounds damp load drift
            for u in sizes:
                scen, channels, theta, power, grouping = works[u]
                reps = inner[u]
                t0 = time.perf_counter()
                for _ in range(reps):
                    evaluate(theta, power, grouping, channels, scen)
                best[u] = min(best[u], (time.perf_counter() - t0) / reps)

        times = np.array([best[u] for u in sizes])
        slope = float(np.polyfit(np.log(sizes), np.log(times), 1)[0])
        detail = (
            "wall us per evaluate: "
            + ", ".join(f"U={u}: {best[u] * 1e6:.0f}" for u in sizes)
            + f"; log-log slope {slope:.3f} (need 1.7..2.3)"
        )
        report("P10 complexity scaling", 1.7 <= slope <= 2.3, detail)


class TestP11SpacingSweepShape:
    def test_p11(self):
        # interference-limited operating point (high budget, six users) so the
        # spacing effect is structural rather than a noise-floor artifact
        config = {
            "num_layers": 7,
            "elements_per_layer": 16,
            "num_users": 6,
            "num_groups": 2,
            "transmit_budget_dbm": 40.0,
        }
        solver = {"max_iterations": 1500, "stagnation_window": 500}
        arms = {}
        for label, frac in (("lam/24", 1 / 24), ("5lam/24", 5 / 24), ("lam", 1.0)):
            arms[label] = paired_min_rates(
                SchemeId.SIM_HRSMA,
                {**config, "layer_spacing_m": frac * LAM},
                30,
                9090,
                solver,
            )
        mid = arms["5lam/24"]
        ok = True
        details = []
        for label in ("lam/24", "lam"):
            end = arms[label]
            wins = int(np.sum(mid > end))
            arm_ok = (mid.mean() > end.mean()) or (wins >= 18)
            ok &= arm_ok
            details.append(f"vs {label}: means {mid.mean():.3f}>{end.mean():.3f}? wins {wins}/30")
        report("P11 spacing sweep shape", ok, "; ".join(details))


class TestP12Determinism:
    def test_p12(self, tmp_path):
        spec = SweepSpec(
            parameter="layers",
            values=(2.0, 3.0),
            schemes=(SchemeId.SIM_HRSMA, SchemeId.NP_HRSMA),
            trials=2,
            master_seed=5150,
            base_config={**DESK},
            solver_config={"max_iterations": 100, "stagnation_window": "none"},
        )
        paths = []
        for name in ("a.csv", "b.csv"):
            rows = run_sweep(spec)
            path = tmp_path / name
            write_results(path, rows)
            paths.append(path)

        def strip_wall(path):
            out = []
            for line in path.read_text().splitlines()[1:]:
                cells = line.split(",")
                cells[8] = "-"
                out.append(",".join(cells))
            return "\n".join(out)

        identical = strip_wall(paths[0]) == strip_wall(paths[1])
        checksums = {
            line.split(",")[-1]
            for line in paths[0].read_text().splitlines()[1:]
            if line.split(",")[1] == "2.0" and line.split(",")[3] == "0"
        }
        paired = len(checksums) == 1
        report(
            "P12 determinism",
            identical and paired,
            f"rerun byte-identical modulo wall time: {identical}; per-trial checksums paired: {paired}",
        )
