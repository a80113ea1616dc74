"""Alternating max-min optimization: phase ascent, power ascent, regrouping.

Each iteration runs one stochastic-perturbation step on the stacked layer
phases, one on the stream power vector, then (periodically) a bottleneck
regrouping pass.  Every objective evaluation happens at a projected, feasible
point, and the best evaluated point so far is tracked as the incumbent — the
reported curve — so the reported minimum rate never decreases even though raw
iterates fluctuate.

A solve is sequential; independent solves (trials, sweep points) are safe to
run concurrently on separate rng streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet, compose_end_to_end, effective_channel, stream_gains
from .grouping import greedy_refine, kmeans_partition, user_features
from .rsma import Grouping, RateReport, rate_report, user_rate_vector
from .scenario import TWO_PI, Scenario
from .seeding import rng_from
from .spsa import SpsaGains, power_projection, project_power, spsa_step, wrap_phase

SOLVER_DEFAULTS: dict = {
    "max_iterations": 3000,
    "convergence_threshold": 1e-4,
    "grouping_period": 1,
    "stagnation_window": 500,
    "refinement_rounds": 5,
    "solver_seed": 0,
    "feature_mode": "reim",
    "kmeans_replicates": 10,
    "spsa_alpha": 0.602,
    "spsa_gamma": 0.101,
    "spsa_offset_fraction": 0.1,  # A = fraction * max_iterations
    "phase_step": 1.0,  # radians-scale ascent gain
    "phase_perturb": 0.1,  # radians
    "power_step_fraction": 0.1,  # of the transmit budget
    "power_perturb_fraction": 0.01,
}


@dataclass(frozen=True)
class SolveOptions:
    """Budgets, schedules, and seeds for one optimization run."""

    max_iterations: int = 3000
    convergence_threshold: float = 1e-4
    grouping_period: int = 1
    stagnation_window: int | None = 500
    refinement_rounds: int = 5
    gains_phase: SpsaGains | None = None  # default: phase_step/phase_perturb schedule
    gains_power: SpsaGains | None = None  # default: fractions of the power budget
    seed: int = 0
    feature_mode: str = "reim"
    kmeans_replicates: int = 10
    spsa_alpha: float = 0.602
    spsa_gamma: float = 0.101
    spsa_offset_fraction: float = 0.1
    phase_step: float = 1.0
    phase_perturb: float = 0.1
    power_step_fraction: float = 0.1
    power_perturb_fraction: float = 0.01

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations: must be >= 1, got {self.max_iterations}")
        if self.convergence_threshold < 0:
            raise ValueError("convergence_threshold: must be >= 0")
        if self.grouping_period < 1:
            raise ValueError("grouping_period: must be >= 1")
        if self.refinement_rounds < 1:
            raise ValueError("refinement_rounds: must be >= 1")
        if self.stagnation_window is not None and self.stagnation_window < 1:
            raise ValueError("stagnation_window: must be >= 1 or None")

    def phase_gains(self) -> SpsaGains:
        if self.gains_phase is not None:
            return self.gains_phase
        return SpsaGains(
            a=self.phase_step,
            c=self.phase_perturb,
            A=self.spsa_offset_fraction * self.max_iterations,
            alpha=self.spsa_alpha,
            gamma=self.spsa_gamma,
        )

    def power_gains(self, transmit_budget: float) -> SpsaGains:
        if self.gains_power is not None:
            return self.gains_power
        return SpsaGains(
            a=self.power_step_fraction * transmit_budget,
            c=self.power_perturb_fraction * transmit_budget,
            A=self.spsa_offset_fraction * self.max_iterations,
            alpha=self.spsa_alpha,
            gamma=self.spsa_gamma,
        )


def make_solve_options(overrides: dict | None = None) -> SolveOptions:
    """Build SolveOptions from flat configuration keys (see SOLVER_DEFAULTS)."""
    cfg = dict(SOLVER_DEFAULTS)
    for key, value in (overrides or {}).items():
        if key not in cfg:
            raise ValueError(f"unknown solver configuration key: {key!r}")
        cfg[key] = value
    window = cfg["stagnation_window"]
    if isinstance(window, str):
        window = None if window.lower() in ("none", "off") else int(window)
    elif window is not None:
        window = int(window)
    return SolveOptions(
        max_iterations=int(cfg["max_iterations"]),
        convergence_threshold=float(cfg["convergence_threshold"]),
        grouping_period=int(cfg["grouping_period"]),
        stagnation_window=window,
        refinement_rounds=int(cfg["refinement_rounds"]),
        seed=int(cfg["solver_seed"]),
        feature_mode=str(cfg["feature_mode"]),
        kmeans_replicates=int(cfg["kmeans_replicates"]),
        spsa_alpha=float(cfg["spsa_alpha"]),
        spsa_gamma=float(cfg["spsa_gamma"]),
        spsa_offset_fraction=float(cfg["spsa_offset_fraction"]),
        phase_step=float(cfg["phase_step"]),
        phase_perturb=float(cfg["phase_perturb"]),
        power_step_fraction=float(cfg["power_step_fraction"]),
        power_perturb_fraction=float(cfg["power_perturb_fraction"]),
    )


@dataclass
class SolveState:
    """Current iterate, incumbent, and traces of one optimization run.

    ``theta`` holds the stacked layer phases for metasurface schemes, the
    analog precoder angles for hybrid beamforming, and None for power-only
    schemes.  Traces are indexed by iteration (1-based iteration t is row
    t-1); ``trace_evals`` is the cumulative objective-evaluation count.
    """

    iteration: int
    theta: np.ndarray | None
    power: np.ndarray
    grouping: Grouping | None
    best_theta: np.ndarray | None
    best_power: np.ndarray
    best_grouping: Grouping | None
    best_min_rate: float
    trace_raw: list = field(default_factory=list)
    trace_best: list = field(default_factory=list)
    trace_evals: list = field(default_factory=list)
    phase_evaluations: int = 0
    power_evaluations: int = 0
    grouping_evaluations: int = 0


class _Incumbent:
    """Best-so-far feasible point; updated from every evaluated candidate."""

    __slots__ = ("value", "theta", "power", "grouping")

    def __init__(self):
        self.value = -math.inf
        self.theta = None
        self.power = None
        self.grouping = None

    def offer(self, value: float, theta, power, grouping) -> bool:
        if value > self.value:
            self.value = value
            self.theta = None if theta is None else np.array(theta, copy=True)
            self.power = np.array(power, copy=True)
            self.grouping = grouping
            return True
        return False


def _stagnated(trace_best: list, window: int | None, threshold: float) -> bool:
    if window is None or len(trace_best) <= window:
        return False
    return trace_best[-1] - trace_best[-1 - window] <= threshold


def evaluate(theta, power, grouping: Grouping | None, channels: ChannelSet, scenario: Scenario) -> RateReport:
    """Full rate evaluation of one configuration; the objective both
    perturbation solvers and the regrouping pass optimize."""
    gains = stream_gains(channels, np.asarray(theta, dtype=float))
    return rate_report(gains, power, grouping, scenario.noise_power)


def initialize(
    scenario: Scenario,
    channels: ChannelSet,
    options: SolveOptions,
    rng: np.random.Generator | None = None,
) -> SolveState:
    """Random feasible phases and powers, cluster-seeded grouping."""
    if rng is None:
        rng = rng_from(options.seed)
    geometry = scenario.geometry
    theta = rng.uniform(0.0, TWO_PI, size=(geometry.num_layers, geometry.elements_per_layer))
    power = project_power(rng.uniform(0.0, 1.0, size=scenario.num_streams), scenario.transmit_budget)
    if scenario.num_groups >= 1:
        h_eff = compose_end_to_end(
            effective_channel(channels.sim_ue, theta, channels.inter_layer), channels.feed
        )
        feats = user_features(h_eff, options.feature_mode)
        grouping = kmeans_partition(feats, scenario.num_groups, rng, options.kmeans_replicates)
    else:
        grouping = None
    gains = stream_gains(channels, theta)
    group_of = None if grouping is None else np.asarray(grouping.group_of, dtype=int)
    rates = user_rate_vector(gains, power, group_of, scenario.num_groups, scenario.noise_power)
    value = float(rates.min())
    return SolveState(
        iteration=0,
        theta=theta,
        power=power,
        grouping=grouping,
        best_theta=np.array(theta, copy=True),
        best_power=np.array(power, copy=True),
        best_grouping=grouping,
        best_min_rate=value,
    )


def solve(
    scenario: Scenario,
    channels: ChannelSet,
    options: SolveOptions,
    trace_path=None,
) -> SolveState:
    """Run the alternating loop until the budget or the stagnation window.

    Substep order within an iteration is: phases, then powers, then
    regrouping.  The incumbent is offered every point the objective is
    evaluated at (both perturbations of each step, every regrouping
    candidate, and the end-of-iteration iterate).
    """
    rng = rng_from(options.seed)
    state = initialize(scenario, channels, options, rng)
    num_groups = scenario.num_groups
    noise = scenario.noise_power
    k = scenario.num_users
    layers = scenario.geometry.num_layers
    elements = scenario.geometry.elements_per_layer

    incumbent = _Incumbent()
    incumbent.offer(state.best_min_rate, state.theta, state.power, state.grouping)

    gains_phase = options.phase_gains()
    gains_power = options.power_gains(scenario.transmit_budget)
    project_budget = power_projection(scenario.transmit_budget)

    theta = state.theta
    power = state.power
    grouping = state.grouping
    group_of = None if grouping is None else np.asarray(grouping.group_of, dtype=int)
    counts = {"phase": 0, "power": 0, "grouping": 0}

    trace_file = open(trace_path, "w", encoding="utf-8") if trace_path is not None else None
    if trace_file is not None:
        trace_file.write("t,r_min_raw,r_min_incumbent,evals\n")

    try:
        for t in range(1, options.max_iterations + 1):
            # --- stacked phase step ---
            current_power = power
            current_group_of = group_of

            def f_phase(vec: np.ndarray) -> float:
                counts["phase"] += 1
                g = stream_gains(channels, vec.reshape(layers, elements))
                return float(
                    user_rate_vector(g, current_power, current_group_of, num_groups, noise).min()
                )

            theta_vec, diag = spsa_step(
                f_phase, theta.ravel(), t - 1, gains_phase, wrap_phase, rng
            )
            theta = theta_vec.reshape(layers, elements)
            incumbent.offer(diag.f_plus, diag.x_plus.reshape(layers, elements), power, grouping)
            incumbent.offer(diag.f_minus, diag.x_minus.reshape(layers, elements), power, grouping)

            # --- power step (channel gains fixed at the updated phases) ---
            gains_now = stream_gains(channels, theta)

            def f_power(p: np.ndarray) -> float:
                counts["power"] += 1
                return float(user_rate_vector(gains_now, p, current_group_of, num_groups, noise).min())

            power, diag_p = spsa_step(f_power, power, t - 1, gains_power, project_budget, rng)
            incumbent.offer(diag_p.f_plus, theta, diag_p.x_plus, grouping)
            incumbent.offer(diag_p.f_minus, theta, diag_p.x_minus, grouping)

            # --- bottleneck regrouping ---
            if grouping is not None and t % options.grouping_period == 0:
                power_now = power

                def rate_eval(candidate: Grouping) -> np.ndarray:
                    counts["grouping"] += 1
                    rates = user_rate_vector(
                        gains_now,
                        power_now,
                        np.asarray(candidate.group_of, dtype=int),
                        num_groups,
                        noise,
                    )
                    incumbent.offer(float(rates.min()), theta, power_now, candidate)
                    return rates

                grouping = greedy_refine(rate_eval, grouping, options.refinement_rounds)
                group_of = np.asarray(grouping.group_of, dtype=int)

            raw = float(user_rate_vector(gains_now, power, group_of, num_groups, noise).min())
            incumbent.offer(raw, theta, power, grouping)

            state.trace_raw.append(raw)
            state.trace_best.append(incumbent.value)
            state.trace_evals.append(counts["phase"] + counts["power"] + counts["grouping"])
            if trace_file is not None:
                trace_file.write(
                    f"{t},{raw!r},{incumbent.value!r},{state.trace_evals[-1]}\n"
                )
            state.iteration = t
            if _stagnated(state.trace_best, options.stagnation_window, options.convergence_threshold):
                break
    finally:
        if trace_file is not None:
            trace_file.close()

    state.theta = theta
    state.power = power
    state.grouping = grouping
    state.best_theta = incumbent.theta
    state.best_power = incumbent.power
    state.best_grouping = incumbent.grouping
    state.best_min_rate = incumbent.value
    state.phase_evaluations = counts["phase"]
    state.power_evaluations = counts["power"]
    state.grouping_evaluations = counts["grouping"]
    return state
