"""The six compared transmission schemes behind one dispatch surface.

Metasurface schemes run the full alternating solver; non-precoding schemes
optimize only the power vector over a fixed direct channel; hybrid
beamforming alternates perturbation ascent on the analog phases, a
regularized zero-forcing digital stage, and power ascent.  Every scheme
evaluates rates through the shared rate module and satisfies the same power
budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .ao import SolveOptions, SolveState, _Incumbent, _stagnated, evaluate, solve
from .channel import direct_bs_channel, draw_direct_nlos_pool, synthesize_channels
from .grouping import greedy_refine, kmeans_partition, user_features
from .rsma import Grouping, RateReport, rate_report, user_rate_vector
from .scenario import TWO_PI, Scenario, with_group_count
from .seeding import rng_from
from .spsa import power_projection, project_power, spsa_step, wrap_phase


class SchemeId(str, Enum):
    """Scheme vocabulary; values are the CSV ``scheme`` column entries."""

    SIM_HRSMA = "sim_hrsma"
    SIM_RSMA = "sim_rsma"
    NP_HRSMA = "np_hrsma"
    NP_RSMA = "np_rsma"
    HBF_HRSMA = "hbf_hrsma"
    HBF_RSMA = "hbf_rsma"

    @classmethod
    def from_name(cls, name: str) -> "SchemeId":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(
                f"unknown scheme {name!r}; expected one of {[s.value for s in cls]}"
            ) from None


@dataclass(frozen=True)
class HbfConfig:
    """Hybrid-beamforming stage sizes; one RF chain per message stream.

    ``fixed_analog`` bypasses analog optimization with a given (possibly
    non-unit-modulus) matrix — a sanity mode that reduces the scheme to its
    digital stage.
    """

    antenna_count: int
    rf_chain_count: int
    fixed_analog: np.ndarray | None = None

    def __post_init__(self):
        if self.antenna_count < self.rf_chain_count:
            raise ValueError(
                f"HbfConfig: antenna_count {self.antenna_count} must be >= rf_chain_count {self.rf_chain_count}"
            )


def rzf_precoder(channel: np.ndarray, regularization: float) -> np.ndarray:
    """Regularized zero-forcing columns, one per user row of ``channel``."""
    if regularization <= 0:
        raise ValueError("rzf_precoder: regularization must be positive")
    k = channel.shape[0]
    gram = channel @ channel.conj().T + regularization * np.eye(k)
    return channel.conj().T @ np.linalg.inv(gram)


def hbf_stream_gains(
    direct: np.ndarray,
    analog: np.ndarray,
    grouping: Grouping | None,
    num_groups: int,
    regularization: float,
) -> np.ndarray:
    """Per-(user, stream) gains through the analog + digital precoder chain.

    The digital stage takes regularized zero-forcing user columns on the
    analog-composed channel; the common column sums all users, each group
    column sums its members.  Composite columns are normalized to unit power
    so stream powers stay comparable across schemes.
    """
    composed = direct @ analog  # (K, N_RF)
    users = rzf_precoder(composed, regularization)  # (N_RF, K)
    k = direct.shape[0]
    cols = [users.sum(axis=1)]
    if num_groups:
        if grouping is None:
            raise ValueError("hbf_stream_gains: grouping required when num_groups > 0")
        group_of = np.asarray(grouping.group_of)
        for n in range(num_groups):
            members = group_of == n
            cols.append(users[:, members].sum(axis=1) if members.any() else np.zeros(users.shape[0], dtype=complex))
    cols.extend(users[:, j] for j in range(k))
    digital = np.stack(cols, axis=1)  # (N_RF, 1+N+K)
    composite = analog @ digital  # (N_ant, N_t)
    norms = np.linalg.norm(composite, axis=0)
    norms = np.where(norms == 0.0, 1.0, norms)
    return np.abs(direct @ (composite / norms)) ** 2


def solve_sim_rsma(scenario: Scenario, channels, options: SolveOptions) -> SolveState:
    """Metasurface scheme without group streams; the solver skips regrouping."""
    if scenario.num_groups != 0:
        raise ValueError("solve_sim_rsma: scenario must be reconfigured with num_groups = 0")
    return solve(scenario, channels, options)


def _init_grouping(scenario, complex_channel, options, rng):
    if scenario.num_groups < 1:
        return None
    feats = user_features(complex_channel, options.feature_mode)
    return kmeans_partition(feats, scenario.num_groups, rng, options.kmeans_replicates)


def solve_non_precoding(
    scenario: Scenario,
    hierarchical: bool,
    options: SolveOptions,
    trace_path=None,
) -> SolveState:
    """One antenna per stream, no precoding: only the power split is optimized."""
    if hierarchical != (scenario.num_groups > 0):
        raise ValueError("solve_non_precoding: hierarchical flag must match num_groups > 0")
    rng = rng_from(options.seed)
    pool = draw_direct_nlos_pool(scenario)
    direct = direct_bs_channel(scenario, scenario.num_streams, pool)
    gains = np.abs(direct) ** 2
    num_groups = scenario.num_groups
    noise = scenario.noise_power

    power = project_power(rng.uniform(0.0, 1.0, scenario.num_streams), scenario.transmit_budget)
    grouping = _init_grouping(scenario, direct, options, rng)
    group_of = None if grouping is None else np.asarray(grouping.group_of, dtype=int)

    incumbent = _Incumbent()
    incumbent.offer(
        float(user_rate_vector(gains, power, group_of, num_groups, noise).min()),
        None,
        power,
        grouping,
    )
    state = SolveState(
        iteration=0,
        theta=None,
        power=power,
        grouping=grouping,
        best_theta=None,
        best_power=incumbent.power,
        best_grouping=grouping,
        best_min_rate=incumbent.value,
    )
    gains_power = options.power_gains(scenario.transmit_budget)
    project_budget = power_projection(scenario.transmit_budget)
    counts = {"power": 0, "grouping": 0}

    trace_file = open(trace_path, "w", encoding="utf-8") if trace_path is not None else None
    if trace_file is not None:
        trace_file.write("t,r_min_raw,r_min_incumbent,evals\n")
    try:
        for t in range(1, options.max_iterations + 1):
            current_group_of = group_of

            def f_power(p: np.ndarray) -> float:
                counts["power"] += 1
                return float(user_rate_vector(gains, p, current_group_of, num_groups, noise).min())

            power, diag = spsa_step(f_power, power, t - 1, gains_power, project_budget, rng)
            incumbent.offer(diag.f_plus, None, diag.x_plus, grouping)
            incumbent.offer(diag.f_minus, None, diag.x_minus, grouping)

            if grouping is not None and t % options.grouping_period == 0:
                power_now = power

                def rate_eval(candidate: Grouping) -> np.ndarray:
                    counts["grouping"] += 1
                    rates = user_rate_vector(
                        gains, power_now, np.asarray(candidate.group_of, dtype=int), num_groups, noise
                    )
                    incumbent.offer(float(rates.min()), None, power_now, candidate)
                    return rates

                grouping = greedy_refine(rate_eval, grouping, options.refinement_rounds)
                group_of = np.asarray(grouping.group_of, dtype=int)

            raw = float(user_rate_vector(gains, power, group_of, num_groups, noise).min())
            incumbent.offer(raw, None, power, grouping)
            state.trace_raw.append(raw)
            state.trace_best.append(incumbent.value)
            state.trace_evals.append(counts["power"] + counts["grouping"])
            if trace_file is not None:
                trace_file.write(f"{t},{raw!r},{incumbent.value!r},{state.trace_evals[-1]}\n")
            state.iteration = t
            if _stagnated(state.trace_best, options.stagnation_window, options.convergence_threshold):
                break
    finally:
        if trace_file is not None:
            trace_file.close()

    state.power = power
    state.grouping = grouping
    state.best_power = incumbent.power
    state.best_grouping = incumbent.grouping
    state.best_min_rate = incumbent.value
    state.power_evaluations = counts["power"]
    state.grouping_evaluations = counts["grouping"]
    return state


def solve_hbf(
    scenario: Scenario,
    hierarchical: bool,
    hbf: HbfConfig,
    options: SolveOptions,
    trace_path=None,
) -> SolveState:
    """Alternating analog-phase ascent, zero-forcing digital stage, power ascent."""
    if hierarchical != (scenario.num_groups > 0):
        raise ValueError("solve_hbf: hierarchical flag must match num_groups > 0")
    if hbf.rf_chain_count != scenario.num_streams:
        raise ValueError(
            f"solve_hbf: rf_chain_count {hbf.rf_chain_count} must equal the stream count {scenario.num_streams}"
        )
    rng = rng_from(options.seed)
    pool = draw_direct_nlos_pool(scenario)
    direct = direct_bs_channel(scenario, hbf.antenna_count, pool)
    reg = scenario.num_streams * scenario.noise_power / scenario.transmit_budget
    num_groups = scenario.num_groups
    noise = scenario.noise_power
    optimize_analog = hbf.fixed_analog is None
    if optimize_analog:
        analog_angles = rng.uniform(0.0, TWO_PI, size=(hbf.antenna_count, hbf.rf_chain_count))
        analog = np.exp(1j * analog_angles)
    else:
        analog_angles = None
        analog = np.asarray(hbf.fixed_analog, dtype=complex)

    power = project_power(rng.uniform(0.0, 1.0, scenario.num_streams), scenario.transmit_budget)
    grouping = _init_grouping(scenario, direct @ analog, options, rng)
    group_of = None if grouping is None else np.asarray(grouping.group_of, dtype=int)

    gains_now = hbf_stream_gains(direct, analog, grouping, num_groups, reg)
    incumbent = _Incumbent()
    incumbent.offer(
        float(user_rate_vector(gains_now, power, group_of, num_groups, noise).min()),
        analog_angles,
        power,
        grouping,
    )
    state = SolveState(
        iteration=0,
        theta=analog_angles,
        power=power,
        grouping=grouping,
        best_theta=incumbent.theta,
        best_power=incumbent.power,
        best_grouping=grouping,
        best_min_rate=incumbent.value,
    )
    gains_phase = options.phase_gains()
    gains_power = options.power_gains(scenario.transmit_budget)
    project_budget = power_projection(scenario.transmit_budget)
    counts = {"phase": 0, "power": 0, "grouping": 0}
    shape = (hbf.antenna_count, hbf.rf_chain_count)

    trace_file = open(trace_path, "w", encoding="utf-8") if trace_path is not None else None
    if trace_file is not None:
        trace_file.write("t,r_min_raw,r_min_incumbent,evals\n")
    try:
        for t in range(1, options.max_iterations + 1):
            current_power = power
            current_grouping = grouping
            current_group_of = group_of

            if optimize_analog:

                def f_analog(vec: np.ndarray) -> float:
                    counts["phase"] += 1
                    g = hbf_stream_gains(
                        direct, np.exp(1j * vec.reshape(shape)), current_grouping, num_groups, reg
                    )
                    return float(
                        user_rate_vector(g, current_power, current_group_of, num_groups, noise).min()
                    )

                vec, diag = spsa_step(
                    f_analog, analog_angles.ravel(), t - 1, gains_phase, wrap_phase, rng
                )
                analog_angles = vec.reshape(shape)
                analog = np.exp(1j * analog_angles)
                incumbent.offer(diag.f_plus, diag.x_plus.reshape(shape), power, grouping)
                incumbent.offer(diag.f_minus, diag.x_minus.reshape(shape), power, grouping)

            gains_now = hbf_stream_gains(direct, analog, grouping, num_groups, reg)

            def f_power(p: np.ndarray) -> float:
                counts["power"] += 1
                return float(user_rate_vector(gains_now, p, current_group_of, num_groups, noise).min())

            power, diag_p = spsa_step(f_power, power, t - 1, gains_power, project_budget, rng)
            incumbent.offer(diag_p.f_plus, analog_angles, diag_p.x_plus, grouping)
            incumbent.offer(diag_p.f_minus, analog_angles, diag_p.x_minus, grouping)

            if grouping is not None and t % options.grouping_period == 0:
                power_now = power

                def rate_eval(candidate: Grouping) -> np.ndarray:
                    counts["grouping"] += 1
                    g = hbf_stream_gains(direct, analog, candidate, num_groups, reg)
                    rates = user_rate_vector(
                        g, power_now, np.asarray(candidate.group_of, dtype=int), num_groups, noise
                    )
                    incumbent.offer(float(rates.min()), analog_angles, power_now, candidate)
                    return rates

                new_grouping = greedy_refine(rate_eval, grouping, options.refinement_rounds)
                if new_grouping is not grouping:
                    grouping = new_grouping
                    group_of = np.asarray(grouping.group_of, dtype=int)
                    gains_now = hbf_stream_gains(direct, analog, grouping, num_groups, reg)

            raw = float(user_rate_vector(gains_now, power, group_of, num_groups, noise).min())
            incumbent.offer(raw, analog_angles, power, grouping)
            state.trace_raw.append(raw)
            state.trace_best.append(incumbent.value)
            state.trace_evals.append(counts["phase"] + counts["power"] + counts["grouping"])
            if trace_file is not None:
                trace_file.write(f"{t},{raw!r},{incumbent.value!r},{state.trace_evals[-1]}\n")
            state.iteration = t
            if _stagnated(state.trace_best, options.stagnation_window, options.convergence_threshold):
                break
    finally:
        if trace_file is not None:
            trace_file.close()

    state.theta = analog_angles
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


def scheme_scenario(scheme: SchemeId, scenario: Scenario) -> Scenario:
    """The scenario a scheme actually runs: RSMA variants drop the groups."""
    if scheme in (SchemeId.SIM_RSMA, SchemeId.NP_RSMA, SchemeId.HBF_RSMA):
        return with_group_count(scenario, 0)
    return scenario


def run_scheme(
    scheme: SchemeId,
    scenario: Scenario,
    options: SolveOptions,
    trace_path=None,
) -> tuple[SolveState, RateReport]:
    """Run one scheme on one trial; returns the solve state and the rate
    report of the incumbent configuration."""
    scen = scheme_scenario(scheme, scenario)
    hierarchical = scen.num_groups > 0
    if scheme in (SchemeId.SIM_HRSMA, SchemeId.SIM_RSMA):
        channels = synthesize_channels(scen)
        state = solve(scen, channels, options, trace_path=trace_path)
        report = evaluate(state.best_theta, state.best_power, state.best_grouping, channels, scen)
    elif scheme in (SchemeId.NP_HRSMA, SchemeId.NP_RSMA):
        state = solve_non_precoding(scen, hierarchical, options, trace_path=trace_path)
        direct = direct_bs_channel(scen, scen.num_streams, draw_direct_nlos_pool(scen))
        report = rate_report(direct, state.best_power, state.best_grouping, scen.noise_power)
    else:
        antennas = scen.hbf_antennas if scen.hbf_antennas > 0 else scen.num_streams
        hbf = HbfConfig(antenna_count=antennas, rf_chain_count=scen.num_streams)
        state = solve_hbf(scen, hierarchical, hbf, options, trace_path=trace_path)
        direct = direct_bs_channel(scen, antennas, draw_direct_nlos_pool(scen))
        reg = scen.num_streams * scen.noise_power / scen.transmit_budget
        gains = hbf_stream_gains(
            direct, np.exp(1j * state.best_theta), state.best_grouping, scen.num_groups, reg
        )
        report = rate_report(gains, state.best_power, state.best_grouping, scen.noise_power)
    return state, report
