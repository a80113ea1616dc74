"""Batch experiment driver: sweeps, paired Monte-Carlo trials, CSV persistence.

One trial = one child seed = one scenario + one channel realization, shared
read-only by every scheme (paired comparison).  Child seeds come from a
splittable integer hash of (master seed, value index, trial index), checked
for collisions across the sweep.  Output rows are canonically ordered, so a
rerun of the same spec reproduces the CSV byte-for-byte except for wall-time.
"""

from __future__ import annotations

import hashlib
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .ao import SOLVER_DEFAULTS, make_solve_options
from .baselines import SchemeId, run_scheme
from .channel import draw_direct_nlos_pool, draw_sim_ue_channel
from .scenario import CONFIG_DEFAULTS, SPEED_OF_LIGHT, Scenario, make_scenario
from .seeding import STREAM_SIM_UE, STREAM_SOLVER, child_seed, rng_from

SWEEP_PARAMETERS = ("layers", "elements", "antennas", "power", "users", "spacing")

RESULTS_COLUMNS = (
    "sweep_param",
    "sweep_value",
    "scheme",
    "trial",
    "seed",
    "r_min_bpshz",
    "r_users_bpshz",
    "iters",
    "wall_ms",
    "channel_checksum",
)

SUMMARY_COLUMNS = (
    "sweep_param",
    "sweep_value",
    "scheme",
    "trials",
    "mean_r_min_bpshz",
    "stderr_r_min_bpshz",
)


@dataclass(frozen=True)
class SweepSpec:
    """One batch experiment: a swept parameter, schemes, and trial count.

    ``values`` semantics by parameter: layers/elements/users are counts,
    antennas is the hybrid-beamforming element count, power is dBm, spacing
    is the inter-layer gap in wavelengths.
    """

    parameter: str
    values: tuple[float, ...]
    schemes: tuple[SchemeId, ...]
    trials: int
    master_seed: int
    base_config: dict = field(default_factory=dict)
    solver_config: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise ValueError(f"SweepSpec: parameter must be one of {SWEEP_PARAMETERS}")
        if len(self.values) == 0:
            raise ValueError("SweepSpec: values must not be empty")
        if len(self.schemes) == 0:
            raise ValueError("SweepSpec: schemes must not be empty")
        if self.trials < 1:
            raise ValueError("SweepSpec: trials must be >= 1")


@dataclass(frozen=True)
class TrialResult:
    sweep_param: str
    sweep_value: float
    scheme: str
    trial: int
    seed: int
    r_min: float
    r_users: tuple[float, ...]
    iters: int
    wall_ms: float
    channel_checksum: str


@dataclass(frozen=True)
class SummaryRow:
    sweep_param: str
    sweep_value: float
    scheme: str
    trials: int
    mean_r_min: float
    stderr_r_min: float


def apply_sweep_value(base_config: dict, parameter: str, value: float) -> dict:
    """Overlay one sweep point onto the base configuration."""
    cfg = dict(base_config)
    if parameter == "layers":
        cfg["num_layers"] = int(value)
    elif parameter == "elements":
        cfg["elements_per_layer"] = int(value)
    elif parameter == "antennas":
        cfg["hbf_antennas"] = int(value)
    elif parameter == "power":
        cfg.pop("transmit_budget_w", None)
        cfg["transmit_budget_dbm"] = float(value)
    elif parameter == "users":
        cfg["num_users"] = int(value)
        cfg.pop("users_per_cluster", None)
    elif parameter == "spacing":
        freq = float(cfg.get("carrier_frequency_hz", CONFIG_DEFAULTS["carrier_frequency_hz"]))
        cfg["layer_spacing_m"] = float(value) * SPEED_OF_LIGHT / freq
    else:
        raise ValueError(f"apply_sweep_value: unknown parameter {parameter!r}")
    return cfg


def trial_checksum(scenario: Scenario) -> str:
    """Digest of the trial's shared randomness (drop, fading, scatter pool).

    Every scheme in a paired trial sees the same value; the column lets
    downstream checks assert the pairing.
    """
    q, _, _ = draw_sim_ue_channel(
        scenario, rng_from(child_seed(scenario.master_seed, STREAM_SIM_UE))
    )
    pool = draw_direct_nlos_pool(scenario)
    positions = np.array([u.as_array() for u in scenario.user_positions])
    digest = hashlib.sha1()
    digest.update(positions.tobytes())
    digest.update(q.tobytes())
    digest.update(pool.tobytes())
    return digest.hexdigest()[:12]


def _scheme_ordinal(scheme: SchemeId) -> int:
    return list(SchemeId).index(scheme)


def _run_trial(spec: SweepSpec, value_index: int, trial: int, trace_dir=None):
    """All schemes for one (value, trial) cell; returns (rows, error strings)."""
    value = spec.values[value_index]
    seed = child_seed(spec.master_seed, value_index, trial)
    config = apply_sweep_value(spec.base_config, spec.parameter, value)
    config["master_seed"] = seed
    scenario = make_scenario(config)
    checksum = trial_checksum(scenario)
    rows: list[TrialResult] = []
    errors: list[str] = []
    for scheme in spec.schemes:
        options = make_solve_options(
            {
                **spec.solver_config,
                "solver_seed": child_seed(seed, STREAM_SOLVER, _scheme_ordinal(scheme)),
            }
        )
        trace_path = None
        if trace_dir is not None:
            trace_path = (
                f"{trace_dir}/trace_{spec.parameter}_{value:g}_t{trial}_{scheme.value}.csv"
            )
        start = time.perf_counter()
        try:
            state, report = run_scheme(scheme, scenario, options, trace_path=trace_path)
        except Exception as exc:  # keep the sweep alive; the row is recorded as an error
            errors.append(
                f"value={value:g} trial={trial} scheme={scheme.value}: {exc!r}"
            )
            continue
        wall_ms = (time.perf_counter() - start) * 1e3
        rows.append(
            TrialResult(
                sweep_param=spec.parameter,
                sweep_value=float(value),
                scheme=scheme.value,
                trial=trial,
                seed=seed,
                r_min=float(report.min_rate),
                r_users=tuple(float(r) for r in report.rate_users),
                iters=state.iteration,
                wall_ms=wall_ms,
                channel_checksum=checksum,
            )
        )
    return rows, errors


def run_sweep(
    spec: SweepSpec,
    workers: int = 1,
    trace_dir=None,
    errors_out: list | None = None,
) -> list[TrialResult]:
    """Execute every (value, trial, scheme) cell; deterministic output order.

    Failures of individual cells are recorded as strings in ``errors_out``
    (if given) and the run continues.
    """
    tasks = [(vi, trial) for vi in range(len(spec.values)) for trial in range(spec.trials)]
    seeds = [child_seed(spec.master_seed, vi, trial) for vi, trial in tasks]
    if len(set(seeds)) != len(seeds):
        raise RuntimeError("run_sweep: child seed collision across the sweep")

    by_task: dict = {}
    if workers <= 1:
        for vi, trial in tasks:
            by_task[(vi, trial)] = _run_trial(spec, vi, trial, trace_dir)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {
                (vi, trial): pool.submit(_run_trial, spec, vi, trial, trace_dir)
                for vi, trial in tasks
            }
            for key, future in futures.items():
                by_task[key] = future.result()

    results: list[TrialResult] = []
    for key in tasks:  # canonical order regardless of completion order
        rows, errors = by_task[key]
        results.extend(rows)
        if errors_out is not None:
            errors_out.extend(errors)
    return results


def summarize(results: list[TrialResult]) -> list[SummaryRow]:
    """Mean and standard error of the minimum rate per (value, scheme) cell."""
    if not results:
        raise ValueError("summarize: no results to aggregate")
    groups: dict = {}
    order: list = []
    for row in results:
        key = (row.sweep_param, row.sweep_value, row.scheme)
        if not np.isfinite(row.r_min):
            warnings.warn(f"summarize: dropping non-finite r_min row {key}")
            continue
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row.r_min)
    out = []
    for key in order:
        values = np.asarray(groups[key])
        stderr = float(np.std(values, ddof=1) / np.sqrt(values.size)) if values.size > 1 else 0.0
        out.append(
            SummaryRow(
                sweep_param=key[0],
                sweep_value=key[1],
                scheme=key[2],
                trials=int(values.size),
                mean_r_min=float(values.mean()),
                stderr_r_min=stderr,
            )
        )
    return out


def write_results(path, results: list[TrialResult]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(RESULTS_COLUMNS) + "\n")
        for r in results:
            fh.write(
                f"{r.sweep_param},{r.sweep_value!r},{r.scheme},{r.trial},{r.seed},"
                f"{r.r_min!r},{';'.join(repr(v) for v in r.r_users)},"
                f"{r.iters},{r.wall_ms!r},{r.channel_checksum}\n"
            )


def read_results(path) -> list[TrialResult]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != ",".join(RESULTS_COLUMNS):
            raise ValueError(f"read_results: unexpected header {header!r}")
        out = []
        for line in fh:
            cells = line.rstrip("\n").split(",")
            if len(cells) != len(RESULTS_COLUMNS):
                raise ValueError(f"read_results: malformed row {line!r}")
            out.append(
                TrialResult(
                    sweep_param=cells[0],
                    sweep_value=float(cells[1]),
                    scheme=cells[2],
                    trial=int(cells[3]),
                    seed=int(cells[4]),
                    r_min=float(cells[5]),
                    r_users=tuple(float(v) for v in cells[6].split(";")),
                    iters=int(cells[7]),
                    wall_ms=float(cells[8]),
                    channel_checksum=cells[9],
                )
            )
    return out


def write_summary(path, rows: list[SummaryRow]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        for r in rows:
            fh.write(
                f"{r.sweep_param},{r.sweep_value!r},{r.scheme},{r.trials},"
                f"{r.mean_r_min!r},{r.stderr_r_min!r}\n"
            )


def read_summary(path) -> list[SummaryRow]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != ",".join(SUMMARY_COLUMNS):
            raise ValueError(f"read_summary: unexpected header {header!r}")
        out = []
        for line in fh:
            cells = line.rstrip("\n").split(",")
            out.append(
                SummaryRow(
                    sweep_param=cells[0],
                    sweep_value=float(cells[1]),
                    scheme=cells[2],
                    trials=int(cells[3]),
                    mean_r_min=float(cells[4]),
                    stderr_r_min=float(cells[5]),
                )
            )
    return out


def split_config(flat: dict) -> tuple[dict, dict]:
    """Split a parsed config file into scenario keys and solver keys."""
    scenario_cfg = {k: v for k, v in flat.items() if k in CONFIG_DEFAULTS}
    solver_cfg = {k: v for k, v in flat.items() if k in SOLVER_DEFAULTS}
    unknown = set(flat) - set(scenario_cfg) - set(solver_cfg)
    if unknown:
        raise ValueError(f"unknown configuration keys: {sorted(unknown)}")
    return scenario_cfg, solver_cfg
