"""Projected simultaneous-perturbation stochastic ascent.

One step draws a single Rademacher sign vector, evaluates the objective at
two projected perturbed points, and moves along the two-sided gradient
estimate — exactly two objective evaluations per step regardless of problem
dimension.  For +/-1 perturbations the element-wise inverse of the sign
vector is the vector itself, which is what the estimate multiplies by.

The engine is generic over the feasible set: a projection is any idempotent
map onto it (phase wrapping and budget scaling live here too).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

TWO_PI = 2.0 * math.pi


class SpsaEvaluationError(RuntimeError):
    """Raised when the objective returns a non-finite value; carries the point."""

    def __init__(self, message: str, point: np.ndarray):
        super().__init__(message)
        self.point = point


@dataclass(frozen=True)
class SpsaGains:
    """Power-law gain schedules: a_t = a/(A+t+1)^alpha, c_t = c/(t+1)^gamma."""

    a: float
    c: float
    A: float = 0.0
    alpha: float = 0.602
    gamma: float = 0.101

    def __post_init__(self):
        if not (self.a > 0 and self.c > 0):
            raise ValueError(f"SpsaGains: a and c must be positive, got a={self.a}, c={self.c}")
        if not (0.5 < self.alpha <= 1.0):
            raise ValueError(f"SpsaGains: alpha must lie in (0.5, 1], got {self.alpha}")
        if not (0.0 < self.gamma <= 0.5):
            raise ValueError(f"SpsaGains: gamma must lie in (0, 0.5], got {self.gamma}")
        if self.A < 0:
            raise ValueError(f"SpsaGains: A must be >= 0, got {self.A}")


def gains_at(gains: SpsaGains, t: int) -> tuple[float, float]:
    """Step size and perturbation size at iteration t (t >= 0)."""
    a_t = gains.a / (gains.A + t + 1.0) ** gains.alpha
    c_t = gains.c / (t + 1.0) ** gains.gamma
    return a_t, c_t


@dataclass(frozen=True)
class SpsaDiagnostics:
    t: int
    f_plus: float
    f_minus: float
    grad_norm: float
    x_plus: np.ndarray
    x_minus: np.ndarray


def rademacher(rng: np.random.Generator, size: int) -> np.ndarray:
    """Independent +/-1 signs; self-inverse elementwise."""
    return rng.integers(0, 2, size=size) * 2.0 - 1.0


def gradient_estimate(
    objective: Callable[[np.ndarray], float],
    x: np.ndarray,
    c: float,
    rng: np.random.Generator,
    projection: Callable[[np.ndarray], np.ndarray] | None = None,
) -> tuple[np.ndarray, float, float, np.ndarray, np.ndarray]:
    """One two-sided simultaneous-perturbation gradient estimate.

    Returns (g_hat, f_plus, f_minus, x_plus, x_minus).  Perturbed points are
    projected before evaluation so the objective only ever sees feasible
    points.
    """
    delta = rademacher(rng, x.size)
    x_plus = x + c * delta
    x_minus = x - c * delta
    if projection is not None:
        x_plus = projection(x_plus)
        x_minus = projection(x_minus)
    f_plus = float(objective(x_plus))
    if not math.isfinite(f_plus):
        raise SpsaEvaluationError(f"objective returned non-finite value {f_plus}", x_plus)
    f_minus = float(objective(x_minus))
    if not math.isfinite(f_minus):
        raise SpsaEvaluationError(f"objective returned non-finite value {f_minus}", x_minus)
    g_hat = (f_plus - f_minus) / (2.0 * c) * delta
    return g_hat, f_plus, f_minus, x_plus, x_minus


def spsa_step(
    objective: Callable[[np.ndarray], float],
    x: np.ndarray,
    t: int,
    gains: SpsaGains,
    projection: Callable[[np.ndarray], np.ndarray],
    rng: np.random.Generator,
    trace=None,
) -> tuple[np.ndarray, SpsaDiagnostics]:
    """One projected ascent step; exactly two objective evaluations.

    ``trace``, if given, is a writable text stream receiving one CSV row
    ``t,f_plus,f_minus,grad_norm`` per step.
    """
    a_t, c_t = gains_at(gains, t)
    g_hat, f_plus, f_minus, x_plus, x_minus = gradient_estimate(objective, x, c_t, rng, projection)
    x_next = projection(x + a_t * g_hat)
    diag = SpsaDiagnostics(
        t=t,
        f_plus=f_plus,
        f_minus=f_minus,
        grad_norm=float(np.linalg.norm(g_hat)),
        x_plus=x_plus,
        x_minus=x_minus,
    )
    if trace is not None:
        trace.write(f"{t},{f_plus!r},{f_minus!r},{diag.grad_norm!r}\n")
    return x_next, diag


def wrap_phase(z: np.ndarray) -> np.ndarray:
    """Elementwise wrap onto [0, 2*pi); exact fixed point for in-range inputs."""
    wrapped = np.remainder(z, TWO_PI)
    # remainder can round up to the divisor for tiny negative inputs
    return np.where(wrapped >= TWO_PI, 0.0, wrapped)


def project_power(z: np.ndarray, total_power: float, eps: float | None = None) -> np.ndarray:
    """Clamp to non-negative and rescale so the entries sum to the budget.

    With every entry non-positive the clamped vector is zero and stays
    (numerically) zero; ``eps`` only guards that division.  Broadcasts over
    leading axes; the stream axis is the last one.
    """
    if eps is None:
        eps = 1e-12 * total_power
    if not (eps > 0):
        raise ValueError(f"project_power: eps must be positive, got {eps}")
    clamped = np.maximum(np.asarray(z, dtype=float), 0.0)
    sums = np.maximum(clamped.sum(axis=-1, keepdims=True), eps)
    return total_power / sums * clamped


def power_projection(total_power: float, eps: float | None = None) -> Callable[[np.ndarray], np.ndarray]:
    """Projection callback onto the full-budget simplex for the given budget."""

    def _project(z: np.ndarray) -> np.ndarray:
        return project_power(z, total_power, eps)

    return _project
