"""Channel synthesis: near-field diffraction matrices, Rician fading, composition.

Inter-layer and feed coefficients follow scalar Rayleigh-Sommerfeld
diffraction between element pairs; the stack-to-user link is Rician with a
planar-array steering vector for the line-of-sight part.  A ``ChannelSet`` is
immutable after synthesis; composition functions are pure, so concurrent
optimizer evaluations can share one set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import TWO_PI, Scenario, UpaLayout, Vec3, build_upa_layout
from .seeding import STREAM_DIRECT, STREAM_SIM_UE, child_seed, rng_from

# Width of the pre-drawn scattered-path pool for direct BS-user channels.
# A fixed width keeps draws identical no matter which schemes run or how many
# antennas each asks for.
DIRECT_POOL_WIDTH = 256


@dataclass(frozen=True)
class PhaseConfig:
    """Per-layer, per-element phase shifts; the solver's decision variable."""

    angles: np.ndarray  # (num_layers, elements_per_layer), each in [0, 2*pi)

    def __post_init__(self):
        angles = np.asarray(self.angles, dtype=float)
        if angles.ndim != 2:
            raise ValueError(f"PhaseConfig: angles must be 2-D (layers x elements), got {angles.shape}")
        if not np.all(np.isfinite(angles)):
            raise ValueError("PhaseConfig: angles must be finite")
        if np.any(angles < 0) or np.any(angles >= TWO_PI):
            raise ValueError("PhaseConfig: angles must lie in [0, 2*pi)")
        object.__setattr__(self, "angles", angles)

    def transmission_coefficients(self) -> np.ndarray:
        """Unit-modulus per-element coefficients exp(j*theta)."""
        return np.exp(1j * self.angles)


@dataclass(frozen=True)
class ChannelSet:
    """All channel matrices for one trial.

    ``inter_layer[i]`` propagates layer ``i+1`` to layer ``i+2`` (1-based), so
    the list covers layers 2..L.  ``direct_nlos_pool`` holds pre-drawn unit
    CSCG scatter samples for baseline BS-user channels.
    """

    feed: np.ndarray  # (U, N_t)
    inter_layer: tuple[np.ndarray, ...]  # L-1 matrices, each (U, U)
    sim_ue: np.ndarray  # (K, U)
    path_losses: np.ndarray  # (K,) linear amplitude gains
    los_angles: np.ndarray  # (K, 2) elevation, azimuth in radians
    direct_nlos_pool: np.ndarray  # (K, DIRECT_POOL_WIDTH) complex

    def __post_init__(self):
        u = self.feed.shape[0]
        if any(w.shape != (u, u) for w in self.inter_layer):
            raise ValueError("ChannelSet: inter-layer matrix shape mismatch")
        if self.sim_ue.shape[1] != u:
            raise ValueError("ChannelSet: sim_ue column count must match element count")
        if not np.all(self.path_losses > 0):
            raise ValueError("ChannelSet: path losses must be positive")
        for name in ("feed", "sim_ue"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"ChannelSet: non-finite entries in {name}")

    @property
    def num_layers(self) -> int:
        return len(self.inter_layer) + 1

    @property
    def num_users(self) -> int:
        return self.sim_ue.shape[0]


@dataclass(frozen=True)
class EffectiveChannel:
    """Stack output channel and its end-to-end composition with the feed."""

    sim_out: np.ndarray  # (K, U)
    end_to_end: np.ndarray  # (K, N_t)


def rs_coefficient(src, dst, layer_normal, element_area: float, wavelength: float) -> complex:
    """Scalar Rayleigh-Sommerfeld propagation coefficient between two points.

    (A_e cos(eta) / t) * (1/(2*pi*t) - j/lambda) * exp(j*2*pi*t/lambda), where
    t is the point separation and eta the angle off the layer normal.
    """
    if element_area <= 0 or wavelength <= 0:
        raise ValueError("rs_coefficient: element_area and wavelength must be positive")
    src = src.as_array() if isinstance(src, Vec3) else np.asarray(src, dtype=float)
    dst = dst.as_array() if isinstance(dst, Vec3) else np.asarray(dst, dtype=float)
    normal = layer_normal.as_array() if isinstance(layer_normal, Vec3) else np.asarray(layer_normal, dtype=float)
    diff = dst - src
    t = math.sqrt(float(diff @ diff))
    if t == 0.0:
        raise ValueError("rs_coefficient: coincident points (zero separation)")
    cos_eta = abs(float(diff @ normal)) / (t * math.sqrt(float(normal @ normal)))
    return (
        (element_area * cos_eta / t)
        * complex(1.0 / (TWO_PI * t), -1.0 / wavelength)
        * complex(math.cos(TWO_PI * t / wavelength), math.sin(TWO_PI * t / wavelength))
    )


def _rs_matrix(src_positions: np.ndarray, dst_positions: np.ndarray, element_area: float, wavelength: float) -> np.ndarray:
    """Vectorized coefficients from each src to each dst; rows index destinations.

    Kept independent of :func:`rs_coefficient` so the scalar form can serve as
    an oracle for this builder.
    """
    diff = dst_positions[:, None, :] - src_positions[None, :, :]
    t = np.sqrt(np.einsum("abi,abi->ab", diff, diff))
    if np.any(t == 0.0):
        raise ValueError("propagation matrix: coincident source/destination elements")
    cos_eta = np.abs(diff[:, :, 1]) / t  # layers are +y-normal planes
    amplitude = element_area * cos_eta / t
    return amplitude * (1.0 / (TWO_PI * t) - 1j / wavelength) * np.exp(1j * TWO_PI * t / wavelength)


def inter_layer_matrix(prev: UpaLayout, nxt: UpaLayout, element_area: float, wavelength: float) -> np.ndarray:
    """(U, U) propagation matrix; entry (u, v) maps element v of ``prev`` to u of ``nxt``.

    Propagation then acts by left-multiplication on the signal vector of the
    previous layer.
    """
    if prev.center.y == nxt.center.y:
        raise ValueError("inter_layer_matrix: layers must be separated along the normal")
    return _rs_matrix(prev.positions(), nxt.positions(), element_area, wavelength)


def feed_matrix(bs_layout: UpaLayout, first_layer: UpaLayout, active, element_area: float, wavelength: float) -> np.ndarray:
    """(U, N_t) matrix; column i propagates active feed antenna i to the first layer.

    ``active`` is either a count (the first N_t elements in row-major order
    are driven) or an explicit index sequence.
    """
    if isinstance(active, (int, np.integer)):
        if active < 1 or active > bs_layout.num_elements:
            raise ValueError(
                f"feed_matrix: active count {active} outside 1..{bs_layout.num_elements}"
            )
        indices = np.arange(int(active))
    else:
        indices = np.asarray(list(active), dtype=int)
        if indices.size == 0 or np.any(indices < 0) or np.any(indices >= bs_layout.num_elements):
            raise ValueError(f"feed_matrix: invalid active antenna indices {indices}")
    src = bs_layout.positions()[indices]
    return _rs_matrix(src, first_layer.positions(), element_area, wavelength)


def steering_vector(elevation: float, azimuth: float, layout: UpaLayout, wavelength: float) -> np.ndarray:
    """Unit-modulus plane-wave response of a +y-broadside planar array.

    The wave direction is the unit vector from the array center toward
    (elevation, azimuth); entry u is exp(j*(2*pi/lambda) * r_u . k_hat).
    """
    offsets = layout.positions() - layout.center.as_array()[None, :]
    k_hat = np.array(
        [
            math.cos(elevation) * math.sin(azimuth),
            math.cos(elevation) * math.cos(azimuth),
            math.sin(elevation),
        ]
    )
    phase = (TWO_PI / wavelength) * (offsets @ k_hat)
    return np.exp(1j * phase)


def path_loss(distance: float, wavelength: float, exponent: float = 2.0) -> float:
    """Linear amplitude gain at 1 m reference: lambda/(4*pi) * d^(-exponent/2).

    The default exponent 2 is free-space; the power gain is then
    (lambda / (4*pi*d))^2.
    """
    if not (distance > 0):
        raise ValueError(f"path_loss: distance must be positive, got {distance}")
    return wavelength / (4.0 * math.pi) * distance ** (-exponent / 2.0)


def user_link_geometry(scenario: Scenario, reference: Vec3) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-user (distance, elevation, azimuth) measured from ``reference``.

    Azimuth is measured from the +y broadside axis in the x-y plane; elevation
    from the horizontal plane.
    """
    ref = reference.as_array()
    pos = np.array([u.as_array() for u in scenario.user_positions])
    diff = pos - ref[None, :]
    dist = np.sqrt(np.einsum("ki,ki->k", diff, diff))
    if np.any(dist == 0):
        raise ValueError("user_link_geometry: user coincides with the reference point")
    elevation = np.arcsin(diff[:, 2] / dist)
    azimuth = np.arctan2(diff[:, 0], diff[:, 1])
    return dist, elevation, azimuth


def _rician_rows(
    steering_rows: np.ndarray,
    amplitudes: np.ndarray,
    rician_factor: float,
    nlos: np.ndarray,
) -> np.ndarray:
    if math.isinf(rician_factor):
        los_scale, nlos_scale = 1.0, 0.0
    else:
        los_scale = math.sqrt(rician_factor / (rician_factor + 1.0))
        nlos_scale = math.sqrt(1.0 / (rician_factor + 1.0))
    return amplitudes[:, None] * (los_scale * steering_rows + nlos_scale * nlos)


def draw_sim_ue_channel(scenario: Scenario, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw the (K, U) stack-to-user Rician channel.

    Returns (Q, path_losses, los_angles).  The scattered part is i.i.d. unit
    circularly-symmetric complex Gaussian; the line-of-sight part is the last
    layer's steering vector toward each user.
    """
    geometry = scenario.geometry
    last = geometry.last_layer
    dist, elevation, azimuth = user_link_geometry(scenario, last.center)
    amplitudes = np.array(
        [path_loss(d, geometry.wavelength, scenario.path_loss_exponent) for d in dist]
    )
    steer = np.stack(
        [steering_vector(el, az, last, geometry.wavelength) for el, az in zip(elevation, azimuth)]
    )
    k, u = scenario.num_users, geometry.elements_per_layer
    nlos = (rng.standard_normal((k, u)) + 1j * rng.standard_normal((k, u))) / math.sqrt(2.0)
    q = _rician_rows(steer, amplitudes, scenario.rician_factor, nlos)
    return q, amplitudes, np.stack([elevation, azimuth], axis=1)


def direct_bs_channel(scenario: Scenario, num_antennas: int, nlos_pool: np.ndarray) -> np.ndarray:
    """(K, num_antennas) direct BS-user Rician channel for schemes without the stack.

    Uses the same fading construction as the stack-user link, with the BS
    array's steering vector and BS-user distances.  Scattered samples come
    from the shared pre-drawn pool so all schemes in a trial see the same
    realization.
    """
    if num_antennas > nlos_pool.shape[1]:
        raise ValueError(
            f"direct_bs_channel: {num_antennas} antennas exceeds the pre-drawn pool width {nlos_pool.shape[1]}"
        )
    side = math.isqrt(num_antennas)
    if side * side < num_antennas:
        side += 1
    layout = build_upa_layout(side, side, scenario.bs_layout.spacing, scenario.bs_position)
    dist, elevation, azimuth = user_link_geometry(scenario, scenario.bs_position)
    wavelength = scenario.wavelength
    amplitudes = np.array([path_loss(d, wavelength, scenario.path_loss_exponent) for d in dist])
    active = layout.positions()[:num_antennas] - layout.center.as_array()[None, :]
    k_hat = np.stack(
        [
            np.cos(elevation) * np.sin(azimuth),
            np.cos(elevation) * np.cos(azimuth),
            np.sin(elevation),
        ],
        axis=1,
    )
    steer = np.exp(1j * (TWO_PI / wavelength) * (k_hat @ active.T))
    return _rician_rows(steer, amplitudes, scenario.rician_factor, nlos_pool[:, :num_antennas])


def draw_direct_nlos_pool(scenario: Scenario) -> np.ndarray:
    """Shared scattered-path pool for direct BS-user channels, one per trial.

    Drawn from its own sub-stream of the trial seed with a fixed width, so the
    realization is identical for every scheme and antenna count in the trial.
    """
    rng = rng_from(child_seed(scenario.master_seed, STREAM_DIRECT))
    k = scenario.num_users
    return (
        rng.standard_normal((k, DIRECT_POOL_WIDTH))
        + 1j * rng.standard_normal((k, DIRECT_POOL_WIDTH))
    ) / math.sqrt(2.0)


def synthesize_channels(scenario: Scenario) -> ChannelSet:
    """Build all matrices for one trial, deterministically from the master seed."""
    geometry = scenario.geometry
    area, wavelength = geometry.element_area, geometry.wavelength
    inter = tuple(
        inter_layer_matrix(geometry.layer_layouts[i], geometry.layer_layouts[i + 1], area, wavelength)
        for i in range(geometry.num_layers - 1)
    )
    feed = feed_matrix(scenario.bs_layout, geometry.layer_layouts[0], scenario.num_streams, area, wavelength)
    rng_q = rng_from(child_seed(scenario.master_seed, STREAM_SIM_UE))
    q, amplitudes, angles = draw_sim_ue_channel(scenario, rng_q)
    pool = draw_direct_nlos_pool(scenario)
    return ChannelSet(
        feed=feed,
        inter_layer=inter,
        sim_ue=q,
        path_losses=amplitudes,
        los_angles=angles,
        direct_nlos_pool=pool,
    )


def _sim_out(sim_ue: np.ndarray, theta: np.ndarray, inter_layer) -> np.ndarray:
    """Hot path: Q diag(phi_L) W_L ... W_2 diag(phi_1), consumed layer by layer.

    Cost is O(U^2) per user per layer; no intermediate U x U products are formed.
    """
    phases = np.exp(1j * theta)
    out = sim_ue * phases[-1]
    for idx in range(len(inter_layer) - 1, -1, -1):
        out = (out @ inter_layer[idx]) * phases[idx]
    return out


def effective_channel(sim_ue: np.ndarray, phases, inter_layer) -> np.ndarray:
    """(K, U) stack-output channel for a phase configuration.

    ``phases`` is a PhaseConfig or a raw (L, U) angle array; ``inter_layer``
    must hold L-1 matrices.
    """
    theta = np.asarray(getattr(phases, "angles", phases), dtype=float)
    if theta.ndim != 2:
        raise ValueError(f"effective_channel: angles must be (layers, elements), got {theta.shape}")
    if theta.shape[0] != len(inter_layer) + 1:
        raise ValueError(
            f"effective_channel: {theta.shape[0]} phase layers but {len(inter_layer)} inter-layer matrices"
        )
    return _sim_out(sim_ue, theta, inter_layer)


def compose_end_to_end(sim_out: np.ndarray, feed: np.ndarray) -> np.ndarray:
    """(K, N_t) end-to-end channel: stack output times the feed matrix."""
    if sim_out.shape[1] != feed.shape[0]:
        raise ValueError(
            f"compose_end_to_end: inner dimensions disagree ({sim_out.shape} vs {feed.shape})"
        )
    return sim_out @ feed


def effective(sim_ue: np.ndarray, phases, inter_layer, feed: np.ndarray) -> EffectiveChannel:
    h = effective_channel(sim_ue, phases, inter_layer)
    return EffectiveChannel(sim_out=h, end_to_end=compose_end_to_end(h, feed))


def stream_gains(channels: ChannelSet, theta: np.ndarray) -> np.ndarray:
    """|end-to-end channel|^2 per (user, stream); the quantity the rate math consumes."""
    return np.abs(_sim_out(channels.sim_ue, theta, channels.inter_layer) @ channels.feed) ** 2


def write_channel_dump(path, channels: ChannelSet, seed: int) -> None:
    """Text dump (header + ``re,im`` rows, row-major) for cross-language checks."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"seed {seed}\n")
        named = [("Q", channels.sim_ue), ("V", channels.feed)] + [
            (f"W{i + 2}", w) for i, w in enumerate(channels.inter_layer)
        ]
        for name, mat in named:
            fh.write(f"matrix {name} {mat.shape[0]} {mat.shape[1]}\n")
            for row in mat:
                fh.write(";".join(f"{float(v.real)!r},{float(v.imag)!r}" for v in row) + "\n")


def read_channel_dump(path) -> tuple[int, dict[str, np.ndarray]]:
    """Inverse of :func:`write_channel_dump`; returns (seed, name -> matrix)."""
    matrices: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    seed = int(lines[0].split()[1])
    i = 1
    while i < len(lines):
        tag, name, rows, cols = lines[i].split()
        if tag != "matrix":
            raise ValueError(f"channel dump: expected matrix header at line {i + 1}")
        rows, cols = int(rows), int(cols)
        data = np.empty((rows, cols), dtype=complex)
        for r in range(rows):
            cells = lines[i + 1 + r].split(";")
            for c, cell in enumerate(cells):
                re, im = cell.split(",")
                data[r, c] = complex(float(re), float(im))
        matrices[name] = data
        i += 1 + rows
    return seed, matrices
