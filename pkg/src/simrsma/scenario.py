"""Simulation scenario construction: array geometry, user drops, configuration.

A scenario bundles the deterministic transmitter geometry (base-station feed
array plus the stack of transmissive metasurface layers) with one randomized
drop of user positions and the link-budget parameters.  Everything is
immutable after construction and safe to share across workers.

Powers are stored in watts internally; dBm/dB values are accepted only at the
configuration boundary through ``*_dbm`` / ``*_db`` keys.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .seeding import STREAM_USERS, child_seed, rng_from

SPEED_OF_LIGHT = 299792458.0
TWO_PI = 2.0 * math.pi


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1000.0


def watt_to_dbm(watt: float) -> float:
    if watt <= 0:
        raise ValueError(f"watt_to_dbm: power must be positive, got {watt}")
    return 10.0 * math.log10(watt * 1000.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(value: float) -> float:
    if value <= 0:
        raise ValueError(f"linear_to_db: value must be positive, got {value}")
    return 10.0 * math.log10(value)


@dataclass(frozen=True)
class Vec3:
    """A point in meters; all arrays lie parallel to the x-z plane (+y normal)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ValueError(f"Vec3: coordinates must be finite, got {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


ORIGIN = Vec3(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class UpaLayout:
    """Uniform planar array on a centered x-z grid.

    Element u = r * cols + c (row-major) sits at
    x = center.x + (c - (cols-1)/2) * spacing,
    z = center.z + ((rows-1)/2 - r) * spacing, y = center.y.
    """

    rows: int
    cols: int
    spacing: float
    center: Vec3

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"UpaLayout: rows/cols must be >= 1, got {self.rows}x{self.cols}")
        if not (self.spacing > 0):
            raise ValueError(f"UpaLayout: spacing must be positive, got {self.spacing}")

    @property
    def num_elements(self) -> int:
        return self.rows * self.cols

    def positions(self) -> np.ndarray:
        """(rows*cols, 3) element positions, row-major, pure function of the layout."""
        r = np.arange(self.rows)
        c = np.arange(self.cols)
        xs = self.center.x + (c - (self.cols - 1) / 2.0) * self.spacing
        zs = self.center.z + ((self.rows - 1) / 2.0 - r) * self.spacing
        grid_x = np.broadcast_to(xs[None, :], (self.rows, self.cols))
        grid_z = np.broadcast_to(zs[:, None], (self.rows, self.cols))
        out = np.empty((self.num_elements, 3))
        out[:, 0] = grid_x.ravel()
        out[:, 1] = self.center.y
        out[:, 2] = grid_z.ravel()
        return out


def build_upa_layout(rows: int, cols: int, spacing: float, center: Vec3) -> UpaLayout:
    return UpaLayout(rows=rows, cols=cols, spacing=spacing, center=center)


@dataclass(frozen=True)
class SimGeometry:
    """Physical layout of the transmissive stack in front of the feed array.

    ``layer_spacings[0]`` is the feed-to-first-layer gap; spacing ``l`` is the
    gap between layers ``l-1`` and ``l``.  ``elements_per_layer`` must be a
    perfect square (layers are square arrays).
    """

    num_layers: int
    elements_per_layer: int
    layer_layouts: tuple[UpaLayout, ...]
    layer_spacings: tuple[float, ...]
    element_area: float
    wavelength: float

    def __post_init__(self):
        if self.num_layers < 1:
            raise ValueError(f"SimGeometry: num_layers must be >= 1, got {self.num_layers}")
        side = math.isqrt(self.elements_per_layer)
        if side * side != self.elements_per_layer:
            raise ValueError(
                f"SimGeometry: elements_per_layer must be a perfect square, got {self.elements_per_layer}"
            )
        if len(self.layer_layouts) != self.num_layers:
            raise ValueError("SimGeometry: layer_layouts length must equal num_layers")
        if len(self.layer_spacings) != self.num_layers:
            raise ValueError("SimGeometry: layer_spacings length must equal num_layers")
        if any(not (d > 0) for d in self.layer_spacings):
            raise ValueError(f"SimGeometry: all layer spacings must be positive, got {self.layer_spacings}")
        if not (self.element_area > 0):
            raise ValueError(f"SimGeometry: element_area must be positive, got {self.element_area}")
        if not (self.wavelength > 0):
            raise ValueError(f"SimGeometry: wavelength must be positive, got {self.wavelength}")
        for layout in self.layer_layouts:
            if layout.num_elements != self.elements_per_layer:
                raise ValueError("SimGeometry: layer layout size mismatch with elements_per_layer")

    @property
    def last_layer(self) -> UpaLayout:
        return self.layer_layouts[-1]


@dataclass(frozen=True)
class Scenario:
    """One fully specified trial: geometry, user drop, and link budget."""

    geometry: SimGeometry
    bs_layout: UpaLayout
    bs_position: Vec3
    user_positions: tuple[Vec3, ...]
    num_users: int
    num_groups: int
    transmit_budget: float
    noise_power: float
    rician_factor: float
    carrier_frequency: float
    master_seed: int
    path_loss_exponent: float = 2.0
    hbf_antennas: int = 0  # 0 means "match the stream count"

    def __post_init__(self):
        if self.num_users < 1:
            raise ValueError(f"num_users: must be >= 1, got {self.num_users}")
        if not (0 <= self.num_groups <= self.num_users):
            raise ValueError(
                f"num_groups: must satisfy 0 <= N <= num_users, got N={self.num_groups}, K={self.num_users}"
            )
        if not (self.transmit_budget > 0):
            raise ValueError(f"transmit_budget: must be positive watts, got {self.transmit_budget}")
        if not (self.noise_power > 0):
            raise ValueError(f"noise_power: must be positive watts, got {self.noise_power}")
        if not (self.rician_factor >= 0):
            raise ValueError(f"rician_factor: must be >= 0 (linear), got {self.rician_factor}")
        if len(self.user_positions) != self.num_users:
            raise ValueError("user_positions: length must equal num_users")
        if any(p.z < 0 for p in self.user_positions):
            raise ValueError("user_positions: user heights must be >= 0")

    @property
    def num_streams(self) -> int:
        """Streams = 1 common + N group + K private."""
        return 1 + self.num_groups + self.num_users

    @property
    def wavelength(self) -> float:
        return self.geometry.wavelength


def generate_clustered_users(
    seed: int,
    sector_half_angle_deg: float,
    cluster_radii: list[float],
    cluster_diameter: float,
    users_per_cluster: list[int],
    user_height: float,
) -> list[Vec3]:
    """Drop users in discs centered on arc points inside a broadside sector.

    The sector opens around the +y axis (azimuth in [-half, +half] degrees),
    measured from the origin.  Each cluster center is drawn uniformly on the
    arc of its radius, pulled in by the disc's angular half-width so the whole
    disc stays inside the sector.  Fully reproducible from the seed.
    """
    if len(cluster_radii) == 0:
        raise ValueError("cluster_radii: must not be empty")
    if len(cluster_radii) != len(users_per_cluster):
        raise ValueError("users_per_cluster: length must match cluster_radii")
    if sum(users_per_cluster) < 1:
        raise ValueError("users_per_cluster: total user count must be >= 1")
    if cluster_diameter < 0:
        raise ValueError(f"cluster_diameter: must be >= 0, got {cluster_diameter}")
    disc_radius = cluster_diameter / 2.0
    for rho in cluster_radii:
        if not (rho > disc_radius):
            raise ValueError(f"cluster_radii: radius {rho} must exceed the disc radius {disc_radius}")

    rng = rng_from(seed)
    half = math.radians(sector_half_angle_deg)
    users: list[Vec3] = []
    for rho, count in zip(cluster_radii, users_per_cluster):
        margin = math.asin(disc_radius / rho) if disc_radius > 0 else 0.0
        phi_c = rng.uniform(-(half - margin), half - margin)
        cx = rho * math.sin(phi_c)
        cy = rho * math.cos(phi_c)
        for _ in range(count):
            r = disc_radius * math.sqrt(rng.uniform(0.0, 1.0))
            ang = rng.uniform(0.0, TWO_PI)
            users.append(Vec3(cx + r * math.cos(ang), cy + r * math.sin(ang), user_height))
    return users


# Table-style defaults: 28 GHz carrier, 20 dBm budget, -94 dBm noise floor,
# 13 dB Rician factor, half-wavelength element pitch, quarter-wavelength gaps.
CONFIG_DEFAULTS: dict = {
    "num_users": 6,
    "num_groups": 2,
    "num_layers": 7,
    "elements_per_layer": 64,
    "carrier_frequency_hz": 28e9,
    "transmit_budget_w": None,
    "transmit_budget_dbm": 20.0,
    "noise_power_w": None,
    "noise_power_dbm": -94.0,
    "rician_factor": None,
    "rician_factor_db": 13.0,
    "element_spacing_m": None,  # default: wavelength / 2
    "layer_spacing_m": None,  # default: wavelength / 4, applied to every gap
    "element_area_m2": None,  # default: (wavelength / 2)^2
    "bs_position": (0.0, 0.0, 10.0),
    "user_height_m": 1.5,
    "sector_half_angle_deg": 30.0,
    "cluster_radii_m": (30.0, 300.0),
    "cluster_diameter_m": 10.0,
    "users_per_cluster": None,  # default: split num_users evenly across clusters
    "master_seed": 0,
    "path_loss_exponent": 2.0,
    "hbf_antennas": 0,
}


def _split_users(num_users: int, num_clusters: int) -> list[int]:
    base, extra = divmod(num_users, num_clusters)
    return [base + (1 if i < extra else 0) for i in range(num_clusters)]


def _as_float_tuple(value) -> tuple[float, ...]:
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    return tuple(float(v) for v in value)


def _as_int_tuple(value) -> tuple[int, ...]:
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    return tuple(int(v) for v in value)


def make_scenario(overrides: dict | None = None) -> Scenario:
    """Build a validated Scenario from configuration overrides.

    Unknown keys are rejected by name.  Values may come straight from
    ``parse_config_file``; numeric strings and comma lists are coerced.
    """
    cfg = dict(CONFIG_DEFAULTS)
    for key, value in (overrides or {}).items():
        if key not in cfg:
            raise ValueError(f"unknown configuration key: {key!r}")
        cfg[key] = value

    k = int(cfg["num_users"])
    n = int(cfg["num_groups"])
    num_layers = int(cfg["num_layers"])
    elements = int(cfg["elements_per_layer"])
    freq = float(cfg["carrier_frequency_hz"])
    if not (freq > 0):
        raise ValueError(f"carrier_frequency_hz: must be positive, got {freq}")
    wavelength = SPEED_OF_LIGHT / freq

    if cfg["transmit_budget_w"] is not None:
        p_t = float(cfg["transmit_budget_w"])
    else:
        p_t = dbm_to_watt(float(cfg["transmit_budget_dbm"]))
    if cfg["noise_power_w"] is not None:
        noise = float(cfg["noise_power_w"])
    else:
        noise = dbm_to_watt(float(cfg["noise_power_dbm"]))
    if cfg["rician_factor"] is not None:
        k_r = float(cfg["rician_factor"])
    else:
        k_r = db_to_linear(float(cfg["rician_factor_db"]))

    spacing = float(cfg["element_spacing_m"]) if cfg["element_spacing_m"] is not None else wavelength / 2.0
    gap = float(cfg["layer_spacing_m"]) if cfg["layer_spacing_m"] is not None else wavelength / 4.0
    area = float(cfg["element_area_m2"]) if cfg["element_area_m2"] is not None else (wavelength / 2.0) ** 2

    bs_xyz = _as_float_tuple(cfg["bs_position"])
    if len(bs_xyz) != 3:
        raise ValueError(f"bs_position: need three coordinates, got {cfg['bs_position']!r}")
    bs_position = Vec3(*bs_xyz)

    num_streams = 1 + n + k
    side_bs = math.isqrt(num_streams)
    if side_bs * side_bs < num_streams:
        side_bs += 1
    bs_layout = build_upa_layout(side_bs, side_bs, spacing, bs_position)

    side = math.isqrt(elements)
    if side * side != elements:
        raise ValueError(f"elements_per_layer: must be a perfect square, got {elements}")
    spacings = tuple(gap for _ in range(num_layers))
    layouts = []
    y = bs_position.y
    for d in spacings:
        y += d
        layouts.append(build_upa_layout(side, side, spacing, Vec3(bs_position.x, y, bs_position.z)))
    geometry = SimGeometry(
        num_layers=num_layers,
        elements_per_layer=elements,
        layer_layouts=tuple(layouts),
        layer_spacings=spacings,
        element_area=area,
        wavelength=wavelength,
    )

    radii = _as_float_tuple(cfg["cluster_radii_m"])
    if cfg["users_per_cluster"] is not None:
        per_cluster = list(_as_int_tuple(cfg["users_per_cluster"]))
        if sum(per_cluster) != k:
            raise ValueError(
                f"users_per_cluster: entries must sum to num_users={k}, got {per_cluster}"
            )
    else:
        per_cluster = _split_users(k, len(radii))

    master_seed = int(cfg["master_seed"])
    users = generate_clustered_users(
        seed=child_seed(master_seed, STREAM_USERS),
        sector_half_angle_deg=float(cfg["sector_half_angle_deg"]),
        cluster_radii=list(radii),
        cluster_diameter=float(cfg["cluster_diameter_m"]),
        users_per_cluster=per_cluster,
        user_height=float(cfg["user_height_m"]),
    )
    # shift the drop from the origin to the BS's horizontal position
    users = [Vec3(u.x + bs_position.x, u.y + bs_position.y, u.z) for u in users]

    return Scenario(
        geometry=geometry,
        bs_layout=bs_layout,
        bs_position=bs_position,
        user_positions=tuple(users),
        num_users=k,
        num_groups=n,
        transmit_budget=p_t,
        noise_power=noise,
        rician_factor=k_r,
        carrier_frequency=freq,
        master_seed=master_seed,
        path_loss_exponent=float(cfg["path_loss_exponent"]),
        hbf_antennas=int(cfg["hbf_antennas"]),
    )


def with_group_count(scenario: Scenario, num_groups: int) -> Scenario:
    """Rebuild the scenario with a different group count (stream layout changes)."""
    num_streams = 1 + num_groups + scenario.num_users
    side = math.isqrt(num_streams)
    if side * side < num_streams:
        side += 1
    bs_layout = build_upa_layout(side, side, scenario.bs_layout.spacing, scenario.bs_position)
    return replace(scenario, num_groups=num_groups, bs_layout=bs_layout)


def parse_config_file(path) -> dict:
    """Parse a flat ``key = value`` UTF-8 config file with ``#`` comments."""
    out: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if not key:
                raise ValueError(f"{path}:{lineno}: empty key")
            out[key] = value
    return out
