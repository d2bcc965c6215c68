"""Geometric multi-band channel generation.

Scenario layout (2-D, meters): the BS sits at the origin with its array axis
along x, the UEs are drawn uniformly inside a disk of radius r whose center
lies broadside at (0, D), and the shared reflector clusters are drawn in the
annulus [r, 3r] around the disk center.  Every UE sees every reflector; how
much a reflector matters to a UE is set purely by pathloss over the geometric
path length, so the inter-UE distance is the single knob controlling how often
two UEs ride the same BS-side angle.

Both bands derive their path angles from the same geometry.  Per-cluster
shadowing and per-path angle jitter are drawn once as unit normals at
placement time and scaled by per-band sigmas, so bands stay congruent where a
cluster is visible to both and everything is reproducible from one seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arrays import fold_angle, steering_matrix
from .config import PathlossParams, ScenarioConfig

__all__ = [
    "VISIBLE_BOTH",
    "Geometry",
    "PathSet",
    "BandChannel",
    "pathloss_db",
    "place_scenario",
    "derive_path_set",
    "channel_matrix",
    "realize_channel",
    "realize_multiband",
]

VISIBLE_BOTH = "both"
VISIBLE_MMWAVE_ONLY = "mmwave"
VISIBLE_SUB6_ONLY = "sub6"

_ANNULUS_OUTER_FACTOR = 3.0


@dataclass(frozen=True)
class Geometry:
    """Long-term scenario state shared by both bands.

    Cluster index 0 is the line-of-sight cluster; clusters 1..C-1 are the
    shared reflectors.  `angle_jitter` holds unit normals of shape
    (K, C, L, 2) with the last axis = (arrival, departure); `shadow_units`
    holds unit normals of shape (K, C).  Band sigmas scale them later.
    """

    bs_position: np.ndarray
    ue_positions: np.ndarray
    scatterer_positions: np.ndarray
    ue_has_los: np.ndarray
    scatterer_visibility: tuple
    angle_jitter: np.ndarray
    shadow_units: np.ndarray

    @property
    def num_ues(self) -> int:
        return int(self.ue_positions.shape[0])

    @property
    def num_clusters(self) -> int:
        return int(self.scatterer_positions.shape[0]) + 1


@dataclass(frozen=True)
class PathSet:
    """Per-band path angles and powers, fixed for the scenario lifetime.

    Arrays are (K, C, L) for angles and (K, C) for the per-path power of each
    cluster.  Inactive clusters (invisible in this band, or a disabled LOS)
    carry zero power and False in `active`.
    """

    band: str
    carrier_ghz: float
    aoa: np.ndarray
    aod: np.ndarray
    path_power: np.ndarray
    active: np.ndarray

    @property
    def num_ues(self) -> int:
        return int(self.aoa.shape[0])

    @property
    def paths_per_cluster(self) -> int:
        return int(self.aoa.shape[2])


@dataclass(frozen=True)
class BandChannel:
    """One small-scale realization: K channel matrices plus their path set."""

    band: str
    carrier_ghz: float
    matrices: np.ndarray
    path_set: PathSet

    @property
    def num_ues(self) -> int:
        return int(self.matrices.shape[0])


def pathloss_db(distance_m: float, params: PathlossParams, shadow_db: float = 0.0) -> float:
    """Log-distance pathloss in dB over a path of `distance_m` meters."""
    if distance_m <= 0:
        raise ValueError(f"path length must be positive, got {distance_m}")
    return params.intercept_db + params.slope_db_per_decade * math.log10(distance_m) + shadow_db


def _segment_angle(from_xy: np.ndarray, to_xy: np.ndarray) -> np.ndarray:
    """Angle of the direction from -> to against the x-oriented array axis,
    folded into [0, pi] (a ULA cannot resolve the y-mirror)."""
    delta = np.atleast_2d(to_xy) - np.atleast_2d(from_xy)
    return fold_angle(np.arctan2(delta[:, 1], delta[:, 0]))


def place_scenario(config: ScenarioConfig, rng: np.random.Generator) -> Geometry:
    """Draw UE positions, reflector positions, visibility flags, and the unit
    draws behind shadowing and angular spread."""
    k, c, paths = config.num_ues, config.num_clusters, config.paths_per_cluster
    r = config.disk_radius_m
    center = np.array([0.0, config.bs_disk_distance_m])

    radii = r * np.sqrt(rng.random(k))
    azim = 2.0 * np.pi * rng.random(k)
    ue_positions = center + np.column_stack((radii * np.cos(azim), radii * np.sin(azim)))

    n_scat = c - 1
    inner, outer = r, _ANNULUS_OUTER_FACTOR * r
    scat_r = np.sqrt(inner**2 + (outer**2 - inner**2) * rng.random(n_scat))
    scat_a = 2.0 * np.pi * rng.random(n_scat)
    scatterers = center + np.column_stack((scat_r * np.cos(scat_a), scat_r * np.sin(scat_a)))

    mismatch = rng.random(n_scat) < config.p_mis
    side = rng.random(n_scat) < 0.5
    visibility = tuple(
        (VISIBLE_MMWAVE_ONLY if side[i] else VISIBLE_SUB6_ONLY) if mismatch[i] else VISIBLE_BOTH
        for i in range(n_scat)
    )
    ue_has_los = rng.random(k) < config.p_los

    jitter = rng.standard_normal((k, c, paths, 2))
    shadow = rng.standard_normal((k, c))
    for arr in (ue_positions, scatterers, ue_has_los, jitter, shadow):
        arr.setflags(write=False)
    return Geometry(
        bs_position=np.zeros(2),
        ue_positions=ue_positions,
        scatterer_positions=scatterers,
        ue_has_los=ue_has_los,
        scatterer_visibility=visibility,
        angle_jitter=jitter,
        shadow_units=shadow,
    )


def derive_path_set(geometry: Geometry, band: str, config: ScenarioConfig) -> PathSet:
    """Turn geometry into per-band path angles and per-path cluster powers.

    LOS angles follow the BS-UE segment; reflector angles follow the
    UE->cluster (departure) and cluster->BS (arrival) segments, so UEs
    attached to the same reflector share their BS-side arrival angle.
    """
    if band not in ("mmwave", "sub6"):
        raise ValueError(f"unknown band {band!r}")
    params = config.mmwave if band == "mmwave" else config.sub6
    k, c = geometry.num_ues, geometry.num_clusters
    bs = geometry.bs_position
    ues = geometry.ue_positions

    aoa_center = np.zeros((k, c))
    aod_center = np.zeros((k, c))
    lengths = np.zeros((k, c))
    aoa_center[:, 0] = _segment_angle(np.broadcast_to(bs, (k, 2)), ues)
    aod_center[:, 0] = _segment_angle(ues, np.broadcast_to(bs, (k, 2)))
    lengths[:, 0] = np.linalg.norm(ues - bs, axis=1)
    for ci in range(1, c):
        s = geometry.scatterer_positions[ci - 1]
        aoa_center[:, ci] = _segment_angle(bs, s)[0]
        aod_center[:, ci] = _segment_angle(ues, np.broadcast_to(s, (k, 2)))
        lengths[:, ci] = np.linalg.norm(ues - s, axis=1) + np.linalg.norm(s - bs)

    active = np.zeros((k, c), dtype=bool)
    active[:, 0] = geometry.ue_has_los
    for ci in range(1, c):
        active[:, ci] = geometry.scatterer_visibility[ci - 1] in (VISIBLE_BOTH, band)

    pl = np.zeros((k, c))
    pl[:, 0] = (
        params.pathloss_los.intercept_db
        + params.pathloss_los.slope_db_per_decade * np.log10(lengths[:, 0])
        + params.pathloss_los.shadow_sigma_db * geometry.shadow_units[:, 0]
    )
    if c > 1:
        nl = params.pathloss_nlos
        pl[:, 1:] = (
            nl.intercept_db
            + nl.slope_db_per_decade * np.log10(lengths[:, 1:])
            + nl.shadow_sigma_db * geometry.shadow_units[:, 1:]
        )
    power = np.where(active, 10.0 ** (-pl / 10.0), 0.0)

    sigma = math.radians(params.sigma_as_deg)
    aoa = fold_angle(aoa_center[:, :, None] + sigma * geometry.angle_jitter[:, :, :, 0])
    aod = fold_angle(aod_center[:, :, None] + sigma * geometry.angle_jitter[:, :, :, 1])
    for arr in (aoa, aod, power, active):
        arr.setflags(write=False)
    return PathSet(
        band=band,
        carrier_ghz=params.carrier_ghz,
        aoa=aoa,
        aod=aod,
        path_power=power,
        active=active,
    )


def channel_matrix(
    aoa: np.ndarray, aod: np.ndarray, gains: np.ndarray, n_bs: int, n_ue: int
) -> np.ndarray:
    """Assemble sqrt(N_bs*N_ue) * sum_p gain_p * a_bs(aoa_p) a_ue(aod_p)^H."""
    aoa = np.atleast_1d(aoa)
    if aoa.size == 0:
        return np.zeros((n_bs, n_ue), dtype=complex)
    a_bs = steering_matrix(n_bs, aoa)
    a_ue = steering_matrix(n_ue, aod)
    return math.sqrt(n_bs * n_ue) * ((a_bs * np.asarray(gains)) @ a_ue.conj().T)


def realize_channel(
    path_set: PathSet, n_bs: int, n_ue: int, rng: np.random.Generator
) -> BandChannel:
    """Draw fresh complex Gaussian path gains and build all K channel matrices.

    Gain variance per path equals the cluster's per-path power; angles stay
    fixed (fast fading only).
    """
    k = path_set.num_ues
    paths = path_set.paths_per_cluster
    matrices = np.zeros((k, n_bs, n_ue), dtype=complex)
    for u in range(k):
        act = path_set.active[u]
        if not act.any():
            continue
        aoa = path_set.aoa[u, act].ravel()
        aod = path_set.aod[u, act].ravel()
        std = np.sqrt(np.repeat(path_set.path_power[u, act], paths))
        draws = rng.standard_normal((aoa.size, 2))
        gains = std * (draws[:, 0] + 1j * draws[:, 1]) / math.sqrt(2.0)
        matrices[u] = channel_matrix(aoa, aod, gains, n_bs, n_ue)
    matrices.setflags(write=False)
    return BandChannel(
        band=path_set.band,
        carrier_ghz=path_set.carrier_ghz,
        matrices=matrices,
        path_set=path_set,
    )


def realize_multiband(
    geometry: Geometry, config: ScenarioConfig, rng: np.random.Generator
) -> tuple:
    """One small-scale realization per band over the shared geometry.

    Returns (sub-6 channel, mmWave channel); gains are independent across
    bands, angles agree wherever a cluster is visible to both.
    """
    sub6_paths = derive_path_set(geometry, "sub6", config)
    mm_paths = derive_path_set(geometry, "mmwave", config)
    sub6 = realize_channel(sub6_paths, config.sub6_n_bs, config.sub6_n_ue, rng)
    mmwave = realize_channel(mm_paths, config.n_bs, config.n_ue, rng)
    return sub6, mmwave
