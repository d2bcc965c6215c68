"""ULA steering vectors, inverse-cosine beam grids, analog codebooks, and the
half-power association between wide low-band beams and narrow mmWave beams.

All pointing angles live in [0, pi]; a half-wavelength ULA response depends on
the direction only through its cosine, so angles outside that range fold in.
Steering vectors use the unitary 1/sqrt(N) normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AngleGrid",
    "Codebook",
    "BeamAssociation",
    "fold_angle",
    "inverse_cosine_grid",
    "steering_vector",
    "steering_matrix",
    "build_codebook",
    "beam_gain_pattern",
    "build_association",
]


def fold_angle(angle):
    """Fold any angle (scalar or array) into [0, pi] preserving its cosine."""
    return np.arccos(np.clip(np.cos(angle), -1.0, 1.0))


@dataclass(frozen=True)
class AngleGrid:
    """Beam pointing angles, strictly increasing, uniformly spaced in cosine."""

    angles: np.ndarray

    @property
    def size(self) -> int:
        return int(self.angles.shape[0])

    @property
    def cosines(self) -> np.ndarray:
        return np.cos(self.angles)


def inverse_cosine_grid(size: int) -> AngleGrid:
    """Grid of `size` angles with arccos spacing: cos runs 1 -> -1 in equal steps.

    angles[k] = arccos(1 - 2k/(size-1)) for k = 0..size-1, so angles[0] = 0 and
    angles[-1] = pi.
    """
    if size < 2:
        raise ValueError(f"angle grid needs at least 2 points, got {size}")
    cosines = 1.0 - 2.0 * np.arange(size) / (size - 1)
    angles = np.arccos(np.clip(cosines, -1.0, 1.0))
    angles.setflags(write=False)
    return AngleGrid(angles=angles)


def steering_vector(num_antennas: int, angle: float) -> np.ndarray:
    """Unit-norm ULA response at `angle` for half-wavelength element spacing.

    Element k carries phase pi * k * cos(angle).
    """
    if num_antennas < 1:
        raise ValueError(f"need at least one antenna, got {num_antennas}")
    phase = np.pi * np.arange(num_antennas) * math.cos(angle)
    return np.exp(1j * phase) / math.sqrt(num_antennas)


def steering_matrix(num_antennas: int, angles: np.ndarray) -> np.ndarray:
    """Stack steering vectors as columns, one per entry of `angles`."""
    if num_antennas < 1:
        raise ValueError(f"need at least one antenna, got {num_antennas}")
    cosines = np.cos(np.atleast_1d(np.asarray(angles, dtype=float)))
    phase = np.pi * np.arange(num_antennas)[:, None] * cosines[None, :]
    return np.exp(1j * phase) / math.sqrt(num_antennas)


@dataclass(frozen=True)
class Codebook:
    """Analog beamforming codebook: unit-norm steering vectors on an angle grid.

    `matrix` has shape (num_antennas, num_beams); column k is the beamformer
    pointed at grid.angles[k].
    """

    num_antennas: int
    grid: AngleGrid
    matrix: np.ndarray

    @property
    def num_beams(self) -> int:
        return self.grid.size

    def beam(self, index: int) -> np.ndarray:
        return self.matrix[:, index]


def build_codebook(num_antennas: int, num_beams: int) -> Codebook:
    """Codebook of `num_beams` steering vectors on the inverse-cosine grid.

    mmWave codebooks use num_beams = num_antennas; low-band codebooks reuse the
    mmWave grid sizes with fewer antennas, so their beams are wider.
    """
    grid = inverse_cosine_grid(num_beams)
    matrix = steering_matrix(num_antennas, grid.angles)
    matrix.setflags(write=False)
    return Codebook(num_antennas=num_antennas, grid=grid, matrix=matrix)


def beam_gain_pattern(codeword: np.ndarray, angle: float) -> float:
    """Power gain of a unit-norm codeword toward a plane wave from `angle`.

    Peaks at 1.0 when the codeword is the steering vector of `angle` itself.
    """
    response = steering_vector(codeword.shape[0], angle)
    return float(abs(np.vdot(codeword, response)) ** 2)


@dataclass(frozen=True)
class BeamAssociation:
    """For each wide low-band beam, the mmWave beams inside its 3-dB main lobe.

    `ue_sets[n]` / `bs_sets[m]` are sorted mmWave beam indices associated with
    low-band UE beam n / BS beam m.  The boolean membership matrices have shape
    (num low-band beams, num mmWave beams) and carry the same information.
    """

    ue_sets: tuple
    bs_sets: tuple
    ue_membership: np.ndarray
    bs_membership: np.ndarray

    def pair_size(self, ue_beam: int, bs_beam: int) -> int:
        """Cardinality of the candidate pair set S_UE(n) x S_BS(m)."""
        return self.ue_sets[ue_beam].size * self.bs_sets[bs_beam].size


def _halfpower_membership(wide: Codebook, narrow_grid: AngleGrid) -> np.ndarray:
    """Boolean matrix: [m, j] True when narrow grid angle j sits within the
    half-power (>= 0.5 gain ratio) region of wide beam m.

    Every narrow angle is guaranteed a home: an angle captured by no wide beam
    (possible only in degenerate geometries) is assigned to the wide beam with
    maximal gain there, so downstream searches can always reach every beam.
    """
    responses = wide.matrix.conj().T @ steering_matrix(wide.num_antennas, narrow_grid.angles)
    gains = np.abs(responses) ** 2
    member = gains >= 0.5
    uncovered = ~member.any(axis=0)
    if uncovered.any():
        cols = np.flatnonzero(uncovered)
        member[np.argmax(gains[:, cols], axis=0), cols] = True
    if (~member.any(axis=1)).any():
        raise RuntimeError("half-power association produced an empty beam set")
    return member


def build_association(
    sub6_bs: Codebook,
    sub6_ue: Codebook,
    mm_bs: Codebook,
    mm_ue: Codebook,
) -> BeamAssociation:
    """Associate each low-band beam with the mmWave beams in its 3-dB lobe.

    Requires the low-band codebooks to be sampled on the same angle grids as
    the mmWave ones (same number of beams per side).
    """
    for wide, narrow, side in ((sub6_bs, mm_bs, "BS"), (sub6_ue, mm_ue, "UE")):
        if wide.num_beams != narrow.num_beams or not np.allclose(
            wide.grid.angles, narrow.grid.angles
        ):
            raise ValueError(f"{side} codebooks must share one angle grid")
    bs_member = _halfpower_membership(sub6_bs, mm_bs.grid)
    ue_member = _halfpower_membership(sub6_ue, mm_ue.grid)
    bs_member.setflags(write=False)
    ue_member.setflags(write=False)
    bs_sets = tuple(np.flatnonzero(row) for row in bs_member)
    ue_sets = tuple(np.flatnonzero(row) for row in ue_member)
    return BeamAssociation(
        ue_sets=ue_sets,
        bs_sets=bs_sets,
        ue_membership=ue_member,
        bs_membership=bs_member,
    )
