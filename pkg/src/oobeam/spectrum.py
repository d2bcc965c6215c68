"""Per-UE low-band spatial spectra: average beamforming gain over every
(BS beam, UE beam) codebook pair.

The analytic form is the default: path gains are independent zero-mean, so
cross terms vanish and the fading average collapses to a weighted sum of
per-path codebook responses, with no sampling noise.  The empirical form
averages realized channels and exists as the fidelity oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .arrays import Codebook, steering_matrix
from .channel import BandChannel, PathSet

__all__ = ["SpatialSpectrum", "empirical_spectrum", "analytic_spectrum", "spectrum_csv_lines"]


@dataclass(frozen=True)
class SpatialSpectrum:
    """Nonnegative gain matrices, one per UE, indexed [BS beam, UE beam]."""

    per_ue: np.ndarray
    mode: str
    num_realizations: int

    @property
    def num_ues(self) -> int:
        return int(self.per_ue.shape[0])

    def for_ue(self, ue: int) -> np.ndarray:
        return self.per_ue[ue]


def empirical_spectrum(
    realizations: Sequence[BandChannel], bs_codebook: Codebook, ue_codebook: Codebook
) -> SpatialSpectrum:
    """Average |W^H H V|^2 over realized channels, entrywise."""
    if len(realizations) == 0:
        raise ValueError("need at least one channel realization")
    first = realizations[0].matrices
    if first.shape[1] != bs_codebook.num_antennas or first.shape[2] != ue_codebook.num_antennas:
        raise ValueError("codebook antenna counts do not match the channel matrices")
    w_h = bs_codebook.matrix.conj().T
    v = ue_codebook.matrix
    acc = np.zeros((first.shape[0], bs_codebook.num_beams, ue_codebook.num_beams))
    for chan in realizations:
        proj = w_h @ chan.matrices @ v
        acc += np.abs(proj) ** 2
    acc /= len(realizations)
    acc.setflags(write=False)
    return SpatialSpectrum(per_ue=acc, mode="empirical", num_realizations=len(realizations))


def analytic_spectrum(
    path_set: PathSet, bs_codebook: Codebook, ue_codebook: Codebook
) -> SpatialSpectrum:
    """Closed-form fading average of the beam-pair gains.

    Entry (m, n) = N_bs * N_ue * sum_p power_p * |w_m^H a_bs(aoa_p)|^2
                                              * |a_ue(aod_p)^H v_n|^2.
    """
    n_bs, n_ue = bs_codebook.num_antennas, ue_codebook.num_antennas
    scale = float(n_bs * n_ue)
    paths = path_set.paths_per_cluster
    out = np.zeros((path_set.num_ues, bs_codebook.num_beams, ue_codebook.num_beams))
    for u in range(path_set.num_ues):
        act = path_set.active[u]
        if not act.any():
            continue
        aoa = path_set.aoa[u, act].ravel()
        aod = path_set.aod[u, act].ravel()
        weights = np.repeat(path_set.path_power[u, act], paths)
        bs_gain = np.abs(bs_codebook.matrix.conj().T @ steering_matrix(n_bs, aoa)) ** 2
        ue_gain = np.abs(ue_codebook.matrix.conj().T @ steering_matrix(n_ue, aod)) ** 2
        out[u] = scale * (bs_gain * weights) @ ue_gain.T
    out.setflags(write=False)
    return SpatialSpectrum(per_ue=out, mode="analytic", num_realizations=0)


def spectrum_csv_lines(spectrum: SpatialSpectrum, ue: int) -> list:
    """CSV heatmap of one UE's spectrum: row = BS beam, column = UE beam."""
    mat = spectrum.for_ue(ue)
    lines = [f"# spatial spectrum for ue {ue}; mode = {spectrum.mode}; "
             f"rows = BS beams ({mat.shape[0]}), columns = UE beams ({mat.shape[1]})"]
    lines.append("bs_beam," + ",".join(f"ue_beam_{n}" for n in range(mat.shape[1])))
    for m in range(mat.shape[0]):
        lines.append(f"{m}," + ",".join(repr(float(x)) for x in mat[m]))
    return lines
