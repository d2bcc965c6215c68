"""Effective channel construction, zero-forcing combining, and SINR/rate math.

The digital stage sees a K x K effective channel: entry [k, u] is UE u's
channel filtered by UE k's BS analog beam and UE u's own transmit beam.
Co-beam collisions make this matrix numerically singular by construction, so
the combiner switches to a pseudo-inverse past a condition-number threshold
and evaluates the general SINR ratio there; collided UEs then come out with
near-zero SINR instead of overflow.

Filtered noise keeps variance noise_var because the analog combiner columns
are unit norm.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .arrays import Codebook
from .selection import BeamDecision

__all__ = [
    "COND_THRESHOLD",
    "EffectiveChannel",
    "CombinerOutput",
    "build_effective",
    "zf_combine",
    "sinr_general",
    "sinr_schur",
    "sum_rate",
]

COND_THRESHOLD = 1e6


@dataclass(frozen=True)
class EffectiveChannel:
    """K x K effective channel plus its 2-norm condition number."""

    matrix: np.ndarray
    condition_number: float


@dataclass(frozen=True)
class CombinerOutput:
    """Digital combiner, per-UE SINRs, and the resulting sum rate."""

    combiner: np.ndarray
    sinrs: np.ndarray
    sum_rate: float
    used_pseudo_inverse: bool


def build_effective(
    channels: np.ndarray,
    decisions: Sequence[BeamDecision],
    mm_bs: Codebook,
    mm_ue: Codebook,
) -> EffectiveChannel:
    """Assemble the effective channel from refined beam decisions.

    The analog BS combiner takes one codebook column per UE (one RF chain
    each); entry [k, u] = w_{m_k}^H H^u v_{n_u}.
    """
    k = channels.shape[0]
    if len(decisions) != k:
        raise ValueError("need one decision per UE")
    bs_beams = [d.refined[1] for d in decisions]
    w_rf = mm_bs.matrix[:, bs_beams]
    steered = np.column_stack(
        [channels[u] @ mm_ue.beam(decisions[u].refined[0]) for u in range(k)]
    )
    h_e = w_rf.conj().T @ steered
    return EffectiveChannel(matrix=h_e, condition_number=_condition_number(h_e))


def _condition_number(matrix: np.ndarray) -> float:
    sv = np.linalg.svd(matrix, compute_uv=False)
    if sv[-1] <= 0.0 or not np.isfinite(sv[-1]):
        return float("inf")
    return float(sv[0] / sv[-1])


def zf_combine(h_e: np.ndarray, noise_var: float, cond_threshold: float = COND_THRESHOLD) -> CombinerOutput:
    """Zero-forcing combiner with a pseudo-inverse fallback for singular inputs.

    Well conditioned: W_D inverts the effective channel and the u-th SINR is
    1 / (noise_var * [(H^H H)^-1]_{uu}), evaluated as 1 / (noise_var *
    ||row_u(W_D)||^2).  Past the threshold the combiner is the Moore-Penrose
    pseudo-inverse and SINRs come from the general signal-over-interference
    ratio, under which UEs tangled in a co-beam collision come out
    interference-limited (near-zero relative to their interference-free SNR)
    instead of overflowing.
    """
    h_e = np.asarray(h_e, dtype=complex)
    if h_e.ndim != 2 or h_e.shape[0] != h_e.shape[1] or h_e.shape[0] == 0:
        raise ValueError("effective channel must be a nonempty square matrix")
    if noise_var <= 0:
        raise ValueError("noise variance must be positive")
    k = h_e.shape[0]
    cond = _condition_number(h_e)
    if cond < cond_threshold:
        w_d = np.linalg.inv(h_e)
        row_power = np.sum(np.abs(w_d) ** 2, axis=1)
        sinrs = 1.0 / (noise_var * row_power)
        used_pinv = False
    else:
        w_d = np.linalg.pinv(h_e)
        sinrs = np.array([sinr_general(h_e, w_d, u, noise_var) for u in range(k)])
        used_pinv = True
    return CombinerOutput(
        combiner=w_d,
        sinrs=sinrs,
        sum_rate=sum_rate(sinrs),
        used_pseudo_inverse=used_pinv,
    )


def sinr_general(h_e: np.ndarray, w_d: np.ndarray, u: int, noise_var: float) -> float:
    """Signal over interference-plus-noise for UE u under combiner row u."""
    row = w_d[u]
    projections = np.abs(row @ h_e) ** 2
    signal = projections[u]
    interference = projections.sum() - signal
    denom = interference + np.sum(np.abs(row) ** 2) * noise_var
    if denom == 0.0:
        return 0.0
    return float(signal / denom)


def sinr_schur(h_e: np.ndarray, u: int, noise_var: float) -> float:
    """ZF SINR for UE u via the Schur complement of the Gram matrix.

    gamma_u = (||h_u||^2 - h_u^H P h_u) / noise_var where P projects onto the
    span of the other columns.  Exists as an independent cross-check of the
    inverse-based formula; rank deficiency is handled through an SVD basis,
    so a column inside the interferers' span yields exactly zero.
    """
    h_u = h_e[:, u]
    others = np.delete(h_e, u, axis=1)
    energy = float(np.sum(np.abs(h_u) ** 2))
    if others.size:
        basis, sv, _ = np.linalg.svd(others, full_matrices=False)
        tol = max(others.shape) * np.finfo(float).eps * (sv[0] if sv.size else 0.0)
        basis = basis[:, sv > tol]
        energy -= float(np.sum(np.abs(basis.conj().T @ h_u) ** 2))
    return max(energy, 0.0) / noise_var


def sum_rate(sinrs: Sequence[float]) -> float:
    """Sum of per-UE spectral efficiencies log2(1 + SINR), in bit/s/Hz."""
    arr = np.asarray(sinrs, dtype=float)
    if (arr < 0).any():
        raise ValueError("SINRs must be nonnegative")
    return float(np.sum(np.log1p(arr)) / np.log(2.0))
