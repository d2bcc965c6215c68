"""Beam selection strategies.

All selection happens on the low-band spatial spectrum except the final
refinement, which trains the small associated mmWave candidate set against the
instantaneous channel, and the genie baseline, which searches every pair.

Coordination is hierarchical: UEs decide in rank order and each decided
low-band BS beam index is pushed to every higher-ranked UE, which then
discounts candidate pairs whose mmWave BS beams were already claimed.  Only
BS-side indices travel, since co-beam collisions act through the BS receive
beam alone; delivery is assumed error-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .arrays import BeamAssociation, Codebook
from .spectrum import SpatialSpectrum

__all__ = [
    "CoarseSelection",
    "BeamDecision",
    "ExchangeMessage",
    "ExchangeLog",
    "uncoordinated_select",
    "coordinated_select",
    "coordination_metric",
    "refine",
    "genie_select",
    "run_hierarchy",
]


class CoarseSelection(NamedTuple):
    """A low-band beam pair (UE beam, BS beam) plus a degenerate-input flag."""

    ue_beam: int
    bs_beam: int
    fallback: bool


@dataclass(frozen=True)
class BeamDecision:
    """Per-UE outcome of one strategy.

    `coarse` is the low-band pair (n, m); `refined` the mmWave pair.  The
    genie baseline has no coarse stage.
    """

    ue_index: int
    strategy: str
    coarse: Optional[tuple]
    refined: Optional[tuple] = None
    fallback: bool = False


@dataclass(frozen=True)
class ExchangeMessage:
    sender: int
    receiver: int
    bs_beam: int
    payload_bits: int


@dataclass
class ExchangeLog:
    """Ordered record of the low-band beam indices delivered between UEs."""

    messages: list = field(default_factory=list)

    @property
    def total_bits(self) -> int:
        return sum(m.payload_bits for m in self.messages)


def _argmax_pair(metric: np.ndarray) -> tuple:
    """Argmax of a [BS beam, UE beam] metric with ties broken toward the
    lowest BS beam, then the lowest UE beam."""
    flat = int(np.argmax(metric))
    bs_beam, ue_beam = divmod(flat, metric.shape[1])
    return ue_beam, bs_beam


def uncoordinated_select(
    spectrum: np.ndarray, assoc: BeamAssociation, noise_var: float
) -> CoarseSelection:
    """Pick the low-band pair with the largest average gain over noise.

    The candidate-set average SNR of a pair is its spectrum entry divided by
    the noise variance (the candidate count cancels), so this is a plain
    argmax.  An all-zero spectrum falls back to the lowest-index pair and is
    flagged.
    """
    metric = spectrum / noise_var
    ue_beam, bs_beam = _argmax_pair(metric)
    return CoarseSelection(ue_beam, bs_beam, fallback=not bool((spectrum > 0).any()))


def coordination_metric(
    spectrum: np.ndarray,
    assoc: BeamAssociation,
    received: Sequence[int],
    noise_var: float,
) -> np.ndarray:
    """Expected-SNR proxy per low-band pair with claimed BS beams discounted.

    For pair (n, m): metric = N * T / S where S is the candidate-set size,
    N counts candidates whose mmWave BS beam lies outside every received
    sender's BS beam set, and T = spectrum[m, n] / noise_var.
    """
    num_mm_bs = assoc.bs_membership.shape[1]
    blocked = np.zeros(num_mm_bs, dtype=bool)
    for m in received:
        blocked |= assoc.bs_membership[m]
    bs_total = assoc.bs_membership.sum(axis=1)
    bs_clear = (assoc.bs_membership & ~blocked).sum(axis=1)
    ue_total = assoc.ue_membership.sum(axis=1)
    surviving = bs_clear[:, None] * ue_total[None, :]
    pair_size = bs_total[:, None] * ue_total[None, :]
    return surviving * (spectrum / noise_var) / pair_size


def coordinated_select(
    spectrum: np.ndarray,
    assoc: BeamAssociation,
    received: Sequence[int],
    noise_var: float,
) -> CoarseSelection:
    """Coordinated low-band pair choice given lower-ranked UEs' BS beams.

    With nothing received this equals the uncoordinated choice.  If every
    candidate pair is fully blocked (all metrics zero) the UE reverts to the
    uncoordinated choice rather than staying silent, and the decision is
    flagged.
    """
    if len(received) == 0:
        return uncoordinated_select(spectrum, assoc, noise_var)
    metric = coordination_metric(spectrum, assoc, received, noise_var)
    if not bool((metric > 0).any()):
        choice = uncoordinated_select(spectrum, assoc, noise_var)
        return CoarseSelection(choice.ue_beam, choice.bs_beam, fallback=True)
    ue_beam, bs_beam = _argmax_pair(metric)
    return CoarseSelection(ue_beam, bs_beam, fallback=False)


def refine(
    mm_channel: np.ndarray,
    coarse: tuple,
    mm_bs: Codebook,
    mm_ue: Codebook,
    assoc: BeamAssociation,
) -> tuple:
    """Train the associated mmWave candidate set and return the best pair.

    Exhaustive over S_UE(n) x S_BS(m) only; gain is the instantaneous
    |w^H H v|^2.  Returns (UE beam, BS beam), ties toward lowest indices.
    """
    ue_beam, bs_beam = coarse
    ue_cand = assoc.ue_sets[ue_beam]
    bs_cand = assoc.bs_sets[bs_beam]
    gains = np.abs(mm_bs.matrix[:, bs_cand].conj().T @ mm_channel @ mm_ue.matrix[:, ue_cand]) ** 2
    flat = int(np.argmax(gains))
    bi, ui = divmod(flat, ue_cand.size)
    return int(ue_cand[ui]), int(bs_cand[bi])


def genie_select(mm_channel: np.ndarray, mm_bs: Codebook, mm_ue: Codebook) -> tuple:
    """Full exhaustive search over every mmWave beam pair."""
    gains = np.abs(mm_bs.matrix.conj().T @ mm_channel @ mm_ue.matrix) ** 2
    flat = int(np.argmax(gains))
    bs_beam, ue_beam = divmod(flat, mm_ue.num_beams)
    return ue_beam, bs_beam


def run_hierarchy(
    spectra: SpatialSpectrum,
    assoc: BeamAssociation,
    order: Sequence[int],
    strategy: str,
    noise_var: float,
) -> tuple:
    """Run coarse selection for all UEs in rank order.

    Returns (decisions indexed by UE, ExchangeLog).  Under coordination each
    decided BS beam index is delivered to every higher-ranked UE, K*(K-1)/2
    messages in total; the uncoordinated strategy exchanges nothing.
    """
    if strategy not in ("uncoordinated", "coordinated"):
        raise ValueError(f"hierarchy supports OOB strategies only, got {strategy!r}")
    order = list(order)
    k = spectra.num_ues
    if sorted(order) != list(range(k)):
        raise ValueError("order must be a permutation of all UE indices")
    num_bs_beams = spectra.per_ue.shape[1]
    payload_bits = max(1, math.ceil(math.log2(num_bs_beams)))

    decisions: list = [None] * k
    log = ExchangeLog()
    received: list = []
    for rank, ue in enumerate(order):
        spec = spectra.for_ue(ue)
        if strategy == "coordinated":
            choice = coordinated_select(spec, assoc, received, noise_var)
            received.append(choice.bs_beam)
            for later in order[rank + 1:]:
                log.messages.append(
                    ExchangeMessage(sender=ue, receiver=later,
                                    bs_beam=choice.bs_beam, payload_bits=payload_bits)
                )
        else:
            choice = uncoordinated_select(spec, assoc, noise_var)
        decisions[ue] = BeamDecision(
            ue_index=ue,
            strategy=strategy,
            coarse=(choice.ue_beam, choice.bs_beam),
            fallback=choice.fallback,
        )
    return decisions, log
