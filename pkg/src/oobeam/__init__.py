"""Uplink multi-user mmWave beam selection aided by low-band spatial spectra.

Modules by concern: `arrays` (steering vectors, codebooks, beam association),
`channel` (geometry and multi-band realizations), `spectrum` (low-band
spatial spectra), `selection` (uncoordinated / hierarchically coordinated /
genie strategies), `receiver` (ZF combining and SINR), `oracle` (independent
verifiers), `harness` (seeded Monte-Carlo trials, sweeps, CSV), `cli`.
"""

from .arrays import (
    AngleGrid,
    BeamAssociation,
    Codebook,
    beam_gain_pattern,
    build_association,
    build_codebook,
    inverse_cosine_grid,
    steering_vector,
)
from .channel import (
    BandChannel,
    Geometry,
    PathSet,
    derive_path_set,
    pathloss_db,
    place_scenario,
    realize_channel,
    realize_multiband,
)
from .config import BandParams, ConfigError, PathlossParams, ScenarioConfig, load_config
from .harness import (
    SimulationArtifacts,
    TrialResult,
    build_artifacts,
    run_trial,
    run_trials,
    sweep,
    verify,
)
from .oracle import exhaustive_search, gram_crosstalk_deviation, virtual_decompose
from .receiver import build_effective, sinr_general, sinr_schur, sum_rate, zf_combine
from .selection import (
    BeamDecision,
    ExchangeLog,
    coordinated_select,
    genie_select,
    refine,
    run_hierarchy,
    uncoordinated_select,
)
from .spectrum import SpatialSpectrum, analytic_spectrum, empirical_spectrum

__version__ = "0.1.0"
