"""
PME Repeater Toolkit
Fock-space verification, closed-form rates and Monte Carlo for a
single-photon-source quantum repeater built from atomic ensembles.
"""

from .common import ConfigError, FockError, ModeError, NotPMEError, SimulationError, TruncationError
from .fock import FockState, MixedState, ModeId, ModeKind, Polarization, build_eme, build_input_photon_state
from .optics import (
    ClickOutcome, DetectorModel, apply_beamsplitter, apply_linear_optics, apply_loss, apply_pbs,
    apply_phase, apply_polarization_flip, convert_excitation, measure_clicks, retrieve,
)
from .protocols import (
    HeraldResult, PmeLayout, basic_link_generation, entanglement_swap, local_pme_generation,
    pme_sign, pme_state, store_input_photon, teleport,
)
from .dark_state import DarkStateSystem, dark_state_check
from .analytics import (
    CavityParams, ProtocolParams, RateBreakdown, cavity_snr, coherent_snr, fidelity_imperfection,
    free_space_snr, rate_breakdown, reference_comparison, success_probs, sweep, total_time,
)
from .simulation import (
    RetryModel, SimConfig, SimOutcome, convergence_report, simulate_basic_link, simulate_model,
    simulate_nested,
)
from .run_config import RunConfig, load_run_config, parse_run_config
from .verification import run_verification

__all__ = [
    'ConfigError', 'FockError', 'ModeError', 'NotPMEError', 'SimulationError', 'TruncationError',
    'FockState', 'MixedState', 'ModeId', 'ModeKind', 'Polarization',
    'build_eme', 'build_input_photon_state',
    'ClickOutcome', 'DetectorModel',
    'apply_beamsplitter', 'apply_linear_optics', 'apply_loss', 'apply_pbs', 'apply_phase',
    'apply_polarization_flip', 'convert_excitation', 'measure_clicks', 'retrieve',
    'HeraldResult', 'PmeLayout',
    'basic_link_generation', 'entanglement_swap', 'local_pme_generation',
    'pme_sign', 'pme_state', 'store_input_photon', 'teleport',
    'DarkStateSystem', 'dark_state_check',
    'CavityParams', 'ProtocolParams', 'RateBreakdown',
    'cavity_snr', 'coherent_snr', 'fidelity_imperfection', 'free_space_snr', 'rate_breakdown',
    'reference_comparison', 'success_probs', 'sweep', 'total_time',
    'RetryModel', 'SimConfig', 'SimOutcome',
    'convergence_report', 'simulate_basic_link', 'simulate_model', 'simulate_nested',
    'RunConfig', 'load_run_config', 'parse_run_config',
    'run_verification',
]
