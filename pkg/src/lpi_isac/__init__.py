"""Simulator for OFDM ISAC waveforms hardened with artificial phase and Doppler shifts.

Alice rotates every symbol (or every subcarrier) by a secret phase and
shifts every OFDM symbol by a secret frequency offset. The legitimate
receiver removes both; passive eavesdroppers that only know the pilot
lattice are left with a smeared range-Doppler image.
"""

from .channel import SceneConfig, Target, add_awgn, propagate
from .errors import (
    ConfigError,
    DegenerateMaskError,
    DegenerateReferenceError,
    DimensionError,
    FormatError,
    LpiSimError,
    NoTargetError,
    UnsupportedDelayError,
    WeakLosWarning,
)
from .frame import (
    FrameConfig,
    PilotLattice,
    build_pilot_lattice,
    demodulate,
    nominal_pilot_count,
    generate_frame,
    modulate,
)
from .harness import Scenario, preset, run_campaign, run_scenario, simulate
from .impair import (
    ImpairmentMode,
    LpiSecret,
    apply_doppler,
    apply_phase,
    generate_secret,
    remove_doppler,
    remove_phase,
)
from .metrics import MaskSpec, MetricsReport, evaluate, image_sinr, islr, pslr
from .rdmap import CHEBYSHEV_100, RECTANGULAR, RangeDopplerMap, WindowSpec
from .rx_eve import blind_pipeline, smart_pipeline
from .rx_legit import legit_pipeline

__version__ = "0.1.0"
