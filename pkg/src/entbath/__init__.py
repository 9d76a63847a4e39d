"""entbath: entanglement decoherence of two bosonic modes in a common bath.

Exact nonequilibrium dynamics of a pair of identical, linearly coupled
modes prepared in a two-mode squeezed state and immersed in an
Ohmic-family environment. The relative mode decouples and keeps its
entanglement share; the center-of-mass mode dissipates, localizes beyond a
critical coupling, and thermalizes, producing a three-phase steady-state
diagram over coupling strength, spectral exponent, and temperature.
"""

__version__ = "0.1.0"

from .model import BathParams, ModelConfig, SolverOptions, SpectralParams, build_config
from .spectral import SpectralDensityHandle
from .modes import LocalizedMode, critical_coupling, find_localized_modes
from .greens import GreensSeries, PoleBranchDecomposition, TimeGrid, greens_series
from .observables import EntanglementRecord, ModeMoments, SqueezeRecord
from .sweep import AxisSpec, PhasePoint, SweepGrid, run_sweep, steady_state

__all__ = [
    "__version__",
    "BathParams", "ModelConfig", "SolverOptions", "SpectralParams", "build_config",
    "SpectralDensityHandle",
    "LocalizedMode", "critical_coupling", "find_localized_modes",
    "GreensSeries", "PoleBranchDecomposition", "TimeGrid", "greens_series",
    "EntanglementRecord", "ModeMoments", "SqueezeRecord",
    "AxisSpec", "PhasePoint", "SweepGrid", "run_sweep", "steady_state",
]
