"""Phase-space commutation and symmetrization functions with a quantum OZ/HNC solver."""

__version__ = "0.1.0"

from .grid import Axis, ComplexGrid, GridBoundsError
from .potentials import GaussianWell, Harmonic, LennardJones, PotentialModel, SmoothedCore
from .system import Configuration, ThermalSystem, classical_hamiltonian

__all__ = [
    "Axis",
    "ComplexGrid",
    "Configuration",
    "GaussianWell",
    "GridBoundsError",
    "Harmonic",
    "LennardJones",
    "PotentialModel",
    "SmoothedCore",
    "ThermalSystem",
    "classical_hamiltonian",
    "__version__",
]
