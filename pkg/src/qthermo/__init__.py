"""Quantum thermodynamics toolkit: thermal master equations with a thermodynamic audit.

Natural units (hbar = k_B = 1). Submodules:

``operators``  Hermitian operators, spectra and superoperators.
``baths``      bath spectral functions and heat capacities.
``davies``     weak-coupling thermal generators for static Hamiltonians.
``floquet``    thermal generators for periodically driven systems.
``dynamics``   propagation, steady states and cycle maps.
``ledger``     heat, work, entropy production and law audits.
``devices``    ready-made models (TLS, oscillator, tricycle, Otto cycle).
``thirdlaw``   cooling exponents and unattainability.
``scenario``/``cli``  scenario files and the command line runner.
"""
from .baths import BoseGas, FermiGasScaling, HarmonicField, WorkBath
from .davies import CouplingChannel, ThermalGenerator, build_generator, gibbs_state
from .dynamics import propagate, steady_state
from .errors import ConfigError, NumericalError, PhysicsViolation, QThermoError

__version__ = "0.1.0"

__all__ = [
    "BoseGas", "FermiGasScaling", "HarmonicField", "WorkBath",
    "CouplingChannel", "ThermalGenerator", "build_generator", "gibbs_state",
    "propagate", "steady_state",
    "ConfigError", "NumericalError", "PhysicsViolation", "QThermoError",
]
