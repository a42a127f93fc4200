"""Planar random flights with random lifetime and their stationary landing densities."""

__version__ = "0.1.0"

from .errors import ConvergenceError, DomainError, FlightfallError, PoleError, SpecFunOverflowError
from .flight import FlightParams, Uniform, VonMises
from .lifetime import Exponential, Gamma
from .stationary import QuadratureSettings, StationaryModel

__all__ = [
    "ConvergenceError",
    "DomainError",
    "Exponential",
    "FlightParams",
    "FlightfallError",
    "Gamma",
    "PoleError",
    "QuadratureSettings",
    "SpecFunOverflowError",
    "StationaryModel",
    "Uniform",
    "VonMises",
]
