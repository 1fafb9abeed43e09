"""Lorentz rearrangement norms, Cantor-type constructions, Hausdorff covering
estimates and grid-discretized Sobolev-Lorentz capacities."""

from .cantor import CantorParams, Variant
from .rearrange import GridFunction, LorentzExponents, StepProfile, layercake_p1, lorentz_norm

__version__ = "0.1.0"

__all__ = [
    "CantorParams",
    "Variant",
    "GridFunction",
    "LorentzExponents",
    "StepProfile",
    "layercake_p1",
    "lorentz_norm",
]
