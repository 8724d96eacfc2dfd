"""rarelab: a desk-scale numerical laboratory for the 1D isentropic
compressible Navier-Stokes equations with degenerate density-dependent
viscosity, centered on smoothed rarefaction waves, their stability, and
vacuum dynamics."""

from .gas import GasParams
from .rarefaction import WaveProfile

__version__ = "0.1.0"

__all__ = ["GasParams", "WaveProfile", "__version__"]
