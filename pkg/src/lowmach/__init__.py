"""Low Mach number limit lab for barotropic Euler flows.

Modules: ``eos`` (pressure law and energy densities), ``fields`` (periodic
grids and operators), ``comp_euler`` (finite-volume compressible solver),
``incomp_euler`` (pseudo-spectral incompressible solver), ``acoustics``
(exact linear acoustic propagator), ``measures`` (empirical measures and
relative energy) and ``harness`` (experiments, reports and the CLI).
"""
from .eos import CutoffChi, DomainError, EosModel
from .fields import ConservedState, SubBox, TorusGrid

__version__ = "0.1.0"

__all__ = ["ConservedState", "CutoffChi", "DomainError", "EosModel", "SubBox", "TorusGrid",
           "__version__"]
