"""Spectrum, regularized trace and nodal points of a retarded Sturm-Liouville problem with interface conditions."""

from .api import AnalysisResult, RetSpecAPI
from .exceptions import RetSpecError

__version__ = "0.1.0"

__all__ = ["AnalysisResult", "RetSpecAPI", "RetSpecError", "__version__"]
