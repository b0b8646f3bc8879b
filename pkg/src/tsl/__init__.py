"""Truncated weighted Taylor shift laboratory.

Builds finite-degree model functions for the weighted backward shift on
Taylor coefficients, measures their radial L^p growth, and runs the
inequality oracles and orbit-visit checks that certify the construction
at desk scale.
"""

from tsl.errors import ConstructionError, DomainError

__all__ = ["ConstructionError", "DomainError"]
__version__ = "0.1.0"
