"""Coherence de Broglie wave interferometer simulation.

Transfer-matrix models of a cross-coupled double Mach-Zehnder
interferometer, its cavity Sagnac extension, and fringe metrology on the
resulting sweeps.
"""

from pbsi.errors import DomainError, UnresolvedError, UsageError

__version__ = "0.1.0"

__all__ = ["DomainError", "UnresolvedError", "UsageError", "__version__"]
