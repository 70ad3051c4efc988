"""Quantum K-theory of cotangent bundles of Grassmannians and the XXZ chain.

Submodules: ``core`` (scalars, parameters, graded operators, series),
``uq_action`` (Drinfeld generators on the fixed-point basis), ``xxz_chain``
(monodromy and algebraic Bethe ansatz), ``bethe`` (Bethe equations and their
solver), ``qop`` (quantum classes and Q-operators), ``vertex`` (vertex
functions) and ``cli``.
"""

from .core import ModelParams, make_params
from .errors import XXZQKError
from .report import VerificationReport

__version__ = "0.1.0"

__all__ = ["ModelParams", "VerificationReport", "XXZQKError", "make_params", "__version__"]
