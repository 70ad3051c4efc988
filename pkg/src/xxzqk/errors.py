"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class XXZQKError(Exception):
    """Base class for every error raised by the package."""


class DegenerateParameters(XXZQKError):
    """Equivariant parameters coincide (or nearly coincide)."""


class BaseDegenerate(XXZQKError):
    """A q-Pochhammer base sits at a root of unity."""


class ZeroMode(XXZQKError):
    """The Cartan mode H_0 was requested; it is not a generator."""


class NearSingularDenominator(XXZQKError):
    """A fixed-point matrix element has a vanishing denominator."""


class ZeroSpectralParameter(XXZQKError):
    """The monodromy matrix was requested at u = 0."""


class InadmissibleRoots(XXZQKError):
    """Bethe roots coincide or sit on the exclusion loci s_i = hbar^{+-1} s_j."""


class PoleAtSpectralParameter(XXZQKError):
    """The transfer eigenvalue was requested at u^2 = s_i."""


class PoleHit(XXZQKError):
    """An evaluation point landed on a pole of a rational expression."""


class PathCollision(XXZQKError):
    """Two roots of a tracked path merged during continuation."""


class StepUnderflow(XXZQKError):
    """The continuation step size fell below its lower bound."""


class IncompleteSet(XXZQKError):
    """Fewer distinct Bethe solutions than fixed points were found."""


class ResonantZ(XXZQKError):
    """The deformation parameter sits on a pole of the universal coefficients."""


class TruncationDominates(XXZQKError):
    """The truncated vertex series has not converged for any usable q."""


class ConfigError(XXZQKError):
    """A run configuration is malformed or contains unknown keys."""
