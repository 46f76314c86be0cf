"""Exception hierarchy shared across the package."""

from __future__ import annotations


class SimcorrError(Exception):
    """Base class for all simcorr errors."""


class DomainError(SimcorrError, ValueError):
    """A parameter lies outside its mathematical domain."""


class DegenerateObservationError(SimcorrError, ValueError):
    """Observation on a locus where the similarity measure is undefined.

    ``locus`` identifies which locus was hit:

    * ``"sum"``        -- the observation is proportional to the vector of
      ones (bivariate: x1 == x2), where the orthogonal variation vanishes;
    * ``"difference"`` -- the observation is orthogonal to the vector of
      ones (bivariate: x1 == -x2), where the aligned variation vanishes;
    * ``"zero"``       -- the observation is the zero vector.

    ``row`` carries the offending row index when raised for a sample.
    """

    def __init__(self, message: str, locus: str | None = None, row: int | None = None):
        super().__init__(message)
        self.locus = locus
        self.row = row


class DataError(SimcorrError, ValueError):
    """Malformed or unusable input data (parsing, shapes, zero columns)."""


class NumericalError(SimcorrError, RuntimeError):
    """A numerical routine failed to converge; carries diagnostics."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class EstimationError(NumericalError):
    """Optimizer failure; carries the best point found so far."""

    def __init__(self, message: str, best: object = None, diagnostics: dict | None = None):
        super().__init__(message, diagnostics)
        self.best = best
