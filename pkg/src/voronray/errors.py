"""Exception types shared across the library."""


class VoronoiError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(VoronoiError):
    """Input points do not share a single dimension, or a query has the wrong length."""


class DuplicatePoint(VoronoiError):
    """Two generator points have exactly identical coordinates."""


class DegenerateConfiguration(VoronoiError):
    """Nodes are not in general position (near-cospherical or affinely dependent)."""


class ParallelGenerator(VoronoiError):
    """A candidate generator lies in the search hyperplane; the projection is undefined."""


class NoBracket(VoronoiError):
    """Exponential bracketing exceeded its growth limit without finding a crossing."""


class RetryExhausted(VoronoiError):
    """Descent gave up after too many consecutive escaped rays."""


class UnboundedRay(VoronoiError):
    """A Monte-Carlo ray escaped to infinity; the cell is unbounded in that direction."""

    def __init__(self, cell, direction):
        super().__init__(f"ray from cell {cell} escaped to infinity")
        self.cell = cell
        self.direction = direction


class UnboundedCell(VoronoiError):
    """The requested cell is unbounded and the operation needs a bounded one."""


class UnboundedFace(VoronoiError):
    """The requested interface has a boundary ray and no finite vertex hull."""


class MissingCache(VoronoiError):
    """A lower-indexed face result was expected in the cache but never produced."""


class MissingNeighbor(VoronoiError):
    """An area map does not cover every neighbor the mesh reports for the cell."""


class OrderViolation(VoronoiError):
    """Minor-table columns were loaded out of the required descending order."""


class SpuriousVertices(UserWarning):
    """An approximate raycast produced a vertex count differing from the exact one."""
