"""Exception types shared across the package."""


class UltraheatError(Exception):
    """Base class for all library errors."""


# --- multitopo ---------------------------------------------------------------

class CyclicInput(UltraheatError):
    """A relation claimed to be a DAG contains a directed cycle."""


class DuplicatePrime(UltraheatError):
    """Two topologies were assigned the same prime."""


class NotPrime(UltraheatError):
    """A topology label is not a prime number."""


class UnknownPrimeFactor(UltraheatError):
    """An edge weight has a factor outside the declared prime list."""


class AmbiguousOrientation(UltraheatError):
    """Endpoint dimensions are equal, so an edge cannot be oriented."""


# --- ultraindex ---------------------------------------------------------------

class DisconnectedGraph(UltraheatError):
    """Shortest-path distances requested on a disconnected graph."""


# --- toposort -----------------------------------------------------------------

class CycleDetected(UltraheatError):
    """Topological sorting found a directed cycle."""


# --- padic ---------------------------------------------------------------------

class PrimeMismatch(UltraheatError):
    """Two p-adic cells live over different primes."""


class LevelTooCoarse(UltraheatError):
    """Discretisation level is not finer than the vertex discs."""


# --- operators -------------------------------------------------------------------

class CellOutsideZ(UltraheatError):
    """A cell does not belong to any vertex disc."""


class InvalidLevel(UltraheatError):
    """Tree truncation level outside the valid range."""


# --- spectra -----------------------------------------------------------------------

class BallOutsideZ(UltraheatError):
    """A wavelet support ball is not contained in a vertex disc."""


class BadJ(UltraheatError):
    """Kozyrev character index outside 1..p-1."""


class LeafNode(UltraheatError):
    """An ultrametric wavelet was requested on a leaf."""


class TrivialCharacter(UltraheatError):
    """Character index 0 gives the constant, not a wavelet."""


class IncompleteBasis(UltraheatError):
    """Eigenbasis size does not match the discretised space dimension."""


class DimensionMismatch(UltraheatError):
    """Vector/matrix shapes are inconsistent."""


# --- heat ----------------------------------------------------------------------------

class NegativeTime(UltraheatError):
    """Semigroups are only defined for t >= 0."""


class BoundViolated(UltraheatError):
    """A certified error bound was exceeded; carries both sides."""


# --- cli / serialisation ---------------------------------------------------------------

class ParseError(UltraheatError):
    """An input file does not match its documented schema."""
