"""Exception hierarchy. Every error carries a short machine-readable name."""


class PlanarSpecError(ValueError):
    """Base class for all library errors."""


class NonSymmetricAdjacency(PlanarSpecError):
    pass


class NonSimpleGraph(PlanarSpecError):
    pass


class DisconnectedGraph(PlanarSpecError):
    pass


class BoundaryVertex(PlanarSpecError):
    pass


class UnboundedFace(PlanarSpecError):
    pass


class NotClosed(PlanarSpecError):
    pass


class EmbeddingError(PlanarSpecError):
    """Euler or Gauss-Bonnet identity failed: the rotation system is not spherical."""


class SphericalPair(PlanarSpecError):
    pass


class RadiusTooSmall(PlanarSpecError):
    pass


class InfeasibleProfile(PlanarSpecError):
    pass


class PlanarityViolation(PlanarSpecError):
    pass


class Disconnects(PlanarSpecError):
    pass


class RadiusExceedsValidRegion(PlanarSpecError):
    pass


class NotACycle(PlanarSpecError):
    pass


class NotTriangulation(PlanarSpecError):
    pass


class InvariantViolation(PlanarSpecError):
    """A lemma-level invariant failed on an instance that satisfies its hypotheses."""


class HypothesisNotDeclared(PlanarSpecError):
    pass


class CutLocusEncountered(PlanarSpecError):
    pass


class InvalidBoundary(PlanarSpecError):
    pass


class PasteMismatch(PlanarSpecError):
    pass


class SphereTooSmall(PlanarSpecError):
    pass


class CertificateFailure(PlanarSpecError):
    pass


class CannotClose(PlanarSpecError):
    pass


class ConvergenceFailure(PlanarSpecError):
    pass


class NotATree(PlanarSpecError):
    pass


class FaceDegreeNotConstant(PlanarSpecError):
    pass


class FormHypothesisViolated(PlanarSpecError):
    pass


class EigenvectorTouchesRim(PlanarSpecError):
    pass


class TooLarge(PlanarSpecError):
    pass
