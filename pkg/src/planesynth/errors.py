"""Engine-level exceptions (generation, solving, rendering, pipeline)."""


class EngineError(Exception):
    pass


class LimitExceeded(EngineError):
    """Point or line budget of the tier configuration would be exceeded."""


class ReplayDivergence(EngineError):
    """Recomputing a trajectory step produced different output than recorded."""


class DegenerateResult(EngineError):
    """Operator produced zero-area, coincident, or otherwise invalid geometry."""


class GenerationFailed(EngineError):
    """Retry budget exhausted while evolving a manifold."""


class NoPermittedOperator(EngineError):
    pass


class NoSolvableTarget(EngineError):
    pass


class TargetUnsolvable(EngineError):
    """Ground truth for the sampled target is not representable exactly."""


class DegenerateRay(EngineError):
    pass


class DegeneratePolygon(EngineError):
    pass


class NoShadableRegion(EngineError):
    pass


class UnmappedContour(EngineError):
    """A contour pixel run matches no symbolic curve within the threshold."""


class OpenLoop(EngineError):
    """Mapped curve sequence fails symbolic closure."""


class SchemaError(EngineError):
    """Malformed dataset record."""


class MissingField(EngineError):
    pass


class ProtocolError(EngineError):
    pass
