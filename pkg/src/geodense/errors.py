"""Exception types shared across the package."""


class GeodenseError(Exception):
    """Base class for all library errors."""


class DomainError(GeodenseError):
    """Input outside the mathematical domain of an operation."""


class DegenerateStepError(GeodenseError):
    """Retraction update passes through the origin of a sphere."""


class AntipodalError(GeodenseError):
    """Great-circle interpolation between (near-)antipodal points is ambiguous."""


class ZeroVelocityError(GeodenseError):
    """A path parameterization has vanishing velocity where a derivative is needed."""


class CapabilityError(GeodenseError):
    """Provider lacks a capability (e.g. log-density) required by the operation."""


class ConfigError(GeodenseError):
    """Invalid solver / CLI configuration."""


class ProviderError(GeodenseError):
    """Base class for score-provider failures."""

    def __init__(self, message, request_id=None):
        super().__init__(message)
        self.request_id = request_id


class TransportError(ProviderError):
    """Connection or stream failure while talking to an external provider."""


class MalformedResponseError(ProviderError):
    """External provider sent a line that does not parse against the protocol."""


class DimensionMismatchError(ProviderError):
    """Query dimensions disagree with the provider's declared dimensions."""


class RemoteProviderError(ProviderError):
    """External provider reported an error for a request."""
