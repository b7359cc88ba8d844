"""Semantic exception hierarchy shared by all modules."""


class Error(Exception):
    """Base class for every error raised by this package."""


class DimensionError(Error):
    """Shapes of channel, metric or distribution do not line up."""


class MetricSingularError(Error):
    """The metric vanishes on a channel-reachable output while the competitor's does not."""


class TiltingUndefinedError(Error):
    """A tilted distribution has a zero normalizer."""


class InfeasibleError(Error):
    """The transport kernel has an empty row or column on the support of Q."""


class BudgetError(Error):
    """An exact enumeration would exceed its work budget."""


class GateRefusalError(Error):
    """A technical assumption required by the requested computation fails."""


class ZeroErrorRegimeError(Error):
    """Some input pair reaches disjoint outputs, so the rate-zero limit formula does not apply."""


class ConvergenceError(Error):
    """An iterative solver failed to reach its tolerance."""


class UsageError(Error):
    """Malformed command line or config file."""
