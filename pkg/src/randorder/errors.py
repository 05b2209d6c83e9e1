"""Exception hierarchy shared across the package."""


class RandOrderError(Exception):
    """Base class for every error raised by this package."""


class InstanceTooLarge(RandOrderError):
    """An exact routine was asked to handle more items than its guard allows."""


class InvalidOrder(RandOrderError):
    """An arrival order is not a permutation of the instance ids."""


class IllegalDecision(RandOrderError):
    """An online algorithm produced a decision that breaks feasibility."""


class InvalidOptWitness(RandOrderError):
    """An OPT policy returned a set that is infeasible or not optimal."""


class ProfileInfeasible(RandOrderError):
    """A trace profile violates the pending-set inequality."""


class DomainError(RandOrderError, ValueError):
    """A parameter lies outside the domain of an analytic formula."""


class BadSpec(RandOrderError, ValueError):
    """A generator or experiment specification could not be interpreted."""


class MixedLengths(RandOrderError):
    """A single-length routine received intervals of several lengths."""


class NotTwoLengths(RandOrderError):
    """A two-length routine received more than two distinct lengths."""


class DuplicateItems(RandOrderError):
    """The distinct-items assumption failed before a bit could be extracted."""


class VerificationFailed(RandOrderError):
    """A verification check produced a counterexample."""


class ExtractionFailed(RandOrderError):
    """Pairwise extraction hit a degenerate pair or ran out of items."""

    def __init__(self, failure, pair_index: int) -> None:
        super().__init__(f"{failure.value} at pair {pair_index}")
        self.failure = failure
        self.pair_index = pair_index
