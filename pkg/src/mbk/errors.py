"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An argument or state breaks a documented precondition."""


class EmptyClusterError(ContractViolation):
    """An operation that needs at least one member point got an empty cluster."""


class MissingTraceData(ContractViolation):
    """A trace lacks the optional records an audit was asked to consume."""
