"""Exception types shared across the package."""


class EcsimError(Exception):
    """Base class for all errors raised by ecsim."""


class UsageError(EcsimError, ValueError):
    """Invalid arguments or violated preconditions."""


class ParseError(UsageError):
    """Malformed input file."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class ProtocolViolation(EcsimError):
    """A node program broke the communication model (e.g. an oversized CONGEST message)."""

    def __init__(self, message, round=None, edge=None, size=None):
        self.round = round
        self.edge = edge
        self.size = size
        super().__init__(message)


class RoundBudgetExceeded(EcsimError, TimeoutError):
    """The round budget ran out while some nodes had not halted."""

    def __init__(self, message, rounds=None, running=None):
        self.rounds = rounds
        self.running = running
        super().__init__(message)


class SlackFailure(EcsimError):
    """A list-coloring step found an edge whose effective list is exhausted."""

    def __init__(self, message, edge=None, phase=None):
        self.edge = edge
        self.phase = phase
        super().__init__(message)
