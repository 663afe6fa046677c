"""Exception hierarchy shared by all lago modules."""


class LagoError(Exception):
    """Base class of every error raised by this package."""


class EmptyInput(LagoError, ValueError):
    pass


class MalformedRow(LagoError, ValueError):
    def __init__(self, line, message="malformed row"):
        self.line = line
        super().__init__(f"line {line}: {message}")


class SelfLoop(MalformedRow):
    def __init__(self, line):
        super().__init__(line, "self-loop interactions are not allowed")


class NonUniformTimestamp(MalformedRow):
    def __init__(self, line, timestamp, tick_duration):
        self.timestamp = timestamp
        self.tick_duration = tick_duration
        super().__init__(
            line,
            f"timestamp {timestamp} is not an integer multiple of "
            f"tick duration {tick_duration}",
        )


class UnknownNode(LagoError, KeyError):
    def __str__(self):
        return f"unknown node {self.args[0]!r}"


class NotActive(LagoError, KeyError):
    def __str__(self):
        return f"time node {self.args[0]!r} is not active"


class InvalidStructure(LagoError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        head = "; ".join(str(v) for v in self.violations[:3])
        more = len(self.violations) - 3
        if more > 0:
            head += f" (+{more} more)"
        super().__init__(f"invalid community structure: {head}")


class EmptyStream(LagoError, ValueError):
    def __init__(self, message="link stream has no interactions (m = 0)"):
        super().__init__(message)


class InstanceTooLarge(LagoError, ValueError):
    pass


class NotInSource(LagoError, ValueError):
    pass


class SameCommunity(LagoError, ValueError):
    pass


class UnknownVariant(LagoError, ValueError):
    pass


class InvalidSpec(LagoError, ValueError):
    pass


class UnknownPreset(LagoError, ValueError):
    pass


class UniverseMismatch(LagoError, ValueError):
    pass


class MissingVariantResult(LagoError, ValueError):
    pass
