"""Exception hierarchy."""


class P2PMatchError(Exception):
    """Base class for all package errors."""


class InvalidConfig(P2PMatchError, ValueError):
    pass


class NetworkError(P2PMatchError, ValueError):
    pass


class DuplicateId(NetworkError):
    pass


class DanglingLink(NetworkError):
    pass


class GeometryViolation(NetworkError):
    """A link is shorter than the straight line between its endpoints."""


class Unreachable(NetworkError):
    def __init__(self, a, b):
        super().__init__(f"{b!r} is unreachable from {a!r}")
        self.a = a
        self.b = b


class InvalidRequest(P2PMatchError, ValueError):
    pass
