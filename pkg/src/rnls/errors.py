"""Exception types raised across the package."""


class RnlsError(Exception):
    """Base class for all package errors."""


class InvalidGrid(RnlsError, ValueError):
    pass


class InvalidField(RnlsError, ValueError):
    pass


class InvalidParams(RnlsError, ValueError):
    pass


class InvalidInput(RnlsError, ValueError):
    pass


class Inadmissible(RnlsError):
    """The chemical potential does not satisfy omega < -lambda0."""

    def __init__(self, omega, lambda0, margin):
        self.omega = omega
        self.lambda0 = lambda0
        self.margin = margin
        super().__init__(
            f"inadmissible chemical potential: omega={omega:g} must be below "
            f"-lambda0 - margin = {-lambda0 - margin:.12g}"
        )


class Lambda0Failed(RnlsError):
    pass


class NumericalBlowup(RnlsError):
    def __init__(self, iteration):
        self.iteration = iteration
        super().__init__(f"non-finite values appeared at iteration {iteration}")


class DomainError(RnlsError, ValueError):
    pass


class NoSolution(RnlsError, ValueError):
    pass


class ModulusNearOne(RnlsError, ValueError):
    def __init__(self, bracket):
        self.bracket = bracket
        super().__init__(
            f"elliptic modulus too close to 1; root bracket is [{bracket[0]!r}, {bracket[1]!r}]"
        )


class DegenerateAlignment(RnlsError):
    """The complex H1 pairing vanishes, so the aligning phase is undefined."""


class InsufficientData(RnlsError, ValueError):
    pass


class FormatError(RnlsError, ValueError):
    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class ConfigError(RnlsError, ValueError):
    pass
