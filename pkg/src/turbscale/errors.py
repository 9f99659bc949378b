"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class DegenerateInputError(DomainError):
    """Input is well-formed but too small or too flat to yield a result."""


class ContractError(ValueError):
    """Two inputs that must agree with each other do not."""


class ParseError(ValueError):
    """A data file does not follow its format contract."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
