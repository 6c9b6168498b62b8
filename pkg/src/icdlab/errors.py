"""Exception types shared across the package."""


class IcdlabError(Exception):
    """Base class for all errors raised by icdlab."""


class ParseError(IcdlabError, ValueError):
    """Malformed input file or value.

    ``line`` is the 1-based line (or row) number where parsing failed, when known.
    """

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class ContractError(IcdlabError, ValueError):
    """A caller violated an operation's precondition (shape, count, range)."""


class DataIntegrityError(IcdlabError):
    """Shipped or user data is internally inconsistent."""


class StageError(IcdlabError):
    """Failure inside an experiment stage; ``stage`` names the pipeline step."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")
