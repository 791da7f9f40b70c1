"""Shared exception types."""


class FormatError(ValueError):
    """Raised when an input file violates its declared format.

    The message always carries ``path:line`` context so the offending line
    can be found without re-running under a debugger.
    """

    def __init__(self, path, lineno, message):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = str(path)
        self.lineno = lineno
