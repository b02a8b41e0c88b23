class BlaschkeError(ValueError):
    """Base class for invalid input to the library."""


class DomainError(BlaschkeError):
    pass


class PoleError(BlaschkeError):
    """Evaluation point coincides with a zero of B."""


class ZeroFileError(BlaschkeError):
    def __init__(self, path, lineno: int, msg: str):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.path = path
        self.lineno = lineno


class ExceptionalSetError(RuntimeError):
    """No admissible sample point could be found outside an exceptional set."""
