"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A numeric parameter violates its documented domain."""


class InsufficientDataError(ValueError):
    """Too few samples (or too few qualifying histogram bins) to run a check."""


class ImageFormatError(ValueError):
    """The file is not a supported 8-bit grayscale or RGB image."""


class DatasetLayoutError(ValueError):
    """The dataset tree does not follow the expected class-per-directory layout."""


class MaterializationError(RuntimeError):
    """Perturbing or writing one dataset image failed; the message names the path."""


class HarnessFailureError(RuntimeError):
    """The external training harness exited nonzero."""

    def __init__(self, message: str, stdout: str = "", stderr: str = ""):
        super().__init__(message)
        self.stdout = stdout
        self.stderr = stderr


class MetricsContractError(RuntimeError):
    """A harness metrics file violates the metrics JSON contract."""
