"""Ergodicity of linear, fractal and multifractal descriptors of noise series."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DegenerateInputError,
    ErgodescError,
    ExtremeQError,
    InsufficientScalesError,
    InvalidArgumentError,
    UndefinedDescriptorError,
)

__all__ = [
    "__version__",
    "DegenerateInputError",
    "ErgodescError",
    "ExtremeQError",
    "InsufficientScalesError",
    "InvalidArgumentError",
    "UndefinedDescriptorError",
]
