"""Python access to the cocycle lab experiments and a few numerical kernels."""

from ._core import (
    ConfigError,
    __doc__,
    __version__,
    continued_fraction,
    geodesic_energy,
    list_experiments,
    run,
)

__all__ = [
    "ConfigError",
    "__doc__",
    "__version__",
    "continued_fraction",
    "geodesic_energy",
    "list_experiments",
    "run",
]
