"""levylab: local times of symmetric Lévy processes and their associated Gaussian processes."""
from . import config, exponent, gaussian, measure, pathlab, report, stats
from ._kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["config", "measure", "exponent", "gaussian", "pathlab", "report", "stats", "BACKEND",
           "__version__"]
