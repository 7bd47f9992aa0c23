"""Locally defined positive definite functions: spectra, RKHS tests and extensions."""
__version__ = "0.1.0"

from . import catalog, extension, gp, measures, mercer, rkhs  # noqa: E402,F401
from .catalog import get, gram, psd_check  # noqa: E402,F401
