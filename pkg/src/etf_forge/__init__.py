"""Exact and numeric tools for complex equiangular tight frames.

The package is split into:

* :mod:`etf_forge.exactpoly` -- multivariate polynomials over the rationals
* :mod:`etf_forge.groebner` -- Buchberger's algorithm and ideal membership
* :mod:`etf_forge.frames` -- numeric Gram-matrix conditions
* :mod:`etf_forge.sysgen` -- polynomial systems describing sub-Gram matrices
* :mod:`etf_forge.catalog` -- explicit frames, families and searches
* :mod:`etf_forge.cli` -- the ``etf-forge`` command line tool
"""

from etf_forge.errors import EtfForgeError

__version__ = "0.1.0"

__all__ = ["EtfForgeError", "__version__"]
