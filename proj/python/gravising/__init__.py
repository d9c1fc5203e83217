"""Ising crystals in slowly varying fields.

Submodules mirror the C++ library: ``thermo``, ``profile``, ``gchain``, ``mc``
and ``droplet``; lattice geometry and fields live at the top level.
"""

from ._gravising import (
    FieldSpec,
    LatticeGeometry,
    __version__,
    droplet,
    gchain,
    mc,
    profile,
    thermo,
)

__all__ = [
    "FieldSpec",
    "LatticeGeometry",
    "__version__",
    "droplet",
    "gchain",
    "mc",
    "profile",
    "thermo",
]
