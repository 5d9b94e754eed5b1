"""Phonon transport from a quantum maximum-entropy moment closure.

Submodules are imported lazily so that ``import wigner_phonon`` stays cheap;
``wigner_phonon.heat_flux`` and friends load on first access.
"""

import importlib

__version__ = "0.1.0"

_SUBMODULES = ("bose_integrals", "cli", "config", "dispersion", "errors", "heat_flux",
               "local_temperature", "moyal", "qmep_closure", "transport_solver", "verification")

__all__ = list(_SUBMODULES) + ["__version__"]


def __getattr__(name):
    if name in _SUBMODULES:
        return importlib.import_module(f".{name}", __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
