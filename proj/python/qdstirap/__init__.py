"""Polaron master-equation simulator for a cavity-coupled biexciton-cascade
single-photon source.

Configurations are plain dicts with the sections of the YAML schema
(``{"emitter": {...}, "cavity": {...}, "drive": {...}, "phonons": {...},
"numerics": {...}, "bath": {...}}``). Numbers are in engine units (ns^-1, ns,
ns^2, K); strings may carry a unit suffix ("164.5 ueV"). Missing keys take
the baseline values.
"""

from ._core import (
    Bath,
    ConfigError,
    IoError,
    NumericalError,
    __version__,
    default_config,
    load_config,
    render_config,
    run_sweep,
    simulate,
    validate_config,
)

__all__ = [
    "Bath",
    "ConfigError",
    "IoError",
    "NumericalError",
    "__version__",
    "default_config",
    "load_config",
    "render_config",
    "run_sweep",
    "simulate",
    "validate_config",
]
