"""Python bindings for the lossy channel game solver toolkit.

The compiled extension `_core` is produced by the CMake build (target
`lcsynth_py`), which drops it next to this file. Build the project first or
install the package after building.
"""

from ._core import (
    BudgetExceededError,
    ExtractionIncompleteError,
    Model,
    ParseError,
    UnsupportedObjectiveError,
    fuzz,
    oracle,
    parse,
    simulate,
    solve,
    synth,
    verify,
)

__all__ = [
    "BudgetExceededError",
    "ExtractionIncompleteError",
    "Model",
    "ParseError",
    "UnsupportedObjectiveError",
    "fuzz",
    "oracle",
    "parse",
    "simulate",
    "solve",
    "synth",
    "verify",
]
