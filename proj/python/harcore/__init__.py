"""Sensor time-series activity classification.

Convolutional channel embedding + LSTM + temporal self-attention, trained and
cross-validated entirely in the C++ core; this package is a thin binding.
"""

import json as _json

from ._harcore import (
    ConfigError,
    DataError,
    Model,
    NumericError,
    evaluate,
    gradcheck,
    make_windows,
    synth,
)
from ._harcore import run_train as _run_train
from ._harcore import run_xval as _run_xval

__all__ = [
    "ConfigError",
    "DataError",
    "NumericError",
    "Model",
    "evaluate",
    "gradcheck",
    "make_windows",
    "synth",
    "run_xval",
    "run_train",
]


def run_xval(config_text):
    """Run cross-validation from a key=value config; returns the report as a dict."""
    return _json.loads(_run_xval(config_text))


def run_train(config_text):
    """Train one model (test fold 0), save it to out_dir; returns the report as a dict."""
    return _json.loads(_run_train(config_text))
