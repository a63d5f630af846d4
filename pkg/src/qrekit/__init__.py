"""Quantitative regular expressions, streaming evaluation and cardiac peak detectors."""
from .costs import BOTTOM
from .qre import QreError
from .reference import eval_reference
from .streaming import compile_streaming
from .textformat import parse_qre

__version__ = "0.1.0"

__all__ = ["BOTTOM", "QreError", "eval_reference", "compile_streaming", "parse_qre", "__version__"]
