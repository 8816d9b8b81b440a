"""curvequant: exact truncation-aware engine for quantum algebras on curves."""

__version__ = "0.1.0"
