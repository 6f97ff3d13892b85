"""Extraction of ABS models from annotated C, with deductive verification,
deadlock analysis and an executable trace semantics."""

__version__ = "0.1.0"
