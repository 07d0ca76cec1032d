"""planesynth: deterministic plane-geometry problem synthesis with exact ground truths."""

__version__ = "0.1.0"
