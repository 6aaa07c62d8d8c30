"""Textured-mesh quality assessment workbench.

Subpackages: assets (mesh/image/JPEG I/O), distort (the 5-parameter recipe
grid), render (software rasterizer), characterize (content complexity),
metric (the learned patch-similarity quality metric), stats (subjective-score
processing and evaluation), study (the rating-session service), cli.
"""

__version__ = "0.1.0"
