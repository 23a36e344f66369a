"""Persistent homology of random knot embeddings"""

from .knot import KnotEmbedding, PointCloud, interpolate
from .rips import Barcode, distance_matrix, persistence
from .pipeline import run_plan
