"""y-convex hypergraph (yCHG) decomposition of binary images."""

from .errors import PNMParseError, SchemaError, UnsupportedFormatError, ValidationError
from .hypergraph import (YCHG, Hyperedge, areas, decompose, from_json, hyperedge_count,
                         oracle_decompose, reconstruct, run_partition, to_json)
from .imagekit import BinaryImage, SynthSpec, foreground_count, load_pnm, save_pnm, synth
from .runscan import (ColumnProfile, Run, ScanStrategy, build_profile, column_runs,
                      cut_vertex_counts, detect_boundary_columns)

__version__ = "0.1.0"
