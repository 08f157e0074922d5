"""Exact equivariant-vertex engine for curve-in-threefold counting series."""

from .partitions import (Partition, BoxLabelling, SKEW, REVERSE, SocleData,
                         socle_data, box_stats, enumerate_partitions,
                         enumerate_labellings, sagan_series, gansner_series,
                         conjecture_check, q_offset, topological_dt,
                         topological_pt, macmahon)
from .vertex import (DT, PT, K_THEORY, COHOMOLOGY, VertexCache, VertexSeries,
                     diagram_character, tangent_character, derivative_character,
                     dt_vertex_weight, pt_vertex_weight, vertex_series,
                     edge_factors, paired_vertex_series)
from .theory import (LocalCurveGeometry, UniversalTriple, universal_triple,
                     partition_function, closed_form, refined_partition_function,
                     cohomological_limit_series, dtpt_check, limit_check, Report,
                     ANTIDIAGONAL)

__version__ = "0.1.0"
