"""Exact-arithmetic stability invariants for fibration degenerations."""

from .ring import IntersectionRing, RingElement
from .specs import DegenerationSpec, SHIPPED_SPECS, shipped_spec
from .invariants import (
    WeightData, df_from_weights, df_intersection, fibration_weight_data,
    fiber_weight_data, w0_w1, w0_from_fiber_df, df_j_expansion, minimum_norm,
    topological_constants_exact,
)

__all__ = [
    "IntersectionRing", "RingElement", "DegenerationSpec", "SHIPPED_SPECS",
    "shipped_spec", "WeightData", "df_from_weights", "df_intersection",
    "fibration_weight_data", "fiber_weight_data", "w0_w1", "w0_from_fiber_df",
    "df_j_expansion", "minimum_norm", "topological_constants_exact",
]
