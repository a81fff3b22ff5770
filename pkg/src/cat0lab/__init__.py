"""Random walks on groups, drift, and isometric actions on CAT(0) spaces."""

__version__ = "0.1.0"

from .errors import (Cat0LabError, ConvergenceError, DomainError, RadiusExceeded,  # noqa: E402
                     ResourceError, SchemaError)
from .groups import (CyclicGroup, DihedralGroup, FreeGroup, GeneratingSet,  # noqa: E402
                     GroupElement, InfiniteDihedral, Lattice, ball, element_order,
                     group_from_descriptor, word_length)
from .grigorchuk import GrigorchukGroup, recursive_order, wreath_decompose  # noqa: E402
from .measures import FiniteSupportMeasure, convolution_power, convolve, sample_walk  # noqa: E402
from .drift import (ConvexCombinationSpec, DriftSeries, build_convex_combination,  # noqa: E402
                    drift_series, verify_conv_comb_bound)

__all__ = [
    "Cat0LabError", "ConvergenceError", "DomainError", "RadiusExceeded", "ResourceError",
    "SchemaError", "CyclicGroup", "DihedralGroup", "FreeGroup", "GeneratingSet", "GroupElement",
    "InfiniteDihedral", "Lattice", "GrigorchukGroup", "ball", "element_order",
    "group_from_descriptor", "word_length", "recursive_order", "wreath_decompose",
    "FiniteSupportMeasure", "convolution_power", "convolve", "sample_walk",
    "ConvexCombinationSpec", "DriftSeries", "build_convex_combination", "drift_series",
    "verify_conv_comb_bound",
]
