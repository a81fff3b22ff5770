from .base import Cat0Space
from .composite import ProductSpace, RescaledSpace
from .euclidean import EuclideanSpace
from .geometry import (BusemannDirection, SpaceCheckReport, WeightedPointSet, barycenter,
                       busemann_numeric, busemann_value, check_space, circumcenter, cn_defect,
                       rescale, simplex_is_degenerate, space_from_descriptor)
from .hyperbolic import HyperbolicPlane
from .tree import MetricTree, TreePoint, star_tree

__all__ = [
    "Cat0Space", "EuclideanSpace", "HyperbolicPlane", "MetricTree", "TreePoint", "ProductSpace",
    "RescaledSpace", "WeightedPointSet", "BusemannDirection", "SpaceCheckReport", "barycenter",
    "busemann_numeric", "busemann_value", "check_space", "circumcenter", "cn_defect", "rescale",
    "simplex_is_degenerate", "space_from_descriptor", "star_tree",
]
