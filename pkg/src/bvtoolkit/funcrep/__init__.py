"""Function representations, the example catalog and conversions."""

from .algebra import absolute, add, multiply, scale, subtract
from .base import (CONSTANT, DECREASING, INCREASING, OSCILLATING, BlackBox, FunctionRep,
                   GridFunction, Interval, PiecewiseMonotone, PointSpikes, Residual,
                   StepFunction, as_interval, evaluate, from_smooth, split_monotone, to_grid)
from .catalog import CATALOG, CatalogEntry, calkin_wilf_unit, catalog_get
from .special import (CantorFunction, OscillatingSine, cantor_approximant, cantor_exact,
                      cantor_integral)
from .specfile import load_spec, load_spec_file

__all__ = [
    "CONSTANT", "DECREASING", "INCREASING", "OSCILLATING",
    "BlackBox", "FunctionRep", "GridFunction", "Interval", "PiecewiseMonotone", "PointSpikes",
    "Residual", "StepFunction", "CantorFunction", "OscillatingSine", "CatalogEntry", "CATALOG",
    "as_interval", "evaluate", "from_smooth", "split_monotone", "to_grid", "catalog_get",
    "calkin_wilf_unit", "cantor_exact", "cantor_approximant", "cantor_integral",
    "absolute", "add", "multiply", "scale", "subtract", "load_spec", "load_spec_file",
]
