"""Wire formats of trees, excursions, trajectories and reports"""

from .schema import validate, ValidationError
from .formatting import (
    format_run,
    format_tree,
    parse_tree,
    format_excursion,
    parse_excursion,
    format_trajectory,
    format_report,
    format_bounds,
    format_newick,
    dumps,
    loads,
)

__all__ = [
    "validate",
    "ValidationError",
    "format_run",
    "format_tree",
    "parse_tree",
    "format_excursion",
    "parse_excursion",
    "format_trajectory",
    "format_report",
    "format_bounds",
    "format_newick",
    "dumps",
    "loads",
]
