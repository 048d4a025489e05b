"""First-order logic with team and multiteam semantics: evaluation, rewrites,
second-order translations and topological classification of atoms."""
from .core import (Multiteam, Structure, Team, UndefinedProbability, WeightedMultiteam,
                   filter_eq, filter_formula, mt_diff, mt_scale, mt_sub, mt_sum, pr, pr_cond,
                   restrict, skolem_extension, universal_extension, value_product, values)
from .parser import (ParseError, parse_formula, parse_multiteam, parse_structure,
                     render_formula, render_multiteam, render_structure)

__all__ = [
    "Multiteam", "Structure", "Team", "UndefinedProbability", "WeightedMultiteam",
    "filter_eq", "filter_formula", "mt_diff", "mt_scale", "mt_sub", "mt_sum", "pr", "pr_cond",
    "restrict", "skolem_extension", "universal_extension", "value_product", "values",
    "ParseError", "parse_formula", "parse_multiteam", "parse_structure",
    "render_formula", "render_multiteam", "render_structure",
]
