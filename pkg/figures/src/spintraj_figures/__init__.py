"""Figure generation from the simulator's CSV/JSON output files."""

from .recipes import KINDS, FigureRecipe, RecipeError, SchemaError
from .render import render

__all__ = ["KINDS", "FigureRecipe", "RecipeError", "SchemaError", "render"]
