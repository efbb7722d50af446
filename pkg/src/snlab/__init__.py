"""snlab: fusion-category numerics and string-net exact diagonalization."""

from snlab.category import FusionCategory, builtin, load_category, save_category

__all__ = ["FusionCategory", "builtin", "load_category", "save_category"]
__version__ = "0.1.0"
