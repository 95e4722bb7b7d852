"""gasketlab: circle packings, gasket limit sets, anti-rational Julia sets,
Farey/box-function conjugacies, and Schwarz reflection dynamics."""

__version__ = "0.1.0"
