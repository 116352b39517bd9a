"""Figure rendering for driftbench experiment CSVs."""

from .figures import FigureSpec, SchemaError, render, spec_from_dict
from .presets import preset_names, run_preset

__version__ = "0.1.0"
