from .figures import FIGURES, FigureSpec, SchemaError, regression_slope, render

__version__ = "0.1.0"
