"""Figure rendering for sweep CSV/JSON outputs.

This package is deliberately dumb: it reads the CSV files written by the
`mpfwm` sweep commands and lays the columns out as figures.  Every plotted
value appears verbatim in the input CSV (the noise scans already carry the
dB columns); the only transformations here are row selection and grouping.
"""

from .figures import FIGURES, FigureError, FigureSpec, build_figure, render

__all__ = ["FIGURES", "FigureError", "FigureSpec", "build_figure", "render"]
