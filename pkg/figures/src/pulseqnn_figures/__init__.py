"""Figure rendering for pulseqnn experiment artifacts.

Consumes the CSV files written by the ``pulseqnn`` experiment CLI and
renders publication-style figures; see :mod:`pulseqnn_figures.render`.
"""

from .render import FIGURE_KINDS, FigureSpec, render

__version__ = "0.1.0"
