"""Figures from stair-walking simulation CSV logs."""

from .render import KINDS, FigureSpec, PlotError, load_log, render, step_mean_abs_tau

__version__ = "0.1.0"
