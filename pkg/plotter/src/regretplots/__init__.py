"""Figures for safe private bandit simulation outputs."""

from .figures import plot_normalized_average, plot_setup_regret
from .tables import ROUND_COLUMNS, SUMMARY_COLUMNS, SchemaError, TraceTable

__version__ = "0.1.0"
