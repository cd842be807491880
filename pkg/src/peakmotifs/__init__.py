"""Smart-meter evening-peak motif variability features and clustering
consistency analysis."""

__version__ = "0.1.0"
