"""Numerical laboratory for bounded-type Siegel disks and critical circle maps."""

__version__ = "0.1.0"
