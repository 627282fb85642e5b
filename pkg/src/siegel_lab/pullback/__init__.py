"""Preimages, pull-backs of Jordan curves and quadratic Siegel experiments."""
