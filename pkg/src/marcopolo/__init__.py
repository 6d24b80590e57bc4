"""Probe-search toolkit: localize points of interest in a disk with binary
in/out probes, with certified coverage placements and cost analysis."""

__version__ = "0.1.0"
