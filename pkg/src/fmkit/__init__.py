"""Feature-modeling toolbox: representation, formats, SAT-based analyses,
slicing, t-wise sampling, editing, collaboration, service, and CLI."""

__version__ = "0.1.0"
