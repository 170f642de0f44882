"""Static-figure renderer for polarauth result files."""

__version__ = "0.1.0"
