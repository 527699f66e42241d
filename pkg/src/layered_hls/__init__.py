"""A miniature high-level synthesis toolchain for layered processing elements."""

__version__ = "0.1.0"
