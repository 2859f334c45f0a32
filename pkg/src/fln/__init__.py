"""Information-flow policy checking for C through generated nominal types."""

__version__ = "0.1.0"
