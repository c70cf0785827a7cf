"""graphon-ldp core modules."""

__version__ = "0.1.0"
