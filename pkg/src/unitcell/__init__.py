"""Translation-invariant quantum circuit compilation with infinite MPS."""

__version__ = "0.1.0"
