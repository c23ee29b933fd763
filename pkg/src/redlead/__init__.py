"""redlead: adversarial lead-vehicle stress testing for vehicle followers."""

__version__ = "0.1.0"
