"""Star-cluster assembly with probabilistic entangling gates."""

__version__ = "0.1.0"
