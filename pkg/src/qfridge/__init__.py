"""Three-qubit absorption refrigerator coupled to two heat baths."""

__version__ = "0.1.0"
