"""Non-autonomous basins of attraction: germ conjugation and escape dynamics."""

__version__ = "0.1.0"
