"""Device-independent certification of genuinely entangled stabilizer subspaces."""

__version__ = "0.1.0"
