"""oneshot-ent: one-shot entanglement measures and SEPP protocol bounds."""

__version__ = "0.1.0"
