"""2-Selmer groups and Cassels pairings for quadratic twists of curves with full 2-torsion."""

__version__ = "0.1.0"
