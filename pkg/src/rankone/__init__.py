"""Height enumeration, local arithmetic and counting bounds for short Weierstrass curves."""

__version__ = "0.1.0"
