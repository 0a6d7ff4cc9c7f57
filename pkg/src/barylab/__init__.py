"""barylab: barycentric extensions of sphere maps and the experiments that measure them."""

__version__ = "0.1.0"
