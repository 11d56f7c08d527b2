"""frakolm: spectral verification lab for the fractional Kolmogorov operator
(-Delta)^{alpha/2} + b.grad with critical attracting drift on the torus."""

__version__ = "0.1.0"
