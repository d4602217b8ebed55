"""ILEG - risk-sensitive iterative linear-exponential-quadratic-Gaussian trajectory optimization"""

__version__ = "1.0.0"
