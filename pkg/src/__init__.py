"""Sparse VAR(1) transition-matrix estimation from randomly missing observations.

Bias-corrected non-convex LASSO estimators, transfer-function diagnostics,
theoretical certificates and Monte Carlo verification harnesses.
"""

__version__ = "0.1.0"
__author__ = "Achim Dehnert"
__email__ = "achim.dehnert@example.com"
