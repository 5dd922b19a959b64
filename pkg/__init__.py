"""
superloop - Gaussian Hermitian supermatrix model toolkit
"""

__version__ = "1.0.0"
