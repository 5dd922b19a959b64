"""
Command-line front end for superloop
"""

from .runner import run, build_parser, Runner

__all__ = [
    'run',
    'build_parser',
    'Runner'
]
