"""
Utility modules for superloop
"""

from .file_handler import FileHandler
from .progress_tracker import ProgressTracker

__all__ = [
    'FileHandler',
    'ProgressTracker'
]
