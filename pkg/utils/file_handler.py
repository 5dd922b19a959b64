# utils/file_handler.py
"""
JSON I/O with a canonical encoding for exact and complex values

Exact rationals become "num/den" strings, Gaussian rationals and complex
floats become [re, im] pairs, and keys are sorted so that dumping a parsed
document reproduces the same bytes.
"""

import json
import logging
import os
from fractions import Fraction
from typing import Any, Dict, Optional

import numpy as np
import sympy
from sympy.polys.domains import QQ, QQ_I

from core.errors import SpecFormatError


def _rational_text(value) -> str:
    return f"{int(value.numerator)}/{int(value.denominator)}"


class FileHandler:
    """
    Handles canonical JSON encoding and file I/O
    """

    def __init__(self, config: Dict[str, Any] = None):
        self.config = config or {}
        self.logger = logging.getLogger(__name__)
        self.indent = self.config.get('json_indent', 2)

        self.logger.info("FileHandler initialized")

    def to_canonical(self, value: Any) -> Any:
        """
        Convert a result tree to plain JSON values

        Args:
            value: Nested dicts/lists of ints, floats, complex numbers, numpy
                values, QQ/QQ_I elements, Fractions, sympy numbers or objects
                with to_dict()

        Returns:
            JSON-compatible structure
        """
        if value is None or isinstance(value, (bool, str)):
            return value
        if isinstance(value, int):
            return value
        if isinstance(value, float):
            return value
        if isinstance(value, Fraction):
            return _rational_text(value)
        if QQ_I.of_type(value):
            if not value.y:
                return _rational_text(value.x)
            return [_rational_text(value.x), _rational_text(value.y)]
        if QQ.of_type(value):
            return _rational_text(value)
        if isinstance(value, np.bool_):
            return bool(value)
        if isinstance(value, np.integer):
            return int(value)
        if isinstance(value, np.floating):
            return float(value)
        if isinstance(value, (complex, np.complexfloating)):
            return [float(value.real), float(value.imag)]
        if isinstance(value, np.ndarray):
            return [self.to_canonical(v) for v in value.tolist()]
        if isinstance(value, sympy.Basic):
            if isinstance(value, sympy.Rational):
                return _rational_text(Fraction(int(value.p), int(value.q)))
            return str(value)
        if isinstance(value, dict):
            return {str(k): self.to_canonical(v) for k, v in value.items()}
        if isinstance(value, (list, tuple, set, frozenset)):
            items = sorted(value) if isinstance(value, (set, frozenset)) else value
            return [self.to_canonical(v) for v in items]
        if hasattr(value, 'to_dict'):
            return self.to_canonical(value.to_dict())
        return str(value)

    def dumps(self, data: Any) -> str:
        """Byte-stable JSON text"""
        return json.dumps(self.to_canonical(data), indent=self.indent, sort_keys=True, ensure_ascii=False)

    def loads(self, text: str) -> Any:
        """
        Parse JSON text

        Raises:
            SpecFormatError: Text is not valid JSON
        """
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise SpecFormatError(f"Malformed JSON: {e}", {'line': e.lineno, 'column': e.colno})

    @staticmethod
    def from_canonical_rational(value: Any):
        """
        Parse a canonical exact scalar ("num/den", an int, or a [re, im] pair of those)

        Returns:
            Fraction for real values, QQ_I element for pairs
        """
        if isinstance(value, list):
            if len(value) != 2:
                raise SpecFormatError(f"Expected a [re, im] pair, got {value!r}")
            re, im = (FileHandler.from_canonical_rational(v) for v in value)
            return QQ_I(QQ(re.numerator, re.denominator), QQ(im.numerator, im.denominator))
        if isinstance(value, bool) or isinstance(value, float):
            raise SpecFormatError(f"Not an exact value: {value!r}")
        try:
            return Fraction(value)
        except (TypeError, ValueError, ZeroDivisionError) as e:
            raise SpecFormatError(f"Not an exact rational: {value!r} ({e})")

    def ensure_directory(self, directory: str) -> bool:
        """
        Ensure directory exists, create if necessary

        Args:
            directory: Directory path

        Returns:
            True if directory exists or was created
        """
        if not directory:
            return True
        try:
            os.makedirs(directory, exist_ok=True)
            return True
        except OSError as e:
            self.logger.error(f"Failed to create directory {directory}: {e}")
            return False

    def read_json_file(self, filepath: str) -> Optional[Any]:
        """
        Read JSON file

        Args:
            filepath: File path

        Returns:
            Parsed data, or None if the file is missing or malformed
        """
        try:
            with open(filepath, 'r', encoding='utf-8') as f:
                return json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            self.logger.error(f"Failed to read JSON file {filepath}: {e}")
            return None

    def write_json_file(self, filepath: str, data: Any) -> bool:
        """
        Write canonical JSON file

        Args:
            filepath: File path
            data: Result tree

        Returns:
            True if write successful
        """
        try:
            self.ensure_directory(os.path.dirname(filepath))
            with open(filepath, 'w', encoding='utf-8') as f:
                f.write(self.dumps(data))
                f.write("\n")
            self.logger.info(f"Wrote JSON file: {filepath}")
            return True
        except OSError as e:
            self.logger.error(f"Failed to write JSON file {filepath}: {e}")
            return False


# Test the file_handler
if __name__ == "__main__":
    logging.basicConfig(level=logging.DEBUG)

    file_handler = FileHandler()
    sample = {'value': QQ_I(QQ(1, 2), QQ(-3, 4)), 'ratio': Fraction(2, 3), 'z': 1 + 2j}
    text = file_handler.dumps(sample)
    print(text)
    print(f"Stable: {file_handler.dumps(file_handler.loads(text)) == text}")
