# tests/test_progress_tracker.py
import pytest
import os

import sys
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from utils.progress_tracker import ProgressTracker


class TestProgressTracker:
    def test_record(self):
        tracker = ProgressTracker()
        tracker.record('residues', True, "residue identities")
        tracker.record('duality', False, "free energies", {'delta': 0.1})
        summary = tracker.summary()
        assert summary['total'] == 2
        assert summary['passed'] == 1
        assert not summary['all_passed']
        assert tracker.failed_checks() == ['duality']

    def test_unfinished_check(self):
        """Test that a started but unfinished check is not a pass"""
        tracker = ProgressTracker()
        tracker.start_check('slow')
        assert not tracker.all_passed()
        assert tracker.failed_checks() == []
        tracker.complete_check('slow', True)
        assert tracker.all_passed()

    def test_unknown_check(self):
        tracker = ProgressTracker()
        tracker.complete_check('ghost', True)
        assert tracker.summary()['total'] == 0


if __name__ == "__main__":
    pytest.main([__file__])
