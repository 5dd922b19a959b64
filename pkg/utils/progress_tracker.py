# utils/progress_tracker.py
"""
Ledger of verification checks recorded during a run
"""

import threading
import time
import logging
from typing import Dict, Any, List, Optional


class ProgressTracker:
    """
    Tracks named checks and whether they passed
    """

    def __init__(self):
        self.logger = logging.getLogger(__name__)
        self.checks: Dict[str, Dict[str, Any]] = {}
        self.lock = threading.Lock()

        self.logger.info("ProgressTracker initialized")

    def start_check(self, check_id: str, description: str = "") -> None:
        """
        Start tracking a check

        Args:
            check_id: Unique identifier for the check
            description: Description of the check
        """
        with self.lock:
            self.checks[check_id] = {
                'description': description,
                'start_time': time.time(),
                'completed': False,
                'passed': None,
                'details': None,
            }

        self.logger.debug(f"Started check: {check_id}")

    def complete_check(self, check_id: str, passed: bool, details: Optional[Dict[str, Any]] = None) -> None:
        """
        Record the outcome of a check

        Args:
            check_id: Check identifier
            passed: Whether the check held
            details: Optional numbers behind the outcome
        """
        with self.lock:
            if check_id not in self.checks:
                self.logger.warning(f"Unknown check: {check_id}")
                return

            check = self.checks[check_id]
            check['completed'] = True
            check['passed'] = bool(passed)
            check['details'] = details
            check['elapsed_time'] = time.time() - check['start_time']

        if passed:
            self.logger.info(f"Check {check_id} passed")
        else:
            self.logger.error(f"Check {check_id} failed: {details}")

    def record(self, check_id: str, passed: bool, description: str = "",
               details: Optional[Dict[str, Any]] = None) -> None:
        """Start and complete a check in one call"""
        self.start_check(check_id, description)
        self.complete_check(check_id, passed, details)

    def failed_checks(self) -> List[str]:
        with self.lock:
            return sorted(c for c, data in self.checks.items() if data['completed'] and not data['passed'])

    def all_passed(self) -> bool:
        """True when every started check completed and passed"""
        with self.lock:
            return all(data['completed'] and data['passed'] for data in self.checks.values())

    def summary(self) -> Dict[str, Any]:
        """
        Outcome of every check

        Returns:
            Dictionary with per-check results and totals
        """
        with self.lock:
            rows = {
                check_id: {
                    'description': data['description'],
                    'completed': data['completed'],
                    'passed': data['passed'],
                }
                for check_id, data in self.checks.items()
            }
        return {
            'checks': rows,
            'total': len(rows),
            'passed': sum(1 for r in rows.values() if r['passed']),
            'all_passed': all(r['completed'] and r['passed'] for r in rows.values()),
        }


# Test the progress_tracker
if __name__ == "__main__":
    logging.basicConfig(level=logging.DEBUG)

    tracker = ProgressTracker()
    tracker.record("gaussian_f2", True, "F_2 of the Gaussian curve")
    tracker.start_check("swap", "x-y swap")
    tracker.complete_check("swap", False, {'delta': 1e-3})
    print(tracker.summary())
