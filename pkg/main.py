# main.py
"""
superloop - Main Application Entry Point
"""

import logging
import json
import os
import sys

# Add current directory to path for imports
current_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, current_dir)

from cli.runner import run

DEFAULT_CONFIG = {
    "app_name": "superloop",
    "version": "1.0.0",
    "log_level": "INFO",
    "json_indent": 2,
    "seed": 0,
    "jobs": 1,
    "hbar": 1,
    "truncation_order": 6,
    "enumeration_cap": 12,
    "indexsum_cap": 8,
    "oracle_size_cap": 4,
    "partition_size_cap": 3,
    "curve_tolerance": 1e-12,
    "max_newton_iterations": 200,
    "newton_damping": 0.5,
    "newton_min_step": 1e-10,
    "collision_tolerance": 1e-9,
    "residue_tolerance": 1e-10,
    "branch_tolerance": 1e-9,
    "eext_samples": 100,
    "eext_tolerance": 1e-9,
    "planar_kmax": 6,
    "g_max": 3,
    "g_max_cap": 3,
    "n_max": 3,
    "duality_tolerance": 1e-8,
}


def setup_logging(level: str = "INFO"):
    """Setup logging configuration; SUPERLOOP_LOG overrides the configured level"""
    level = os.environ.get('SUPERLOOP_LOG', level).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler('superloop.log'),
            logging.StreamHandler(sys.stderr)
        ]
    )


def load_config() -> dict:
    """Load application configuration"""
    config_path = os.path.join(current_dir, 'config.json')

    if os.path.exists(config_path):
        try:
            with open(config_path, 'r') as f:
                return {**DEFAULT_CONFIG, **json.load(f)}
        except (OSError, json.JSONDecodeError) as e:
            logging.error(f"Failed to load config: {e}")

    # Return default config if file doesn't exist or fails to load
    return dict(DEFAULT_CONFIG)


def check_dependencies() -> bool:
    """Check if required dependencies are available"""
    missing_deps = []

    try:
        import numpy
    except ImportError:
        missing_deps.append("numpy")

    try:
        import sympy
    except ImportError:
        missing_deps.append("sympy")

    if missing_deps:
        sys.stderr.write("Missing dependencies:\n")
        for dep in missing_deps:
            sys.stderr.write(f"  - {dep}\n")
        sys.stderr.write(f"\nPlease install missing dependencies with:\npip install {' '.join(missing_deps)}\n")
        return False

    return True


def main(argv=None) -> int:
    """Main application entry point"""
    config = load_config()
    setup_logging(config.get('log_level', 'INFO'))
    logger = logging.getLogger(__name__)

    if not check_dependencies():
        logger.error("Missing dependencies. Please install required packages.")
        return 1

    logger.info(f"Starting {config['app_name']} v{config['version']}")
    code = run(sys.argv[1:] if argv is None else argv, config)
    logger.info(f"Exited with code {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
