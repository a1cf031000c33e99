#!/usr/bin/env python
"""
Wrapper script to run the config-driven identification test with a chosen scenario.

Usage:
    python run_config_test.py                                          # configs/sample_quick.yaml
    python run_config_test.py --config configs/gaussian_impulsive.yaml -v
"""

import argparse
import os
import sys
import unittest


def main():
    parser = argparse.ArgumentParser(description="Run config-driven filterlab test")
    parser.add_argument(
        "--config",
        type=str,
        default="configs/sample_quick.yaml",
        help="Path to the configuration file (default: configs/sample_quick.yaml)",
    )
    parser.add_argument(
        "-v", "--verbose",
        action="store_true",
        help="Verbose output",
    )
    args = parser.parse_args()

    os.environ["FILTERLAB_TEST_CONFIG"] = args.config

    suite = unittest.TestLoader().discover("tests", pattern="test_config_driven.py")
    result = unittest.TextTestRunner(verbosity=2 if args.verbose else 1).run(suite)
    sys.exit(0 if result.wasSuccessful() else 1)


if __name__ == "__main__":
    main()
