#!/usr/bin/env python3
"""
bpi-tails command line entry point.

(C) 2025 Stephen Jenkins
"""

import sys

from tails.cli import main

if __name__ == "__main__":
    sys.exit(main())
