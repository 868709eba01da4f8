#!/usr/bin/env python3
"""
Main entry point for weakbell
"""

import sys
from pathlib import Path

# Add the weakbell package to the path
sys.path.insert(0, str(Path(__file__).parent))

from weakbell.cli import main


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\nInterrupted", file=sys.stderr)
        sys.exit(130)
