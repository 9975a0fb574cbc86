"""
Allow running via:
  python -m core run <config>
  python -m core sweep <config>
  python -m core verify --scope <name>
"""

import sys

from core.cli import main

if __name__ == "__main__":
    sys.exit(main())
