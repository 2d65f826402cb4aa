"""Module entry point: python -m tunneltime."""

import sys

from .cli import main

sys.exit(main())
