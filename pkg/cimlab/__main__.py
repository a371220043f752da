"""``python -m cimlab``."""

import sys

from cimlab.cli import main

sys.exit(main())
