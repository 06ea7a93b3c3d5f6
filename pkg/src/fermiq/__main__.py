"""Entry point for ``python -m fermiq``."""

import sys

from fermiq.cli import main

sys.exit(main())
