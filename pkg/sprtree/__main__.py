"""sprtree command-line interface"""

import sys

from . import app

sys.exit(app.main())
