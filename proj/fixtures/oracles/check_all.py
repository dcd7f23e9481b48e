#!/usr/bin/env python3
"""Recomputes every frozen oracle file and fails if one is stale."""

import subprocess
import sys
from pathlib import Path

here = Path(__file__).parent
rc = 0
for script in ["iaa_oracle.py", "metrics_oracle.py", "topk_oracle.py"]:
    rc |= subprocess.call([sys.executable, str(here / script), "--check"])
sys.exit(rc)
