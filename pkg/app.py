"""
Command-line launcher for the ektau workbench.

Run with:  python app.py <subcommand> [flags]
           python app.py verify-all --report pdf
"""

from __future__ import annotations

import sys

from dotenv import load_dotenv

# ── Load environment variables (EKTAU_LOG) ──
load_dotenv()

from ektau.runner import run  # noqa: E402

if __name__ == "__main__":
    sys.exit(run(sys.argv[1:]))
