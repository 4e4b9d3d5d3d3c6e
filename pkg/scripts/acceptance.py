"""Run the acceptance suite and print only its PASS/FAIL lines."""

import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-s", str(ROOT / "tests" / "test_acceptance.py")],
        capture_output=True, text=True, cwd=ROOT,
    )
    lines = [l for l in proc.stdout.splitlines() if l.startswith(("PASS criterion", "FAIL criterion"))]
    print("\n".join(dict.fromkeys(lines)))
    sys.exit(proc.returncode)
