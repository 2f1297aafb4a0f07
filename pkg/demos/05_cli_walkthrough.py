"""The command-line workflow on a two-cell toy network.

Every step writes CSV files, so the outputs can be plotted or diffed with any
tool. The same commands run the full scenarios with the other shipped
configs (case1_hex, case2_hex, case1_hotspot, case2_hotspot).

Run:  python demos/05_cli_walkthrough.py
"""

import subprocess
import sys
import tempfile
from pathlib import Path

from dnaga.config import shipped_config


def dnaga(*args):
    cmd = [sys.executable, "-m", "dnaga.cli", *map(str, args)]
    print("$ dnaga " + " ".join(map(str, args)))
    done = subprocess.run(cmd, capture_output=True, text=True)
    print(done.stdout + done.stderr, end="")
    print(f"(exit {done.returncode})\n")
    return done.returncode


toy = shipped_config("two_cell")
out = Path(tempfile.mkdtemp(prefix="dnaga-demo-"))

dnaga("generate", "--config", toy, "--out", out / "cells.csv")
dnaga("analyze", "--config", toy, "--out", out / "analysis")
dnaga("simulate", "--config", toy, "--out", out / "sim")
dnaga("compare", out / "analysis" / "sir_cdf.csv", out / "sim" / "sir_empirical.csv",
      "--out", out / "compare.csv")

# a bad value is reported with the field it came from
bad = out / "bad.yaml"
bad.write_text("channel: {eta: 0.0}\n")
dnaga("analyze", "--config", bad, "--out", out / "nowhere")

print("files written:")
for p in sorted(out.rglob("*.csv")):
    print("  ", p.relative_to(out))
