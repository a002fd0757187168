"""Scan the wave speed of c u' = -u + G(u(t - c r)) through the command line.

The travelling-wave reduction of a delayed reaction-diffusion equation leads
to this profile equation. We write a scenario, then let ``fdelab sweep`` run
check and solve for several speeds and print the resulting table. No
particular outcome is asserted; the table records what the construction
found for each speed.

Run with ``python demos/wavefront_scan.py``.
"""
import tempfile
from pathlib import Path

from fdelab.cli import main

SCENARIO = """
[model]
id = "wavefront"
kappa = 1.0
wave_speed = 1.0
r = 0.25
G = { kind = "power", p = 1.0 }

[anchor]
t0 = 0.0
c = 0.3

[solve]
h = 0.01
a_sequence = [-30.0, -45.0, -60.0]
forward_horizon = 60.0

[verify]
window = 30.0
require = ["bounds", "monotone", "left_limit_converged"]
"""

with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp)
    scn = out / "wavefront.toml"
    scn.write_text(SCENARIO)
    code = main(["sweep", "--scenario", str(scn), "--out-dir", str(out), "--param", "model.wave_speed",
                 "--values", "0.5", "1", "2", "--jobs", "3"])
    print((out / "sweep.csv").read_text())
    print(f"exit code {code}")
