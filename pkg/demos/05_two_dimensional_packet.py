"""
A wave packet leaving a square through an edge and a corner
============================================================

A focusing 2D packet moves north-east across [0, 10]^2. Edges use
per-point wave-number profiles, corners use the two adjacent edge values.
The coarse grid h=0.1 keeps this demo around half a minute.
"""

from slabnls.config import preset
from slabnls.experiment import simulate

cfg = preset("example3").replace(dx=0.1)
traj = simulate(cfg)

print("mass fraction left at t=2:", traj.metrics.r[-1])
for label, series in traj.probes.items():
    worst = max(abs(v - traj.reference.probe(label, t)) for t, v in series)
    print(f"probe {label}: max error against the [0,20]^2 run {worst:.2e}")

# the east edge profile follows the packet's local wave number
east = traj.metrics.k0_by_side["east"]
print("mean east k0 at t = 0.5, 1.0, 1.5, 2.0:", [round(east[i], 3) for i in (5, 10, 15, 20)])
