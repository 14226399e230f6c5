"""Energy bookkeeping: the potential landscape over the planar arm's
configuration torus, and workspace singularity scans via the smallest
singular value of the inverse task inertia.

Run:  python demos/07_energy_landscape.py
"""

import os

import numpy as np

from motorprim import control as ct
from motorprim import energy as en
from motorprim import svgplot
from motorprim import trajectory as tj
from motorprim.model import planar_two_link, seven_dof_arm

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

planar = planar_two_link()
hold = lambda v: tj.VirtualTrajectory([tj.Hold(np.asarray(v, float))])

controller = ct.Controller([
    ct.JointSpaceImpedance(2.0 * np.eye(2), 1.0 * np.eye(2),
                           hold([0.2 * np.pi, 0.6 * np.pi])),
    ct.TaskPositionImpedance(60.0 * np.eye(3), 20.0 * np.eye(3),
                             hold([1.2, 0.8, 0.0])),
])

print("== potential landscape on the torus ==")
grid = np.linspace(-np.pi, np.pi, 101)
U = en.landscape_grid(controller, planar, grid, grid)
i, j = np.unravel_index(np.argmin(U), U.shape)
print(f"  field range [{U.min():.3f}, {U.max():.3f}] J, finite everywhere: "
      f"{np.all(np.isfinite(U))}")
print(f"  grid minimum at q = ({grid[i]:+.3f}, {grid[j]:+.3f})")
svgplot.heatmap(os.path.join(OUT, "landscape_torus.svg"), U,
                (-np.pi, np.pi, -np.pi, np.pi),
                title="U_q + U_p over the configuration torus",
                xlabel="q1 [rad]", ylabel="q2 [rad]")

print("\n== planar singularity scan (the arm's own plane) ==")
scan = en.singularity_scan(planar, threshold=0.02, samples_per_joint=61,
                           task_dims=(0, 1))
print(f"  fraction of configurations flagged: {scan.fraction:.3f} "
      f"({scan.flagged}/{scan.total})")
en.write_pointcloud_csv(scan, os.path.join(OUT, "planar_cloud.csv"))

print("\n== 7-DOF scan, first and last joints frozen at zero ==")
seven = seven_dof_arm()
scan7 = en.singularity_scan(seven, threshold=0.03, samples_per_joint=7,
                            fixed={0: 0.0, 6: 0.0})
print(f"  fraction at threshold 0.03 with 7 samples/joint: "
      f"{scan7.fraction:.3f} ({scan7.flagged}/{scan7.total})")
print("  (the published protocol uses 30 samples/joint; the fraction is a")
print("   property of the inertial model and the grid, not a universal value)")
print("wrote", os.path.join(OUT, "landscape_torus.svg"),
      "and", os.path.join(OUT, "planar_cloud.csv"))
