"""Serial-chain kinematics and dynamics on the two built-in models:
forward maps, Jacobians against finite differences, the manipulator
equation, and energy conservation of the free double pendulum.

Run:  python demos/02_chain_and_dynamics.py
"""

import os

import numpy as np

from motorprim import dynamics as dyn
from motorprim import kinematics as kc
from motorprim import svgplot
from motorprim.model import FramePoint, JointState, planar_two_link, seven_dof_arm

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

planar = planar_two_link()
seven = seven_dof_arm()
rng = np.random.default_rng(3)

print("== forward kinematics ==")
print("  planar straight arm:", kc.fk_position(planar, [0, 0]))
print("  planar quarter turn:", np.round(kc.fk_position(planar, [np.pi / 2, 0]), 9))
tool = FramePoint("ee", [0.0, 0.0, 0.25])
print("  7-DOF tool tip at home:", kc.fk_position(seven, np.zeros(7), tool))

print("\n== Jacobian vs finite differences ==")
q = rng.uniform(-1, 1, 7)
J = kc.jacobian_position(seven, q)
h = 1e-7
fd = np.zeros_like(J)
for k in range(7):
    e = np.zeros(7)
    e[k] = h
    fd[:, k] = (kc.fk_position(seven, q + e) - kc.fk_position(seven, q - e)) / (2 * h)
print("  max entry error:", np.abs(J - fd).max())

print("\n== manipulator equation ==")
qd = rng.normal(size=7)
terms = dyn.dynamics_terms(seven, q, qd)
print("  M is SPD:", np.linalg.eigvalsh(terms.M).min() > 0)
print("  skew defect of Mdot - 2C:", dyn.skewness_defect(seven, q, qd))

print("\n== free double pendulum, 10 s at 1 ms steps ==")
state = JointState([0.4, 0.2], [0.0, 0.0])
e0 = dyn.kinetic_energy(planar, state.q, state.qd) \
    + dyn.gravity_potential(planar, state.q)
trace = dyn.simulate(planar, None, state.q, state.qd, 10.0, 1e-3,
                     gravity_on=True)
energies = np.array([dyn.kinetic_energy(planar, trace.q[i], trace.qd[i])
                     + dyn.gravity_potential(planar, trace.q[i])
                     for i in range(0, len(trace), 20)])
print(f"  initial energy {e0:.6f} J, max drift {np.abs(energies - e0).max():.2e} J")

svgplot.line_plot(os.path.join(OUT, "pendulum.svg"),
                  [(trace.t, trace.q[:, 0], "q1"),
                   (trace.t, trace.q[:, 1], "q2")],
                  title="free double pendulum", ylabel="rad")
print("  wrote", os.path.join(OUT, "pendulum.svg"))
