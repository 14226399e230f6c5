"""Tour of the rotation kernel: exponential/logarithm maps on SO(3) and the
unit quaternions, their derivatives, and the stiffness/co-stiffness duality.

Run:  python demos/01_rotation_maps.py
"""

import numpy as np

from motorprim import geometry as geo

rng = np.random.default_rng(7)

print("== Rodrigues map and its inverse ==")
axis = np.array([0.3, -0.5, 0.8])
axis /= np.linalg.norm(axis)
for theta in [1e-9, 0.7, 2.6, np.pi - 1e-7, np.pi]:
    R = geo.exp_so3(theta * axis)
    e, info = geo.log_so3(R, with_info=True)
    print(f"  theta={theta:.9f}  round-trip error "
          f"{np.abs(geo.exp_so3(e) - R).max():.2e}  near_pi={info.near_pi}")

print("\n== quaternions are a double cover ==")
q = geo.quat_exp(rng.normal(size=3) * 0.6)
print("  |R(q) - R(-q)| =", np.abs(geo.quat_to_rotm(q)
                                   - geo.quat_to_rotm(-q)).max())
print("  multiplication is a homomorphism: ",
      np.abs(geo.quat_to_rotm(geo.quat_mul(q, q))
             - geo.quat_to_rotm(q) @ geo.quat_to_rotm(q)).max())

print("\n== time derivative of the logarithm (vs finite differences) ==")
a, b = rng.normal(size=3), rng.normal(size=3)


def trajectory(t):
    return geo.exp_so3(0.8 * t * a + 0.3 * np.sin(t) * b)


t0, h = 0.9, 1e-6
R = trajectory(t0)
Rdot = (trajectory(t0 + h) - trajectory(t0 - h)) / (2 * h)
fd = (geo.log_so3(trajectory(t0 + h)) - geo.log_so3(trajectory(t0 - h))) / (2 * h)
print("  analytic:", geo.dlog_so3_dt(R, Rdot))
print("  fin diff:", fd)

print("\n== stiffness / co-stiffness duality ==")
K = np.diag([1.0, 2.0, 3.0])
G = geo.costiffness(K)
print("  K = diag(1,2,3)  ->  G =", np.diag(G))
print("  round trip exact:", np.array_equal(geo.stiffness_of(G), K))

print("\n== the two rotational potentials differ by a constant ==")
R = geo.random_rotation(rng)
eps = geo.rotm_to_quat(R)[1:]
lhs = -np.trace(G @ R)
rhs = -np.trace(G) + 2 * eps @ geo.stiffness_of(G) @ eps
print(f"  -tr(G R) = {lhs:.12f}")
print(f"  -tr(G) + 2 eps^T K eps = {rhs:.12f}")
