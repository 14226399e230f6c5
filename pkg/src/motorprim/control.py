"""Torque-level control modules: mechanical impedances attached to virtual
trajectories, and their superposition into a joint-torque command.

Every module maps the robot state to a joint torque through the transpose
of a kinematic Jacobian only; nothing in this file inverts a Jacobian, so
the composed controller stays well defined at (and through) kinematic
singularities. Each stiffness torque is exactly minus the gradient of the
module's elastic potential pulled back through forward kinematics, which is
what the energy ledger in :mod:`.energy` accounts.
"""

from __future__ import annotations

import json

import numpy as np

from . import geometry as geo
from . import kinematics as kc
from .dynamics import gravity_vector
from .model import FramePoint
from .trajectory import (OrientationTrajectory, VirtualTrajectory,
                         trajectory_from_dict)


def _symmetrized(M, name, size):
    M = np.asarray(M, dtype=float)
    if np.isscalar(M) or M.ndim == 0:
        M = float(M) * np.eye(size)
    if M.shape != (size, size):
        raise ValueError(f"{name} must be {size}x{size}")
    return (M + M.T) / 2.0


def _validated_gain(M, name, size):
    """Symmetrize and require eigenvalues >= -1e-10 (PSD up to roundoff)."""
    S = _symmetrized(M, name, size)
    if np.linalg.eigvalsh(S).min() < -1e-10:
        raise ValueError(f"{name} has a negative eigenvalue")
    return S


class JointSpaceImpedance:
    """First-order joint-space impedance: K (q0 - q) + B (qd0 - qd)."""

    kind = "joint"

    def __init__(self, K, B, vt):
        if not isinstance(vt, VirtualTrajectory):
            vt = VirtualTrajectory([vt])
        self.vt = vt
        n = vt.dim
        self.K = _validated_gain(K, "K_q", n)
        self.B = _validated_gain(B, "B_q", n)

    def stiffness_torque(self, model, t, q, qd, kin=None):
        q0, _ = self.vt.eval(t)
        return self.K @ (q0 - q)

    def damping_torque(self, model, t, q, qd, kin=None):
        _, qd0 = self.vt.eval(t)
        return self.B @ (qd0 - qd)

    def torque(self, model, t, q, qd, kin=None):
        q0, qd0 = self.vt.eval(t)
        return self.K @ (q0 - q) + self.B @ (qd0 - qd)

    def potential(self, model, t, q, kin=None):
        q0, _ = self.vt.eval(t)
        d = np.asarray(q, dtype=float) - q0
        return 0.5 * float(d @ self.K @ d)

    def to_dict(self):
        return {"type": "joint_space", "K": self.K.tolist(),
                "B": self.B.tolist(), "vt": self.vt.to_dict()}


class TaskPositionImpedance:
    """Translational impedance at a frame point, mapped by the Jacobian
    transpose: J_p^T { K (p0 - p) + B (pd0 - pd) }."""

    kind = "task_pos"

    def __init__(self, K, B, vt, point=None):
        if not isinstance(vt, VirtualTrajectory):
            vt = VirtualTrajectory([vt])
        if vt.dim != 3:
            raise ValueError("task-position trajectories are 3-vectors")
        self.vt = vt
        self.point = point if point is not None else FramePoint(0)
        self.K = _validated_gain(K, "K_p", 3)
        self.B = _validated_gain(B, "B_p", 3)

    def stiffness_torque(self, model, t, q, qd, kin=None):
        kin = kc.chain_data(model, q, kin)
        p0, _ = self.vt.eval(t)
        p = kc.fk_position(model, q, self.point, kin)
        J = kc.jacobian_position(model, q, self.point, kin)
        return J.T @ (self.K @ (p0 - p))

    def damping_torque(self, model, t, q, qd, kin=None):
        kin = kc.chain_data(model, q, kin)
        _, pd0 = self.vt.eval(t)
        J = kc.jacobian_position(model, q, self.point, kin)
        return J.T @ (self.B @ (pd0 - J @ np.asarray(qd, dtype=float)))

    def torque(self, model, t, q, qd, kin=None):
        kin = kc.chain_data(model, q, kin)
        p0, pd0 = self.vt.eval(t)
        p = kc.fk_position(model, q, self.point, kin)
        J = kc.jacobian_position(model, q, self.point, kin)
        err = self.K @ (p0 - p) + self.B @ (pd0 - J @ np.asarray(qd, dtype=float))
        return J.T @ err

    def potential(self, model, t, q, kin=None):
        kin = kc.chain_data(model, q, kin)
        p0, _ = self.vt.eval(t)
        d = kc.fk_position(model, q, self.point, kin) - p0
        return 0.5 * float(d @ self.K @ d)

    def to_dict(self):
        return {"type": "task_position", "K": self.K.tolist(),
                "B": self.B.tolist(),
                "point": {"frame": self.point.frame,
                          "offset": np.asarray(self.point.offset).tolist()},
                "vt": self.vt.to_dict()}


def _orientation_vt(vt):
    if isinstance(vt, OrientationTrajectory):
        return vt
    if isinstance(vt, np.ndarray) and vt.shape == (3, 3):
        return OrientationTrajectory.fixed(vt)
    raise ValueError("rotational modules need an OrientationTrajectory "
                     "or a fixed rotation matrix")


class _RotationalBase:
    kind = "rot"

    def __init__(self, B, vt, frame=0):
        self.vt = _orientation_vt(vt)
        self.frame = frame
        self.B = _validated_gain(B, "B_r", 3)

    def _body_state(self, model, q, qd, kin):
        kin = kc.chain_data(model, q, kin)
        R = kc.fk_rotation(model, q, self.frame, kin)
        Jb = kc.body_jacobian_rotation(model, q, self.frame, kin)
        return R, Jb

    def damping_torque(self, model, t, q, qd, kin=None):
        # damps the absolute body angular velocity (no feedforward)
        _, Jb = self._body_state(model, q, qd, kin)
        return -Jb.T @ (self.B @ (Jb @ np.asarray(qd, dtype=float)))

    def _moment(self, model, t, q, R, kin):
        raise NotImplementedError

    def stiffness_torque(self, model, t, q, qd, kin=None):
        kin = kc.chain_data(model, q, kin)
        R, Jb = self._body_state(model, q, qd, kin)
        return Jb.T @ self._moment(model, t, q, R, kin)

    def torque(self, model, t, q, qd, kin=None):
        kin = kc.chain_data(model, q, kin)
        R, Jb = self._body_state(model, q, qd, kin)
        m = self._moment(model, t, q, R, kin) \
            - self.B @ (Jb @ np.asarray(qd, dtype=float))
        return Jb.T @ m


class RotationTraceImpedance(_RotationalBase):
    """Rotational impedance from the trace-form potential -tr(G R_B^T R0)
    with co-stiffness matrix G; gradient taken in closed form."""

    def __init__(self, G, B, vt, frame=0):
        super().__init__(B, vt, frame)
        # G itself may be indefinite; the physical stiffness dual to it
        # is what must be PSD
        self.G = _symmetrized(G, "G_r", 3)
        _validated_gain(geo.stiffness_of(self.G), "stiffness_of(G_r)", 3)

    def _moment(self, model, t, q, R, kin):
        X = R.T @ self.vt.rotation(t) @ self.G
        return geo.unskew(X - X.T)

    def potential(self, model, t, q, kin=None):
        # nonnegative form: -tr(G R_B^T R0) + tr(G) = 2 eps^T K eps
        return self.potential_trace(model, t, q, kin) + float(np.trace(self.G))

    def potential_trace(self, model, t, q, kin=None):
        kin = kc.chain_data(model, q, kin)
        R = kc.fk_rotation(model, q, self.frame, kin)
        return -float(np.trace(self.G @ R.T @ self.vt.rotation(t)))

    def to_dict(self):
        return {"type": "rot_trace", "G": self.G.tolist(),
                "B": self.B.tolist(), "frame": self.frame,
                "vt": self.vt.to_dict()}


class RotationQuatImpedance(_RotationalBase):
    """Rotational impedance in unit-quaternion form:
    tau = Jb^T { 2 E^T(err) K err_vec - B w_body }."""

    def __init__(self, K, B, vt, frame=0):
        super().__init__(B, vt, frame)
        self.K = _validated_gain(K, "K_r", 3)

    def _error_quat(self, model, t, q, kin):
        kin = kc.chain_data(model, q, kin)
        qB = geo.rotm_to_quat(kc.fk_rotation(model, q, self.frame, kin))
        return geo.quat_mul(geo.quat_conj(qB), self.vt.quaternion(t))

    def _moment(self, model, t, q, R, kin):
        err = geo.quat_mul(geo.quat_conj(geo.rotm_to_quat(R)),
                           self.vt.quaternion(t))
        return 2.0 * geo.quat_E(err).T @ (self.K @ err[1:])

    def potential(self, model, t, q, kin=None):
        eps = self._error_quat(model, t, q, kin)[1:]
        return 2.0 * float(eps @ self.K @ eps)

    def to_dict(self):
        return {"type": "rot_quat", "K": self.K.tolist(),
                "B": self.B.tolist(), "frame": self.frame,
                "vt": self.vt.to_dict()}


class RotationLogImpedance(_RotationalBase):
    """Alternative rotation-matrix module: tau = Jb^T { K' Log(R_B^T R0)
    - B w_body }.

    Undefined at the antipodal configuration; with isotropic K' the
    stiffness is exactly the negative potential gradient of 0.5 e^T K' e
    (anisotropic K' makes this law non-conservative, so the ledger form is
    exact only in the isotropic case).
    """

    def __init__(self, K, B, vt, frame=0):
        super().__init__(B, vt, frame)
        self.K = _validated_gain(K, "K_r_log", 3)

    def _error_log(self, model, t, q, kin):
        kin = kc.chain_data(model, q, kin)
        R = kc.fk_rotation(model, q, self.frame, kin)
        X = R.T @ self.vt.rotation(t)
        angle = geo.rotation_angle(X)
        if angle > np.pi - 1e-4:
            raise ValueError(
                f"log-form rotational module at near-antipodal error "
                f"({angle:.6f} rad); the logarithm branch is undefined there")
        return geo.log_so3(X)

    def _moment(self, model, t, q, R, kin):
        X = R.T @ self.vt.rotation(t)
        angle = geo.rotation_angle(X)
        if angle > np.pi - 1e-4:
            raise ValueError(
                f"log-form rotational module at near-antipodal error "
                f"({angle:.6f} rad); the logarithm branch is undefined there")
        return self.K @ geo.log_so3(X)

    def potential(self, model, t, q, kin=None):
        e = self._error_log(model, t, q, kin)
        return 0.5 * float(e @ self.K @ e)

    def to_dict(self):
        return {"type": "rot_log", "K": self.K.tolist(),
                "B": self.B.tolist(), "frame": self.frame,
                "vt": self.vt.to_dict()}


class Controller:
    """A linear superposition of impedance modules (plus optional gravity
    compensation), evaluated at the joint-torque level.

    Module order is irrelevant: the composed command is a plain sum, and
    each module's contribution is bit-identical whether evaluated alone or
    inside the stack.
    """

    def __init__(self, modules, gravity_compensation=False):
        if not modules:
            raise ValueError("a controller needs at least one module")
        self.modules = list(modules)
        self.gravity_compensation = bool(gravity_compensation)

    def torque(self, model, t, q, qd, kin=None):
        kin = kc.chain_data(model, q, kin)
        tau = np.zeros(model.n)
        for m in self.modules:
            tau += m.torque(model, t, q, qd, kin)
        if self.gravity_compensation:
            tau += gravity_vector(model, q, kin)
        return tau

    def bound(self, model):
        """Adapter matching the simulator's controller signature."""
        def ctrl(t, q, qd, kin=None):
            return self.torque(model, t, q, qd, kin)
        return ctrl

    def prepare(self, t_end):
        for m in self.modules:
            m.vt.prepare(t_end)

    def joint_damping(self):
        """Sum of joint-space damping matrices (for the passivity margin)."""
        mats = [m.B for m in self.modules if isinstance(m, JointSpaceImpedance)]
        return sum(mats) if mats else None

    @property
    def is_constant(self):
        """True when every virtual trajectory is a fixed reference, i.e. the
        closed loop is autonomous and its storage must be non-increasing."""
        return all(m.vt.is_constant for m in self.modules)

    def to_dict(self):
        return {"gravity_compensation": self.gravity_compensation,
                "modules": [m.to_dict() for m in self.modules]}


def compose(controller, model, q, qd, t, kin=None):
    """Joint-torque command of the module stack at one state."""
    return controller.torque(model, t, q, qd, kin)


_MODULE_TYPES = {
    "joint_space": lambda d: JointSpaceImpedance(
        np.array(d["K"]), np.array(d["B"]), trajectory_from_dict(d["vt"])),
    "task_position": lambda d: TaskPositionImpedance(
        np.array(d["K"]), np.array(d["B"]), trajectory_from_dict(d["vt"]),
        point=FramePoint(d["point"]["frame"], np.array(d["point"]["offset"]))
        if "point" in d else None),
    "rot_trace": lambda d: RotationTraceImpedance(
        np.array(d["G"]), np.array(d["B"]), trajectory_from_dict(d["vt"]),
        frame=d.get("frame", 0)),
    "rot_quat": lambda d: RotationQuatImpedance(
        np.array(d["K"]), np.array(d["B"]), trajectory_from_dict(d["vt"]),
        frame=d.get("frame", 0)),
    "rot_log": lambda d: RotationLogImpedance(
        np.array(d["K"]), np.array(d["B"]), trajectory_from_dict(d["vt"]),
        frame=d.get("frame", 0)),
}


def controller_from_dict(d):
    modules = []
    for md in d["modules"]:
        try:
            factory = _MODULE_TYPES[md["type"]]
        except KeyError:
            raise ValueError(f"unknown module type {md['type']!r}") from None
        modules.append(factory(md))
    return Controller(modules, d.get("gravity_compensation", False))


def save_controller(controller, path):
    with open(path, "w") as f:
        json.dump(controller.to_dict(), f, indent=1)
        f.write("\n")


def load_controller(path):
    with open(path) as f:
        return controller_from_dict(json.load(f))
