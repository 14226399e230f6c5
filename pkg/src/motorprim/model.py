"""Serial-chain robot descriptions and the two built-in models.

A robot is described entirely by data: spatial screw axes at the home
configuration, rigid home transforms of the attached frames, per-link mass
properties, and joint/torque limits. Kinematics and dynamics are derived
from this description via the product of exponentials (:mod:`.kinematics`,
:mod:`.dynamics`); models are immutable after construction.

Model files are JSON with the same field names as :class:`RobotModel`; see
``models/planar_two_link.json`` for a commented-by-example schema.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np


@dataclass(frozen=True)
class Frame:
    """A rigid frame attached to the chain.

    ``attach_link`` is the number of joints the frame moves with (n for the
    end-effector, less for mid-chain frames); ``home`` is its 4x4 pose at the
    zero configuration.
    """
    name: str
    attach_link: int
    home: np.ndarray


@dataclass(frozen=True)
class FramePoint:
    """A point rigidly attached to (or offset from) a frame.

    ``offset`` is expressed in the frame's coordinates, so points off the
    physical structure (tool tips, held objects) are written the same way as
    on-body points.
    """
    frame: int | str = 0
    offset: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "offset", np.asarray(self.offset, dtype=float))


@dataclass
class JointState:
    q: np.ndarray
    qd: np.ndarray

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.qd = np.asarray(self.qd, dtype=float)
        if not (np.all(np.isfinite(self.q)) and np.all(np.isfinite(self.qd))):
            raise ValueError("joint state contains non-finite entries")


class RobotModel:
    """Immutable serial-chain description.

    Parameters
    ----------
    screw_axes : (n, 6) spatial screws (w, v) of each joint at home; revolute
        joints must have a unit rotational part.
    frames : list of :class:`Frame`; frame 0 is the primary end-effector.
    link_com : (n, 3) centers of mass at home, base coordinates.
    link_mass : (n,) kg.
    link_inertia : (n, 3, 3) inertia about each COM at home, base-aligned
        axes; must be symmetric positive definite.
    q_limits : (n, 2) joint limits (rad).
    tau_limits : (n,) torque limits (N m).
    gravity : (3,) gravitational acceleration in base coordinates.
    """

    def __init__(self, name, screw_axes, frames, link_com, link_mass,
                 link_inertia, q_limits, tau_limits,
                 gravity=(0.0, 0.0, -9.81)):
        self.name = str(name)
        self.screw_axes = np.array(screw_axes, dtype=float)
        self.n = self.screw_axes.shape[0]
        self.frames = list(frames)
        self.link_com = np.array(link_com, dtype=float)
        self.link_mass = np.array(link_mass, dtype=float)
        self.link_inertia = np.array(link_inertia, dtype=float)
        self.q_limits = np.array(q_limits, dtype=float)
        self.tau_limits = np.array(tau_limits, dtype=float)
        self.gravity = np.array(gravity, dtype=float)
        self._validate()
        for a in (self.screw_axes, self.link_com, self.link_mass,
                  self.link_inertia, self.q_limits, self.tau_limits,
                  self.gravity):
            a.flags.writeable = False

    def _validate(self):
        n = self.n
        if self.screw_axes.shape != (n, 6):
            raise ValueError("screw_axes must be (n, 6)")
        for i, s in enumerate(self.screw_axes):
            if abs(np.linalg.norm(s[:3]) - 1.0) > 1e-9:
                raise ValueError(f"joint {i}: rotational part must be unit norm")
        if np.any(self.link_mass <= 0):
            raise ValueError("link masses must be positive")
        for i, I in enumerate(self.link_inertia):
            if np.abs(I - I.T).max() > 1e-12:
                raise ValueError(f"link {i}: inertia not symmetric")
            if np.linalg.eigvalsh(I).min() <= 0:
                raise ValueError(f"link {i}: inertia not positive definite")
        for f in self.frames:
            if not 0 <= f.attach_link <= n:
                raise ValueError(f"frame {f.name}: attach_link out of range")

    def frame_index(self, frame):
        """Resolve a frame given by index or name."""
        if isinstance(frame, str):
            for i, f in enumerate(self.frames):
                if f.name == frame:
                    return i
            raise KeyError(f"no frame named {frame!r}")
        if not 0 <= frame < len(self.frames):
            raise IndexError(f"frame index {frame} out of range")
        return int(frame)

    def to_dict(self):
        return {
            "name": self.name,
            "gravity": self.gravity.tolist(),
            "screw_axes": self.screw_axes.tolist(),
            "frames": [{"name": f.name, "attach_link": f.attach_link,
                        "home": np.asarray(f.home).tolist()} for f in self.frames],
            "links": [{"com": self.link_com[i].tolist(),
                       "mass": float(self.link_mass[i]),
                       "inertia": self.link_inertia[i].tolist()}
                      for i in range(self.n)],
            "q_limits": self.q_limits.tolist(),
            "tau_limits": self.tau_limits.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        frames = [Frame(f["name"], int(f["attach_link"]),
                        np.array(f["home"], dtype=float)) for f in d["frames"]]
        links = d["links"]
        return cls(
            name=d["name"],
            screw_axes=d["screw_axes"],
            frames=frames,
            link_com=[l["com"] for l in links],
            link_mass=[l["mass"] for l in links],
            link_inertia=[l["inertia"] for l in links],
            q_limits=d["q_limits"],
            tau_limits=d["tau_limits"],
            gravity=d.get("gravity", (0.0, 0.0, -9.81)),
        )


def save_model(model, path):
    with open(path, "w") as f:
        json.dump(model.to_dict(), f, indent=1)
        f.write("\n")


def load_model(path):
    """Load a robot model from a JSON file or a built-in name.

    Built-in names: ``planar_two_link``, ``seven_dof_arm``.
    """
    if path == "planar_two_link":
        return planar_two_link()
    if path == "seven_dof_arm":
        return seven_dof_arm()
    with open(path) as f:
        return RobotModel.from_dict(json.load(f))


def _pose(p):
    T = np.eye(4)
    T[:3, 3] = p
    return T


def _rod_inertia(mass, length, radius, axis):
    """Uniform solid cylinder about its COM; ``axis`` in {0, 1, 2}."""
    along = 0.5 * mass * radius**2
    perp = mass * (3.0 * radius**2 + length**2) / 12.0
    I = np.full(3, perp)
    I[axis] = along
    return np.diag(I)


def planar_two_link():
    """Planar 2R arm: two 1 m uniform rods of 1 kg, joints about +z.

    Gravity acts along -y so the arm behaves as a double pendulum in the
    x-y plane when uncontrolled.
    """
    L1 = L2 = 1.0
    frames = [
        Frame("ee", 2, _pose([L1 + L2, 0.0, 0.0])),
        Frame("elbow", 1, _pose([L1, 0.0, 0.0])),
    ]
    rod = _rod_inertia(1.0, 1.0, 0.02, axis=0)
    return RobotModel(
        name="planar_two_link",
        screw_axes=[[0, 0, 1, 0, 0, 0],
                    [0, 0, 1, 0, -L1, 0]],
        frames=frames,
        link_com=[[L1 / 2, 0, 0], [L1 + L2 / 2, 0, 0]],
        link_mass=[1.0, 1.0],
        link_inertia=[rod, rod],
        q_limits=[[-2 * np.pi, 2 * np.pi]] * 2,
        tau_limits=[50.0, 50.0],
        gravity=(0.0, -9.81, 0.0),
    )


# Segment boundaries (m) of the 7-DOF stand-in along +z at home. The joint
# heights 0.36 / 0.78 / 1.18 and the 1.306 flange height follow published
# iiwa14-style geometry; everything else (masses, cylinder radii, link
# splits) is a documented stand-in, NOT the vendor model. Radii are chosen
# generously so the distal-link inertias also stand in for gear-reflected
# rotor inertia; thin-cylinder wrists would make stiff wrist damping
# unintegrable at the package's standard 1 ms step.
_SEVEN_Z = [0.0, 0.36, 0.57, 0.78, 0.98, 1.18, 1.243, 1.306]
_SEVEN_MASS = [5.0, 4.0, 3.5, 3.0, 2.5, 2.0, 1.5]
_SEVEN_RADIUS = [0.08, 0.08, 0.075, 0.075, 0.075, 0.075, 0.075]


def seven_dof_arm():
    """7-DOF anthropomorphic stand-in with alternating z/y joint axes.

    Axis layout (z, y, z, -y, z, y, z) and shoulder/elbow/wrist heights
    mimic a KUKA iiwa14; inertial data are uniform-cylinder approximations.
    Torque limits are 320/320/176/176/110/40/40 N m.
    """
    def y_screw(h, sign=1.0):
        return [0.0, sign, 0.0, -sign * h, 0.0, 0.0]

    z_screw = [0.0, 0.0, 1.0, 0.0, 0.0, 0.0]
    screws = [z_screw, y_screw(0.36), z_screw, y_screw(0.78, -1.0),
              z_screw, y_screw(1.18), z_screw]
    coms, inertias = [], []
    for i in range(7):
        z0, z1 = _SEVEN_Z[i], _SEVEN_Z[i + 1]
        coms.append([0.0, 0.0, (z0 + z1) / 2.0])
        inertias.append(_rod_inertia(_SEVEN_MASS[i], z1 - z0,
                                     _SEVEN_RADIUS[i], axis=2))
    deg = np.pi / 180.0
    lim = np.array([170, 120, 170, 120, 170, 120, 175]) * deg
    return RobotModel(
        name="seven_dof_arm",
        screw_axes=screws,
        frames=[Frame("ee", 7, _pose([0.0, 0.0, _SEVEN_Z[-1]]))],
        link_com=coms,
        link_mass=_SEVEN_MASS,
        link_inertia=inertias,
        q_limits=np.stack([-lim, lim], axis=1),
        tau_limits=[320.0, 320.0, 176.0, 176.0, 110.0, 40.0, 40.0],
        gravity=(0.0, 0.0, -9.81),
    )


def builtin_model_files():
    """Paths of the shipped model files (created at package build time)."""
    pkg = resources.files("motorprim") / "models"
    return sorted(str(p) for p in pkg.iterdir() if p.name.endswith(".json"))
