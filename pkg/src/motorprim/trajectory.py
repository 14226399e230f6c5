"""Virtual-trajectory primitives and their linear superposition.

A virtual trajectory is the zero-force reference a mechanical impedance is
attached to, not a motion command. Vector-space trajectories sum pointwise;
orientation trajectories sum in exponential coordinates about a declared
base frame and are mapped back through the exponential map (the base-frame
convention is this package's, chosen so rotations always stay on the group).
"""

from __future__ import annotations

import numpy as np

from . import dmp as dmp_mod
from . import geometry as geo


def min_jerk(start, goal, t0, duration, t):
    """Quintic point-to-point profile; holds the endpoints outside
    [t0, t0 + duration]. Returns (value, rate)."""
    if duration <= 0:
        raise ValueError("duration must be positive")
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    s = np.clip((t - t0) / duration, 0.0, 1.0)
    value = start + (goal - start) * (10 * s**3 - 15 * s**4 + 6 * s**5)
    if 0.0 < s < 1.0:
        rate = (goal - start) * (30 * s**2 - 60 * s**3 + 30 * s**4) / duration
    else:
        rate = np.zeros_like(start)
    return value, rate


class MinJerk:
    """Goal-directed submovement (quintic minimum-jerk profile)."""

    constant = False

    def __init__(self, start, goal, t0=0.0, duration=1.0):
        self.start = np.asarray(start, dtype=float)
        self.goal = np.asarray(goal, dtype=float)
        self.t0 = float(t0)
        self.duration = float(duration)
        if self.duration <= 0:
            raise ValueError("duration must be positive")

    @property
    def dim(self):
        return len(self.start)

    def eval(self, t):
        return min_jerk(self.start, self.goal, self.t0, self.duration, t)

    def to_dict(self):
        return {"type": "min_jerk", "start": self.start.tolist(),
                "goal": self.goal.tolist(), "t0": self.t0,
                "duration": self.duration}


class Oscillation:
    """Rhythmic primitive: per-component sinusoid about a center."""

    constant = False

    def __init__(self, center, amplitude, period, phase=None):
        self.center = np.asarray(center, dtype=float)
        self.amplitude = np.asarray(amplitude, dtype=float)
        self.period = float(period)
        self.phase = np.zeros_like(self.center) if phase is None \
            else np.asarray(phase, dtype=float)
        if self.period <= 0:
            raise ValueError("period must be positive")

    @property
    def dim(self):
        return len(self.center)

    def eval(self, t):
        w = 2.0 * np.pi / self.period
        arg = w * t + self.phase
        return (self.center + self.amplitude * np.sin(arg),
                self.amplitude * w * np.cos(arg))

    def to_dict(self):
        return {"type": "oscillation", "center": self.center.tolist(),
                "amplitude": self.amplitude.tolist(), "period": self.period,
                "phase": self.phase.tolist()}


class Hold:
    """Constant reference (a stable posture)."""

    constant = True

    def __init__(self, value):
        self.value = np.asarray(value, dtype=float)

    @property
    def dim(self):
        return len(self.value)

    def eval(self, t):
        return self.value.copy(), np.zeros_like(self.value)

    def to_dict(self):
        return {"type": "hold", "value": self.value.tolist()}


class DmpRef:
    """A DMP rollout used as a virtual-trajectory summand.

    The transformation system is integrated once on a fixed half-step grid
    and extended on demand by continuing the integration, so evaluation is
    deterministic regardless of how far the table has been grown. Simulation
    stage times that are multiples of ``grid_dt`` hit table entries exactly;
    anything else is linearly interpolated.

    Before ``t0`` the primitive holds the start value; after the rollout
    horizon it keeps extending (discrete models have settled by then,
    rhythmic ones keep cycling).
    """

    constant = False

    def __init__(self, model, t0=0.0, grid_dt=5e-4, initial=None,
                 initial_rate=None):
        if model.space not in ("joint", "task_pos"):
            raise ValueError("vector DmpRef needs a joint or task_pos model; "
                             "use OrientationDmp for so3/h1")
        self.model = model
        self.t0 = float(t0)
        self.grid_dt = float(grid_dt)
        y0 = model.y0 if initial is None else np.asarray(initial, dtype=float)
        rate0 = model.yd0 if (initial_rate is None and initial is None) \
            else initial_rate
        self._y = [np.array(y0, dtype=float)]
        self._yd = [np.zeros_like(y0) if rate0 is None
                    else np.array(rate0, dtype=float)]
        self._z = self._yd[-1] * model.canonical.tau
        self._initial = None if initial is None else np.asarray(initial, float)
        self._initial_rate = rate0

    @property
    def dim(self):
        return self.model.dim

    def _extend_to(self, idx):
        y = self._y[-1]
        z = self._z
        k = len(self._y) - 1
        while k < idx:
            t = k * self.grid_dt
            y, z = dmp_mod.transform_step(self.model, y, z, t, self.grid_dt)
            k += 1
            self._y.append(y)
            self._yd.append(z / self.model.canonical.tau)
        self._z = z

    def prepare(self, t_end):
        """Integrate the table up to t_end ahead of time (optional)."""
        self._extend_to(int(np.ceil(max(0.0, t_end - self.t0) / self.grid_dt)) + 1)

    def eval(self, t):
        rel = t - self.t0
        if rel < 0.0:
            return self._y[0].copy(), np.zeros(self.dim)
        x = rel / self.grid_dt
        hi = int(np.ceil(x - 1e-9))
        self._extend_to(hi)
        lo = int(np.floor(x + 1e-9))
        if lo >= hi:
            return self._y[hi].copy(), self._yd[hi].copy()
        f = x - lo
        return ((1 - f) * self._y[lo] + f * self._y[hi],
                (1 - f) * self._yd[lo] + f * self._yd[hi])

    def to_dict(self):
        d = {"type": "dmp", "t0": self.t0, "grid_dt": self.grid_dt,
             "model": dmp_mod.dmp_to_dict(self.model)}
        if self._initial is not None:
            d["initial"] = self._initial.tolist()
            if self._initial_rate is not None:
                d["initial_rate"] = np.asarray(self._initial_rate).tolist()
        return d


def primitive_from_dict(d):
    kind = d["type"]
    if kind == "min_jerk":
        return MinJerk(d["start"], d["goal"], d["t0"], d["duration"])
    if kind == "oscillation":
        return Oscillation(d["center"], d["amplitude"], d["period"],
                           d.get("phase"))
    if kind == "hold":
        return Hold(d["value"])
    if kind == "dmp":
        model = dmp_mod.dmp_from_dict(d["model"])
        return DmpRef(model, t0=d.get("t0", 0.0),
                      grid_dt=d.get("grid_dt", 5e-4),
                      initial=d.get("initial"),
                      initial_rate=d.get("initial_rate"))
    raise ValueError(f"unknown primitive type {kind!r}")


class VirtualTrajectory:
    """Pointwise sum of vector-space primitives: x0(t) = sum_i x0_i(t)."""

    def __init__(self, summands):
        if not summands:
            raise ValueError("need at least one summand")
        dims = {s.dim for s in summands}
        if len(dims) != 1:
            raise ValueError(f"summand dimensions differ: {sorted(dims)}")
        self.summands = list(summands)
        self.dim = dims.pop()

    def eval(self, t):
        value = np.zeros(self.dim)
        rate = np.zeros(self.dim)
        for s in self.summands:
            v, r = s.eval(t)
            value += v
            rate += r
        return value, rate

    def prepare(self, t_end):
        for s in self.summands:
            if hasattr(s, "prepare"):
                s.prepare(t_end)

    @property
    def is_constant(self):
        return all(s.constant for s in self.summands)

    def to_dict(self):
        return {"space": "vector",
                "summands": [s.to_dict() for s in self.summands]}


class OrientationDmp:
    """Orientation DMP rollout (so3 or h1) as an exponential-coordinate
    summand about a base frame: e_i(t) = Log(R_base^T R0_dmp(t))."""

    constant = False

    def __init__(self, model, base, t0=0.0, grid_dt=5e-4):
        if model.space not in ("so3", "h1"):
            raise ValueError("OrientationDmp needs an so3 or h1 model")
        self.model = model
        self.base = np.asarray(base, dtype=float)
        self.t0 = float(t0)
        self.grid_dt = float(grid_dt)
        self._e = []
        self._z = None
        self._y = None
        self.dim = 3

    def _rotation_of(self, y):
        if self.model.space == "so3":
            return self.model.goal @ geo.exp_so3(y).T
        return geo.quat_to_rotm(
            geo.quat_mul(self.model.goal, geo.quat_conj(geo.quat_exp(y / 2.0))))

    def _extend_to(self, idx):
        if self._y is None:
            self._y = np.array(self.model.y0, dtype=float)
            self._z = (np.zeros(3) if self.model.yd0 is None
                       else np.asarray(self.model.yd0, float)) * self.model.canonical.tau
            self._e.append(geo.log_so3(self.base.T @ self._rotation_of(self._y)))
        while len(self._e) - 1 < idx:
            t = (len(self._e) - 1) * self.grid_dt
            self._y, self._z = dmp_mod.transform_step(
                self.model, self._y, self._z, t, self.grid_dt)
            self._e.append(geo.log_so3(self.base.T @ self._rotation_of(self._y)))

    def prepare(self, t_end):
        self._extend_to(int(np.ceil(max(0.0, t_end - self.t0) / self.grid_dt)) + 1)

    def eval(self, t):
        """(e, edot) about the base frame; edot by table differencing."""
        rel = t - self.t0
        if rel <= 0.0:
            self._extend_to(1)
            return self._e[0].copy(), np.zeros(3)
        x = rel / self.grid_dt
        hi = int(np.ceil(x - 1e-9))
        self._extend_to(hi + 1)
        lo = int(np.floor(x + 1e-9))
        if lo >= hi:
            rate = (self._e[hi + 1] - self._e[hi - 1]) / (2 * self.grid_dt) \
                if hi >= 1 else np.zeros(3)
            return self._e[hi].copy(), rate
        f = x - lo
        rate = (self._e[hi] - self._e[lo]) / self.grid_dt
        return (1 - f) * self._e[lo] + f * self._e[hi], rate

    def to_dict(self):
        return {"type": "dmp", "t0": self.t0, "grid_dt": self.grid_dt,
                "model": dmp_mod_to_dict(self.model)}


class OrientationTrajectory:
    """Virtual orientation R0(t) = R_base Exp(sum_i e_i(t)).

    Summands are 3-vector primitives in exponential coordinates about the
    base frame (Hold/MinJerk/Oscillation there, or an OrientationDmp). A
    fixed orientation is ``OrientationTrajectory.fixed(R)``.
    """

    def __init__(self, base, summands=()):
        self.base = np.asarray(base, dtype=float)
        for s in summands:
            if s.dim != 3:
                raise ValueError("orientation summands are 3-vectors")
        self.summands = list(summands)
        self._base_quat = geo.rotm_to_quat(self.base)

    @classmethod
    def fixed(cls, rotation):
        return cls(rotation, [])

    def coords(self, t):
        e = np.zeros(3)
        rate = np.zeros(3)
        for s in self.summands:
            v, r = s.eval(t)
            e += v
            rate += r
        return e, rate

    def rotation(self, t):
        if not self.summands:
            return self.base
        e, _ = self.coords(t)
        return self.base @ geo.exp_so3(e)

    def quaternion(self, t):
        if not self.summands:
            return self._base_quat
        return geo.rotm_to_quat(self.rotation(t))

    def prepare(self, t_end):
        for s in self.summands:
            if hasattr(s, "prepare"):
                s.prepare(t_end)

    @property
    def is_constant(self):
        return all(s.constant for s in self.summands)

    def to_dict(self):
        return {"space": "orientation", "base": self.base.tolist(),
                "summands": [s.to_dict() for s in self.summands]}


def trajectory_from_dict(d):
    if d["space"] == "vector":
        return VirtualTrajectory([primitive_from_dict(s) for s in d["summands"]])
    if d["space"] == "orientation":
        summands = []
        for s in d["summands"]:
            if s["type"] == "dmp":
                model = dmp_mod.dmp_from_dict(s["model"])
                summands.append(OrientationDmp(model, np.array(d["base"], dtype=float),
                                               t0=s.get("t0", 0.0),
                                               grid_dt=s.get("grid_dt", 5e-4)))
            else:
                summands.append(primitive_from_dict(s))
        return OrientationTrajectory(np.array(d["base"], dtype=float), summands)
    raise ValueError(f"unknown trajectory space {d['space']!r}")
