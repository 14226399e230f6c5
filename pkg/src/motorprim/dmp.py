"""Dynamic movement primitives: canonical systems, forcing terms, the four
transformation systems (joint space, task position, and orientation in both
rotation-matrix and unit-quaternion form), and imitation learning by locally
weighted regression.

Orientation systems integrate the exponential coordinates of the error to a
goal frame; the rotation trajectory is recovered through the exponential map
afterwards, so every sample is an exact group element.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter1d

from . import geometry as geo

SPACES = ("joint", "task_pos", "so3", "h1")

DEFAULT_ALPHA_S = 1.0
DEFAULT_ALPHA_Z = 10.0
DEFAULT_N_BASIS = 50


class UnlearnableCoordinateError(ValueError):
    """A discrete orientation demo starts at its goal in some coordinate,
    which makes the per-coordinate forcing scale zero and the weights of
    that coordinate unrecoverable."""

    def __init__(self, coords):
        self.coords = list(coords)
        super().__init__(
            f"demo start equals goal in orientation coordinate(s) {self.coords}; "
            "these coordinates cannot be learned with a diagonal scaling")


# ---------------------------------------------------------------------------
# canonical systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Canonical:
    """Phase dynamics: exponential decay (discrete) or wrapped constant-rate
    phase (rhythmic). ``tau`` is the movement duration for discrete motions
    and the period divided by 2 pi for rhythmic ones."""
    kind: str
    tau: float
    alpha_s: float = DEFAULT_ALPHA_S

    def __post_init__(self):
        if self.kind not in ("discrete", "rhythmic"):
            raise ValueError(f"unknown canonical kind {self.kind!r}")
        if self.tau <= 0 or self.alpha_s <= 0:
            raise ValueError("tau and alpha_s must be positive")


def canonical_value(c, t):
    """Closed-form phase at time t: s(0) = 1 decaying exponential, or the
    phase angle in [0, 2 pi)."""
    if c.kind == "discrete":
        return np.exp(-c.alpha_s * np.asarray(t, dtype=float) / c.tau)
    return np.mod(np.asarray(t, dtype=float) / c.tau, 2.0 * np.pi)


# ---------------------------------------------------------------------------
# basis sets and forcing terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BasisSet:
    kind: str
    centers: np.ndarray
    widths: np.ndarray

    @property
    def N(self):
        return len(self.centers)


def default_basis(kind, N, alpha_s=DEFAULT_ALPHA_S):
    """Standard layout: exponentially spaced Gaussians over the decaying
    phase, or evenly spaced von Mises bumps over the circle (width 2.5 N)."""
    if N < 2:
        raise ValueError("need at least two basis functions")
    i = np.arange(N, dtype=float)
    if kind == "discrete":
        c = np.exp(-alpha_s * i / (N - 1))
        h = np.empty(N)
        h[:-1] = 1.0 / np.diff(c) ** 2
        h[-1] = h[-2]
    elif kind == "rhythmic":
        c = 2.0 * np.pi * i / (N - 1)
        h = np.full(N, 2.5 * N)
    else:
        raise ValueError(f"unknown basis kind {kind!r}")
    return BasisSet(kind, c, h)


def basis_activations(basis, s):
    if basis.kind == "discrete":
        return np.exp(-basis.widths * (s - basis.centers) ** 2)
    return np.exp(basis.widths * (np.cos(s - basis.centers) - 1.0))


def phase_weights(basis, s):
    """Normalized activation vector a(s); the forcing term is ``W @ a(s)``.

    Discrete activations carry the extra factor s so the forcing vanishes
    together with the phase."""
    act = basis_activations(basis, s)
    a = act / act.sum()
    if basis.kind == "discrete":
        a = a * s
    return a


# ---------------------------------------------------------------------------
# the model
# ---------------------------------------------------------------------------

@dataclass
class DmpModel:
    """A learned (or hand-set) movement primitive.

    ``goal`` is an n-vector for joint/task_pos, a rotation matrix for so3 and
    a unit quaternion for h1. ``scaling`` multiplies the forcing term; for
    orientation spaces it is the diagonal matrix the demo was normalized
    with. ``y0``/``yd0`` record the demo's initial condition in integration
    coordinates (exponential coordinates for orientation spaces) and serve
    as rollout defaults.
    """
    space: str
    canonical: Canonical
    basis: BasisSet
    W: np.ndarray
    alpha_z: float = DEFAULT_ALPHA_Z
    beta_z: float | None = None
    goal: np.ndarray = None
    scaling: np.ndarray = None
    y0: np.ndarray = None
    yd0: np.ndarray = None
    demo_start: np.ndarray | None = None
    demo_goal: np.ndarray | None = None

    def __post_init__(self):
        if self.space not in SPACES:
            raise ValueError(f"unknown space {self.space!r}")
        if self.beta_z is None:
            self.beta_z = self.alpha_z / 4.0  # critically damped default
        self.W = np.asarray(self.W, dtype=float)
        if self.scaling is None:
            self.scaling = np.eye(self.W.shape[0])
        self.scaling = np.asarray(self.scaling, dtype=float)

    @property
    def dim(self):
        return self.W.shape[0]

    @property
    def tau(self):
        return self.canonical.tau


def forcing(model, s):
    """Nonlinear forcing term (before the scaling matrix) at phase s."""
    return model.W @ phase_weights(model.basis, s)


def _rhs(model, y, z, t):
    """Time derivatives (ydot, zdot) of the transformation system."""
    s = canonical_value(model.canonical, t)
    F = model.scaling @ forcing(model, s)
    tau = model.canonical.tau
    if model.space in ("joint", "task_pos"):
        zdot = (model.alpha_z * (model.beta_z * (model.goal - y) - z) + F) / tau
    else:
        zdot = (-model.alpha_z * (model.beta_z * y + z) + F) / tau
    return z / tau, zdot


def transform_step(model, y, z, t, dt):
    """One RK4 step of the transformation system from time t to t + dt.

    The phase is evaluated in closed form at the stage times, so stepping is
    exactly time-reparameterization invariant: scaling (tau, dt) together
    reproduces the same path.
    """
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    k1y, k1z = _rhs(model, y, z, t)
    k2y, k2z = _rhs(model, y + dt / 2 * k1y, z + dt / 2 * k1z, t + dt / 2)
    k3y, k3z = _rhs(model, y + dt / 2 * k2y, z + dt / 2 * k2z, t + dt / 2)
    k4y, k4z = _rhs(model, y + dt * k3y, z + dt * k3z, t + dt)
    return (y + dt / 6 * (k1y + 2 * k2y + 2 * k3y + k4y),
            z + dt / 6 * (k1z + 2 * k2z + 2 * k3z + k4z))


@dataclass
class Rollout:
    """Sampled trajectory of a DMP with true time derivatives.

    ``y`` is in integration coordinates (exponential coordinates for
    orientation spaces); ``rotations``/``quats`` hold the recovered group
    elements for so3/h1 models.
    """
    t: np.ndarray
    y: np.ndarray
    yd: np.ndarray
    ydd: np.ndarray
    rotations: np.ndarray | None = None
    quats: np.ndarray | None = None


def _initial_coords(model, initial):
    if initial is None:
        if model.y0 is None:
            return np.zeros(model.dim)
        return np.asarray(model.y0, dtype=float)
    initial = np.asarray(initial, dtype=float)
    if model.space == "so3" and initial.shape == (3, 3):
        return geo.log_so3(initial.T @ model.goal)
    if model.space == "h1" and initial.shape == (4,):
        return 2.0 * geo.quat_log(geo.quat_mul(geo.quat_conj(initial), model.goal))
    return initial


def rollout(model, duration, dt, initial=None, initial_rate=None):
    """Integrate the model over ``duration`` with fixed step ``dt``.

    ``initial`` defaults to the learned demo start; for orientation models a
    rotation matrix (so3) or unit quaternion (h1) may be passed instead of
    exponential coordinates. Derivatives are taken from the system's right
    hand side, not finite differences.
    """
    m = int(round(duration / dt))
    y = _initial_coords(model, initial)
    if initial_rate is None:
        rate = np.zeros(model.dim) if model.yd0 is None or initial is not None \
            else np.asarray(model.yd0, dtype=float)
    else:
        rate = np.asarray(initial_rate, dtype=float)
    z = rate * model.canonical.tau
    t = np.arange(m + 1) * dt
    ys = np.empty((m + 1, model.dim))
    yds = np.empty_like(ys)
    ydds = np.empty_like(ys)
    for i in range(m + 1):
        ys[i] = y
        yd, zd = _rhs(model, y, z, t[i])
        yds[i] = yd
        ydds[i] = zd / model.canonical.tau
        if i < m:
            y, z = transform_step(model, y, z, t[i], dt)
    out = Rollout(t=t, y=ys, yd=yds, ydd=ydds)
    if model.space == "so3":
        out.rotations = np.stack([model.goal @ geo.exp_so3(e).T for e in ys])
    elif model.space == "h1":
        out.quats = np.stack([geo.quat_mul(model.goal,
                                           geo.quat_conj(geo.quat_exp(e / 2.0)))
                              for e in ys])
    return out


# ---------------------------------------------------------------------------
# demonstrations
# ---------------------------------------------------------------------------

@dataclass
class Demonstration:
    """Uniformly sampled demo in one of the four spaces.

    ``value`` is (P, n); for orientation spaces it holds exponential
    coordinates of the error to ``goal`` (use the ``from_rotations`` /
    ``from_quaternions`` constructors). Missing derivatives are filled with
    central differences followed by Gaussian smoothing over a window of 5%
    of the samples.
    """
    t: np.ndarray
    value: np.ndarray
    d1: np.ndarray | None = None
    d2: np.ndarray | None = None
    space: str = "joint"
    goal: np.ndarray | None = None
    period: float | None = None

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.value = np.atleast_2d(np.asarray(self.value, dtype=float))
        if self.value.shape[0] != len(self.t):
            raise ValueError("value must have one row per sample")
        steps = np.diff(self.t)
        if not np.allclose(steps, steps[0], rtol=1e-6):
            raise ValueError("demonstration grid must be uniform")

    @property
    def P(self):
        return len(self.t)

    @property
    def dim(self):
        return self.value.shape[1]

    def derivatives(self):
        """(d1, d2), computing any missing one numerically."""
        d1, d2 = self.d1, self.d2
        dt = self.t[1] - self.t[0]
        if d1 is None:
            d1 = _smoothed_gradient(self.value, dt, self.P)
        if d2 is None:
            d2 = _smoothed_gradient(np.asarray(d1, dtype=float), dt, self.P)
        return np.asarray(d1, dtype=float), np.asarray(d2, dtype=float)

    @classmethod
    def from_rotations(cls, t, rotations, kind="discrete", goal=None,
                       period=None):
        """Build an orientation demo (so3) from rotation-matrix samples."""
        rotations = np.asarray(rotations, dtype=float)
        if goal is None:
            if kind == "discrete":
                goal = rotations[-1]
            else:
                logs = np.stack([geo.log_so3(R) for R in rotations])
                goal = geo.exp_so3(logs.mean(axis=0))
        e = np.stack([geo.log_so3(R.T @ goal) for R in rotations])
        return cls(t=t, value=e, space="so3", goal=goal, period=period)

    @classmethod
    def from_quaternions(cls, t, quats, kind="discrete", goal=None,
                         period=None):
        """Build an orientation demo (h1) from unit-quaternion samples."""
        quats = np.asarray(quats, dtype=float)
        if goal is None:
            if kind == "discrete":
                goal = quats[-1]
            else:
                logs = np.stack([geo.quat_log(q) for q in quats])
                goal = geo.quat_exp(logs.mean(axis=0))
        e = np.stack([2.0 * geo.quat_log(geo.quat_mul(geo.quat_conj(q), goal))
                      for q in quats])
        return cls(t=t, value=e, space="h1", goal=goal, period=period)


def _smoothed_gradient(x, dt, P):
    d = np.gradient(x, dt, axis=0)
    sigma = max(1.0, 0.05 * P) / 4.0
    return gaussian_filter1d(d, sigma=sigma, axis=0, mode="nearest")


# ---------------------------------------------------------------------------
# imitation learning (locally weighted regression)
# ---------------------------------------------------------------------------

def _solve_lwr(A, B, ridge=1e-8):
    """W = B A^T (A A^T)^-1 via normal equations; Tikhonov fallback when the
    Gram matrix is numerically rank deficient."""
    G = A @ A.T
    reg = 0.0
    if np.linalg.cond(G) > 1e12:
        reg = ridge * np.trace(G)
        warnings.warn("basis Gram matrix near singular; regularizing "
                      f"with ridge {reg:.3e}", RuntimeWarning)
        G = G + reg * np.eye(G.shape[0])
    return np.linalg.solve(G, A @ B.T).T


def imitation_learn(demo, space=None, kind="discrete", N=DEFAULT_N_BASIS,
                    alpha_s=DEFAULT_ALPHA_S, alpha_z=DEFAULT_ALPHA_Z,
                    beta_z=None, r_scale=1.0, goal=None):
    """Fit DMP weights to a demonstration.

    ``goal`` overrides the default goal rule (last sample for discrete
    motions, sample mean for rhythmic ones); rhythmic demos should carry
    their period explicitly on the Demonstration, otherwise the recording
    span is assumed to be exactly one period.
    """
    space = space or demo.space
    if space != demo.space:
        raise ValueError(f"demo is in space {demo.space!r}, not {space!r}")
    if beta_z is None:
        beta_z = alpha_z / 4.0
    P = demo.P
    if N < 2 or P < N:
        raise ValueError("need P >= N >= 2 samples")

    span = demo.t[-1] - demo.t[0]
    if kind == "discrete":
        tau = span
    else:
        tau = (demo.period if demo.period is not None else span) / (2 * np.pi)
    canonical = Canonical(kind, tau, alpha_s)
    basis = default_basis(kind, N, alpha_s)

    value = demo.value
    d1, d2 = demo.derivatives()
    if space in ("joint", "task_pos"):
        if goal is None:
            goal = value[-1] if kind == "discrete" else value.mean(axis=0)
        goal = np.asarray(goal, dtype=float)
        offset = value - goal
    else:
        # orientation demos are already error coordinates to demo.goal
        if goal is None:
            goal = demo.goal
        offset = value

    B = (tau**2 * d2 + alpha_z * tau * d1 + alpha_z * beta_z * offset).T

    if space in ("so3", "h1") and kind == "discrete":
        diag = value[0]
        dead = np.where(np.abs(diag) < 1e-10)[0]
        if len(dead):
            raise UnlearnableCoordinateError(dead)
        scaling = np.diag(diag)
        B = B / diag[:, None]
    elif space in ("so3", "h1"):
        scaling = r_scale * np.eye(3)
        B = B / r_scale
    else:
        scaling = np.eye(demo.dim)

    s = canonical_value(canonical, demo.t - demo.t[0])
    A = np.stack([phase_weights(basis, si) for si in s], axis=1)
    W = _solve_lwr(A, B)

    return DmpModel(space=space, canonical=canonical, basis=basis, W=W,
                    alpha_z=alpha_z, beta_z=beta_z, goal=goal, scaling=scaling,
                    y0=value[0].copy(), yd0=d1[0].copy(),
                    demo_start=value[0].copy(),
                    demo_goal=np.asarray(goal, dtype=float).copy()
                    if space in ("joint", "task_pos") else None)


def position_scaling(model, new_start, new_goal):
    """Scaling matrix for a retargeted discrete position DMP.

    Rotates the demo's start-to-goal direction onto the new one and rescales
    by the length ratio, preserving the learned shape.
    """
    if model.space != "task_pos" or model.demo_goal is None:
        raise ValueError("retargeting applies to learned task_pos models")
    d_old = model.demo_goal - model.demo_start
    d_new = np.asarray(new_goal, dtype=float) - np.asarray(new_start, dtype=float)
    n_old, n_new = np.linalg.norm(d_old), np.linalg.norm(d_new)
    if n_old < 1e-12:
        raise ValueError("demo displacement is zero; cannot retarget")
    u, w = d_old / n_old, d_new / n_new
    axis = np.cross(u, w)
    sa, ca = np.linalg.norm(axis), float(u @ w)
    if sa < 1e-12:
        R = np.eye(3) if ca > 0 else geo.exp_so3(np.pi * _any_perpendicular(u))
    else:
        R = geo.exp_so3(axis / sa * np.arctan2(sa, ca))
    return R * (n_new / n_old)


def _any_perpendicular(u):
    v = np.array([1.0, 0.0, 0.0]) if abs(u[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    p = np.cross(u, v)
    return p / np.linalg.norm(p)


# ---------------------------------------------------------------------------
# save / load
# ---------------------------------------------------------------------------

def dmp_to_dict(model):
    """Full parameter dump as plain data; floats round-trip bit exactly."""
    return {
        "space": model.space,
        "canonical": {"kind": model.canonical.kind, "tau": model.canonical.tau,
                      "alpha_s": model.canonical.alpha_s},
        "basis": {"kind": model.basis.kind,
                  "centers": model.basis.centers.tolist(),
                  "widths": model.basis.widths.tolist()},
        "W": model.W.tolist(),
        "alpha_z": model.alpha_z,
        "beta_z": model.beta_z,
        "goal": np.asarray(model.goal).tolist(),
        "scaling": model.scaling.tolist(),
        "y0": None if model.y0 is None else np.asarray(model.y0).tolist(),
        "yd0": None if model.yd0 is None else np.asarray(model.yd0).tolist(),
        "demo_start": None if model.demo_start is None
        else np.asarray(model.demo_start).tolist(),
        "demo_goal": None if model.demo_goal is None
        else np.asarray(model.demo_goal).tolist(),
    }


def dmp_from_dict(d):
    def arr(x):
        return None if x is None else np.array(x, dtype=float)

    return DmpModel(
        space=d["space"],
        canonical=Canonical(d["canonical"]["kind"], d["canonical"]["tau"],
                            d["canonical"]["alpha_s"]),
        basis=BasisSet(d["basis"]["kind"], np.array(d["basis"]["centers"]),
                       np.array(d["basis"]["widths"])),
        W=arr(d["W"]), alpha_z=d["alpha_z"], beta_z=d["beta_z"],
        goal=arr(d["goal"]), scaling=arr(d["scaling"]),
        y0=arr(d["y0"]), yd0=arr(d["yd0"]),
        demo_start=arr(d["demo_start"]), demo_goal=arr(d["demo_goal"]),
    )


def save_demo_csv(demo, path):
    """Demo file: a ``# key=value`` metadata line declaring the space (plus
    goal/period where applicable), then CSV columns t, v*, and optional d1_*,
    d2_* derivative columns."""
    n = demo.dim
    meta = [f"space={demo.space}"]
    if demo.period is not None:
        meta.append(f"period={demo.period!r}")
    if demo.space in ("so3", "h1") and demo.goal is not None:
        flat = ",".join(repr(float(x)) for x in np.asarray(demo.goal).ravel())
        meta.append(f"goal={flat}")
    cols = ["t"] + [f"v{i+1}" for i in range(n)]
    blocks = [demo.t[:, None], demo.value]
    if demo.d1 is not None:
        cols += [f"d1_{i+1}" for i in range(n)]
        blocks.append(np.asarray(demo.d1))
    if demo.d2 is not None:
        cols += [f"d2_{i+1}" for i in range(n)]
        blocks.append(np.asarray(demo.d2))
    data = np.hstack(blocks)
    with open(path, "w", newline="\n") as f:
        f.write("# " + " ".join(meta) + "\n")
        f.write(",".join(cols) + "\n")
        for row in data:
            f.write(",".join(repr(float(x)) for x in row) + "\n")


def load_demo_csv(path):
    with open(path) as f:
        first = f.readline().strip()
        if not first.startswith("#"):
            raise ValueError("demo file must start with a '# space=...' line")
        meta = dict(kv.split("=", 1) for kv in first[1:].split())
        header = f.readline().strip().split(",")
        rows = np.array([[float(x) for x in line.split(",")]
                         for line in f if line.strip()])
    space = meta.get("space", "joint")
    if space not in SPACES:
        raise ValueError(f"unknown space {space!r} in demo file")
    n = sum(1 for c in header if c.startswith("v"))
    t = rows[:, 0]
    value = rows[:, 1:1 + n]
    d1 = d2 = None
    k = 1 + n
    if any(c.startswith("d1_") for c in header):
        d1 = rows[:, k:k + n]
        k += n
    if any(c.startswith("d2_") for c in header):
        d2 = rows[:, k:k + n]
    goal = None
    if "goal" in meta:
        flat = np.array([float(x) for x in meta["goal"].split(",")])
        goal = flat.reshape(3, 3) if space == "so3" else flat
    period = float(meta["period"]) if "period" in meta else None
    return Demonstration(t=t, value=value, d1=d1, d2=d2, space=space,
                         goal=goal, period=period)


def save_dmp(model, path):
    with open(path, "w") as f:
        json.dump(dmp_to_dict(model), f, indent=1)
        f.write("\n")


def load_dmp(path):
    with open(path) as f:
        return dmp_from_dict(json.load(f))
