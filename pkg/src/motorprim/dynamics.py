"""Manipulator dynamics: mass matrix, Christoffel Coriolis matrix, gravity
vector, forward dynamics, and a fixed-step RK4 simulator.

The Coriolis matrix is assembled from Christoffel symbols of the first kind
using the analytic gradient of the mass matrix (Lie-bracket recursion on the
spatial Jacobian), so ``Mdot - 2 C`` is skew-symmetric to machine precision.
That property is what the passivity monitor in :mod:`.energy` relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kinematics import ChainData, chain_data, cross_rows
from .model import JointState

_I3 = np.eye(3)
_I3.flags.writeable = False


class NumericalInstability(RuntimeError):
    """Raised when a simulation state stops being finite."""


def _masks(n):
    """Per-size cached boolean masks used by the mass-matrix assembly."""
    if n not in _masks.cache:
        idx = np.arange(n)
        col = (idx[None, :] <= idx[:, None]).astype(float)       # j <= i
        strict = (idx[None, :] > idx[:, None]).astype(float)     # j > k
        _masks.cache[n] = (col, strict)
    return _masks.cache[n]


_masks.cache = {}


def _batch_skew(p):
    """(n, 3) -> (n, 3, 3) stack of cross-product matrices."""
    n = p.shape[0]
    P = np.zeros((n, 3, 3))
    P[:, 0, 1] = -p[:, 2]
    P[:, 0, 2] = p[:, 1]
    P[:, 1, 0] = p[:, 2]
    P[:, 1, 2] = -p[:, 0]
    P[:, 2, 0] = -p[:, 1]
    P[:, 2, 1] = p[:, 0]
    return P


def _link_frames(model, kin):
    """Per-link COM pose (n,4,4) at the current configuration, cached."""
    if kin.link_T is None:
        n = model.n
        T = kin.cum[1:n + 1].copy()
        T[:, :3, 3] += (T[:, :3, :3] @ model.link_com[:, :, None])[:, :, 0]
        kin.link_T = T
    return kin.link_T


def _spatial_inertias(model, kin):
    """Per-link 6x6 spatial inertias expressed in the base frame, cached.

    With Phi = Ad(T^-1) mapping spatial twists into the COM body frame,
    each block is Phi^T diag(I_com, m I) Phi written out explicitly.
    """
    if kin.link_inertia6 is None:
        n = model.n
        T = _link_frames(model, kin)
        R, p = T[:, :3, :3], T[:, :3, 3]
        m = model.link_mass
        Iw = R @ model.link_inertia @ R.transpose(0, 2, 1)
        P = _batch_skew(p)
        Gs = np.empty((n, 6, 6))
        Gs[:, :3, :3] = Iw + m[:, None, None] * (P @ P.transpose(0, 2, 1))
        Gs[:, :3, 3:] = m[:, None, None] * P
        Gs[:, 3:, :3] = Gs[:, :3, 3:].transpose(0, 2, 1)
        Gs[:, 3:, 3:] = m[:, None, None] * _I3
        kin.link_inertia6 = Gs
    return kin.link_inertia6


def _batch_ad(V):
    """(n, 6) twists -> (n, 6, 6) stack of twist-bracket matrices."""
    n = V.shape[0]
    A = np.zeros((n, 6, 6))
    W = _batch_skew(V[:, :3])
    A[:, :3, :3] = W
    A[:, 3:, 3:] = W
    A[:, 3:, :3] = _batch_skew(V[:, 3:])
    return A


def _mass_ctx(model, kin):
    """Shared per-configuration arrays: masked Jacobians, Gs @ Jm, M, dM."""
    if kin.mass_ctx is None:
        col, _ = _masks(model.n)
        Gs = _spatial_inertias(model, kin)
        Jm = kin.jac[None, :, :] * col[:, None, :]
        GJ = Gs @ Jm
        M = (Jm.transpose(0, 2, 1) @ GJ).sum(axis=0)
        kin.mass_ctx = {"Jm": Jm, "GJ": GJ, "M": (M + M.T) / 2.0, "dM": None}
    return kin.mass_ctx


def mass_matrix(model, q, kin=None):
    """Joint-space mass matrix M(q), symmetric positive definite."""
    kin = chain_data(model, q, kin)
    return _mass_ctx(model, kin)["M"].copy()


def mass_matrix_gradient(model, q, kin=None):
    """Analytic dM/dq as an (n, n, n) array, ``out[k] = dM/dq_k``.

    Uses d(J_j)/dq_k = ad(J_k) J_j for k < j together with the transport rule
    for the link spatial inertias; each slice is exactly symmetric.
    """
    kin = chain_data(model, q, kin)
    ctx = _mass_ctx(model, kin)
    if ctx["dM"] is None:
        col, strict = _masks(model.n)
        Jm, GJ = ctx["Jm"], ctx["GJ"]
        ad = _batch_ad(kin.jac.T)
        AJ = ad[:, None] @ Jm[None]                     # (k, i, 6, n)
        # kinematic part: columns j with k < j <= i vary with q_k;
        # inertia-transport part: links i >= k see the twist of joint k
        kin_part = (AJ * strict[:, None, None, :]).transpose(0, 1, 3, 2)
        tr_part = (AJ * col.T[:, :, None, None]).transpose(0, 1, 3, 2)
        T1 = (kin_part @ GJ[None]).sum(axis=1)
        S = (tr_part @ GJ[None]).sum(axis=1)
        ctx["dM"] = T1 + T1.transpose(0, 2, 1) - S - S.transpose(0, 2, 1)
    return ctx["dM"]


def coriolis_matrix(model, q, qd, kin=None, dM=None):
    """C(q, qd) from Christoffel symbols of the first kind."""
    qd = np.asarray(qd, dtype=float)
    if dM is None:
        dM = mass_matrix_gradient(model, q, kin)
    A1 = (dM * qd[:, None, None]).sum(axis=0)
    A2 = (dM @ qd).T
    A3 = qd @ dM
    return 0.5 * (A1 + A2 - A3)


def gravity_vector(model, q, kin=None):
    """g(q) = dU_g/dq for the model's gravitational acceleration vector."""
    kin = chain_data(model, q, kin)
    n = model.n
    T = _link_frames(model, kin)
    m = model.link_mass
    # suffix sums: joint j carries every link i >= j
    mp = (m[:, None] * T[:, :3, 3])[::-1].cumsum(axis=0)[::-1]
    ms = m[::-1].cumsum()[::-1]
    w = np.ascontiguousarray(kin.jac[:3].T)
    v = kin.jac[3:].T
    return -(cross_rows(w, mp) + ms[:, None] * v) @ model.gravity


def gravity_potential(model, q, kin=None):
    """U_g(q); zero when all COMs sit at the base origin."""
    kin = chain_data(model, q, kin)
    T = _link_frames(model, kin)
    return float(-sum(model.link_mass[i] * (model.gravity @ T[i, :3, 3])
                      for i in range(model.n)))


@dataclass
class DynTerms:
    M: np.ndarray
    C: np.ndarray
    g: np.ndarray


def dynamics_terms(model, q, qd, kin=None):
    """M, C, g of the manipulator equation ``M qdd + C qd + g = tau``."""
    kin = chain_data(model, q, kin)
    dM = mass_matrix_gradient(model, q, kin)
    return DynTerms(
        M=mass_matrix(model, q, kin),
        C=coriolis_matrix(model, q, qd, kin, dM),
        g=gravity_vector(model, q, kin),
    )


def skewness_defect(model, q, qd, h=1e-6):
    """Max-norm defect of the symmetric part of ``Mdot - 2 C``.

    Mdot comes from a central finite difference of M along the state's
    velocity, independent of the analytic gradient used for C.
    """
    q = np.asarray(q, dtype=float)
    qd = np.asarray(qd, dtype=float)
    scale = h / max(1.0, float(np.linalg.norm(qd)))
    Mdot = (mass_matrix(model, q + scale * qd) -
            mass_matrix(model, q - scale * qd)) / (2.0 * scale)
    C = coriolis_matrix(model, q, qd)
    W = Mdot - 2.0 * C
    return float(np.abs(W + W.T).max())


def kinetic_energy(model, q, qd, kin=None):
    qd = np.asarray(qd, dtype=float)
    return 0.5 * float(qd @ mass_matrix(model, q, kin) @ qd)


def forward_dynamics(model, q, qd, tau_in=None, tau_ext=None,
                     gravity_on=True, kin=None):
    """Joint accelerations from the manipulator equation."""
    kin = chain_data(model, q, kin)
    qd = np.asarray(qd, dtype=float)
    C = coriolis_matrix(model, q, qd, kin)
    rhs = -(C @ qd)
    if gravity_on:
        rhs = rhs - gravity_vector(model, q, kin)
    if tau_in is not None:
        rhs = rhs + np.asarray(tau_in, dtype=float)
    if tau_ext is not None:
        rhs = rhs + np.asarray(tau_ext, dtype=float)
    return np.linalg.solve(_mass_ctx(model, kin)["M"], rhs)


def _eval_torques(model, t, q, qd, controller, tau_ext, kin):
    n = model.n
    tin = np.zeros(n) if controller is None else \
        np.asarray(controller(t, q, qd, kin), dtype=float)
    if tau_ext is None:
        text = np.zeros(n)
    elif callable(tau_ext):
        text = np.asarray(tau_ext(t, q, qd, kin), dtype=float)
    else:
        text = np.asarray(tau_ext, dtype=float)
    return tin, text


def _state_derivative(model, t, q, qd, controller, tau_ext, gravity_on):
    kin = ChainData(model, q)
    tin, text = _eval_torques(model, t, q, qd, controller, tau_ext, kin)
    qdd = forward_dynamics(model, q, qd, tin, text, gravity_on, kin)
    return qd, qdd


def step(model, state, controller, dt, t=0.0, tau_ext=None, gravity_on=False):
    """One classical RK4 step of the manipulator equation.

    ``controller`` is any callable ``(t, q, qd, kin) -> tau`` (or None for the
    free system); ``tau_ext`` may be a constant vector or a callable of the
    same signature. Deterministic: identical inputs give bit-identical
    output.
    """
    if not 0.0 < dt <= 1e-2:
        raise ValueError("dt must lie in (0, 1e-2]")
    q, qd = np.asarray(state.q, dtype=float), np.asarray(state.qd, dtype=float)
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(qd))):
        raise NumericalInstability("non-finite state entering step")

    k1q, k1v = _state_derivative(model, t, q, qd, controller, tau_ext, gravity_on)
    k2q, k2v = _state_derivative(model, t + dt / 2, q + dt / 2 * k1q,
                                 qd + dt / 2 * k1v, controller, tau_ext, gravity_on)
    k3q, k3v = _state_derivative(model, t + dt / 2, q + dt / 2 * k2q,
                                 qd + dt / 2 * k2v, controller, tau_ext, gravity_on)
    k4q, k4v = _state_derivative(model, t + dt, q + dt * k3q,
                                 qd + dt * k3v, controller, tau_ext, gravity_on)
    qn = q + dt / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q)
    qdn = qd + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    if not (np.all(np.isfinite(qn)) and np.all(np.isfinite(qdn))):
        raise NumericalInstability(f"simulation diverged at t = {t + dt:.6f}")
    return JointState(qn, qdn)


@dataclass
class SimTrace:
    """Uniform-grid record of a simulation run.

    Energy columns (V, dVdt) are attached by :func:`motorprim.energy.ledger`;
    the CSV layout is (t, q*, qd*, tau*, V, dVdt).
    """
    t: np.ndarray
    q: np.ndarray
    qd: np.ndarray
    tau_in: np.ndarray
    tau_ext: np.ndarray
    dt: float
    V: np.ndarray | None = None
    dVdt: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    @property
    def n(self):
        return self.q.shape[1]


def simulate(model, controller, q0, qd0, duration, dt, tau_ext=None,
             gravity_on=False):
    """Fixed-step rollout; records state and torques on the step grid.

    Identical arithmetic to repeated :func:`step` calls (the grid-point
    controller evaluation doubles as the first RK4 stage), so results are
    bit-identical between the two entry points.
    """
    if not 0.0 < dt <= 1e-2:
        raise ValueError("dt must lie in (0, 1e-2]")
    m = int(round(duration / dt))
    n = model.n
    t = np.arange(m + 1) * dt
    q = np.empty((m + 1, n))
    qd = np.empty((m + 1, n))
    tin = np.empty((m + 1, n))
    text = np.empty((m + 1, n))
    qi = np.asarray(q0, dtype=float).copy()
    qdi = np.asarray(qd0, dtype=float).copy()
    for i in range(m + 1):
        if not (np.all(np.isfinite(qi)) and np.all(np.isfinite(qdi))):
            raise NumericalInstability(f"simulation diverged at t = {t[i]:.6f}")
        q[i], qd[i] = qi, qdi
        kin = ChainData(model, qi)
        tin[i], text[i] = _eval_torques(model, t[i], qi, qdi,
                                        controller, tau_ext, kin)
        if i < m:
            ti = t[i]
            k1v = forward_dynamics(model, qi, qdi, tin[i], text[i],
                                   gravity_on, kin)
            k1q = qdi
            k2q, k2v = _state_derivative(model, ti + dt / 2, qi + dt / 2 * k1q,
                                         qdi + dt / 2 * k1v, controller,
                                         tau_ext, gravity_on)
            k3q, k3v = _state_derivative(model, ti + dt / 2, qi + dt / 2 * k2q,
                                         qdi + dt / 2 * k2v, controller,
                                         tau_ext, gravity_on)
            k4q, k4v = _state_derivative(model, ti + dt, qi + dt * k3q,
                                         qdi + dt * k3v, controller,
                                         tau_ext, gravity_on)
            qi = qi + dt / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q)
            qdi = qdi + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return SimTrace(t=t, q=q, qd=qd, tau_in=tin, tau_ext=text, dt=dt)


def _fmt(x):
    return repr(float(x))


def write_trace_csv(trace, path):
    """Write a trace as CSV: ``t, q1.., qd1.., tau1.., V, dVdt``.

    Uses shortest round-trip float formatting, so identical runs produce
    byte-identical files.
    """
    if trace.V is None or trace.dVdt is None:
        raise ValueError("attach an energy ledger before exporting the trace")
    n = trace.n
    header = (["t"] + [f"q{i+1}" for i in range(n)]
              + [f"qd{i+1}" for i in range(n)]
              + [f"tau{i+1}" for i in range(n)] + ["V", "dVdt"])
    with open(path, "w", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for i in range(len(trace)):
            row = ([_fmt(trace.t[i])]
                   + [_fmt(x) for x in trace.q[i]]
                   + [_fmt(x) for x in trace.qd[i]]
                   + [_fmt(x) for x in trace.tau_in[i]]
                   + [_fmt(trace.V[i]), _fmt(trace.dVdt[i])])
            f.write(",".join(row) + "\n")
