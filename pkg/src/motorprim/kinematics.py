"""Product-of-exponentials kinematics: forward maps, Jacobians, and their
time derivatives.

All queries accept an optional precomputed :class:`ChainData` so that a
simulation step can evaluate the chain once and share it between the
controller and the dynamics.
"""

from __future__ import annotations

import numpy as np

from .geometry import exp_so3, skew
from .model import FramePoint


def se3_exp(S, theta):
    """Rigid transform of a unit-rotation screw ``S = (w, v)`` at angle theta."""
    w, v = S[:3], S[3:]
    T = np.eye(4)
    W = skew(w)
    T[:3, :3] = exp_so3(w * theta)
    G = np.eye(3) * theta + (1.0 - np.cos(theta)) * W \
        + (theta - np.sin(theta)) * (W @ W)
    T[:3, 3] = G @ v
    return T


def adjoint(T):
    """6x6 adjoint of a rigid transform, acting on (w, v) twists."""
    R, p = T[:3, :3], T[:3, 3]
    A = np.zeros((6, 6))
    A[:3, :3] = R
    A[3:, 3:] = R
    A[3:, :3] = skew(p) @ R
    return A


def ad_matrix(V):
    """6x6 matrix of the twist bracket: ``ad(V1) @ V2 == twist_bracket(V1, V2)``."""
    w, v = V[:3], V[3:]
    A = np.zeros((6, 6))
    A[:3, :3] = skew(w)
    A[3:, :3] = skew(v)
    A[3:, 3:] = skew(w)
    return A


_I3 = np.eye(3)
_I3.flags.writeable = False


def cross_rows(a, b):
    """Row-wise cross product of (n, 3) arrays (cheaper than np.cross)."""
    c = np.empty_like(a)
    c[:, 0] = a[:, 1] * b[:, 2] - a[:, 2] * b[:, 1]
    c[:, 1] = a[:, 2] * b[:, 0] - a[:, 0] * b[:, 2]
    c[:, 2] = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    return c


def _static(model):
    """Per-model constants of the PoE recursion (cached on the model)."""
    cache = getattr(model, "_poe_static", None)
    if cache is None:
        w = model.screw_axes[:, :3]
        v = model.screw_axes[:, 3:]
        W = np.stack([skew(wi) for wi in w])
        cache = {"w": w, "v": v, "W": W, "W2": W @ W}
        object.__setattr__(model, "_poe_static", cache)
    return cache


class ChainData:
    """Everything the rest of the package needs about the chain at one q.

    Attributes
    ----------
    cum : (n+1, 4, 4) cumulative products; ``cum[j]`` moves with joints < j.
    jac : (6, n) spatial Jacobian, columns are the joint twists (w, v).
    frame_T : list of 4x4 poses of the model's attached frames.

    Link COM poses and spatial inertias are computed on first use and cached
    (see :mod:`.dynamics`); reusing one ChainData between the controller and
    the dynamics inside an integration stage avoids recomputing the chain.
    """

    __slots__ = ("model", "q", "cum", "jac", "frame_T",
                 "link_T", "link_inertia6", "mass_ctx")

    def __init__(self, model, q):
        q = np.asarray(q, dtype=float)
        n = model.n
        st = _static(model)
        sin, cos = np.sin(q), np.cos(q)
        Rj = _I3 + sin[:, None, None] * st["W"] \
            + (1.0 - cos)[:, None, None] * st["W2"]
        Gj = q[:, None, None] * _I3 + (1.0 - cos)[:, None, None] * st["W"] \
            + (q - sin)[:, None, None] * st["W2"]
        pj = (Gj @ st["v"][:, :, None])[:, :, 0]
        cum = np.empty((n + 1, 4, 4))
        cum[0] = np.eye(4)
        E = np.zeros((4, 4))
        E[3, 3] = 1.0
        for j in range(n):
            E[:3, :3] = Rj[j]
            E[:3, 3] = pj[j]
            cum[j + 1] = cum[j] @ E
        R = cum[:n, :3, :3]
        p = cum[:n, :3, 3]
        wj = (R @ st["w"][:, :, None])[:, :, 0]
        vj = cross_rows(p, wj) + (R @ st["v"][:, :, None])[:, :, 0]
        self.model = model
        self.q = q.copy()
        self.cum = cum
        self.jac = np.concatenate([wj.T, vj.T])
        self.frame_T = [cum[f.attach_link] @ f.home for f in model.frames]
        self.link_T = None
        self.link_inertia6 = None
        self.mass_ctx = None


def chain_data(model, q, kin=None):
    """Return ``kin`` if given (after a cheap consistency check), else evaluate."""
    if kin is not None:
        return kin
    return ChainData(model, q)


def _resolve_point(model, pt):
    if pt is None:
        pt = FramePoint(0)
    return model.frame_index(pt.frame), np.asarray(pt.offset, dtype=float)


def fk_position(model, q, pt=None, kin=None):
    """Base-frame position of a frame point (defaults to the end-effector)."""
    kin = chain_data(model, q, kin)
    fi, off = _resolve_point(model, pt)
    T = kin.frame_T[fi]
    return T[:3, :3] @ off + T[:3, 3]


def fk_rotation(model, q, frame=0, kin=None):
    """Base-frame orientation of an attached frame."""
    kin = chain_data(model, q, kin)
    return kin.frame_T[model.frame_index(frame)][:3, :3].copy()


def fk_transform(model, q, frame=0, kin=None):
    kin = chain_data(model, q, kin)
    return kin.frame_T[model.frame_index(frame)].copy()


def jacobian_position(model, q, pt=None, kin=None):
    """3xn position Jacobian of a frame point: ``pdot = Jp @ qdot``.

    Columns of joints distal to the point's frame are zero; no inverses are
    formed anywhere.
    """
    kin = chain_data(model, q, kin)
    fi, off = _resolve_point(model, pt)
    f = model.frames[fi]
    T = kin.frame_T[fi]
    p = T[:3, :3] @ off + T[:3, 3]
    J = np.zeros((3, model.n))
    al = f.attach_link
    w = kin.jac[:3, :al]
    J[0, :al] = w[1] * p[2] - w[2] * p[1]
    J[1, :al] = w[2] * p[0] - w[0] * p[2]
    J[2, :al] = w[0] * p[1] - w[1] * p[0]
    J[:, :al] += kin.jac[3:, :al]
    return J


def spatial_jacobian_rotation(model, q, frame=0, kin=None):
    """3xn angular-velocity Jacobian in the base frame."""
    kin = chain_data(model, q, kin)
    f = model.frames[model.frame_index(frame)]
    J = np.zeros((3, model.n))
    J[:, :f.attach_link] = kin.jac[:3, :f.attach_link]
    return J


def body_jacobian_rotation(model, q, frame=0, kin=None):
    """3xn angular-velocity Jacobian in the frame's own coordinates.

    Satisfies ``skew(J_body @ qdot) == R.T @ Rdot`` along any trajectory.
    """
    kin = chain_data(model, q, kin)
    fi = model.frame_index(frame)
    R = kin.frame_T[fi][:3, :3]
    return R.T @ spatial_jacobian_rotation(model, q, fi, kin)


def jacobian_full(model, q, pt=None, kin=None):
    """6xn stacked (position; rotation) Jacobian used for wrench mapping."""
    kin = chain_data(model, q, kin)
    fi, _ = _resolve_point(model, pt)
    return np.vstack([jacobian_position(model, q, pt, kin),
                      spatial_jacobian_rotation(model, q, fi, kin)])


def jacobian_position_dot(model, q, qd, pt=None, kin=None):
    """Analytic time derivative of :func:`jacobian_position`.

    Uses the screw recursion ``Jdot_j = ad(V_prefix_j) J_j`` where
    ``V_prefix_j`` is the spatial twist contributed by joints before j, so
    no finite differencing is involved.
    """
    kin = chain_data(model, q, kin)
    qd = np.asarray(qd, dtype=float)
    fi, off = _resolve_point(model, pt)
    f = model.frames[fi]
    T = kin.frame_T[fi]
    p = T[:3, :3] @ off + T[:3, 3]
    pdot = jacobian_position(model, q, pt, kin) @ qd
    Jd = np.zeros((3, model.n))
    prefix = np.zeros(6)
    for j in range(f.attach_link):
        col = kin.jac[:, j]
        cold = ad_matrix(prefix) @ col
        wd, vd = cold[:3], cold[3:]
        w = col[:3]
        Jd[:, j] = np.cross(wd, p) + np.cross(w, pdot) + vd
        prefix = prefix + qd[j] * col
    return Jd


def task_inertia_inverse(model, q, pt=None, kin=None):
    """Inverse task-space inertia ``J M^-1 J^T`` (6x6, symmetric PSD).

    Its smallest singular value tends to zero as the configuration
    approaches a kinematic singularity, which makes it the quantity of
    choice for workspace singularity scans.
    """
    from .dynamics import mass_matrix  # deferred: dynamics imports us

    kin = chain_data(model, q, kin)
    J = jacobian_full(model, q, pt, kin)
    M = mass_matrix(model, q, kin)
    Li = J @ np.linalg.solve(M, J.T)
    return (Li + Li.T) / 2.0
