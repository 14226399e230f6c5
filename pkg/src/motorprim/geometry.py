"""Rotation kernel: SO(3) matrices, unit quaternions, and their calculus.

Conventions used throughout the package:

* rotation matrices are (3, 3) float arrays, ``R @ R.T == I``, ``det R == 1``
* unit quaternions are (4,) float arrays ``(eta, ex, ey, ez)`` with
  ``eta**2 + ex**2 + ey**2 + ez**2 == 1``; the canonical representative
  returned by conversions has ``eta >= 0``
* exponential coordinates are (3,) float arrays (axis times angle, radians),
  with canonical representatives satisfying ``norm(e) <= pi``
* angular velocities are plain (3,) arrays; whether a quantity lives in the
  spatial or the body frame is part of each function's contract (names carry
  a ``w_body`` / ``w_spatial`` prefix where it matters) and the two are never
  mixed without an explicit rotation.

All functions are pure; none of them mutates its arguments.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

# Below this angle the exp/log maps switch to series expansions.
SMALL_ANGLE = 1e-7


def skew(w):
    """Cross-product matrix of a 3-vector: ``skew(w) @ v == cross(w, v)``."""
    w = np.asarray(w, dtype=float)
    return np.array([
        [0.0, -w[2], w[1]],
        [w[2], 0.0, -w[0]],
        [-w[1], w[0], 0.0],
    ])


def unskew(W):
    """Inverse of :func:`skew`; expects a skew-symmetric matrix."""
    W = np.asarray(W, dtype=float)
    return np.array([W[2, 1], W[0, 2], W[1, 0]])


def rot_x(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def is_rotation(R, tol=1e-9):
    """True when R is orthonormal with unit determinant within tol."""
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        return False
    return (np.abs(R @ R.T - np.eye(3)).max() < tol
            and abs(np.linalg.det(R) - 1.0) < tol)


def project_rotation(R):
    """Re-orthonormalize a nearly orthonormal matrix (polar projection).

    Only meant for drift repair inside long integrations; the pure maps in
    this module never call it.
    """
    U, _, Vt = np.linalg.svd(np.asarray(R, dtype=float))
    D = np.diag([1.0, 1.0, np.linalg.det(U @ Vt)])
    return U @ D @ Vt


def exp_so3(e):
    """Rodrigues map from exponential coordinates to a rotation matrix."""
    e = np.asarray(e, dtype=float)
    theta = np.linalg.norm(e)
    E = skew(e)
    if theta < SMALL_ANGLE:
        # sin(t)/t and (1-cos t)/t^2 by series; exact at t = 0
        a = 1.0 - theta**2 / 6.0
        b = 0.5 - theta**2 / 24.0
    else:
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / theta**2
    return np.eye(3) + a * E + b * (E @ E)


class LogQuality(NamedTuple):
    """Diagnostics attached to a logarithm evaluation."""
    angle: float
    near_pi: bool
    sign_rule_used: bool


def _axis_sign_rule(axis):
    """Deterministic sign for an axis whose sign is unobservable (theta = pi):
    flip so that the first nonzero component is positive."""
    for c in axis:
        if abs(c) > 1e-12:
            return axis if c > 0 else -axis
    return axis


# Angle beyond which log_so3 switches to the symmetric-part branch.
_NEAR_PI = np.pi - 1e-6


def log_so3(R, with_info=False):
    """Exponential coordinates of a rotation matrix, ``norm <= pi``.

    For angles within 1e-6 of pi the axis is recovered from the symmetric
    part of R; at exactly pi the sign is fixed by making the first nonzero
    axis component positive (the choice is a convention, the two antipodal
    answers are equally valid).

    With ``with_info=True`` also returns a :class:`LogQuality` tuple so
    callers can detect the degenerate branch.
    """
    R = np.asarray(R, dtype=float)
    ct = np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0)
    s = unskew(R - R.T)
    # atan2 of the matrix sine/cosine is well conditioned at both ends of
    # [0, pi], unlike arccos of the trace alone
    st = np.linalg.norm(s) / 2.0
    theta = float(np.arctan2(st, ct))
    sign_rule = False
    if theta < SMALL_ANGLE:
        e = (0.5 + theta**2 / 12.0) * s
    elif theta < _NEAR_PI:
        e = theta / (2.0 * st) * s
    else:
        # outer-product extraction: (sym(R) - cos t * I)/(1 - cos t) = a a^T
        M = ((R + R.T) / 2.0 - ct * np.eye(3)) / (1.0 - ct)
        j = int(np.argmax(np.diag(M)))
        axis = M[:, j] / np.linalg.norm(M[:, j])
        if np.linalg.norm(s) > 1e-12:
            if np.dot(axis, s) < 0:
                axis = -axis
        else:
            axis = _axis_sign_rule(axis)
            sign_rule = True
        e = theta * axis
    if with_info:
        return e, LogQuality(theta, theta >= _NEAR_PI, sign_rule)
    return e


def rotation_angle(R):
    """Geodesic angle of a rotation, in [0, pi]."""
    tr = np.clip((np.trace(np.asarray(R, dtype=float)) - 1.0) / 2.0, -1.0, 1.0)
    return float(np.arccos(tr))


def geodesic_distance(Ra, Rb):
    """Angle of the relative rotation between two frames."""
    return rotation_angle(np.asarray(Ra).T @ np.asarray(Rb))


def dlog_so3_dt(R, Rdot):
    """Time derivative of ``log_so3`` along a rotation trajectory.

    Undefined where the log itself degenerates: raises ValueError when the
    rotation angle is within 1e-4 of a multiple of pi.
    """
    R = np.asarray(R, dtype=float)
    Rdot = np.asarray(Rdot, dtype=float)
    theta = rotation_angle(R)
    if theta < 1e-4 or theta > np.pi - 1e-4:
        raise ValueError(
            f"dlog_so3_dt singular: angle {theta:.2e} within 1e-4 of a multiple of pi")
    s = np.sin(theta)
    coeff = (theta * np.cos(theta) - s) / (4.0 * s**3) * np.trace(Rdot)
    W = coeff * (R - R.T) + theta / (2.0 * s) * (Rdot - Rdot.T)
    return unskew(W)


# ---------------------------------------------------------------------------
# unit quaternions (eta, eps) stored as arrays (eta, ex, ey, ez)
# ---------------------------------------------------------------------------

def quat_identity():
    return np.array([1.0, 0.0, 0.0, 0.0])


def quat_normalize(q):
    q = np.asarray(q, dtype=float)
    return q / np.linalg.norm(q)


def quat_canonical(q):
    """Canonical double-cover representative: eta >= 0 (first nonzero vector
    component positive when eta == 0)."""
    q = np.asarray(q, dtype=float)
    if q[0] < 0:
        return -q
    if q[0] == 0:
        for c in q[1:]:
            if c != 0:
                return q if c > 0 else -q
    return q


def quat_mul(a, b):
    """Quaternion product a (x) b; renormalizes when drift exceeds 1e-12."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    w = a[0] * b[0] - a[1:] @ b[1:]
    v = a[0] * b[1:] + b[0] * a[1:] + np.cross(a[1:], b[1:])
    q = np.array([w, v[0], v[1], v[2]])
    n = np.linalg.norm(q)
    if abs(n - 1.0) > 1e-12:
        q = q / n
    return q


def quat_conj(q):
    q = np.asarray(q, dtype=float)
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_exp(w):
    """Exponential map from R^3 into the unit quaternions.

    Returns ``(cos |w|, sin |w| * w_hat)``; the quaternion encodes a rotation
    by angle ``2 |w|`` about ``w_hat``.
    """
    w = np.asarray(w, dtype=float)
    n = np.linalg.norm(w)
    if n < SMALL_ANGLE:
        v = (1.0 - n**2 / 6.0) * w
    else:
        v = np.sin(n) / n * w
    return np.array([np.cos(n), v[0], v[1], v[2]])


def quat_log(q):
    """Inverse of :func:`quat_exp` on unit quaternions: ``arccos(eta) eps_hat``."""
    q = np.asarray(q, dtype=float)
    eta = np.clip(q[0], -1.0, 1.0)
    eps = q[1:]
    n = np.linalg.norm(eps)
    if n < SMALL_ANGLE:
        # arccos(eta)/|eps| -> 1 + |eps|^2/6 as eps -> 0 (eta > 0 branch)
        return (1.0 + n**2 / 6.0) * eps if eta > 0 else eps * np.inf
    return np.arccos(eta) / n * eps


def quat_to_rotm(q):
    """Rotation matrix of a unit quaternion: ``I + 2 eta [eps] + 2 [eps]^2``."""
    q = np.asarray(q, dtype=float)
    E = skew(q[1:])
    return np.eye(3) + 2.0 * q[0] * E + 2.0 * (E @ E)


def rotm_to_quat(R):
    """Unit quaternion of a rotation matrix (Shepperd's method), eta >= 0."""
    R = np.asarray(R, dtype=float)
    tr = np.trace(R)
    cand = np.array([tr, R[0, 0], R[1, 1], R[2, 2]])
    i = int(np.argmax(cand))
    if i == 0:
        r = np.sqrt(1.0 + tr)
        s = 0.5 / r
        q = np.array([0.5 * r,
                      (R[2, 1] - R[1, 2]) * s,
                      (R[0, 2] - R[2, 0]) * s,
                      (R[1, 0] - R[0, 1]) * s])
    else:
        j, k = i % 3 + 1, (i + 1) % 3 + 1
        a, b, c = i - 1, j - 1, k - 1
        r = np.sqrt(1.0 + R[a, a] - R[b, b] - R[c, c])
        s = 0.5 / r
        q = np.zeros(4)
        q[0] = (R[c, b] - R[b, c]) * s
        q[i] = 0.5 * r
        q[j] = (R[b, a] + R[a, b]) * s
        q[k] = (R[a, c] + R[c, a]) * s
    return quat_canonical(quat_normalize(q))


def quat_E(q):
    """The 3x3 block ``eta I - [eps]`` of the quaternion rate Jacobian."""
    q = np.asarray(q, dtype=float)
    return q[0] * np.eye(3) - skew(q[1:])


def quat_rate_jacobian(q):
    """4x3 Jacobian J_H with ``qdot = 0.5 J_H(q) w_spatial``.

    Satisfies ``J_H.T @ J_H == I_3`` and ``J_H.T @ q == 0`` for unit q.
    """
    q = np.asarray(q, dtype=float)
    J = np.empty((4, 3))
    J[0] = -q[1:]
    J[1:] = quat_E(q)
    return J


def dlog_h1_dt(q, qdot):
    """Time derivative of ``quat_log`` along a unit-quaternion trajectory.

    Raises ValueError near eps = 0, where the log derivative is singular.
    """
    q = np.asarray(q, dtype=float)
    qdot = np.asarray(qdot, dtype=float)
    eta = np.clip(q[0], -1.0, 1.0)
    eps = q[1:]
    n = np.linalg.norm(eps)
    if n <= 1e-6:
        raise ValueError(f"dlog_h1_dt singular: |eps| = {n:.2e} <= 1e-6")
    return ((-n + np.arccos(eta) * eta) / n**3) * eps * qdot[0] \
        + (np.arccos(eta) / n) * qdot[1:]


# ---------------------------------------------------------------------------
# rotational stiffness / co-stiffness duality
# ---------------------------------------------------------------------------

def costiffness(K):
    """Co-stiffness of a symmetric stiffness matrix: ``G = tr(K)/2 I - K``."""
    K = np.asarray(K, dtype=float)
    return 0.5 * np.trace(K) * np.eye(3) - K


def stiffness_of(G):
    """Stiffness of a symmetric co-stiffness matrix: ``K = tr(G) I - G``.

    Exact inverse of :func:`costiffness` (the pair is a closed-form
    involution).
    """
    G = np.asarray(G, dtype=float)
    return np.trace(G) * np.eye(3) - G


def random_rotation(rng):
    """Uniformly distributed random rotation (via a random unit quaternion)."""
    q = rng.normal(size=4)
    return quat_to_rotm(q / np.linalg.norm(q))
