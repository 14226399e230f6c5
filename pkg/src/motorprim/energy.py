"""Energy bookkeeping over simulation traces: per-module elastic potentials,
the total storage function, passivity monitoring, potential-landscape grids,
and workspace singularity scans.

The storage function is V = kinetic + U_q + U_p + U_r, the same quantity
whose non-increase (for constant module parameters and no external forces)
the controller design guarantees. The monitor only reports; it never alters
a run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kinematics as kc
from .dynamics import kinetic_energy


def potentials(controller, model, q, t, kin=None):
    """Per-class elastic potentials at one state.

    Returns a dict with keys ``U_q``, ``U_p``, ``U_r`` (sums over the
    controller's modules of each kind) and ``U`` (their total).
    """
    kin = kc.chain_data(model, q, kin)
    parts = {"U_q": 0.0, "U_p": 0.0, "U_r": 0.0}
    key = {"joint": "U_q", "task_pos": "U_p", "rot": "U_r"}
    for m in controller.modules:
        parts[key[m.kind]] += m.potential(model, t, q, kin)
    parts["U"] = parts["U_q"] + parts["U_p"] + parts["U_r"]
    return parts


@dataclass
class EnergyLedger:
    """Arrays aligned with a trace: kinetic energy, per-class potentials,
    total storage V, its rate, joint-damping dissipation and the
    time-variation margin (see :func:`ledger`)."""
    t: np.ndarray
    kinetic: np.ndarray
    U_q: np.ndarray
    U_p: np.ndarray
    U_r: np.ndarray
    V: np.ndarray
    dVdt: np.ndarray
    dissipation: np.ndarray
    margin: np.ndarray


def ledger(trace, controller, model):
    """Evaluate the energy ledger along a trace and attach V, dV/dt to it.

    ``dissipation`` is the joint-space damping power sink -qd^T B_q qd;
    ``margin`` is qd^T B_q qd - dU/dt|_q, the per-step surplus between that
    sink and the energy injected by time-varying module parameters (dU/dt
    estimated by re-evaluating the potentials at frozen q across adjacent
    time samples).
    """
    m = len(trace)
    dt = trace.dt
    Bq = controller.joint_damping()
    kin_e = np.empty(m)
    U_q = np.empty(m)
    U_p = np.empty(m)
    U_r = np.empty(m)
    dUdt = np.empty(m)
    diss = np.empty(m)
    for i in range(m):
        q, qd, t = trace.q[i], trace.qd[i], trace.t[i]
        kin = kc.ChainData(model, q)
        parts = potentials(controller, model, q, t, kin)
        kin_e[i] = kinetic_energy(model, q, qd, kin)
        U_q[i], U_p[i], U_r[i] = parts["U_q"], parts["U_p"], parts["U_r"]
        lo = potentials(controller, model, q, max(t - dt, trace.t[0]), kin)["U"]
        hi = potentials(controller, model, q, min(t + dt, trace.t[-1]), kin)["U"]
        span = min(t + dt, trace.t[-1]) - max(t - dt, trace.t[0])
        dUdt[i] = (hi - lo) / span if span > 0 else 0.0
        diss[i] = 0.0 if Bq is None else -float(qd @ Bq @ qd)
    V = kin_e + U_q + U_p + U_r
    dVdt = np.gradient(V, dt)
    trace.V = V
    trace.dVdt = dVdt
    return EnergyLedger(t=trace.t.copy(), kinetic=kin_e, U_q=U_q, U_p=U_p,
                        U_r=U_r, V=V, dVdt=dVdt, dissipation=diss,
                        margin=-diss - dUdt)


@dataclass
class PassivityReport:
    """Outcome of monitoring one trace (reporting only).

    ``violations`` lists step indices where V increased by more than the
    tolerance appropriate for constant-parameter runs; ``margins`` carries
    the per-step damping-vs-dU/dt surplus for time-varying runs.
    """
    violations: np.ndarray
    tolerance: float
    max_increase: float
    margins: np.ndarray
    min_margin: float
    steps: int

    @property
    def passive(self):
        return len(self.violations) == 0


def passivity_monitor(trace, controller, model, ledger_arrays=None):
    """Check a trace's storage function for passivity.

    For constant module parameters V must not increase beyond integrator
    tolerance; any step where it grows by more than
    ``1e-6 + 10 dt^2 max|power|`` is flagged. The margins column reports
    qd^T B_q qd - dU/dt for time-varying runs (negative margins mean the
    damping was not large enough to cover the moving potentials).
    """
    led = ledger_arrays if ledger_arrays is not None \
        else ledger(trace, controller, model)
    dV = np.diff(led.V)
    power = np.einsum('ij,ij->i', trace.qd, trace.tau_in + trace.tau_ext)
    tol = 1e-6 + 10.0 * trace.dt**2 * float(np.abs(power).max(initial=0.0))
    bad = np.where(dV > tol)[0]
    return PassivityReport(
        violations=bad,
        tolerance=tol,
        max_increase=float(dV.max(initial=0.0)),
        margins=led.margin,
        min_margin=float(led.margin.min(initial=0.0)),
        steps=len(dV),
    )


def _fmt(x):
    return repr(float(x))


def write_ledger_csv(led, path):
    header = "t,T_kin,U_q,U_p,U_r,V,dVdt,dissipation,margin"
    with open(path, "w", newline="\n") as f:
        f.write(header + "\n")
        for i in range(len(led.t)):
            f.write(",".join(_fmt(v) for v in (
                led.t[i], led.kinetic[i], led.U_q[i], led.U_p[i], led.U_r[i],
                led.V[i], led.dVdt[i], led.dissipation[i], led.margin[i])) + "\n")


# ---------------------------------------------------------------------------
# potential landscape over the configuration torus
# ---------------------------------------------------------------------------

def landscape_grid(controller, model, q1_vals, q2_vals, joints=(0, 1),
                   q_fixed=None, t=0.0):
    """Total elastic potential sampled over a 2-D joint grid.

    For a 2-DOF model this is the whole configuration torus; for larger
    chains the remaining joints are frozen at ``q_fixed`` and the result is
    a slice. The field is finite everywhere, including at singular
    configurations.
    """
    q1_vals = np.asarray(q1_vals, dtype=float)
    q2_vals = np.asarray(q2_vals, dtype=float)
    base = np.zeros(model.n) if q_fixed is None else np.asarray(q_fixed, float)
    U = np.empty((len(q1_vals), len(q2_vals)))
    q = base.copy()
    for i, a in enumerate(q1_vals):
        for j, b in enumerate(q2_vals):
            q[joints[0]] = a
            q[joints[1]] = b
            U[i, j] = potentials(controller, model, q, t)["U"]
    return U


def total_potential(controller, model, q, t=0.0):
    return potentials(controller, model, q, t)["U"]


# ---------------------------------------------------------------------------
# workspace singularity scan
# ---------------------------------------------------------------------------

@dataclass
class SingularityScan:
    fraction: float
    flagged: int
    total: int
    points: np.ndarray       # (m, 4): x, y, z, sigma_min of flagged states
    threshold: float


def singularity_scan(model, threshold, samples_per_joint, fixed=None,
                     task_dims=None, keep_all_points=False):
    """Grid scan of the smallest singular value of the inverse task inertia.

    ``fixed`` maps joint indices to frozen values (e.g. first and last joint
    at zero); every remaining joint is sampled on ``samples_per_joint``
    equally spaced points between its limits. A state is flagged singular
    when ``sigma_min(J M^-1 J^T) <= threshold``; the fraction of flagged
    states quantifies how much of the workspace a singularity-avoiding
    controller would give up.

    ``task_dims`` selects rows of the stacked (position; rotation) task:
    a planar mechanism should scan its own plane, e.g. ``(0, 1)``, since it
    never spans the full 6-D task and would otherwise be flagged everywhere.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    fixed = dict(fixed or {})
    free = [j for j in range(model.n) if j not in fixed]
    axes = [np.linspace(model.q_limits[j, 0], model.q_limits[j, 1],
                        samples_per_joint) for j in free]
    sel = slice(None) if task_dims is None else list(task_dims)
    q = np.zeros(model.n)
    for j, v in fixed.items():
        q[j] = v
    flagged_pts = []
    all_pts = []
    flagged = 0
    total = 0
    for idx in np.ndindex(*(len(a) for a in axes)):
        for j, a, k in zip(free, axes, idx):
            q[j] = a[k]
        kin = kc.ChainData(model, q)
        Li = kc.task_inertia_inverse(model, q, kin=kin)[sel][:, sel]
        smin = float(np.linalg.svd(Li, compute_uv=False)[-1])
        total += 1
        p = kc.fk_position(model, q, kin=kin)
        if smin <= threshold:
            flagged += 1
            flagged_pts.append((p[0], p[1], p[2], smin))
        if keep_all_points:
            all_pts.append((p[0], p[1], p[2], smin))
    pts = np.array(all_pts if keep_all_points else flagged_pts,
                   dtype=float).reshape(-1, 4)
    return SingularityScan(fraction=flagged / total, flagged=flagged,
                           total=total, points=pts, threshold=threshold)


def write_pointcloud_csv(scan, path):
    with open(path, "w", newline="\n") as f:
        f.write("x,y,z,sigma_min\n")
        for row in scan.points:
            f.write(",".join(_fmt(v) for v in row) + "\n")
