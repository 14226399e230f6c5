import numpy as np
import pytest
from scipy.optimize import minimize

from motorprim import control as ct
from motorprim import dynamics as dyn
from motorprim import energy as en
from motorprim import geometry as geo
from motorprim import kinematics as kc
from motorprim import trajectory as tj
from motorprim.model import planar_two_link, seven_dof_arm

RNG = np.random.default_rng(2718)

PLANAR = planar_two_link()
SEVEN = seven_dof_arm()


def hold_vt(value):
    return tj.VirtualTrajectory([tj.Hold(value)])


def planar_controller(Kq=2.0, Bq=1.5, Kp=60.0, Bp=20.0,
                      q0=(0.2 * np.pi, 0.6 * np.pi), p0=(1.2, 0.8, 0.0)):
    mods = [ct.JointSpaceImpedance(Kq * np.eye(2), Bq * np.eye(2),
                                   hold_vt(np.asarray(q0))),
            ct.TaskPositionImpedance(Kp * np.eye(3), Bp * np.eye(3),
                                     hold_vt(np.asarray(p0)))]
    return ct.Controller(mods)


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------

def test_potentials_zero_at_targets():
    q = RNG.uniform(-1, 1, 7)
    p = kc.fk_position(SEVEN, q)
    R = kc.fk_rotation(SEVEN, q)
    c = ct.Controller([
        ct.JointSpaceImpedance(6 * np.eye(7), 4.5 * np.eye(7), hold_vt(q)),
        ct.TaskPositionImpedance(600 * np.eye(3), 40 * np.eye(3), hold_vt(p)),
        ct.RotationQuatImpedance(70 * np.eye(3), 5 * np.eye(3),
                                 tj.OrientationTrajectory.fixed(R)),
    ])
    parts = en.potentials(c, SEVEN, q, 0.0)
    assert abs(parts["U_q"]) < 1e-18
    assert abs(parts["U_p"]) < 1e-18
    assert abs(parts["U_r"]) < 1e-12


def test_joint_potential_quadratic_scaling():
    q0 = np.zeros(2)
    c = ct.Controller([ct.JointSpaceImpedance(2 * np.eye(2), np.eye(2),
                                              hold_vt(q0))])
    d = np.array([0.3, -0.4])
    U1 = en.potentials(c, PLANAR, q0 + d, 0.0)["U_q"]
    U2 = en.potentials(c, PLANAR, q0 + 2 * d, 0.0)["U_q"]
    assert abs(U2 - 4 * U1) < 1e-12


def test_rotational_potential_forms_differ_by_trace_constant():
    for _ in range(50):
        A = RNG.normal(size=(3, 3))
        K = A @ A.T + 0.2 * np.eye(3)
        G = geo.costiffness(K)
        vt = tj.OrientationTrajectory.fixed(geo.random_rotation(RNG))
        m_trace = ct.RotationTraceImpedance(G, np.eye(3), vt)
        m_quat = ct.RotationQuatImpedance(K, np.eye(3), vt)
        q = RNG.uniform(-1.5, 1.5, 7)
        trace_form = m_trace.potential_trace(SEVEN, 0.0, q)
        quad_form = m_quat.potential(SEVEN, 0.0, q)
        assert abs(trace_form + float(np.trace(G)) - quad_form) < 1e-10
        # the ledger form is the nonnegative one
        assert m_trace.potential(SEVEN, 0.0, q) >= -1e-12


# ---------------------------------------------------------------------------
# ledger and passivity monitor
# ---------------------------------------------------------------------------

def run_planar(controller, duration=4.0, dt=1e-3,
               q0=(0.35 * np.pi, 0.3 * np.pi), tau_ext=None):
    return dyn.simulate(PLANAR, controller.bound(PLANAR), np.asarray(q0),
                        np.zeros(2), duration, dt, tau_ext=tau_ext,
                        gravity_on=False)


def test_constant_controller_is_passive():
    c = planar_controller()
    trace = run_planar(c)
    led = en.ledger(trace, c, PLANAR)
    report = en.passivity_monitor(trace, c, PLANAR, led)
    assert report.passive
    assert report.steps == len(trace) - 1
    assert trace.V is not None and trace.dVdt is not None
    # storage decays overall
    assert led.V[-1] < led.V[0]


def test_zero_damping_conserves_storage():
    c = planar_controller(Kq=1.0, Bq=0.0, Kp=20.0, Bp=0.0)
    trace = run_planar(c, duration=3.0)
    led = en.ledger(trace, c, PLANAR)
    assert np.abs(led.V - led.V[0]).max() < 1e-6


def test_monitor_flags_fast_moving_target():
    # a quick virtual-target jump with feeble damping must show negative
    # margins (documented expected behavior, not an error)
    fast_vt = tj.VirtualTrajectory([
        tj.MinJerk([1.2, 0.8, 0.0], [0.4, -1.0, 0.0], t0=0.5, duration=0.25)])
    c = ct.Controller([
        ct.JointSpaceImpedance(2 * np.eye(2), 0.05 * np.eye(2),
                               hold_vt(np.array([0.2 * np.pi, 0.6 * np.pi]))),
        ct.TaskPositionImpedance(60 * np.eye(3), 0.0 * np.eye(3), fast_vt),
    ])
    trace = run_planar(c, duration=1.5)
    led = en.ledger(trace, c, PLANAR)
    assert led.margin.min() < 0.0


def test_energy_balance_residual():
    # dV = (external power + damping power + dU/dt) dt, with all damping in
    # the joint module so the ledger's dissipation column is the only sink
    vt = tj.VirtualTrajectory([
        tj.MinJerk([1.2, 0.8, 0.0], [0.9, 1.1, 0.0], t0=0.3, duration=1.2)])
    c = ct.Controller([
        ct.JointSpaceImpedance(2 * np.eye(2), 2.5 * np.eye(2),
                               hold_vt(np.array([0.2 * np.pi, 0.6 * np.pi]))),
        ct.TaskPositionImpedance(60 * np.eye(3), 0.0 * np.eye(3), vt),
    ])
    tau_ext = np.array([0.4, -0.2])
    duration = 2.0
    trace = run_planar(c, duration=duration, tau_ext=tau_ext)
    led = en.ledger(trace, c, PLANAR)
    ext_power = trace.qd @ tau_ext
    rate = ext_power + led.dissipation + (-led.margin - led.dissipation)
    integral = np.trapezoid(rate, trace.t)
    residual = abs((led.V[-1] - led.V[0]) - integral)
    assert residual < 1e-5 * duration


def test_lasalle_convergence_constant_parameters():
    c = planar_controller()
    trace = run_planar(c, duration=12.0, dt=2e-3)
    assert np.linalg.norm(trace.qd[-1]) < 1e-4
    grad = np.zeros(2)
    h = 1e-6
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        grad[k] = (en.total_potential(c, PLANAR, trace.q[-1] + e)
                   - en.total_potential(c, PLANAR, trace.q[-1] - e)) / (2 * h)
    assert np.linalg.norm(grad) < 1e-3


def test_ledger_csv(tmp_path):
    c = planar_controller()
    trace = run_planar(c, duration=0.05)
    led = en.ledger(trace, c, PLANAR)
    path = tmp_path / "ledger.csv"
    en.write_ledger_csv(led, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,T_kin,U_q,U_p,U_r,V,dVdt,dissipation,margin"
    assert len(lines) == len(trace) + 1


# ---------------------------------------------------------------------------
# potential landscape
# ---------------------------------------------------------------------------

def planar_ik(p, L1=1.0, L2=1.0):
    """Analytic elbow-up/elbow-down solutions for the 2-link arm."""
    x, y = p[0], p[1]
    c2 = (x * x + y * y - L1**2 - L2**2) / (2 * L1 * L2)
    q2 = np.arccos(np.clip(c2, -1.0, 1.0))
    sols = []
    for s in (+1.0, -1.0):
        k1 = L1 + L2 * np.cos(s * q2)
        k2 = L2 * np.sin(s * q2)
        q1 = np.arctan2(y, x) - np.arctan2(k2, k1)
        sols.append(np.array([q1, s * q2]))
    return sols


def test_landscape_minima_on_ik_solutions():
    p0 = np.array([1.1, 0.6, 0.0])
    c = ct.Controller([ct.TaskPositionImpedance(60 * np.eye(3),
                                                20 * np.eye(3), hold_vt(p0))])
    expected = planar_ik(p0)
    for q_star in expected:
        res = minimize(lambda q: en.total_potential(c, PLANAR, q), q_star + 0.05,
                       method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14})
        assert np.linalg.norm(res.x - q_star) < 1e-5
        assert en.total_potential(c, PLANAR, q_star) < 1e-20


def test_landscape_grid_finite_and_min_matches_optimizer():
    c = planar_controller()
    g1 = np.linspace(-np.pi, np.pi, 61)
    g2 = np.linspace(-np.pi, np.pi, 61)
    U = en.landscape_grid(c, PLANAR, g1, g2)
    assert np.all(np.isfinite(U))
    i, j = np.unravel_index(np.argmin(U), U.shape)
    res = minimize(lambda q: en.total_potential(c, PLANAR, q),
                   [g1[i], g2[j]], method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14})
    assert np.linalg.norm(res.x - [g1[i], g2[j]]) < 2 * (g1[1] - g1[0])


# ---------------------------------------------------------------------------
# singularity scan
# ---------------------------------------------------------------------------

def test_scan_zero_threshold_generic_grid():
    # an even sample count avoids exact singular postures, so a zero
    # threshold flags nothing
    scan = en.singularity_scan(SEVEN, threshold=0.0, samples_per_joint=4,
                               fixed={0: 0.0, 6: 0.0})
    assert scan.total == 4**5
    assert scan.fraction == 0.0


def test_scan_planar_flags_straight_and_folded():
    scan = en.singularity_scan(PLANAR, threshold=0.02, samples_per_joint=41,
                               task_dims=(0, 1), keep_all_points=True)
    assert 0.0 < scan.fraction < 1.0
    # flagged states live near q2 in {0, pi}: arm distance from origin is
    # then near 2 (straight) or 0 (folded)
    r = np.linalg.norm(scan.points[:, :2], axis=1)
    flagged = scan.points[:, 3] <= scan.threshold
    assert np.all((r[flagged] > 1.93) | (r[flagged] < 0.47))
    assert not np.all((r[~flagged] > 1.93) | (r[~flagged] < 0.47))


def test_scan_sevendof_finds_singular_region():
    scan = en.singularity_scan(SEVEN, threshold=0.03, samples_per_joint=5,
                               fixed={0: 0.0, 6: 0.0})
    assert 0.0 < scan.fraction < 1.0
    assert scan.flagged == len(scan.points)


def test_scan_pointcloud_csv(tmp_path):
    scan = en.singularity_scan(PLANAR, threshold=0.05, samples_per_joint=15,
                               task_dims=(0, 1))
    path = tmp_path / "cloud.csv"
    en.write_pointcloud_csv(scan, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "x,y,z,sigma_min"
    assert len(lines) == scan.flagged + 1


def test_scan_rejects_negative_threshold():
    with pytest.raises(ValueError):
        en.singularity_scan(PLANAR, threshold=-1.0, samples_per_joint=5)
