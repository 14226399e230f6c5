import numpy as np
import pytest

from motorprim import geometry as geo
from motorprim import kinematics as kc
from motorprim.model import Frame, FramePoint, RobotModel, load_model, save_model
from motorprim.model import planar_two_link, seven_dof_arm

RNG = np.random.default_rng(7)

PLANAR = planar_two_link()
SEVEN = seven_dof_arm()


def single_z_joint():
    T = np.eye(4)
    T[:3, 3] = [0.3, 0.0, 0.2]
    return RobotModel(
        name="one_z",
        screw_axes=[[0, 0, 1, 0, 0, 0]],
        frames=[Frame("ee", 1, T)],
        link_com=[[0.15, 0, 0.1]],
        link_mass=[1.0],
        link_inertia=[np.eye(3) * 0.01],
        q_limits=[[-np.pi, np.pi]],
        tau_limits=[10.0],
    )


# ---------------------------------------------------------------------------
# forward kinematics
# ---------------------------------------------------------------------------

def test_fk_straight_arm():
    assert np.allclose(kc.fk_position(PLANAR, [0.0, 0.0]), [2.0, 0.0, 0.0])


def test_fk_quarter_turn():
    assert np.allclose(kc.fk_position(PLANAR, [np.pi / 2, 0.0]),
                       [0.0, 2.0, 0.0], atol=1e-12)


def test_fk_planar_hand_geometry():
    for _ in range(20):
        q = RNG.uniform(-np.pi, np.pi, 2)
        expected = np.array([np.cos(q[0]) + np.cos(q[0] + q[1]),
                             np.sin(q[0]) + np.sin(q[0] + q[1]), 0.0])
        assert np.allclose(kc.fk_position(PLANAR, q), expected, atol=1e-12)


def test_fk_offset_point_is_rigid():
    off = np.array([0.0, 0.0, 0.1])
    for model in (PLANAR, SEVEN):
        q = RNG.uniform(-1.0, 1.0, model.n)
        base = kc.fk_position(model, q)
        R = kc.fk_rotation(model, q)
        shifted = kc.fk_position(model, q, FramePoint("ee", off))
        assert np.allclose(shifted, base + R @ off, atol=1e-12)


def test_fk_rotation_home_at_zero():
    for model in (PLANAR, SEVEN):
        home = model.frames[0].home[:3, :3]
        assert np.allclose(kc.fk_rotation(model, np.zeros(model.n)), home)


def test_fk_rotation_single_joint():
    robot = single_z_joint()
    for th in [0.3, -1.2, 2.5]:
        R = kc.fk_rotation(robot, [th])
        assert np.allclose(R, geo.rot_z(th) @ robot.frames[0].home[:3, :3],
                           atol=1e-12)


def test_fk_rotation_orthonormal_everywhere():
    for _ in range(30):
        q = RNG.uniform(-2, 2, SEVEN.n)
        assert geo.is_rotation(kc.fk_rotation(SEVEN, q))


def test_fk_smooth_along_dense_trajectory():
    q0 = RNG.uniform(-1, 1, SEVEN.n)
    dq = RNG.normal(size=SEVEN.n)
    ts = np.linspace(0, 1, 400)
    pts = np.array([kc.fk_position(SEVEN, q0 + t * dq) for t in ts])
    steps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    # |dp| <= sum of lever arms * |dq| ; 3.0 m is a generous chain bound
    assert steps.max() <= 3.0 * np.linalg.norm(dq) * (ts[1] - ts[0])


# ---------------------------------------------------------------------------
# Jacobians
# ---------------------------------------------------------------------------

def fd_position_jacobian(model, q, pt=None, h=1e-7):
    J = np.zeros((3, model.n))
    for k in range(model.n):
        e = np.zeros(model.n)
        e[k] = h
        J[:, k] = (kc.fk_position(model, q + e, pt)
                   - kc.fk_position(model, q - e, pt)) / (2 * h)
    return J


@pytest.mark.parametrize("model", [PLANAR, SEVEN], ids=lambda m: m.name)
def test_jacobian_position_matches_fd(model):
    for _ in range(100):
        q = RNG.uniform(-2, 2, model.n)
        J = kc.jacobian_position(model, q)
        assert np.abs(J - fd_position_jacobian(model, q)).max() < 1e-6


def test_jacobian_rank_drop_at_straight_arm():
    J = kc.jacobian_position(PLANAR, [0.7, 0.0])[:2]
    s = np.linalg.svd(J, compute_uv=False)
    assert s[0] > 1.0 and s[1] < 1e-12


def test_jacobian_zero_column_distal_joint():
    q = RNG.uniform(-1, 1, 2)
    J = kc.jacobian_position(PLANAR, q, FramePoint("elbow"))
    assert np.allclose(J[:, 1], 0.0)
    assert not np.allclose(J[:, 0], 0.0)


def test_body_jacobian_single_z_joint():
    robot = single_z_joint()
    J = kc.body_jacobian_rotation(robot, [0.8])
    assert np.allclose(J[:, 0], [0, 0, 1], atol=1e-12)


def test_body_jacobian_angular_velocity_identity():
    # skew(J_body qd) == R^T Rdot along arbitrary trajectories
    for model in (PLANAR, SEVEN):
        q0 = RNG.uniform(-1, 1, model.n)
        dq = RNG.normal(size=model.n)
        h = 1e-7
        q = q0 + 0.5 * dq  # mid point of a straight joint path, qd = dq
        R = kc.fk_rotation(model, q)
        Rdot = (kc.fk_rotation(model, q + h * dq)
                - kc.fk_rotation(model, q - h * dq)) / (2 * h)
        Jb = kc.body_jacobian_rotation(model, q)
        assert np.abs(geo.skew(Jb @ dq) - R.T @ Rdot).max() < 1e-6


def test_spatial_vs_body_rotation_jacobian():
    for model in (PLANAR, SEVEN):
        q = RNG.uniform(-1, 1, model.n)
        R = kc.fk_rotation(model, q)
        Js = kc.spatial_jacobian_rotation(model, q)
        Jb = kc.body_jacobian_rotation(model, q)
        assert np.allclose(Js, R @ Jb, atol=1e-12)


# ---------------------------------------------------------------------------
# Jacobian time derivative
# ---------------------------------------------------------------------------

def test_jacobian_dot_zero_velocity():
    q = RNG.uniform(-1, 1, SEVEN.n)
    assert np.allclose(kc.jacobian_position_dot(SEVEN, q, np.zeros(SEVEN.n)), 0.0)


def test_jacobian_dot_planar_analytic():
    # hand-differentiated Jacobian of the 2-link arm
    q = RNG.uniform(-1, 1, 2)
    qd = RNG.normal(size=2)
    s1, c1 = np.sin(q[0]), np.cos(q[0])
    s12, c12 = np.sin(q.sum()), np.cos(q.sum())
    w1, w12 = qd[0], qd.sum()
    Jd_hand = np.array([
        [-c1 * w1 - c12 * w12, -c12 * w12],
        [-s1 * w1 - s12 * w12, -s12 * w12],
        [0.0, 0.0],
    ])
    assert np.abs(kc.jacobian_position_dot(PLANAR, q, qd) - Jd_hand).max() < 1e-12


@pytest.mark.parametrize("model", [PLANAR, SEVEN], ids=lambda m: m.name)
def test_jacobian_dot_matches_fd_acceleration(model):
    # pddot = Jdot qd + J qdd against a finite-difference second derivative
    for _ in range(10):
        q0 = RNG.uniform(-1, 1, model.n)
        a = RNG.normal(size=model.n)
        b = RNG.normal(size=model.n)

        def qt(t):
            return q0 + a * t + 0.5 * b * t * t

        t0, h = 0.4, 1e-5
        q, qd, qdd = qt(t0), a + b * t0, b
        fd_acc = (kc.fk_position(model, qt(t0 + h))
                  - 2 * kc.fk_position(model, qt(t0))
                  + kc.fk_position(model, qt(t0 - h))) / h**2
        acc = (kc.jacobian_position_dot(model, q, qd) @ qd
               + kc.jacobian_position(model, q) @ qdd)
        assert np.abs(acc - fd_acc).max() < 1e-4


# ---------------------------------------------------------------------------
# task-space inertia inverse
# ---------------------------------------------------------------------------

def test_task_inertia_inverse_planar_always_singular():
    # a planar chain embedded in the 6-D task never spans the full space
    Li = kc.task_inertia_inverse(PLANAR, [0.3, 0.0])
    s = np.linalg.svd(Li, compute_uv=False)
    assert s[-1] < 1e-8


def test_task_inertia_inverse_symmetric_psd():
    for _ in range(20):
        q = RNG.uniform(-1, 1, SEVEN.n)
        Li = kc.task_inertia_inverse(SEVEN, q)
        assert np.abs(Li - Li.T).max() < 1e-12
        assert np.linalg.eigvalsh(Li).min() > -1e-12


def test_task_inertia_smallest_sv_drops_near_singularity():
    # straight-up arm is singular; a bent elbow is not
    straight = np.zeros(7)
    bent = np.array([0.0, 0.6, 0.0, -1.2, 0.0, 0.8, 0.0])
    s_straight = np.linalg.svd(kc.task_inertia_inverse(SEVEN, straight),
                               compute_uv=False)[-1]
    s_bent = np.linalg.svd(kc.task_inertia_inverse(SEVEN, bent),
                           compute_uv=False)[-1]
    assert s_straight < 1e-10
    assert s_bent > 1e-4


# ---------------------------------------------------------------------------
# model description and file round trip
# ---------------------------------------------------------------------------

def test_model_file_roundtrip(tmp_path):
    for model in (PLANAR, SEVEN):
        path = tmp_path / f"{model.name}.json"
        save_model(model, path)
        back = load_model(str(path))
        assert back.n == model.n
        assert np.array_equal(back.screw_axes, model.screw_axes)
        assert np.array_equal(back.link_inertia, model.link_inertia)
        assert np.array_equal(back.q_limits, model.q_limits)
        assert back.frames[0].name == model.frames[0].name
        assert np.array_equal(back.frames[0].home, model.frames[0].home)


def test_builtin_names_load():
    assert load_model("planar_two_link").n == 2
    assert load_model("seven_dof_arm").n == 7


def test_model_validation_rejects_bad_data():
    good = planar_two_link()
    with pytest.raises(ValueError):
        RobotModel("bad", good.screw_axes, good.frames, good.link_com,
                   [-1.0, 1.0], good.link_inertia, good.q_limits,
                   good.tau_limits)
    with pytest.raises(ValueError):
        RobotModel("bad", good.screw_axes, good.frames, good.link_com,
                   good.link_mass, [np.diag([1.0, 1.0, -0.1])] * 2,
                   good.q_limits, good.tau_limits)
    with pytest.raises(ValueError):
        RobotModel("bad", [[0, 0, 2, 0, 0, 0]] * 2, good.frames,
                   good.link_com, good.link_mass, good.link_inertia,
                   good.q_limits, good.tau_limits)


def test_frame_lookup():
    assert PLANAR.frame_index("elbow") == 1
    with pytest.raises(KeyError):
        PLANAR.frame_index("nope")
    with pytest.raises(IndexError):
        PLANAR.frame_index(5)
