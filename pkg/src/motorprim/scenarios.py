"""Config-driven experiment runners: singularity passage on the planar arm,
redundancy drift on the 7-DOF arm, static load analysis at singular
postures, and modular imitation learning with separately learned position
and orientation primitives.

Every simulated run writes ``trace.csv``, ``ledger.csv``, ``report.json``
and ``plot.svg`` into the configured output directory; runs are
deterministic, so identical configs produce byte-identical CSVs. The
synthetic demonstrations used by the imitation scenarios are generated from
documented closed forms (no recorded data is required).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import control as ct
from . import dmp as dmp_mod
from . import dynamics as dyn
from . import energy as en
from . import geometry as geo
from . import kinematics as kc
from . import svgplot
from . import trajectory as tj
from .model import FramePoint, load_model


class ConfigError(ValueError):
    """Scenario configuration is malformed or references missing files."""


SCENARIOS = ("planar_singularity", "redundancy_drift", "singular_load",
             "modular_imitation")

# Handedness targets of the planar experiment: virtual joint configurations
# for the left-hand and right-hand postures.
Q0_LEFT = np.array([0.2 * np.pi, 0.6 * np.pi])
Q0_RIGHT = np.array([0.8 * np.pi, -0.6 * np.pi])


@dataclass
class ScenarioConfig:
    scenario: str
    model: str = ""
    duration: float | None = None
    dt: float = 1e-3
    output_dir: str = "."
    seed: int = 0
    controller: str | dict | None = None
    wrench: list | None = None
    params: dict = field(default_factory=dict)
    base_dir: str = "."

    @classmethod
    def from_file(cls, path):
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        with open(path) as f:
            try:
                raw = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"config is not valid JSON: {e}") from None
        return cls.from_dict(raw, base_dir=os.path.dirname(os.path.abspath(path)))

    @classmethod
    def from_dict(cls, raw, base_dir="."):
        known = {"scenario", "model", "duration", "dt", "output_dir", "seed",
                 "controller", "wrench"}
        if "scenario" not in raw:
            raise ConfigError("config needs a 'scenario' field")
        cfg = cls(
            scenario=raw["scenario"],
            model=raw.get("model", ""),
            duration=raw.get("duration"),
            dt=float(raw.get("dt", 1e-3)),
            output_dir=raw.get("output_dir", "."),
            seed=int(raw.get("seed", 0)),
            controller=raw.get("controller"),
            wrench=raw.get("wrench"),
            params={k: v for k, v in raw.items() if k not in known},
            base_dir=base_dir,
        )
        cfg.validate()
        return cfg

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; "
                              f"expected one of {SCENARIOS}")
        if not 0.0 < self.dt <= 1e-2:
            raise ConfigError("dt must lie in (0, 1e-2]")
        for ref in (self.model, self.controller):
            if isinstance(ref, str) and ref and "/" in ref or \
               isinstance(ref, str) and ref.endswith(".json"):
                p = self.resolve(ref)
                if not os.path.exists(p):
                    raise ConfigError(f"referenced file not found: {ref}")

    def resolve(self, ref):
        return ref if os.path.isabs(ref) else os.path.join(self.base_dir, ref)

    def load_model(self, default):
        name = self.model or default
        try:
            if name.endswith(".json"):
                return load_model(self.resolve(name))
            return load_model(name)
        except FileNotFoundError:
            raise ConfigError(f"robot model not found: {name}") from None

    def load_controller(self):
        if self.controller is None:
            return None
        if isinstance(self.controller, dict):
            return ct.controller_from_dict(self.controller)
        return ct.load_controller(self.resolve(self.controller))

    def outdir(self):
        os.makedirs(self.output_dir, exist_ok=True)
        return self.output_dir


def _report_json(path, payload):
    def clean(x):
        if isinstance(x, (np.floating, np.integer)):
            return x.item()
        if isinstance(x, np.ndarray):
            return x.tolist()
        if isinstance(x, dict):
            return {k: clean(v) for k, v in x.items()}
        if isinstance(x, (list, tuple)):
            return [clean(v) for v in x]
        return x

    with open(path, "w") as f:
        json.dump(clean(payload), f, indent=1)
        f.write("\n")


def _emit_run(cfg, model, controller, trace, extra_report):
    out = cfg.outdir()
    led = en.ledger(trace, controller, model)
    report = en.passivity_monitor(trace, controller, model, led)
    dyn.write_trace_csv(trace, os.path.join(out, "trace.csv"))
    en.write_ledger_csv(led, os.path.join(out, "ledger.csv"))
    payload = {
        "passivity": {
            "constant_parameters": controller.is_constant,
            "violations": len(report.violations),
            "tolerance": report.tolerance,
            "max_storage_increase": report.max_increase,
            "min_margin": report.min_margin,
            "steps": report.steps,
        },
    }
    payload.update(extra_report)
    _report_json(os.path.join(out, "report.json"), payload)
    return led, report


# ---------------------------------------------------------------------------
# planar singularity passage
# ---------------------------------------------------------------------------

def planar_handedness_controller(target_q0, p_start, stretch=2.05,
                                 out_t0=0.5, out_duration=2.0, back_t0=3.5,
                                 back_duration=2.0, Bq=1.0):
    """Two-module planar controller that stretches the arm through the
    straight posture and returns, while the joint module pulls toward the
    requested handedness.

    Gains: K_p = 60 I, B_p = 20 I, K_q = 2 I; the joint damping value is an
    addition needed for a settling experiment (a pure spring pair would ring
    forever in the task-frame null directions).
    """
    direction = p_start / np.linalg.norm(p_start[:2] + 0.0)
    away = direction * stretch
    vt = tj.VirtualTrajectory([
        tj.MinJerk(p_start, away, t0=out_t0, duration=out_duration),
        tj.MinJerk(np.zeros(3), p_start - away, t0=back_t0,
                   duration=back_duration),
    ])
    return ct.Controller([
        ct.JointSpaceImpedance(2.0 * np.eye(2), Bq * np.eye(2),
                               tj.VirtualTrajectory([tj.Hold(target_q0)])),
        ct.TaskPositionImpedance(60.0 * np.eye(3), 20.0 * np.eye(3), vt),
    ])


def run_planar_singularity(cfg):
    """Pass through the straight-arm singularity and settle at the requested
    handedness; emits trace/ledger/report plus a joint plot and the
    potential-landscape torus heat map."""
    model = cfg.load_model("planar_two_link")
    if model.n != 2:
        raise ConfigError("planar_singularity needs a 2-DOF model")
    target = cfg.params.get("target", "right")
    if target not in ("left", "right"):
        raise ConfigError("target must be 'left' or 'right'")
    q_target = Q0_LEFT if target == "left" else Q0_RIGHT
    q_start = np.asarray(cfg.params.get("start",
                                        Q0_RIGHT if target == "left" else Q0_LEFT),
                         dtype=float)
    duration = cfg.duration or 12.0

    controller = cfg.load_controller()
    if controller is None:
        p_start = kc.fk_position(model, q_start)
        controller = planar_handedness_controller(
            q_target, p_start,
            stretch=float(cfg.params.get("stretch", 2.05)),
            Bq=float(cfg.params.get("Bq", 1.0)))
    controller.prepare(duration)
    trace = dyn.simulate(model, controller.bound(model), q_start, np.zeros(2),
                         duration, cfg.dt)

    q2 = trace.q[:, 1]
    hold_steps = max(1, int(round(0.5 / cfg.dt)))
    quiescent = float(np.abs(trace.tau_in[:hold_steps]).max())
    metrics = {
        "target": target,
        "min_abs_q2": float(np.abs(q2).min()),
        "crossed_singularity": bool(np.abs(q2).min() < 0.05),
        "exited_singularity": bool(abs(q2[-1]) > 0.05),
        "final_q": trace.q[-1],
        "final_speed": float(np.linalg.norm(trace.qd[-1])),
        "handedness_ok": bool(q2[-1] > 0 if target == "left" else q2[-1] < 0),
        "quiescent_torque": quiescent,
        "peak_torque": float(np.abs(trace.tau_in).max()),
        "torque_spike_ratio": float(np.abs(trace.tau_in).max()
                                    / max(quiescent, 1e-12)),
    }
    led, report = _emit_run(cfg, model, controller, trace, {"metrics": metrics})
    out = cfg.outdir()
    svgplot.line_plot(
        os.path.join(out, "plot.svg"),
        [(trace.t, trace.q[:, 0], "q1"), (trace.t, trace.q[:, 1], "q2"),
         (trace.t, trace.V, "storage V")],
        title="singularity passage", ylabel="rad / J")
    grid = np.linspace(-np.pi, np.pi, 81)
    U = en.landscape_grid(controller, model, grid, grid, t=duration)
    svgplot.heatmap(os.path.join(out, "landscape.svg"), U,
                    (-np.pi, np.pi, -np.pi, np.pi),
                    title="U_q + U_p on the torus", xlabel="q1", ylabel="q2")
    return {"trace": trace, "ledger": led, "report": report,
            "metrics": metrics, "controller": controller, "model": model}


# ---------------------------------------------------------------------------
# redundancy drift
# ---------------------------------------------------------------------------

# Start posture and circle plane chosen so the uncontrolled null-space
# motion stays bounded over tens of cycles (the free-drift run must remain
# a meaningful tracking baseline rather than wander into folded postures).
DRIFT_START = np.array([0.2, 0.4, 0.4, -1.5, 0.3, 0.7, 0.1])


def tracking_controller(model, q_start, Kq, radius=0.15, period=4.0,
                        plane="xy"):
    """Three-module controller tracking a circle with fixed orientation.

    Gains K_p = 1600 I, B_p = 120 I, K_r = 70 I, B_r = 5 I, B_q = 4.5 I;
    K_q is the experiment's independent variable.
    """
    p_s = kc.fk_position(model, q_start)
    R_s = kc.fk_rotation(model, q_start)
    if plane == "xy":
        amp, ph = [radius, radius, 0.0], [np.pi / 2, 0.0, 0.0]
        center = p_s - np.array([radius, 0.0, 0.0])
    elif plane == "yz":
        amp, ph = [0.0, radius, radius], [0.0, np.pi / 2, 0.0]
        center = p_s - np.array([0.0, radius, 0.0])
    else:
        raise ConfigError("plane must be 'xy' or 'yz'")
    vt = tj.VirtualTrajectory([tj.Oscillation(center, amp, period, phase=ph)])
    n = model.n
    return ct.Controller([
        ct.JointSpaceImpedance(Kq * np.eye(n), 4.5 * np.eye(n),
                               tj.VirtualTrajectory([tj.Hold(q_start)])),
        ct.TaskPositionImpedance(1600.0 * np.eye(3), 120.0 * np.eye(3), vt),
        ct.RotationQuatImpedance(70.0 * np.eye(3), 5.0 * np.eye(3),
                                 tj.OrientationTrajectory.fixed(R_s)),
    ]), vt


def run_redundancy_drift(cfg):
    """Track the 0.15 m / 4 s circle for >= 10 cycles and measure per-cycle
    joint return distance and task RMS error."""
    model = cfg.load_model("seven_dof_arm")
    Kq = float(cfg.params.get("Kq", 6.0))
    cycles = int(cfg.params.get("cycles", 10))
    if cycles < 10:
        raise ConfigError("redundancy_drift needs at least 10 cycles")
    period = float(cfg.params.get("period", 4.0))
    radius = float(cfg.params.get("radius", 0.15))
    plane = cfg.params.get("plane", "yz")
    q_start = np.asarray(cfg.params.get("start", DRIFT_START), dtype=float)

    controller = cfg.load_controller()
    if controller is None:
        controller, vt = tracking_controller(model, q_start, Kq,
                                             radius, period, plane)
    else:
        vt = controller.modules[1].vt
    duration = cycles * period
    trace = dyn.simulate(model, controller.bound(model), q_start,
                         np.zeros(model.n), duration, cfg.dt)

    steps_per = int(round(period / cfg.dt))
    marks = trace.q[::steps_per]
    drift = np.linalg.norm(np.diff(marks, axis=0), axis=1)
    i0 = len(trace.t) - 3 * steps_per
    errs = []
    for i in range(i0, len(trace.t), 10):
        p0 = vt.eval(trace.t[i])[0]
        errs.append(np.linalg.norm(
            kc.fk_position(model, trace.q[i]) - p0))
    metrics = {
        "Kq": Kq,
        "cycles": cycles,
        "drift_per_cycle": drift,
        "steady_drift": float(drift[-3:].max()),
        "drift_floor": float(drift[1:].min()),
        "task_rms_last_cycles": float(np.sqrt(np.mean(np.array(errs) ** 2))),
    }
    led, report = _emit_run(cfg, model, controller, trace, {"metrics": metrics})
    out = cfg.outdir()
    svgplot.line_plot(
        os.path.join(out, "plot.svg"),
        [(trace.t, trace.q[:, j], f"q{j+1}") for j in range(model.n)],
        title=f"joint trajectories (Kq={Kq:g})", ylabel="rad")
    svgplot.line_plot(
        os.path.join(out, "drift.svg"),
        [(np.arange(1, len(drift) + 1), drift, "per-cycle return distance")],
        title="joint drift per cycle", xlabel="cycle", ylabel="rad")
    return {"trace": trace, "ledger": led, "report": report,
            "metrics": metrics, "controller": controller, "model": model}


# ---------------------------------------------------------------------------
# static load at and away from singularity
# ---------------------------------------------------------------------------

SINGULAR_POSTURE = np.array([0.0, 0.02, 0.0, 0.04, 0.0, 0.03, 0.0])
BENT_POSTURE = np.array([0.0, 0.6, 0.0, -1.2, 0.0, 0.9, 0.0])


def singular_load_report(model, wrench, q_near, q_away):
    """Joint torques tau = J^T F for one wrench at two postures, as percent
    of the model's torque limits."""
    wrench = np.asarray(wrench, dtype=float)
    rows = {}
    for name, q in (("near_singular", q_near), ("away", q_away)):
        J = kc.jacobian_full(model, q)
        tau = J.T @ wrench
        rows[name] = {
            "q": q,
            "tau": tau,
            "percent_of_limit": 100.0 * np.abs(tau) / model.tau_limits,
        }
    return rows


def run_singular_load(cfg):
    """Static computation: holding an external wrench costs far less torque
    at a near-singular posture than away from it."""
    model = cfg.load_model("seven_dof_arm")
    wrench = np.asarray(cfg.wrench if cfg.wrench is not None
                        else [0.0, 0.0, -300.0, 0.0, 0.0, 0.0], dtype=float)
    if wrench.shape != (6,):
        raise ConfigError("wrench must have six components (force, moment)")
    q_near = np.asarray(cfg.params.get("near_posture", SINGULAR_POSTURE), float)
    q_away = np.asarray(cfg.params.get("away_posture", BENT_POSTURE), float)
    rows = singular_load_report(model, wrench, q_near, q_away)
    near = rows["near_singular"]["percent_of_limit"]
    away = rows["away"]["percent_of_limit"]
    loaded = np.where(away > 1.0)[0]
    metrics = {
        "wrench": wrench,
        "percent_near": near,
        "percent_away": away,
        "loaded_joints": loaded,
        "near_below_away_on_loaded": bool(np.all(near[loaded] < away[loaded])),
        "max_percent_near": float(near.max()),
        "max_percent_away": float(away.max()),
    }
    out = cfg.outdir()
    _report_json(os.path.join(out, "report.json"), {"metrics": metrics,
                                                    "postures": rows})
    with open(os.path.join(out, "torque_percent.csv"), "w", newline="\n") as f:
        f.write("joint,percent_near_singular,percent_away,limit_Nm\n")
        for j in range(model.n):
            f.write(f"{j+1},{near[j]!r},{away[j]!r},"
                    f"{float(model.tau_limits[j])!r}\n")
    joints = np.arange(1, model.n + 1)
    svgplot.line_plot(
        os.path.join(out, "plot.svg"),
        [(joints, near, "near singular"), (joints, away, "away")],
        title="holding torque, percent of limit", xlabel="joint",
        ylabel="% of limit")
    return {"metrics": metrics, "rows": rows, "model": model}


# ---------------------------------------------------------------------------
# synthetic demonstrations (closed forms)
# ---------------------------------------------------------------------------

def minjerk_joint_demo(amplitude, duration=2.0, samples=400):
    """Quintic reach per joint: q(t) = a (10 s^3 - 15 s^4 + 6 s^5)."""
    amplitude = np.asarray(amplitude, dtype=float)
    t = np.linspace(0.0, duration, samples)
    s = t / duration
    base = 10 * s**3 - 15 * s**4 + 6 * s**5
    d1 = (30 * s**2 - 60 * s**3 + 30 * s**4) / duration
    d2 = (60 * s - 180 * s**2 + 120 * s**3) / duration**2
    return dmp_mod.Demonstration(
        t=t, value=base[:, None] * amplitude, d1=d1[:, None] * amplitude,
        d2=d2[:, None] * amplitude, space="joint")


def figure_eight_demo(center, a=0.06, b=0.04, period=3.0, samples=600,
                      axes=((0, 1, 0), (0, 0, 1))):
    """Lissajous figure-eight: center + a sin(wt) u + b sin(2wt) v."""
    center = np.asarray(center, dtype=float)
    u = np.asarray(axes[0], dtype=float)
    v = np.asarray(axes[1], dtype=float)
    t = np.linspace(0.0, period, samples)
    w = 2 * np.pi / period
    val = center + np.outer(a * np.sin(w * t), u) + np.outer(b * np.sin(2 * w * t), v)
    d1 = np.outer(a * w * np.cos(w * t), u) + np.outer(2 * b * w * np.cos(2 * w * t), v)
    d2 = np.outer(-a * w**2 * np.sin(w * t), u) \
        + np.outer(-4 * b * w**2 * np.sin(2 * w * t), v)
    return dmp_mod.Demonstration(t=t, value=val, d1=d1, d2=d2,
                                 space="task_pos", period=period)


def shaking_orientation_demo(base_rotation, axis=(1.0, 0.0, 0.0),
                             amplitude=0.35, period=1.5, samples=300):
    """Rhythmic rocking about a body axis: R(t) = R_b Exp(a sin(wt) axis)."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    t = np.linspace(0.0, period, samples)
    w = 2 * np.pi / period
    Rs = np.stack([base_rotation @ geo.exp_so3(amplitude * np.sin(w * ti) * axis)
                   for ti in t])
    return dmp_mod.Demonstration.from_rotations(t, Rs, kind="rhythmic",
                                                period=period)


def pouring_orientation_demo(base_rotation, axis=(1.0, 0.35, 0.2),
                             angle=1.1, duration=2.0, samples=400):
    """Discrete tilt: R(t) = R_b Exp(theta(t) axis) with a quintic theta."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    t = np.linspace(0.0, duration, samples)
    s = t / duration
    theta = angle * (10 * s**3 - 15 * s**4 + 6 * s**5)
    Rs = np.stack([base_rotation @ geo.exp_so3(th * axis) for th in theta])
    return dmp_mod.Demonstration.from_rotations(t, Rs, kind="discrete")


# ---------------------------------------------------------------------------
# modular imitation learning
# ---------------------------------------------------------------------------

IMITATION_START = np.array([0.0, 0.6, 0.0, -1.4, 0.0, 1.0, 0.0])

IMITATION_GAINS = dict(Kp=600.0, Bp=40.0, Kr=70.0, Br=5.0, Kq=6.0, Bq=4.5)


def _imitation_controller(model, q_start, vt_pos, vt_rot, point=None):
    g = IMITATION_GAINS
    n = model.n
    return ct.Controller([
        ct.JointSpaceImpedance(g["Kq"] * np.eye(n), g["Bq"] * np.eye(n),
                               tj.VirtualTrajectory([tj.Hold(q_start)])),
        ct.TaskPositionImpedance(g["Kp"] * np.eye(3), g["Bp"] * np.eye(3),
                                 vt_pos, point=point),
        ct.RotationQuatImpedance(g["Kr"] * np.eye(3), g["Br"] * np.eye(3),
                                 vt_rot),
    ])


def run_shaking(cfg):
    """Figure-eight position DMP (optionally summed with a circular
    oscillation) combined with a rhythmic shaking orientation DMP."""
    import warnings
    model = cfg.load_model("seven_dof_arm")
    q_start = np.asarray(cfg.params.get("start", IMITATION_START), float)
    add_circle = bool(cfg.params.get("add_circle", True))
    shake = bool(cfg.params.get("shake_orientation", True))
    period = float(cfg.params.get("period", 3.0))
    cycles = int(cfg.params.get("cycles", 3))
    p_s = kc.fk_position(model, q_start)
    R_s = kc.fk_rotation(model, q_start)

    demo8 = figure_eight_demo(p_s, period=period)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        model8 = dmp_mod.imitation_learn(demo8, kind="rhythmic", N=50)
    fig8 = tj.DmpRef(model8, t0=0.0, grid_dt=cfg.dt / 2,
                     initial=demo8.value[0], initial_rate=demo8.d1[0])
    summands = [fig8]
    if add_circle:
        # same period as the figure-eight so the summed reference (and the
        # cycle-closure metric) stays periodic
        r = float(cfg.params.get("circle_radius", 0.04))
        summands.append(tj.Oscillation([0.0, -r, 0.0], [0.0, r, r],
                                       period=float(cfg.params.get(
                                           "circle_period", period)),
                                       phase=[0.0, np.pi / 2, 0.0]))
    vt_pos = tj.VirtualTrajectory(summands)

    if shake:
        demo_rot = shaking_orientation_demo(R_s)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            model_rot = dmp_mod.imitation_learn(demo_rot, kind="rhythmic",
                                                N=40)
        vt_rot = tj.OrientationTrajectory(
            R_s, [tj.OrientationDmp(model_rot, R_s, grid_dt=cfg.dt / 2)])
    else:
        vt_rot = tj.OrientationTrajectory.fixed(R_s)

    controller = _imitation_controller(model, q_start, vt_pos, vt_rot)
    duration = cfg.duration or cycles * period + 1.0
    controller.prepare(duration)
    trace = dyn.simulate(model, controller.bound(model), q_start,
                         np.zeros(model.n), duration, cfg.dt)

    # superposition of virtual trajectories is exact by construction;
    # record the worst deviation as evidence
    sup_err = 0.0
    for t in np.linspace(0, duration, 23):
        whole, _ = vt_pos.eval(t)
        parts = sum(s.eval(t)[0] for s in summands)
        sup_err = max(sup_err, float(np.abs(whole - parts).max()))

    steps_per = int(round(period / cfg.dt))
    ee = np.array([kc.fk_position(model, trace.q[i])
                   for i in range(len(trace) - steps_per - 1, len(trace), 25)])
    ee_prev = np.array([kc.fk_position(model, trace.q[i - steps_per])
                        for i in range(len(trace) - steps_per - 1,
                                       len(trace), 25)])
    closure = float(np.linalg.norm(ee - ee_prev, axis=1).max())
    rollout_gap = float(np.linalg.norm(
        dmp_mod.rollout(model8, period, cfg.dt, initial=demo8.value[0],
                        initial_rate=demo8.d1[0]).y[-1] - demo8.value[0]))
    metrics = {
        "superposition_error": sup_err,
        "cycle_closure_gap": closure,
        "figure8_rollout_gap": rollout_gap,
        "add_circle": add_circle,
        "shake_orientation": shake,
    }
    led, report = _emit_run(cfg, model, controller, trace, {"metrics": metrics})
    out = cfg.outdir()
    p = np.array([kc.fk_position(model, qi) for qi in trace.q[::20]])
    p0 = np.array([vt_pos.eval(ti)[0] for ti in trace.t[::20]])
    svgplot.path_plot(os.path.join(out, "plot.svg"),
                      [(p0[:, 1], p0[:, 2], "virtual x0"),
                       (p[:, 1], p[:, 2], "end-effector")],
                      title="shaking: y-z path", xlabel="y [m]",
                      ylabel="z [m]")
    return {"trace": trace, "ledger": led, "report": report,
            "metrics": metrics, "controller": controller, "model": model,
            "position_dmp": model8}


def run_pouring(cfg):
    """Pouring rotation with the position module anchored either at the
    end-effector or at an off-body tool tip; the tip-anchored variant must
    hold the tip still while the body rotates."""
    model = cfg.load_model("seven_dof_arm")
    q_start = np.asarray(cfg.params.get("start", IMITATION_START), float)
    tip_offset = np.asarray(cfg.params.get("tip_offset", [0.0, 0.0, 0.25]),
                            dtype=float)
    duration = cfg.duration or 5.0
    R_s = kc.fk_rotation(model, q_start)
    demo = pouring_orientation_demo(
        R_s, angle=float(cfg.params.get("angle", 1.1)),
        duration=float(cfg.params.get("pour_time", 3.0)))
    pour = dmp_mod.imitation_learn(demo, kind="discrete", N=50)
    tip_point = FramePoint("ee", tip_offset)

    results = {}
    for variant, point in (("anchor_ee", FramePoint("ee")),
                           ("anchor_tip", tip_point)):
        p_anchor = kc.fk_position(model, q_start, point)
        vt_pos = tj.VirtualTrajectory([tj.Hold(p_anchor)])
        vt_rot = tj.OrientationTrajectory(
            R_s, [tj.OrientationDmp(pour, R_s, t0=0.5, grid_dt=cfg.dt / 2)])
        controller = _imitation_controller(model, q_start, vt_pos, vt_rot,
                                           point=point)
        controller.prepare(duration)
        trace = dyn.simulate(model, controller.bound(model), q_start,
                             np.zeros(model.n), duration, cfg.dt)
        tip0 = kc.fk_position(model, q_start, tip_point)
        tip_err = np.array([np.linalg.norm(
            kc.fk_position(model, trace.q[i], tip_point) - tip0)
            for i in range(0, len(trace), 5)])
        results[variant] = {"trace": trace, "controller": controller,
                            "max_tip_error": float(tip_err.max())}

    improvement = results["anchor_ee"]["max_tip_error"] \
        / max(results["anchor_tip"]["max_tip_error"], 1e-12)
    metrics = {
        "max_tip_error_ee_anchor": results["anchor_ee"]["max_tip_error"],
        "max_tip_error_tip_anchor": results["anchor_tip"]["max_tip_error"],
        "tip_stabilization_improvement": float(improvement),
    }
    led, report = _emit_run(cfg, model, results["anchor_tip"]["controller"],
                            results["anchor_tip"]["trace"],
                            {"metrics": metrics})
    out = cfg.outdir()
    tr_ee = results["anchor_ee"]["trace"]
    tr_tip = results["anchor_tip"]["trace"]
    tip_path = lambda tr: np.array(
        [kc.fk_position(model, qi, tip_point) for qi in tr.q[::20]])
    a, b = tip_path(tr_ee), tip_path(tr_tip)
    svgplot.path_plot(os.path.join(out, "plot.svg"),
                      [(a[:, 0], a[:, 2], "tip (module at end-effector)"),
                       (b[:, 0], b[:, 2], "tip (module at tool tip)")],
                      title="tool-tip wander while pouring", xlabel="x [m]",
                      ylabel="z [m]")
    return {"metrics": metrics, "results": results, "ledger": led,
            "report": report, "model": model, "orientation_dmp": pour}


def run_modular_imitation(cfg):
    variant = cfg.params.get("variant", "shake")
    if variant == "shake":
        return run_shaking(cfg)
    if variant == "pour":
        return run_pouring(cfg)
    raise ConfigError("modular_imitation variant must be 'shake' or 'pour'")


RUNNERS = {
    "planar_singularity": run_planar_singularity,
    "redundancy_drift": run_redundancy_drift,
    "singular_load": run_singular_load,
    "modular_imitation": run_modular_imitation,
}


def run_scenario(cfg):
    return RUNNERS[cfg.scenario](cfg)
