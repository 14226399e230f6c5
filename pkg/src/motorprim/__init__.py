"""Modular torque-level robot control with motor primitives.

A numpy toolkit pairing mechanical-impedance control modules with virtual
trajectories (minimum-jerk submovements, oscillations, dynamic movement
primitives) on top of a serial-chain kinematics/dynamics simulator, with
energy bookkeeping and passivity monitoring.
"""

from . import geometry
from . import model
from . import kinematics
from . import dynamics
from . import dmp
from . import trajectory
from . import control
from . import energy
from . import svgplot
from . import scenarios

__all__ = ["geometry", "model", "kinematics", "dynamics", "dmp",
           "trajectory", "control", "energy", "svgplot", "scenarios"]

__version__ = "0.1.0"
