"""Desk-scale closed-loop whole-body humanoid teleoperation.

Subpackages: mathcore (quaternion and diffusion primitives), motiondata
(clip schema, generators, curation, editing), simenv (reduced humanoid,
rewards, randomization), policy (MLP and mixture-of-experts networks with
analytic backprop, observations), training (PPO teacher, adversarial motion
prior, distillation), odometry (simulated 10 Hz providers and closed-loop
correction), evaluation (metrics, experiment protocols, reports), service
(config, CLI, live teleoperation server).
"""

__version__ = "0.1.0"
