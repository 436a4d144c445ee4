"""MARUN2: headless underwater teleoperation simulator for the URSULA robot.

Rigid-body physics with buoyancy/added-mass/drag, four tendon-driven soft
limbs, benchmark intervention scenarios with metrics, and a rosbridge-style
JSON-over-WebSocket pub-sub surface.
"""

__version__ = "0.1.0"
