"""
Dense-traffic merge simulation.

A rollout MPC merges an ego vehicle out of an ending lane into a packed lane of
simulated drivers who yield with individual cooperativeness.
"""

__version__ = "0.1.0"
