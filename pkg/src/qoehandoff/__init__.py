"""Delay-driven VoIP QoE prediction and learned vertical-handoff policies.

Passive per-interface delay probes feed Gaussian-emission HMMs that track
discrete QoE states; a tabular Q-learning agent uses the predicted states
to decide when a multi-homed node should hand off between access networks.
Baseline policies (offline oracle, weighted-QoS, smoothed-load) and a
discrete-time two-interface simulator round out the lab.
"""

__version__ = "0.1.0"
