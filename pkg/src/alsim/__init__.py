"""Simulation workbench for pool-based batch active learning.

Generates calibrated synthetic classification tasks, runs selection
strategies against random-selection baselines over an iterated label budget,
and quantifies performance with a score-difference comparison methodology
(GAM-based zone length) plus a negative-binomial factor regression.
"""

__version__ = "0.1.0"
