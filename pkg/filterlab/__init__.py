"""Robust total-least-squares adaptive filtering lab.

The TACLDM filter and its LMS / GDTLS baselines, generalized Gaussian noise
generators, closed-form stability and steady-state predictors, and a
configuration-driven Monte Carlo runner on top.
"""

__version__ = "0.1.0"
