"""Numerical laboratory for the half-line delta-shell (Winter) model.

Linear side: resonance ladder, bound state, resolvent and scattering
coefficient, the exact time-evolution kernel and survival-amplitude
asymptotics.  Nonlinear side: stationary elliptic-function states and their
bifurcations, the nonlinear scattering coefficient, and split-step time
evolution driven by the exact linear kernel.
"""

__version__ = "0.1.0"
