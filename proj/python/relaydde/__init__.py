"""Exact and smoothed analysis of a relay delay equation with a two-step
periodic coefficient: affine return maps, event-driven exact solutions, and
the smoothed approximation with its convergence diagnostics."""

from ._relaydde import *  # noqa: F401,F403
from ._relaydde import Params

__all__ = [name for name in dir() if not name.startswith("_")] + ["preset"]


def preset(name):
    """Built-in example parameter sets.

    'p1' is the single-period example (a1=2, a2=0.1, p1=3, p2=1, mu=0.1);
    'p2' is the double-period example (a1=4, a2=2, p1=0.5, p2=1, mu=0.1).
    """
    if name == "p1":
        return Params(2.0, 0.1, 3.0, 1.0, 0.1)
    if name == "p2":
        return Params(4.0, 2.0, 0.5, 1.0, 0.1)
    raise ValueError("unknown preset " + repr(name))
