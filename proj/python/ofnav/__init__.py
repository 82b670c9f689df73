"""Monocular optical-flow egomotion estimation for lunar descent.

Thin Python layer over the C++ core: camera geometry, rangefinder-
parameterized depth models, motion-field inversion, the Shi-Tomasi /
pyramidal Lucas-Kanade front-end, the procedural terrain simulator and the
experiment harness.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
