"""Bayesian kernel regression toolkit.

RVM, quasi-GP (probabilistic kernel ridge) and GP regression plus classical
linear smoothers and discrete AR(1) Kalman filtering under one data model.
The heavy lifting lives in the compiled extension ``_kbreg``.
"""

try:
    from kbreg._kbreg import *  # noqa: F401,F403  (installed wheel layout)
    from kbreg._kbreg import __version__  # noqa: F401
except ImportError:
    from _kbreg import *  # noqa: F401,F403  (build-tree layout)
    from _kbreg import __version__  # noqa: F401
