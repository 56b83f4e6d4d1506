"""Self-testing the GHZ state through the tripartite Hardy paradox.

Modules: ``quantum`` (operator algebra and behaviors), ``hardy`` (Hardy
conditions and maximization), ``geometry`` (local polytope LPs and Bell
functionals), ``swap`` (SWAP-isometry figures of merit), ``npa`` (moment
relaxations and robustness sweeps), ``cli``.
"""

__version__ = "0.1.0"
