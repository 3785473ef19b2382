"""Simulation toolkit for the quantum optics of ultracold atom-molecule systems.

Subpackages/modules:

- ``core``       block-basis linear algebra, propagation, RK4
- ``micromaser`` double-well molecular micromaser (dissipative steady states)
- ``passage``    collective association/dissociation and passage-time statistics
- ``counting``   molecule counting statistics from BEC / Fermi-sea / paired initial states
- ``momentum``   molecular momentum distributions of trapped gases (LDA, perturbative)
- ``cli``        scenario-driven command line front end (``molsim``)
"""

__version__ = "0.1.0"
