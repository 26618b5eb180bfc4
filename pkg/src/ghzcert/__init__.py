"""Stabilizer-type multipartite Bell inequalities for GHZ states and
device-independent randomness certification built on them.

Submodules:

* ``linalg``      dense complex linear algebra and GHZ-state helpers
* ``bell``        symbolic Bell expression family and evaluation
* ``lhv``         classical bound by deterministic-strategy enumeration
* ``quantum``     quantum bound, optimal angles, angle search, self-test
* ``randomness``  Born-rule behaviors, guessing probability, min-entropy
* ``holevo``      eavesdropper Holevo-quantity bound pipeline
* ``npa``         moment-relaxation guessing-probability bounds
* ``sdp``         bundled first-order semidefinite solver
* ``simulate``    Monte-Carlo trial source, Bell estimator, extraction
* ``extractor``   Toeplitz-hash randomness extractor over GF(2)
* ``cli``         command-line front end
"""

__version__ = "0.1.0"
