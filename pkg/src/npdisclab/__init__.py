"""Numerical laboratory for multiplier algebras of embedded discs.

Subpackages cover: truncated series arithmetic between embedding moduli and
kernel weights (``series``), kernel families and isomorphism classification
(``kernels``), pseudohyperbolic geometry of the ball (``geometry``), Pick
matrices and interpolating-subsequence extraction (``pick``), disc-sequence
diagnostics (``sequences``), the tangential conformal-chain embedding
(``tangential``), and a reproducible CSV experiment runner (``cli``).
"""

__version__ = "0.1.0"
