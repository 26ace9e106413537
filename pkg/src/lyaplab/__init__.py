"""Lyapunov spectra of flat bundles over compact hyperbolic surfaces.

Submodules
----------
hypgeo     half-plane geometry (points, Mobius maps, geodesics, balls)
fuchsian   triangle / surface groups, fundamental domains, geodesic coding
linrep     representation data, word evaluation, sym/ext powers, file I/O
oseledets  the QR cocycle engine and spectrum estimates
devmaps    developing-map oracles and bad-locus counting
errterm    the error-term estimator and sum-rule checks
cli        the `lyaplab` command-line front end
"""

__version__ = "0.1.0"
