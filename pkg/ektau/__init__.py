"""
ektau — numerical geometry workbench for the homogeneous spaces E(kappa, tau).

Geometry of the ambient space, surface curvatures, stability spectra,
parabolicity estimates and horizontal minimal graphs in Nil3.
"""

__version__ = "0.1.0"
