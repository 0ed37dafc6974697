"""Numerical toolkit for non-scattering potentials and penetrable obstacles.

Submodules
----------
specialfun    Bessel/Hankel functions, fundamental solutions, first Bessel zero.
geometry      Domains, boundary quadrature, convex hulls, thickness.
qdomain       Quadrature measures and modified potentials.
incident      Incident waves, Herglotz synthesis, Runge fitting, zero-ball scans.
contrast      Glued constructions of non-scattering contrasts.
scatter       Lippmann-Schwinger solver, far fields, Dirichlet verification.
freeboundary  Support extraction, thickness dichotomy, cusp example.
cli           Reproducible scenario runner.
"""

__version__ = "0.1.0"
