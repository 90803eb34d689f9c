"""Harmonic analysis utilities on S2, SO(3) and S2 x S2.

Subpackage map:

* ``harmonics``     basis functions, spectra, dense quadrature oracles
* ``lattice``       separated / covering point sets and great circles
* ``cubature``      positive exact quadrature weights on lattices
* ``splines``       variational interpolating splines
* ``radon_sphere``  Funk and hemispherical transforms on S2
* ``radon_so3``     Radon transform between SO(3) and S2 x S2
* ``frames``        band-pass Parseval frames
* ``cli``           command-line front end
"""

__version__ = "0.1.0"
