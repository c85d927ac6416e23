"""femlbm: hybrid finite-element / lattice-Boltzmann advection-diffusion solver.

Continuum subdomains use (SUPG-stabilized) P1 finite elements with
theta-method time stepping; pore-scale subdomains use a BGK lattice
Boltzmann scheme with entropy-based boundary closures. Subdomains overlap
and exchange Dirichlet data through a multirate Schwarz iteration.
"""

__version__ = "0.1.0"
