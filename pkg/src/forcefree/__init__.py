"""Axisymmetric force-free fields with a uniform far field.

Submodules: ``specfun`` (Bessel functions), ``fields`` (analytic solutions),
``clebsch`` (grids, potentials and functionals), ``relax`` (helicity-constrained
energy minimisation), ``fluxsim`` (resistive flux transport), ``inequalities``
(random corpus and empirical constants) and ``cli``.
"""
from .clebsch import ClebschField, HalfPlaneGrid, energy, functionals, gen_helicity, mean_square_potential
from .fields import FieldParams, G_C, U_C, f_C, helicity_constant_hC, lundquist_field, phi_C
from .fluxsim import SimConfig, SimTrace, drift_scan, run
from .relax import RelaxConfig, RelaxReport, minimize, minimum_curve, recover_mu, steiner_symmetrize
from .specfun import C32, bessel_j, first_positive_root

__all__ = [
    "ClebschField", "HalfPlaneGrid", "energy", "functionals", "gen_helicity", "mean_square_potential",
    "FieldParams", "G_C", "U_C", "f_C", "helicity_constant_hC", "lundquist_field", "phi_C",
    "SimConfig", "SimTrace", "drift_scan", "run",
    "RelaxConfig", "RelaxReport", "minimize", "minimum_curve", "recover_mu", "steiner_symmetrize",
    "C32", "bessel_j", "first_positive_root",
]
