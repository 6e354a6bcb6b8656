"""Exact finite-order checks for quantizing Lagrangian subvarieties.

Modules, bottom up:

``coeffring``  truncated Laurent series in x and h, differential forms
``weyl``       homogeneous Weyl algebra, symplectic matrices and sigma
``lagmodule``  the standard Lagrangian module and lifting of actions
``starprod``   local star products, transitions and the beta1 solve
``cechdr``     Cech-de Rham classes, Chern classes, the obstruction class
``quantcheck`` scenario files and verdicts
"""

from .coeffring import DifferentialForm, ScalarSeries, parse_series
from .weyl import SpMatrix, WeylElement, parse_weyl, sigma_embed, weyl_bracket, weyl_mul
from .lagmodule import ModuleData, act, lift_module, parabolic, sigma_weight, verify_error_identity
from .starprod import Chart, StarProduct, moyal, solve_beta1
from .cechdr import Atlas, CechClass, LineBundle, chern_class, class_reduce, obstruction_class
from .quantcheck import Scenario, Verdict, load_bundled, load_scenario, run_scenario

__version__ = "0.1.0"

__all__ = [
    "DifferentialForm", "ScalarSeries", "parse_series",
    "SpMatrix", "WeylElement", "parse_weyl", "sigma_embed", "weyl_bracket", "weyl_mul",
    "ModuleData", "act", "lift_module", "parabolic", "sigma_weight", "verify_error_identity",
    "Chart", "StarProduct", "moyal", "solve_beta1",
    "Atlas", "CechClass", "LineBundle", "chern_class", "class_reduce", "obstruction_class",
    "Scenario", "Verdict", "load_bundled", "load_scenario", "run_scenario",
]
