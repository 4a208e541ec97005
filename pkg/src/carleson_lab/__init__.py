"""Weighted norm inequalities for the Carleson operator on the discretized circle.

Modules: ``grid`` (step signals, dyadic intervals, medians, oscillations),
``young`` (Young functions, Luxemburg norms, B_p constants), ``weights``
(Muckenhoupt constants and weight families), ``operators`` (Hilbert,
Carleson and maximal operators), ``sparse`` (sparse decomposition and
domination), ``harness`` (operator-norm probes, fits and suites) and ``cli``.
"""

from .grid import DyadicInterval, GridSpec, StepSignal
from .operators import CARLESON, HILBERT, carleson, hilbert, maximal, orlicz_maximal
from .sparse import SparseFamily, domination_check, sparse_decompose
from .weights import WeightProfile, a1_constant, ainfty_constant, ap_constant, parse_weight
from .young import bp_constant, luxemburg_norm, parse_young

__version__ = "0.1.0"

__all__ = [
    "CARLESON",
    "HILBERT",
    "DyadicInterval",
    "GridSpec",
    "SparseFamily",
    "StepSignal",
    "WeightProfile",
    "a1_constant",
    "ainfty_constant",
    "ap_constant",
    "bp_constant",
    "carleson",
    "domination_check",
    "hilbert",
    "luxemburg_norm",
    "maximal",
    "orlicz_maximal",
    "parse_weight",
    "parse_young",
    "sparse_decompose",
]
