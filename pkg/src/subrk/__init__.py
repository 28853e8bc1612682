"""Numerical checks of heat kernel bounds on sub-Riemannian model spaces.

Modules:

* ``polynomial``, ``calculus``: exact polynomial algebra, the Gamma calculus
  and the curvature-dimension residual;
* ``models``: step-two Carnot groups and their CD parameters;
* ``metrics``: the control distances ``d_tau`` and ball volumes;
* ``heat``: the Heisenberg heat kernel, diffusion simulation and semigroup values;
* ``bounds``: the explicit inequalities as evaluatable formulas;
* ``harness``: named verification suites and the ``subrk`` command.
"""

from ._accel import BACKEND
from .calculus import CDParams
from .models import CarnotModel, cd_parameters, heisenberg, load_model, random_carnot

__version__ = "0.1.0"

__all__ = ["BACKEND", "CDParams", "CarnotModel", "cd_parameters", "heisenberg", "load_model", "random_carnot"]
