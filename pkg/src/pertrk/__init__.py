"""Strong-stability analysis of Runge-Kutta methods with downwind perturbations.

Modules: ``tableau`` (methods and perturbations), ``lp`` (feasibility simplex),
``shu_osher`` (canonical forms and radii), ``optimize`` (optimal perturbations
and bounds), ``linear`` (stability functions and threshold factors), ``catalog``
(built-in methods), ``integrator`` (time stepping and the advection demo) and
``cli``.
"""

__version__ = "0.1.0"
