"""Post-hoc figure generation for lsvi sweep outputs.

Consumes only the versioned CSV contract; it has no dependency on the solver
package itself.
"""

from .plotting import FigureSpec, plot_convergence, plot_final_looseness

__version__ = "0.1.0"
