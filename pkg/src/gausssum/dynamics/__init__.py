"""The (a, b) skew product over the Gauss map and the auxiliary map on [0, 3]."""

from .densities import (BoxDensity, PiecewiseDensity, iterate_AB, iterate_family, pf_apply_family,
                        pf_apply_grid, second_family, transfer_matrix)
from .counting import (A_CONSTANT, CountingStats, birkhoff_A, counting_norms, fibre_step,
                       sample_m)
