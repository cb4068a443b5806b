"""Numerical tools for integrable deformations of convex billiards.

Setting ``ARTIFACT_THREADS`` caps the BLAS/OpenMP thread pools (it must be
set before numpy is first imported) and the worker count used by the
orbit-family and operator-assembly routines.
"""

import os

_threads = os.environ.get("ARTIFACT_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("ARTIFACT_THREADS", "1")))
    except ValueError:
        return 1


from .errors import (AsymptoticsMismatchWarning, ClosureViolation, ConvexityError,  # noqa: E402
                     DegenerateOrbit, IllConditionedWarning, InvalidArgument, NotContractive,
                     NumericalFailure, TailTooLargeWarning)
from .fourier import FourierSeries  # noqa: E402
from .geometry import (BoundaryCurve, curve_from_csv, make_circle, make_ellipse,  # noqa: E402
                       make_from_curvature_fourier)
from .dynamics import (BirkhoffOrbit, PhasePoint, billiard_step, birkhoff_orbit,  # noqa: E402
                       family_jet, orbit_family)
from .lazutkin import (ExpansionData, LazutkinChart, build_chart, curvature_identity_residual,  # noqa: E402
                       extract_alpha_beta, s_q)
from .operators import (DeformationFunction, dL_operator, operator_at, orbit_grid_family,  # noqa: E402
                        verify_mode_lemmas)
from .rigidity import (assemble_operator, bound_budget, contraction_search,  # noqa: E402
                       deformation_space, gamma0, norm_deviation, xgamma_norm)
from .higher_order import (higher_constraint_residual, regrouping_identity_residual,  # noqa: E402
                           two_p_expansion_check)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticsMismatchWarning", "ClosureViolation", "ConvexityError", "DegenerateOrbit",
    "IllConditionedWarning", "InvalidArgument", "NotContractive", "NumericalFailure",
    "TailTooLargeWarning", "FourierSeries", "BoundaryCurve", "curve_from_csv", "make_circle",
    "make_ellipse", "make_from_curvature_fourier", "BirkhoffOrbit", "PhasePoint",
    "billiard_step", "birkhoff_orbit", "family_jet", "orbit_family", "ExpansionData",
    "LazutkinChart", "build_chart", "curvature_identity_residual", "extract_alpha_beta", "s_q",
    "DeformationFunction", "dL_operator", "operator_at", "orbit_grid_family",
    "verify_mode_lemmas", "assemble_operator", "bound_budget", "contraction_search",
    "deformation_space", "gamma0", "norm_deviation", "xgamma_norm",
    "higher_constraint_residual", "regrouping_identity_residual", "two_p_expansion_check",
    "default_workers",
]
