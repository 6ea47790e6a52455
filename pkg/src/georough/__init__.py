"""georough: computations with paths in free nilpotent groups G^m(R^d).

Truncated tensor algebra and group arithmetic, signatures of piecewise-linear
paths, homogeneous norms and rough-path metrics, constructive realization of
group elements by short paths, Wiener/Ciesielski membership functionals,
fixture generators and an SDE convergence harness.
"""
from .controls import Control, PowerControl, TableControl, parse_control
from .corpus import brownian_increments, brownian_lift, chirp_path, chirp_value, lacunary_series, pure_area_path
from .errors import GeoRoughError, InvalidInput, NotGroupLike, Unsupported
from .harness import SdeSystem, SYSTEMS, convergence_experiment, ode_solve
from .membership import check_control, ciesielski_modulus, ciesielski_profile, classify, wiener_functional, wiener_profile
from .metrics import (
    cc_bounds,
    cc_lower,
    dist,
    lnorm,
    modulus_distance,
    pvar_distance,
    pvar_norm,
    smallest_control,
    sup_distances,
    tnorm,
)
from .paths import PiecewisePath, SampledGroupPath
from .realizer import (
    OmegaDControl,
    Realization,
    interpolant,
    interpolant_report,
    mesh_subdivision,
    omega_d_control,
    realization_constant,
    realize,
    smooth_reparam,
)
from .signature import lift, path_signature, segment_signature, signature_prefix
from .tensor import (
    GroupElement,
    LieElement,
    TruncatedTensor,
    dilate,
    exp_t,
    group_exp,
    group_like_check,
    inverse,
    lie_bracket,
    lie_generator,
    lie_vector,
    log_t,
    tensor_mul,
)

__version__ = "0.1.0"
