"""Calabi, Ruelle and link spectral invariants of autonomous Hamiltonians
on the sphere and the disc.

The package is organised around a handful of data types:

* `AxisymmetricProfile` -- a Hamiltonian H(theta, z) = h(z) given piecewise,
* `TriangulatedField` -- a piecewise-linear function on a triangulated sphere,
* `MeasuredReebTree` -- the quotient of the sphere by level-set components,
  carrying the pushed-forward area measure,
* `LinkPlacement` -- a monotone link built on such a tree,

and the functions acting on them, grouped in `model`, `reeb`, `invariants`,
`spectral` and `twists`.
"""

from .errors import (
    ArgumentError,
    CertificationError,
    DomainError,
    KTooSmallError,
    ResourceError,
    SchemaError,
    StructuralError,
)
from .model import (
    PROFILE_HEIGHT,
    PROFILE_RAMP,
    PROFILE_TENT,
    PROFILE_TWIST,
    PROFILE_ZERO,
    AxisymmetricProfile,
    Piece,
    SphereModel,
    TriangulatedField,
    eval_profile,
    make_smoothing,
)
from .reeb import MeasuredReebTree, tree_from_mesh, tree_from_profile, tree_integral
from .invariants import (
    ActionPrimitive,
    RuelleEstimate,
    action_primitive_check,
    calabi,
    hofer_norm,
    ruelle_levelcount,
    ruelle_morse,
    ruelle_numeric,
    ruelle_tree,
)
from .spectral import (
    LinkPlacement,
    WeylSequence,
    extrapolate_limit,
    fk,
    gk,
    muk_axisymmetric,
    muk_bounds,
    place_link,
    prescribe_fk_sequence,
    weyl_sequence,
)
from .twists import DivergenceCertificate, sphere_twist_sequence, twist_T_sequence

__version__ = "0.1.0"
