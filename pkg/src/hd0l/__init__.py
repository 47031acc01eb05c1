"""Decision procedure for ultimate periodicity of morphic (HD0L) infinite words."""

__version__ = "0.1.0"

from .words import (  # noqa: F401
    HD0LSystem,
    Morphism,
    UltimatelyPeriodicWord,
    canonicalize_up,
    up_equal,
)
from .normalization import (  # noqa: F401
    SubstitutiveRepresentation,
    substitutive_representation,
)
from .periodicity import (  # noqa: F401
    DecisionOutcome,
    Limits,
    decide_substitutive,
)
from .hdol import (  # noqa: F401
    BOUNDED,
    TO_INFINITY,
    TO_ZERO,
    BoundedPrefixCycle,
    ClassLimit,
    FirstLetterOrbit,
    PeriodicTail,
    bounded_prefix_cycle,
    class_limits,
    decide_hd0l,
    first_letter_orbit,
    phi_length_class,
)
