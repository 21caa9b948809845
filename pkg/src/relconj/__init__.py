"""Generalized conjugacy problem for free products and free groups.

Bounded conjugator search, pigeonhole shortening of conjugators and
compression of parabolic syllables, over finite, abelian, free and
free-product group backends.
"""

__version__ = "0.1.0"

from .groups import (  # noqa: E402
    AbelianGroup,
    FiniteGroup,
    FreeGroup,
    FreeProduct,
    GroupElement,
    ball_enumerate,
    conjugate,
    group_from_spec,
    load_group,
    x_length,
)
from .gcp import (  # noqa: E402
    ConjugacyInstance,
    ConstantsProfile,
    Decision,
    SearchConfig,
    Status,
    make_instance,
    solve,
    solve_bounded,
    verify_conjugator,
)

__all__ = [
    "AbelianGroup",
    "ConjugacyInstance",
    "ConstantsProfile",
    "Decision",
    "FiniteGroup",
    "FreeGroup",
    "FreeProduct",
    "GroupElement",
    "SearchConfig",
    "Status",
    "ball_enumerate",
    "conjugate",
    "group_from_spec",
    "load_group",
    "make_instance",
    "solve",
    "solve_bounded",
    "verify_conjugator",
    "x_length",
]
