# Schemas package
from tfmonad.schemas.specs import (
    AlgebraSpec,
    AlphaSchema,
    BoxSchema,
    CoalgebraSpec,
    HopfCheckSpec,
    IntegratorSchema,
    Rank1Spec,
    RunConfig
)
from tfmonad.schemas.reports import (
    CheckSchema,
    RunReport
)

__all__ = [
    "AlgebraSpec",
    "AlphaSchema",
    "BoxSchema",
    "CoalgebraSpec",
    "HopfCheckSpec",
    "IntegratorSchema",
    "Rank1Spec",
    "RunConfig",
    "CheckSchema",
    "RunReport",
]
