"""
Spec Schemas
Pydantic models for the JSON inputs: algebra charts, rank-1 flow algebras,
affine Hopf modules, Kähler coalgebras and the effective run configuration.
"""
from pydantic import BaseModel, Field, model_validator
from typing import Any, Dict, List, Literal, Optional, Union

# Bounds and scalars: JSON numbers or strings such as "3/2" and "2*pi".
Scalar = Union[int, float, str]


class BoxSchema(BaseModel):
    """Rectangular box given by its two corners."""
    min: List[Scalar] = Field(..., description="Lower corner")
    max: List[Scalar] = Field(..., description="Upper corner")

    @model_validator(mode="after")
    def _same_length(self):
        if len(self.min) != len(self.max):
            raise ValueError(f"box corners have lengths {len(self.min)} and {len(self.max)}")
        return self


class AlgebraSpec(BaseModel):
    """Closed-form algebra h(x, v) in the variables x1..xn, v1..vn."""
    kind: Literal["chart"] = "chart"
    name: str = Field(default="", description="Label used in reports")
    dim: int = Field(..., description="Chart dimension n", ge=1)
    exprs: List[str] = Field(..., description="n output expressions")
    domain: BoxSchema = Field(..., description="Box for x, or for (x, v) when 2n corners are given")
    periodic: List[Optional[Scalar]] = Field(default_factory=list, description="Period per coordinate, null if none")
    constraints: List[str] = Field(default_factory=list, description="Expressions that must stay positive")
    tolerance: Optional[float] = Field(default=None, description="Residual tolerance override", ge=0)
    sample_box: Optional[BoxSchema] = Field(default=None, description="Where base points are drawn")
    radius_factor: Optional[float] = Field(default=None, description="Tangent ball radius per half-width", gt=0)
    base_point: Optional[List[Scalar]] = Field(default=None, description="Default point for leaf commands")
    loop: Optional[List[str]] = Field(default=None, description="Closed leaf path in the parameter t")

    @model_validator(mode="after")
    def _check_shapes(self):
        n = self.dim
        if len(self.exprs) != n:
            raise ValueError(f"expected {n} expressions, got {len(self.exprs)}")
        if len(self.domain.min) not in (n, 2 * n):
            raise ValueError(f"domain must have {n} or {2 * n} coordinates")
        if self.periodic and len(self.periodic) != n:
            raise ValueError(f"periodic mask must have {n} entries")
        if self.sample_box and len(self.sample_box.min) != n:
            raise ValueError(f"sample box must have {n} coordinates")
        if self.base_point and len(self.base_point) != n:
            raise ValueError(f"base point must have {n} coordinates")
        if self.loop and len(self.loop) != n:
            raise ValueError(f"loop must have {n} components")
        return self


class AlphaSchema(BaseModel):
    """Time function alpha(x, v) or one-form coefficients a(x)."""
    kind: Literal["scalar", "oneform"] = Field(..., description="scalar: one expression in x, v; oneform: n in x")
    exprs: List[str]
    constraints: List[str] = Field(default_factory=list, description="Positivity constraints of a scalar alpha")


class IntegratorSchema(BaseModel):
    """Fixed-step RK4 settings."""
    step: Optional[float] = Field(default=None, description="Step size; domain diameter / 1024 if unset", gt=0)
    max_steps: Optional[int] = Field(default=None, description="Step budget per flow evaluation", ge=1)


class Rank1Spec(BaseModel):
    """Rank-1 algebra h(x, v) = phi_{alpha(x, v)}(x) from a vector field flow."""
    kind: Literal["rank1"] = "rank1"
    name: str = ""
    dim: int = Field(..., ge=1)
    X: List[str] = Field(..., description="Vector field components in x1..xn")
    alpha: AlphaSchema
    integrator: IntegratorSchema = Field(default_factory=IntegratorSchema)
    domain: BoxSchema = Field(..., description="Box for x")
    fiber_bound: Scalar = Field(default=1, description="Half-width of the v box")
    tolerance: Optional[float] = Field(default=None, ge=0)
    sample_box: Optional[BoxSchema] = None
    radius_factor: Optional[float] = Field(default=None, gt=0)
    base_point: Optional[List[Scalar]] = None
    loop: Optional[List[str]] = None

    @model_validator(mode="after")
    def _check_shapes(self):
        n = self.dim
        if len(self.X) != n:
            raise ValueError(f"vector field needs {n} components, got {len(self.X)}")
        expected = 1 if self.alpha.kind == "scalar" else n
        if len(self.alpha.exprs) != expected:
            raise ValueError(f"{self.alpha.kind} alpha needs {expected} expressions")
        if len(self.domain.min) != n:
            raise ValueError(f"domain must have {n} coordinates")
        if self.base_point and len(self.base_point) != n:
            raise ValueError(f"base point must have {n} coordinates")
        if self.loop and len(self.loop) != n:
            raise ValueError(f"loop must have {n} components")
        return self


class HopfCheckSpec(BaseModel):
    """Candidate Hopf module h(x, v) = A x + B v + X0 over the affine bimonad (a, b)."""
    a: Scalar
    b: Scalar
    A: List[List[Scalar]]
    B: List[List[Scalar]]
    X0: List[Scalar]


class CoalgebraSpec(BaseModel):
    """Candidate Kähler coalgebra: images h(X_i) in the text format, optional b."""
    h: List[str] = Field(..., description='Images of X1..Xn, e.g. "X1 + (1 + 2*X1)*dX1"')
    b: Optional[Scalar] = Field(default=None, description="Scalar of the affine coalgebra condition")


class RunConfig(BaseModel):
    """Effective configuration embedded in every report."""
    command: str
    spec: Optional[str] = None
    seed: int = 42
    samples: int = 100
    tolerance: Optional[float] = None
    backend: str = "auto"
    output: Optional[str] = None
    options: Dict[str, Any] = Field(default_factory=dict)
