"""
Report Schemas
Pydantic models for the JSON reports written by the CLI.
"""
from pydantic import BaseModel, Field
from typing import Any, Dict, List, Optional

from tfmonad.schemas.specs import RunConfig


class CheckSchema(BaseModel):
    """One named residual with its tolerance; numbers serialized exactly as strings."""
    name: str
    residual: str
    tolerance: str
    passed: bool
    witness: Optional[List[str]] = None
    detail: Optional[str] = None


class RunReport(BaseModel):
    """Top-level report: the effective config, the verdict and per-check results."""
    config: RunConfig
    passed: bool
    checks: List[CheckSchema] = Field(default_factory=list)
    results: Dict[str, Any] = Field(default_factory=dict)
