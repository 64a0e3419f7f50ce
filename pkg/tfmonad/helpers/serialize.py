"""
Serialization Helpers
Turns report dataclasses into JSON-ready values. Rationals become "p/q"
strings and floats their repr, so reruns produce identical files.
"""
import dataclasses
import json
from fractions import Fraction
from typing import Any

import numpy as np

from tfmonad.helpers.numeric import format_scalar
from tfmonad.services.matrices import MatrixQ
from tfmonad.services.polynomials import Polynomial
from tfmonad.services.weil import WeilElement


def _properties(obj) -> dict:
    out = {}
    for klass in reversed(type(obj).__mro__):
        for name, attr in vars(klass).items():
            if isinstance(attr, property) and not name.startswith("_"):
                out[name] = getattr(obj, name)
    return out


def to_jsonable(obj: Any) -> Any:
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (Fraction, float, np.floating)):
        return format_scalar(obj if isinstance(obj, Fraction) else float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [format_scalar(float(obj.real)), format_scalar(float(obj.imag))]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, MatrixQ):
        return obj.to_strings()
    if isinstance(obj, (Polynomial, WeilElement)):
        return str(obj)
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        for name, value in _properties(obj).items():
            out.setdefault(name, to_jsonable(value))
        return out
    if hasattr(obj, "model_dump"):
        return to_jsonable(obj.model_dump())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj, key=str) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(v) for v in items]
    return str(obj)


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True, ensure_ascii=False)
