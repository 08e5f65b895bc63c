"""Text form of unitary sources, shared by the CLI and the presets.

    haar | haar:special
    biased:pg=0.5,g=delta[,v=unitary.json]
    biased:pg=0.5,g=narrow[,eps=0.1]
    cycle:unitaries.json
    ising:n=3[,alpha=1.10]
    schedule:two-qubit[,c=1.0894] | schedule:three-qubit
"""
from __future__ import annotations

from pathlib import Path
from typing import Dict, Tuple

from .errors import InvalidParameterError
from .io import load_matrix, load_matrix_list
from .sampling import DEFAULT_NARROW_EPS, GSpec, UnitarySource, default_delta
from .twirl.ising import default_alpha
from .twirl.schedules import TWO_QUBIT_C, deterministic_schedule


def _split(spec: str) -> Tuple[str, str]:
    kind, _, rest = spec.strip().partition(":")
    return kind.strip().lower(), rest.strip()


def _params(rest: str, spec: str) -> Dict[str, str]:
    out: Dict[str, str] = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise InvalidParameterError(f"expected key=value in source {spec!r}, got {item!r}")
        out[key.strip().lower()] = value.strip()
    return out


def _float(params: Dict[str, str], key: str, spec: str, default=None) -> float:
    if key not in params:
        if default is None:
            raise InvalidParameterError(f"source {spec!r} needs {key}=...")
        return float(default)
    try:
        return float(params[key])
    except ValueError:
        raise InvalidParameterError(f"{key} must be a number in source {spec!r}") from None


def parse_source(spec: str, local_dim: int) -> UnitarySource:
    kind, rest = _split(spec)
    if kind == "haar":
        if rest not in ("", "special"):
            raise InvalidParameterError(f"haar takes no options except 'special', got {rest!r}")
        return UnitarySource.haar(special=rest == "special")

    if kind == "cycle":
        if not rest:
            raise InvalidParameterError("cycle source needs a matrix-list file: cycle:<path>")
        return UnitarySource.deterministic(load_matrix_list(Path(rest)), label=f"cycle:{rest}")

    if kind == "schedule":
        name, _, opts = rest.partition(",")
        name = name.strip().lower()
        sched = _params(opts, spec)
        if name in ("two-qubit", "two-qubit-c"):
            return deterministic_schedule("two-qubit-c", _float(sched, "c", spec, TWO_QUBIT_C))
        if name in ("three-qubit", "three-qubit-xyz"):
            return deterministic_schedule("three-qubit-xyz")
        raise InvalidParameterError(f"unknown schedule {name!r}")

    params = _params(rest, spec)
    if kind == "biased":
        p_g = _float(params, "pg", spec)
        g_kind = params.get("g", "delta")
        if g_kind == "delta":
            g = GSpec("delta-at", load_matrix(Path(params["v"]))) if "v" in params else default_delta(local_dim)
        elif g_kind == "narrow":
            g = GSpec("narrow-haar", eps=_float(params, "eps", spec, DEFAULT_NARROW_EPS))
        else:
            raise InvalidParameterError(f"g must be delta or narrow, got {g_kind!r}")
        return UnitarySource.biased(p_g, g)

    if kind == "ising":
        try:
            n = int(params.get("n", ""))
        except ValueError:
            raise InvalidParameterError(f"ising source needs an integer n=..., got {spec!r}") from None
        alpha = _float(params, "alpha", spec) if "alpha" in params else default_alpha(n)
        return UnitarySource.ising(n, alpha)

    raise InvalidParameterError(f"unknown source kind {kind!r} in {spec!r}")
