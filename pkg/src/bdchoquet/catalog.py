"""Named functions, capacities, families, operators and checks for config files."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .capacities import (
    Capacity,
    Dirac,
    DistortedLebesgue,
    Distortion,
    LebesgueBorel,
    Possibility,
    Scaled,
    UnimodalDistribution,
)
from .exceptions import ConfigurationError
from .operators import AllDirac, CapacityFamily, Constant, MixedDiracTail, PossibilityFamily

FUNCTIONS_1D = {
    "e0": ("constant 1", lambda t: np.ones_like(np.asarray(t, dtype=float))),
    "e1": ("t", lambda t: np.asarray(t, dtype=float) * 1.0),
    "t^2": ("t^2", lambda t: np.asarray(t, dtype=float) ** 2),
    "exp": ("(e^t - 1)/(e - 1)", lambda t: np.expm1(t) / np.expm1(1.0)),
    "abs-shift": ("|t - shift|, shift from f.shift (default 0.5)", None),
    "poly": ("sum_j c_j t^j with f.coeffs=c0,c1,...", None),
}

FUNCTIONS_SIMPLEX = {
    "x1+x2": ("x1 + x2 on S^2", lambda a, b: np.asarray(a) + np.asarray(b)),
    "x1^2": ("x1^2 on S^2", lambda a, b: np.asarray(a, dtype=float) ** 2 + 0.0 * np.asarray(b)),
    "e0": ("constant 1 on S^2", lambda a, b: np.ones_like(np.asarray(a, dtype=float))),
}

CAPACITIES = {
    "lebesgue": "Lebesgue length (area on S^2)",
    "sqrt-lebesgue": "sqrt of Lebesgue",
    "sin-lebesgue": "sin of Lebesgue",
    "power-lebesgue": "Lebesgue to the power p (capacity.p in (0, 1])",
    "possibility-bump": "possibility measure of the Bernstein bump (capacity.n, capacity.k)",
    "dirac": "unit point mass (capacity.point)",
}

FAMILIES = {
    "constant": "one capacity for every index (family.capacity)",
    "possibility": "possibility measures of the Bernstein bumps",
    "dirac-tail": "Dirac at k/n for k < n, family.capacity at k = n",
    "all-dirac": "Dirac at k/n for every k",
}

OPERATORS = {
    "bernstein": "classical Bernstein B_n",
    "durrmeyer": "classical Durrmeyer with an additive capacity (operator.delta)",
    "genuine": "classical genuine Bernstein-Durrmeyer G_n",
    "mn-gamma": "general operator with a capacity family (operator.family)",
    "dn-possibility": "possibility-measure operator",
    "dn-single-mu": "Durrmeyer shape with one capacity (operator.mu)",
    "dbar": "delta terms for k < n, Choquet mu term at k = n",
    "dtilde": "Choquet mu term at k = 0, delta terms for k >= 1",
    "dstar": "Choquet mu terms at k = 0 and k = n",
    "genuine-u": "genuine Choquet operator (operator.nu0, operator.nun, operator.middle)",
}

THEOREMS = {
    "lemma-4.2": "closed-form critical points vs brute force",
    "thm-3.1i": "pointwise estimate with the modulus of continuity",
    "thm-3.1ii": "uniform estimate with the K-functional (d = 1)",
    "thm-3.3": "L^1_mu estimate with the K-bar functional",
    "thm-3.4": "L^p_mu estimate with the K-bar functional (p > 1)",
    "thm-4.1": "concrete pointwise estimate for the possibility operator",
    "improvement": "Dirac-tail and genuine operators beat the classical ones",
}

KINDS = ("integrate", "operator-eval", "bound-check", "compare", "sweep", "property-suite")


def list_catalog() -> str:
    sections = [
        ("kinds", {k: "" for k in KINDS}),
        ("functions", {k: v[0] for k, v in FUNCTIONS_1D.items()}),
        ("simplex functions", {k: v[0] for k, v in FUNCTIONS_SIMPLEX.items()}),
        ("capacities", CAPACITIES),
        ("families", FAMILIES),
        ("operators", OPERATORS),
        ("theorems", THEOREMS),
    ]
    lines = []
    for title, items in sections:
        lines.append(f"{title}:")
        for name, desc in items.items():
            lines.append(f"  {name:<18} {desc}".rstrip())
    return "\n".join(lines) + "\n"


def _float(cfg: dict, key: str, default=None) -> float:
    raw = cfg.get(key, default)
    if raw is None:
        raise ConfigurationError(f"field '{key}' is required")
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigurationError(f"field '{key}': expected a number, got {raw!r}") from None


def _int(cfg: dict, key: str, default=None) -> int:
    raw = cfg.get(key, default)
    if raw is None:
        raise ConfigurationError(f"field '{key}' is required")
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise ConfigurationError(f"field '{key}': expected an integer, got {raw!r}") from None


def resolve_function(cfg: dict, key: str = "f", simplex: bool = False) -> Callable:
    name = cfg.get(key)
    if name is None:
        raise ConfigurationError(f"field '{key}' is required")
    if simplex:
        if name not in FUNCTIONS_SIMPLEX:
            raise ConfigurationError(f"field '{key}': unknown simplex function {name!r}")
        return FUNCTIONS_SIMPLEX[name][1]
    if name == "abs-shift":
        s = _float(cfg, f"{key}.shift", 0.5)
        return lambda t: np.abs(np.asarray(t, dtype=float) - s)
    if name == "poly":
        raw = cfg.get(f"{key}.coeffs")
        if raw is None:
            raise ConfigurationError(f"field '{key}.coeffs' is required for poly")
        try:
            c = [float(v) for v in raw.strip("[]").split(",")]
        except ValueError:
            raise ConfigurationError(f"field '{key}.coeffs': expected numbers, got {raw!r}") from None
        return lambda t: np.polynomial.polynomial.polyval(np.asarray(t, dtype=float), c)
    if name not in FUNCTIONS_1D:
        raise ConfigurationError(f"field '{key}': unknown function {name!r}")
    return FUNCTIONS_1D[name][1]


def resolve_capacity(cfg: dict, key: str) -> Capacity:
    """``key=<catalog name>`` or a tagged record ``key.kind=...`` with sub-fields."""
    name = cfg.get(key) or cfg.get(f"{key}.kind")
    if name is None:
        raise ConfigurationError(f"field '{key}' is required")
    if name == "distorted-lebesgue":
        gamma = cfg.get(f"{key}.gamma")
        if gamma not in ("sqrt", "sin", "identity", "power"):
            raise ConfigurationError(f"field '{key}.gamma': unknown distortion {gamma!r}")
        name = "lebesgue" if gamma == "identity" else f"{gamma}-lebesgue"
    if name == "lebesgue":
        cap: Capacity = LebesgueBorel()
    elif name == "sqrt-lebesgue":
        cap = DistortedLebesgue(Distortion.sqrt())
    elif name == "sin-lebesgue":
        cap = DistortedLebesgue(Distortion.sin())
    elif name == "power-lebesgue":
        p = _float(cfg, f"{key}.p")
        try:
            cap = DistortedLebesgue(Distortion.power(p))
        except ValueError as e:
            raise ConfigurationError(f"field '{key}.p': {e}") from None
    elif name in ("possibility-bump", "possibility"):
        n, k = _int(cfg, f"{key}.n"), _int(cfg, f"{key}.k")
        try:
            cap = Possibility(UnimodalDistribution.bump(n, k))
        except ValueError as e:
            raise ConfigurationError(f"field '{key}': {e}") from None
    elif name == "dirac":
        cap = Dirac(_float(cfg, f"{key}.point"))
    else:
        raise ConfigurationError(f"field '{key}': unknown capacity {name!r}")
    if f"{key}.scale" in cfg:
        factor = _float(cfg, f"{key}.scale")
        if factor < 0:
            raise ConfigurationError(f"field '{key}.scale' must be >= 0")
        cap = Scaled(cap, factor)
    return cap


def resolve_family(cfg: dict, key: str) -> CapacityFamily:
    name = cfg.get(key, "possibility")
    if name == "possibility":
        return PossibilityFamily()
    if name == "all-dirac":
        return AllDirac()
    if name == "constant":
        return Constant(resolve_capacity(cfg, f"{key}.capacity"))
    if name == "dirac-tail":
        return MixedDiracTail(resolve_capacity(cfg, f"{key}.capacity"))
    raise ConfigurationError(f"field '{key}': unknown family {name!r}")
