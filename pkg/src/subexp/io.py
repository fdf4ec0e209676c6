"""Model files and output metadata.

A model file is a JSON object ``{"variant": ..., "params": {...}}`` with an
optional ``"expansion"`` list of ``[c, gamma]`` pairs (``c_0 = 1/Gamma(1 - gamma_0)``).
Examples::

    {"variant": "Stable", "params": {"alpha": 0.5}}
    {"variant": "CompoundPoisson",
     "params": {"total_mass": 1, "law": "exponential", "rate": 1}}
    {"variant": "InfinitePowerTail", "params": {"remainder_order": 1},
     "expansion": [[0.8589370192246677, 0.2], [0.3, 0.1], [0.2, -0.8]]}
"""

import hashlib
import json

from . import __version__
from .errors import ConfigurationError
from .levy import (ABC, BarrierWalk, BetaCoalescent, CompoundPoisson, GammaSubordinator,
                   InfinitePowerTail, LevyModel, Stable)


def _req(params, *names):
    try:
        return [float(params[n]) for n in names]
    except KeyError as exc:
        raise ConfigurationError(f"missing parameter {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"bad parameter value: {exc}") from None


def model_from_dict(d) -> LevyModel:
    if not isinstance(d, dict) or "variant" not in d:
        raise ConfigurationError("model must be an object with a 'variant' key")
    v = d["variant"]
    p = d.get("params", {}) or {}
    exp = d.get("expansion")
    try:
        if v == "Stable":
            return Stable(*_req(p, "alpha"))
        if v == "GammaSub":
            return GammaSubordinator()
        if v == "ABC":
            a, b, c = _req(p, "a", "b", "c")
            return ABC(a, b, c, scale=float(p.get("scale", 1.0)))
        if v == "BetaCoalescent":
            return BetaCoalescent(*_req(p, "alpha", "beta"))
        if v == "BarrierWalk":
            return BarrierWalk(*_req(p, "c"))
        if v == "CompoundPoisson":
            (mass,) = _req(p, "total_mass")
            law = p.get("law")
            if law == "exponential":
                return CompoundPoisson.exponential(mass, *_req(p, "rate"))
            if law == "gamma":
                return CompoundPoisson.gamma(mass, *_req(p, "shape", "rate"))
            if law == "uniform":
                return CompoundPoisson.uniform(mass, *_req(p, "low", "high"))
            raise ConfigurationError("compound Poisson files need law exponential, gamma or "
                                     "uniform; custom tails are only available from Python")
        if v == "InfinitePowerTail":
            if not exp:
                raise ConfigurationError("InfinitePowerTail needs an 'expansion' list")
            coeffs = tuple((float(c), float(g)) for c, g in exp)
            return InfinitePowerTail(coeffs, float(p.get("remainder_order", 1.0)))
    except ConfigurationError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(str(exc)) from None
    raise ConfigurationError(f"unknown variant {v!r}")


def model_to_dict(model: LevyModel):
    params = model.params()
    if model.variant == "CompoundPoisson" and params.get("law") == "custom":
        raise ConfigurationError("custom compound Poisson tails cannot be serialized")
    d = {"variant": model.variant, "params": params}
    if model.variant == "InfinitePowerTail":
        d["expansion"] = model.expansion()
    return d


def canonical_json(d):
    return json.dumps(d, sort_keys=True, separators=(",", ":"))


def model_hash(model_or_dict):
    d = model_or_dict if isinstance(model_or_dict, dict) else model_to_dict(model_or_dict)
    return hashlib.sha256(canonical_json(d).encode()).hexdigest()[:12]


def load_model(path) -> LevyModel:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read model file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None
    return model_from_dict(d)


def dump_model(model: LevyModel, path):
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=2, sort_keys=True)
        fh.write("\n")


def header_lines(model, **meta):
    """'# key=value' lines with model hash and library version first."""
    items = {"model": canonical_json(model_to_dict(model)), "model_hash": model_hash(model),
             "version": __version__}
    items.update({k: v for k, v in meta.items() if v is not None})
    return [f"# {k}={v}" for k, v in items.items()]


__all__ = ["model_from_dict", "model_to_dict", "canonical_json", "model_hash", "load_model",
           "dump_model", "header_lines"]
