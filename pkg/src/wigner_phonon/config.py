"""JSON configuration: schema validation and construction of library objects."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import jsonschema
import numpy as np

from .bose_integrals import BranchConfig, QuadratureSpec
from .dispersion import DispersionModel, PhysicalScales
from .errors import ConfigError, DomainError
from .local_temperature import BranchEnsemble

SCHEMA_VERSION = 1

_number_or_expr = {"oneOf": [{"type": "number", "exclusiveMinimum": 0}, {"type": "string"}]}

SCHEMA = {
    "type": "object",
    "required": ["units"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "units": {"enum": ["nondimensional", "SI"]},
        "k_B": {"type": "number", "exclusiveMinimum": 0},
        "hbar_eff": {"type": "number", "minimum": 0},
        "quadrature": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "relative_tolerance": {"type": "number", "exclusiveMinimum": 0},
                "absolute_tolerance": {"type": "number", "exclusiveMinimum": 0},
                "max_subdivisions": {"type": "integer", "minimum": 8},
                "radial_transform": {"enum": ["exp-substitution", "algebraic-mapping"]},
            },
        },
        "branches": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["dispersion", "param"],
                "additionalProperties": False,
                "properties": {
                    "label": {"type": "string"},
                    "dispersion": {"enum": ["debye", "einstein", "quadratic"]},
                    "param": {"type": "number", "exclusiveMinimum": 0},
                    "dim": {"enum": [1, 2, 3]},
                    "tau_W": _number_or_expr,
                    "tau_Q": _number_or_expr,
                    "bz_volume": {"type": "number", "exclusiveMinimum": 0},
                },
            },
        },
        "conductivity": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "temperatures": {"type": "array", "minItems": 1,
                                 "items": {"type": "number", "exclusiveMinimum": 0}},
                "quantum_correction": {"type": "boolean"},
            },
        },
        "temperature": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "branch_energies": {"type": "array", "items": {"type": "number"}},
                "branch_temperatures": {"type": "array",
                                        "items": {"type": "number", "exclusiveMinimum": 0}},
            },
        },
        "tensors": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"temperature": {"type": "number", "exclusiveMinimum": 0}},
        },
        "simulation": {
            "type": "object",
            "required": ["length", "n_cells", "initial_T", "t_end"],
            "additionalProperties": False,
            "properties": {
                "length": {"type": "number", "exclusiveMinimum": 0},
                "n_cells": {"type": "integer", "minimum": 16},
                "boundary": {"enum": ["periodic", "fixed-temperature"]},
                "initial_T": {"oneOf": [{"type": "string"},
                                        {"type": "array", "items": {"type": "number"}}]},
                "initial_flux": {"type": "array", "items": {"type": "number"}},
                "branch_T": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
                "wall_T": {"type": "array", "minItems": 2, "maxItems": 2,
                           "items": {"type": "number", "exclusiveMinimum": 0}},
                "t_end": {"type": "number", "minimum": 0},
                "cfl": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "output_interval": {"type": "number", "exclusiveMinimum": 0},
                "quantum": {"type": "boolean"},
                "w2_le": {"enum": ["energy-conserving", "zero"]},
                "reconstruction": {"enum": ["muscl", "first-order"]},
            },
        },
    },
}

DEFAULT_BRANCH = {"label": "LA", "dispersion": "debye", "param": 1.0, "dim": 3}


def load(path) -> tuple[dict, bytes]:
    """Read and validate a JSON config file; returns (tree, raw bytes)."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {str(path)!r}: {exc.strerror}") from exc
    return parse(raw, str(path)), raw


def parse(raw: bytes | str, source: str = "<config>") -> dict:
    text = raw.decode() if isinstance(raw, bytes) else raw
    try:
        tree = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    validate(tree, source)
    return tree


def validate(tree: dict, source: str = "<config>"):
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(tree), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"{source}: field {where}: {err.message}")


def digest(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


# -- expressions ----------------------------------------------------------------

_FUNCS = ("sin", "cos", "tan", "exp", "log", "sqrt", "tanh", "cosh", "sinh", "Abs",
          "Heaviside", "Piecewise", "Min", "Max")


def compile_expression(expr: str, variables: tuple[str, ...], constants: dict | None = None):
    """Turn a formula string into a numpy function of the given variables."""
    import sympy
    from sympy.parsing.sympy_parser import parse_expr, standard_transformations

    syms = {v: sympy.Symbol(v, real=True) for v in variables}
    local = dict(syms)
    local.update({name: getattr(sympy, name) for name in _FUNCS})
    local["pi"] = sympy.pi
    local["E"] = sympy.E
    for k, v in (constants or {}).items():
        local[k] = sympy.Float(v)
    try:
        parsed = parse_expr(expr, local_dict=local, transformations=standard_transformations)
    except Exception as exc:
        raise ConfigError(f"cannot parse expression {expr!r}: {exc}") from exc
    unknown = {str(s) for s in parsed.free_symbols} - set(variables)
    if unknown:
        raise ConfigError(f"expression {expr!r} uses unknown names {sorted(unknown)}")
    fn = sympy.lambdify([syms[v] for v in variables], parsed, modules="numpy")

    def wrapped(*args):
        out = fn(*args)
        return np.broadcast_to(np.asarray(out, dtype=float), np.broadcast(*args).shape).copy()

    wrapped.expression = expr
    return wrapped


# -- builders ----------------------------------------------------------------------

def scales(tree: dict, hbar_override: float | None = None) -> PhysicalScales:
    hbar = tree.get("hbar_eff", 0.0) if hbar_override is None else hbar_override
    if tree["units"] == "SI":
        return PhysicalScales(hbar_eff=hbar, k_B=tree.get("k_B", 1.380649e-23), unit_system="SI")
    return PhysicalScales(hbar_eff=hbar, k_B=tree.get("k_B", 1.0))


def quadrature(tree: dict) -> QuadratureSpec:
    return QuadratureSpec(**tree.get("quadrature", {}))


def _tau(value, label, name):
    if isinstance(value, str):
        return compile_expression(value, ("T",))
    return float(value)


def branches(tree: dict) -> list[BranchConfig]:
    out = []
    for i, b in enumerate(tree.get("branches", [DEFAULT_BRANCH])):
        label = b.get("label", f"branch{i}")
        try:
            model = DispersionModel(b["dispersion"], float(b["param"]), int(b.get("dim", 3)))
            out.append(BranchConfig(label, model,
                                    tau_W=_tau(b.get("tau_W", 1.0), label, "tau_W"),
                                    tau_Q=_tau(b.get("tau_Q", 1.0), label, "tau_Q"),
                                    bz_volume=b.get("bz_volume")))
        except DomainError as exc:
            raise ConfigError(f"field branches/{i}: {exc}") from exc
    return out


def ensemble(tree: dict, hbar_override: float | None = None) -> BranchEnsemble:
    try:
        return BranchEnsemble(branches(tree), scales(tree, hbar_override))
    except DomainError as exc:
        raise ConfigError(f"field branches: {exc}") from exc


def scenario(tree: dict, hbar_override: float | None = None, no_quantum: bool = False):
    from .transport_solver import ScenarioConfig

    if "simulation" not in tree:
        raise ConfigError("field simulation: required for the simulate command")
    sim = tree["simulation"]
    ens = ensemble(tree, hbar_override)
    init = sim["initial_T"]
    if isinstance(init, str):
        init = compile_expression(init, ("x",), {"L": sim["length"]})
    hbar = ens.scales.hbar_eff
    try:
        return ScenarioConfig(
            ensemble=ens, length=float(sim["length"]), n_cells=int(sim["n_cells"]),
            initial_T=init, boundary=sim.get("boundary", "periodic"), hbar_eff=hbar,
            quantum=sim.get("quantum", True) and not no_quantum, t_end=float(sim["t_end"]),
            cfl=float(sim.get("cfl", 0.5)), output_interval=sim.get("output_interval"),
            initial_flux=sim.get("initial_flux"), branch_T=sim.get("branch_T"), wall_T=tuple(sim["wall_T"]) if "wall_T" in sim else None,
            w2_le=sim.get("w2_le", "energy-conserving"),
            reconstruction=sim.get("reconstruction", "muscl"), spec=quadrature(tree))
    except DomainError as exc:
        raise ConfigError(f"field simulation: {exc}") from exc
