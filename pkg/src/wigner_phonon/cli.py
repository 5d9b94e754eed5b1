"""Command-line entry points.

Exit codes: 0 success, 1 usage or configuration error, 2 domain error
(divergent integral, unrealizable state, ...), 3 verification failure.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import config as cfgmod
from .errors import ConfigError, PhononError

log = logging.getLogger("wigner_phonon")

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_VERIFY = 0, 1, 2, 3
MANIFEST_SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(v) -> str:
    """Shortest round-trip decimal for floats."""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


class Outputs:
    """Writes files under the output directory and records them for the manifest."""

    def __init__(self, out_dir: Path):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files = []

    def csv(self, name, header, rows):
        path = self.dir / name
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(v) for v in row])
        self.files.append(path)
        return path

    def json(self, name, obj):
        path = self.dir / name
        path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")
        self.files.append(path)
        return path

    def manifest(self, command, raw_config, started):
        import hashlib
        entries = [{"path": p.name, "sha256": hashlib.sha256(p.read_bytes()).hexdigest()}
                   for p in self.files]
        man = {
            "schema_version": MANIFEST_SCHEMA_VERSION,
            "command": command,
            "config_digest": cfgmod.digest(raw_config) if raw_config is not None else None,
            "tool_version": __version__,
            "wall_clock_seconds": time.perf_counter() - started,
            "outputs": entries,
        }
        path = self.dir / "manifest.json"
        path.write_text(json.dumps(man, indent=2, sort_keys=True) + "\n")
        return path


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


def _load(args, required=False):
    if args.config is None:
        if required:
            raise ConfigError(f"the {args.command} command needs --config")
        tree = {"units": "nondimensional"}
        cfgmod.validate(tree)
        return tree, None
    return cfgmod.load(args.config)


# -- commands ----------------------------------------------------------------------

def cmd_conductivity(args) -> int:
    from .bose_integrals import closure_integral
    from .heat_flux import conductivity_zero

    tree, raw = _load(args)
    spec = cfgmod.quadrature(tree)
    ens = cfgmod.ensemble(tree, args.hbar)
    cond = tree.get("conductivity", {})
    temps = cond.get("temperatures", [0.5, 1.0, 2.0])
    quantum = cond.get("quantum_correction", False) and not args.no_quantum
    rows = []
    for b in ens:
        ks = []
        for T in temps:
            r = conductivity_zero(b, T, spec, ens.k_B)
            ks.append(r.k_trace)
            diag = np.diag(r.K)
            rows.append([b.label, T, r.k_trace, *diag, r.temperature_exponent])
        if b.dispersion.kind == "einstein":
            log.warning("branch %s: Einstein dispersion has zero group velocity; conductivity is zero",
                        b.label)
        if len(temps) > 1 and all(k > 0 for k in ks):
            fit = float(np.polyfit(np.log(temps), np.log(ks), 1)[0])
        else:
            fit = float("nan")
        for row in rows[-len(temps):]:
            row.append(fit)
        if quantum:
            # the order-hbar^2 flux needs the closure integrals I1 and I2
            I1 = closure_integral("I1", b.dim, spec)
            I2 = closure_integral("I2", b.dim, spec)
            for row in rows[-len(temps):]:
                row.extend([I1, I2])
    d = ens.dim
    header = ["branch", "T", "k0"] + [f"K_{i}{i}" for i in range(1, d + 1)] + ["local_exponent", "fitted_exponent"]
    if quantum:
        header += ["I1", "I2"]
    out = Outputs(args.out)
    out.csv("conductivity.csv", header, rows)
    out.manifest("conductivity", raw, args.started)
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .transport_solver import TransportSolver

    tree, raw = _load(args, required=True)
    scen = cfgmod.scenario(tree, args.hbar, args.no_quantum)
    solver = TransportSolver(scen)
    result = solver.run()
    out = Outputs(args.out)
    labels = [b.label for b in scen.ensemble]
    header = ["x"]
    for lab in labels:
        header += [f"W_{lab}", f"Q_{lab}", f"W0_{lab}", f"Q0_{lab}", f"W2_{lab}", f"Q2_{lab}"]
    header += ["T_LE", "Q0_total", "hbar2_Q2_total"]
    h2 = scen.hbar_eff ** 2 if scen.quantum_active else 0.0
    index = []
    for k, snap in enumerate(result.snapshots):
        cols = [snap.x]
        for i in range(len(labels)):
            cols += [snap.W0[i] + h2 * snap.W2[i], snap.Q0[i] + h2 * snap.Q2[i],
                     snap.W0[i], snap.Q0[i], snap.W2[i], snap.Q2[i]]
        cols += [snap.T_le, snap.flux_zero, h2 * snap.Q2.sum(axis=0)]
        name = f"snapshot_{k:04d}.csv"
        out.csv(name, header, zip(*cols))
        index.append({"file": name, "time": snap.time})
    diag = dict(result.diagnostics)
    diag["schema_version"] = MANIFEST_SCHEMA_VERSION
    diag["snapshots"] = index
    out.json("diagnostics.json", diag)
    out.manifest("simulate", raw, args.started)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verification import SUITES, run_suite

    suites = SUITES if args.suite == "all" else (args.suite,)
    reports = [run_suite(s, args.tolerance) for s in suites]
    ok = all(r["passed"] for r in reports)
    report = {"schema_version": MANIFEST_SCHEMA_VERSION, "passed": ok, "suites": reports}
    out = Outputs(args.out)
    out.json("verify.json", report)
    out.manifest("verify", None, args.started)
    print(json.dumps(report, indent=2, default=_jsonable))
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_temperature(args) -> int:
    from .bose_integrals import equilibrium_energy_density
    from .local_temperature import solve_t_le

    tree, raw = _load(args)
    ens = cfgmod.ensemble(tree, args.hbar)
    spec = cfgmod.quadrature(tree)
    t = tree.get("temperature", {})
    if "branch_energies" in t:
        W = [float(w) for w in t["branch_energies"]]
    elif "branch_temperatures" in t:
        W = [equilibrium_energy_density(b, T, spec, ens.k_B)
             for b, T in zip(ens, t["branch_temperatures"])]
    else:
        raise ConfigError("field temperature: give branch_energies or branch_temperatures")
    if len(W) != len(ens):
        raise ConfigError(f"field temperature: expected {len(ens)} values, got {len(W)}")
    T, eta0 = solve_t_le(ens, W, spec)
    res = {"schema_version": MANIFEST_SCHEMA_VERSION, "T_LE": T, "eta0_LE": eta0,
           "branch_energies": dict(zip([b.label for b in ens], W))}
    out = Outputs(args.out)
    out.json("temperature.json", res)
    out.manifest("temperature", raw, args.started)
    print(json.dumps(res, indent=2))
    return EXIT_OK


def cmd_integral(args) -> int:
    from .bose_integrals import bose_moment, closure_integral, reduced_moment

    if args.kind in ("I1", "I2"):
        value = closure_integral(args.kind, int(args.order))
    elif args.kind == "bose":
        value = bose_moment(args.order)
    else:
        value = reduced_moment(args.order)
    print(json.dumps({"kind": args.kind, "order": args.order, "value": value}))
    return EXIT_OK


def cmd_tensors(args) -> int:
    from .qmep_closure import LagrangeMultipliers, closure_tensors_TU

    tree, raw = _load(args)
    ens = cfgmod.ensemble(tree, args.hbar)
    spec = cfgmod.quadrature(tree)
    T = tree.get("tensors", {}).get("temperature", 1.0)
    res = {"schema_version": MANIFEST_SCHEMA_VERSION, "temperature": T, "branches": {}}
    for b in ens:
        eta = LagrangeMultipliers.equilibrium(T, b.dim, ens.k_B)
        ct = closure_tensors_TU(eta, b, spec)
        res["branches"][b.label] = {"J": ct.J, "T": ct.T3, "U": ct.U4}
    out = Outputs(args.out)
    out.json("tensors.json", res)
    out.manifest("tensors", raw, args.started)
    return EXIT_OK


# -- parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON configuration file")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: out)")
    common.add_argument("--threads", type=int, default=None, help="BLAS/OpenMP thread limit")
    common.add_argument("--hbar", type=float, default=None, help="override hbar_eff from the config")
    common.add_argument("--no-quantum", action="store_true", help="disable the hbar^2 terms")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="wigner-phonon", description="Phonon moment transport with quantum corrections")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("conductivity", parents=[common], help="zero-order conductivity table")
    sub.add_parser("simulate", parents=[common], help="run a slab transport simulation")
    v = sub.add_parser("verify", parents=[common], help="run oracle cross-checks")
    v.add_argument("--suite", choices=("moyal", "closure", "heatflux", "all"), default="all")
    v.add_argument("--tolerance", type=float, default=None, help="override every check tolerance")
    sub.add_parser("temperature", parents=[common], help="solve for the local-equilibrium temperature")
    i = sub.add_parser("integral", parents=[common], help="evaluate one Bose integral")
    i.add_argument("--kind", choices=("bose", "reduced", "I1", "I2"), required=True)
    i.add_argument("--order", type=float, required=True, help="moment order, or dimension for I1/I2")
    sub.add_parser("tensors", parents=[common], help="equilibrium J, T, U closure tensors")
    return p


COMMANDS = {
    "conductivity": cmd_conductivity,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "temperature": cmd_temperature,
    "integral": cmd_integral,
    "tensors": cmd_tensors,
}


def _error(exc: Exception, payload: dict | None = None):
    print(json.dumps(payload or {"error": "usage", "message": str(exc)}), file=sys.stderr)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        _error(exc)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args.started = time.perf_counter()
    limiter = contextlib.nullcontext()
    if args.threads is not None:
        if args.threads < 1:
            _error(ValueError("--threads must be >= 1"))
            return EXIT_USAGE
        from threadpoolctl import threadpool_limits
        limiter = threadpool_limits(limits=args.threads)
    try:
        with limiter:
            return COMMANDS[args.command](args)
    except ConfigError as exc:
        _error(exc, exc.to_dict())
        return EXIT_USAGE
    except PhononError as exc:
        _error(exc, exc.to_dict())
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
