"""Command-line interface: ``rfwigner <command> [options]``.

Configuration keys come from defaults, then an optional flat JSON file
(``--config``), then explicit flags. Each command writes into
``--output-dir`` together with a ``manifest.json`` holding the resolved
configuration, master seed and library versions.

Exit codes: 0 success, 1 invalid configuration, 2 numerical failure
(including non-converged reconstructions, whose output is still written),
3 file errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import platform
import sys

import numpy as np

from . import __version__
from . import analysis as an
from .config import ConfigError, RunConfig, load_config, rates_from_physical
from .dynamics import (ChannelSet, DegenerateSteadyStateError, DriveParams,
                       UnsupportedConfigurationError, sigma_minus_ss_analytic)
from .qcore import (InvalidStateError, check_density_matrix, dump_density_matrix,
                    load_density_matrix)
from .trajectory import StepSizeError, read_records, write_records
from .wigner import HermiticityError, UnnormalizedGridError, write_grid

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


class NotConvergedError(RuntimeError):
    pass


class InputFileError(OSError):
    """Unreadable or malformed input file."""


def _versions() -> dict:
    import numba
    import scipy
    return {"rfwigner": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__, "numba": numba.__version__}


def _add_config_flags(p: argparse.ArgumentParser, skip=()) -> None:
    p.add_argument("--config", help="flat JSON file of configuration keys")
    for f in dataclasses.fields(RunConfig):
        if f.name in skip:
            continue
        flag = "--" + f.name.replace("_", "-")
        if f.type in ("bool", bool):
            p.add_argument(flag, dest=f.name, default=None, action=argparse.BooleanOptionalAction)
        else:
            kind = {"int": int, "float": float}.get(f.type, str)
            p.add_argument(flag, dest=f.name, default=None, type=kind)
    p.add_argument("--ghz-scale", type=float, default=None, metavar="GAMMA_MHZ",
                   help="radiative rate in MHz; enables --gamma-phi-khz / --gamma-nr-khz")
    p.add_argument("--gamma-phi-khz", type=float, default=0.0)
    p.add_argument("--gamma-nr-khz", type=float, default=0.0)


def resolve_config(args) -> RunConfig:
    values = {}
    if args.config:
        values.update(load_config(args.config))
    for f in dataclasses.fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    if args.ghz_scale is not None:
        values.update(rates_from_physical(args.ghz_scale, args.gamma_phi_khz, args.gamma_nr_khz))
    return RunConfig.from_dict(values)


def _write_manifest(cfg: RunConfig, command: str, extra=None) -> None:
    manifest = {"command": command, "argv": sys.argv[1:], "seed": cfg.seed,
                "config": cfg.to_dict(), "versions": _versions()}
    manifest.update(extra or {})
    with open(os.path.join(cfg.output_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1)


def _out(cfg: RunConfig, name: str) -> str:
    return os.path.join(cfg.output_dir, name)


def cmd_simulate(cfg: RunConfig, args) -> dict:
    ens = an.simulate(cfg)
    path = args.out or _out(cfg, "records.csv")
    write_records(path, ens.records())
    print(f"wrote {len(ens)} records to {path}")
    return {"records": path, "rows": len(ens)}


def _load_records(path):
    try:
        thetas, J, _ = read_records(path)
    except (ValueError, KeyError) as exc:
        raise InputFileError(f"{path}: {exc}") from exc
    if J.size == 0:
        raise InputFileError(f"{path} holds no trajectory records")
    return thetas, J


def _load_state(path):
    try:
        rho = load_density_matrix(path)
    except (ValueError, KeyError, TypeError) as exc:
        raise InputFileError(f"{path}: {exc}") from exc
    return check_density_matrix(rho)


def cmd_reconstruct(cfg: RunConfig, args) -> dict:
    thetas, J = _load_records(args.records)
    h, res = an.reconstruct(cfg, thetas, J)
    path = args.out or _out(cfg, "state.json")
    dump_density_matrix(res.rho, path, **res.metadata(), records=args.records,
                        overflow=int(h.overflow.sum()))
    print(f"{'converged' if res.converged else 'NOT converged'} after {res.iterations} iterations;"
          f" state written to {path}")
    if not res.converged:
        raise NotConvergedError(f"MLE did not converge in {cfg.max_iter} iterations")
    return {"state": path}


def cmd_wigner(cfg: RunConfig, args) -> dict:
    rho = _load_state(args.state)
    g = an.wigner_of(cfg, rho)
    path = args.out or _out(cfg, "wigner.csv")
    sidecar = os.path.splitext(path)[0] + ".json"
    write_grid(path, g, sidecar)
    with open(sidecar, encoding="utf-8") as fh:
        meta = json.load(fh)
    print(f"wln {meta['wln']:.12g}  integrated negativity {meta['integrated_negativity']:.12g}")
    return {"wigner": path, "sidecar": sidecar}


def _float_list(text: str) -> list[float]:
    """``a,b,c`` or ``start:stop:step`` (stop inclusive)."""
    if ":" in text:
        start, stop, step = (float(s) for s in text.split(":"))
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(n)]
    return [float(s) for s in text.split(",") if s.strip()]


def cmd_sweep(cfg: RunConfig, args) -> dict:
    omegas = _float_list(args.omegas) if args.omegas else [cfg.omega]
    Ts = _float_list(args.Ts) if args.Ts else [cfg.T]
    res = an.run_sweep(omegas, Ts, cfg, checkpoint_dir=_out(cfg, "checkpoints"))
    res.write(_out(cfg, "sweep.csv"), _out(cfg, "sweep.json"))
    for i, o in enumerate(omegas):
        print(" ".join(f"{v:.5f}" for v in res.wln[i]), f"  omega={o:g}")
    if res.metadata["failed_points"]:
        raise RuntimeError(f"{len(res.metadata['failed_points'])} sweep points failed")
    return {"sweep": _out(cfg, "sweep.csv")}


def cmd_bootstrap(cfg: RunConfig, args) -> dict:
    k = 80 if args.full else args.repeats
    rep = an.bootstrap(cfg, k, progress=lambda r, res: print(f"repeat {r}: wln {res.wln:.5f}"))
    path = _out(cfg, "bootstrap.json")
    rep.write(path)
    m, s = rep.mean_std(rep.wln_values)
    print(f"wln {m:.5f} +- {s:.5f}; corr(wln, rho1) {rep.correlations['wln_vs_rho1']:.3f};"
          f" corr(wln, purity) {rep.correlations['wln_vs_purity']:.3f}")
    return {"bootstrap": path}


def cmd_analytic(cfg: RunConfig, args) -> dict:
    gphis = _float_list(args.gamma_phi_list)
    omegas = _float_list(args.omega_grid)
    path = _out(cfg, "analytic.csv")
    header = ["omega"] + [f"r_gphi_{g:g}" for g in gphis] + \
        ["sigma_minus_re", "sigma_minus_im", "displacement_re", "displacement_im"]
    rows = []
    for w in omegas:
        row = [w] + [an.coherent_reflectance(w, 1.0, g) if w > 0 else float("nan") for g in gphis]
        s = sigma_minus_ss_analytic(DriveParams(w, cfg.phase), ChannelSet())
        d = an.displacement(w, cfg.phase, cfg.T)
        rows.append(row + [s.real, s.imag, d.real, d.imag])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    for g in gphis:
        try:
            print(f"gamma_phi={g:g}: incoherent point omega* = {an.incoherent_point(1.0, g):.12g}")
        except ValueError as exc:
            print(f"gamma_phi={g:g}: {exc}")
    print(f"table written to {path}")
    return {"analytic": path}


COMMANDS = {"simulate": cmd_simulate, "reconstruct": cmd_reconstruct, "wigner": cmd_wigner,
            "sweep": cmd_sweep, "bootstrap": cmd_bootstrap, "analytic": cmd_analytic}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rfwigner", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate", help="homodyne trajectory ensemble -> records CSV")
    p.add_argument("--out")
    p = sub.add_parser("reconstruct", help="records CSV -> MLE state JSON")
    p.add_argument("--records", required=True)
    p.add_argument("--out")
    p = sub.add_parser("wigner", help="state JSON -> Wigner grid CSV + JSON sidecar")
    p.add_argument("--state", required=True)
    p.add_argument("--out")
    p = sub.add_parser("sweep", help="WLN over an (omega, T) grid with checkpoints")
    p.add_argument("--omegas", help="a,b,c or start:stop:step")
    p.add_argument("--Ts", help="a,b,c or start:stop:step")
    p = sub.add_parser("bootstrap", help="repeated reconstructions with independent seeds")
    p.add_argument("--repeats", type=int, default=20)
    p.add_argument("--full", action="store_true", help="80 repeats")
    p = sub.add_parser("analytic", help="closed-form reflectance / steady-state tables")
    p.add_argument("--gamma-phi", dest="gamma_phi_list", default="0,0.1,0.2",
                   help="dephasing rates, one reflectance column each")
    p.add_argument("--omega-grid", default="0:1:0.01")
    for name, p in sub.choices.items():
        _add_config_flags(p, skip=("gamma_phi",) if name == "analytic" else ())
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return EXIT_IO
    status, info = EXIT_OK, {}
    try:
        os.makedirs(cfg.output_dir, exist_ok=True)
        info = COMMANDS[args.command](cfg, args)
    except (NotConvergedError, StepSizeError, DegenerateSteadyStateError,
            UnnormalizedGridError, RuntimeError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        status = EXIT_NUMERIC
    except OSError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, UnsupportedConfigurationError, HermiticityError, InvalidStateError,
            ValueError, KeyError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        _write_manifest(cfg, args.command, {"outputs": info, "exit_status": status})
    except OSError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return EXIT_IO
    return status


if __name__ == "__main__":
    sys.exit(main())
