"""Batch command-line front end.

Subcommands map one-to-one onto library scans and emit deterministic
figure-ready tables (CSV with ``#`` comment headers, or a JSON mirror with
the same columns).  Numeric ranges use the inclusive ``start:stop:count``
syntax everywhere.

Exit codes: 0 success, 2 argument/document parse error, 3 validation or
schema error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

import numpy as np

from . import __version__
from .bdg import build_bloch, build_real_space, to_quadrature
from .dynamics import (
    GaussianState,
    evolve_state,
    logarithmic_negativity,
    propagate,
    regime_map,
    squeezing_factor,
)
from .errors import (
    GapClosedError,
    NumericalError,
    ParseError,
    QbsimError,
    ValidationError,
)
from .model import PRESET_NAMES, build_preset, load_model
from .spectral import classify_regime, detect_ep, eig
from .topology import (
    band_windings,
    bogoliubov_diagonalize,
    obc_pbc_spectra,
    skin_metrics,
    winding_number,
)
from .transport import (
    PortSpec,
    chain_scattering_scan,
    nonreciprocity_report,
    scattering,
    susceptibility,
)

EXIT_PARSE, EXIT_VALIDATION, EXIT_NUMERICAL = 2, 3, 4


def parse_range(text):
    """Inclusive numeric range ``start:stop:count``."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ParseError(f"range {text!r} must be start:stop:count")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ParseError(f"range {text!r}: {exc}") from exc
    if count < 1:
        raise ParseError(f"range {text!r}: count must be >= 1")
    return np.linspace(start, stop, count)


def _format(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


class Table:
    """Column-oriented result table with a parameter header."""

    def __init__(self, command, params, columns):
        self.command = command
        self.params = dict(params)
        self.columns = list(columns)
        self.rows = []

    def add(self, *row):
        if len(row) != len(self.columns):
            raise ValueError("row width mismatch")
        self.rows.append(list(row))

    def to_csv(self):
        lines = [f"# qbsim {self.command} (v{__version__})"]
        for key in sorted(self.params):
            lines.append(f"# {key} = {_format(self.params[key])}")
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(_format(x) for x in row))
        return "\n".join(lines) + "\n"

    def to_json(self):
        def plain(x):
            if isinstance(x, (np.integer,)):
                return int(x)
            if isinstance(x, (np.floating,)):
                return float(x)
            if isinstance(x, (np.bool_, bool)):
                return bool(x)
            return x

        doc = {
            "command": self.command,
            "params": {k: plain(v) for k, v in self.params.items()},
            "columns": self.columns,
            "rows": [[plain(x) for x in row] for row in self.rows],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def write(self, path, fmt):
        text = self.to_csv() if fmt == "csv" else self.to_json()
        if path in (None, "-"):
            sys.stdout.write(text)
        else:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)


def read_table(path):
    """Parse a file previously written by :class:`Table` (either format)."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        return doc["columns"], doc["rows"], doc["params"]
    params = {}
    columns = None
    rows = []
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            if "=" in line:
                key, _, val = line[1:].partition("=")
                params[key.strip()] = val.strip()
            continue
        cells = line.split(",")
        if columns is None:
            columns = cells
        else:
            rows.append([_maybe_num(c) for c in cells])
    return columns, rows, params


def _maybe_num(text):
    try:
        v = float(text)
    except ValueError:
        return text
    return int(v) if v.is_integer() and "." not in text and "e" not in text.lower() else v


# ---------------------------------------------------------------------------
# model / parameter plumbing
# ---------------------------------------------------------------------------

_KNOWN_PARAMS = {
    "J", "kappa", "phi-J", "phi-kappa", "delta", "gamma", "n", "cells",
    "t1", "t2", "g1", "g2", "g", "eta", "t", "Delta", "mu", "theta",
    "boundary",
}


def _collect_params(extras):
    """Parse leftover ``--name value`` / ``--name-range r`` flags."""
    params, sweeps = {}, {}
    i = 0
    while i < len(extras):
        tok = extras[i]
        if not tok.startswith("--"):
            raise ParseError(f"unexpected argument {tok!r}")
        name = tok[2:]
        if "=" in name:
            name, _, value = name.partition("=")
            i += 1
        else:
            if i + 1 >= len(extras):
                raise ParseError(f"flag {tok} needs a value")
            value = extras[i + 1]
            i += 2
        if name.endswith("-range"):
            base = name[: -len("-range")]
            if base not in _KNOWN_PARAMS:
                raise ParseError(f"unknown sweep parameter {base!r}")
            sweeps[base.replace("-", "_")] = parse_range(value)
        else:
            if name not in _KNOWN_PARAMS:
                raise ParseError(f"unknown parameter {name!r}")
            if name == "boundary":
                params["boundary"] = value
            else:
                try:
                    params[name.replace("-", "_")] = float(value)
                except ValueError as exc:
                    raise ParseError(f"--{name}: {exc}") from exc
    return params, sweeps


def _load_model_arg(args, params):
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            return load_model(fh.read()), {"config": args.config}
    if not args.preset:
        raise ParseError("either --preset or --config is required")
    return build_preset(args.preset, **params), {"preset": args.preset, **params}


def _preset_factory(preset, params, sweep_name):
    def make(value):
        p = dict(params)
        p[sweep_name] = value
        return build_preset(preset, **p)

    return make


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_spectrum(args, extras):
    params, sweeps = _collect_params(extras)
    if len(sweeps) > 1:
        raise ParseError("spectrum takes at most one swept parameter")
    if sweeps:
        name, values = next(iter(sweeps.items()))
        if not args.preset:
            raise ParseError("sweeps need --preset")
        table = Table(
            "spectrum",
            {"preset": args.preset, "sweep": name, **params},
            [name, "branch", "re", "im", "regime"],
        )
        for v in values:
            model = build_preset(args.preset, **{**params, name: v})
            res = eig(build_real_space(model))
            label = classify_regime(res, tol=args.regime_tol)
            order = np.lexsort((res.eigenvalues.imag, res.eigenvalues.real))
            for b, idx in enumerate(order):
                lam = res.eigenvalues[idx]
                table.add(v, b, lam.real, lam.imag, str(label))
        return table
    model, meta = _load_model_arg(args, params)
    res = eig(build_real_space(model))
    label = classify_regime(res, tol=args.regime_tol)
    table = Table("spectrum", meta, ["branch", "re", "im", "regime"])
    order = np.lexsort((res.eigenvalues.imag, res.eigenvalues.real))
    for b, idx in enumerate(order):
        lam = res.eigenvalues[idx]
        table.add(b, lam.real, lam.imag, str(label))
    return table


def _cmd_ep_scan(args, extras):
    params, sweeps = _collect_params(extras)
    if len(sweeps) != 1:
        raise ParseError("ep-scan needs exactly one --<param>-range")
    if not args.preset:
        raise ParseError("ep-scan needs --preset")
    name, values = next(iter(sweeps.items()))
    factory = _preset_factory(args.preset, params, name)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        found = detect_ep(factory, values)
    table = Table(
        "ep-scan",
        {"preset": args.preset, "sweep": name, **params,
         "warnings": "; ".join(str(w.message) for w in caught)},
        [name, "ep_order", "defectiveness"],
    )
    for c in found:
        table.add(c.value, c.order, c.defectiveness)
    return table


def _cmd_winding(args, extras):
    params, sweeps = _collect_params(extras)
    e_ref = complex(args.eref_re, args.eref_im)

    def analyze(model):
        bloch = build_bloch(model)
        det_w = winding_number(bloch, e_ref, n_grid=args.n_grid)
        loops = band_windings(bloch, e_ref, n_grid=args.n_grid)
        loop_max = max((abs(l.winding) for l in loops), default=0)
        return det_w.winding, loop_max, det_w.phase_residual

    if sweeps:
        if len(sweeps) > 1:
            raise ParseError("winding takes at most one swept parameter")
        if not args.preset:
            raise ParseError("sweeps need --preset")
        name, values = next(iter(sweeps.items()))
        table = Table(
            "winding",
            {"preset": args.preset, "sweep": name, "eref_re": e_ref.real,
             "eref_im": e_ref.imag, "n_grid": args.n_grid, **params},
            [name, "det_winding", "band_winding_max", "phase_residual", "on_gap"],
        )
        for v in values:
            model = build_preset(args.preset, **{**params, name: v})
            try:
                det_w, loop_max, resid = analyze(model)
                table.add(v, det_w, loop_max, resid, False)
            except GapClosedError:
                # critical points sit on the spectrum; record, keep scanning
                table.add(v, 0, 0, float("nan"), True)
        return table
    model, meta = _load_model_arg(args, params)
    table = Table(
        "winding",
        {**meta, "eref_re": e_ref.real, "eref_im": e_ref.imag,
         "n_grid": args.n_grid},
        ["det_winding", "band_winding_max", "phase_residual"],
    )
    table.add(*analyze(model))
    return table


def _cmd_skin(args, extras):
    params, sweeps = _collect_params(extras)
    if sweeps:
        raise ParseError("skin does not sweep; run once per configuration")
    model, meta = _load_model_arg(args, params)
    tr = bogoliubov_diagonalize(build_real_space(model))
    metrics = skin_metrics(tr, args.edge_fraction)
    meta = {**meta, "edge_fraction": args.edge_fraction,
            "mean_edge_weight": metrics.mean_edge_weight,
            "mean_ipr": metrics.mean_ipr}
    if args.profiles:
        table = Table("skin", meta, ["mode", "site", "rho"])
        for k in range(metrics.profiles.shape[0]):
            for j in range(metrics.profiles.shape[1]):
                table.add(k, j, metrics.profiles[k, j])
        return table
    table = Table("skin", meta, ["mode", "re", "im", "edge_weight", "ipr"])
    for k, lam in enumerate(tr.values):
        table.add(k, lam.real, lam.imag, metrics.edge_weight[k], metrics.ipr[k])
    return table


def _cmd_transport(args, extras):
    params, sweeps = _collect_params(extras)
    if sweeps:
        raise ParseError("transport does not sweep; use chain-scan for curves")
    model, meta = _load_model_arg(args, params)
    gauge = np.full(model.n_modes, args.phi)
    if args.ports:
        ports = PortSpec(
            ports=tuple(
                (int(p.split("=")[0]), float(p.split("=")[1]))
                for p in args.ports.split(",")
            ),
            internal_loss=args.internal_loss,
            omega=args.omega,
        )
        resp = scattering(model, ports, gauge=gauge)
    else:
        resp = susceptibility(model, gauge=gauge, omega=args.omega)
    meta = {**meta, "kind": resp.kind, "omega": args.omega, "phi": args.phi}
    table = Table(
        "transport", meta,
        ["channel_to", "channel_from", "re", "im", "abs", "asymmetry"],
    )
    pairs = {(p.channel_to, p.channel_from): p.asymmetry
             for p in nonreciprocity_report(resp)}
    nc = len(resp.channels)
    for i in range(nc):
        for j in range(nc):
            val = complex(resp.data[i, j])
            asym = pairs.get((resp.channels[i], resp.channels[j]), 0.0)
            table.add(resp.channels[i], resp.channels[j],
                      val.real, val.imag, abs(val), asym)
    return table


def _cmd_chain_scan(args, extras):
    params, sweeps = _collect_params(extras)
    if sweeps:
        raise ParseError("chain-scan parameters are fixed flags")
    n = int(params.pop("n", 13))
    t = params.pop("t", 1.0)
    delta = params.pop("Delta", 0.5)
    theta = params.pop("theta", 0.0)
    if params:
        raise ParseError(f"chain-scan: unexpected parameters {sorted(params)}")
    omegas = parse_range(args.omega_range)
    scan = chain_scattering_scan(
        n, t, delta, theta, omegas,
        internal_loss=args.internal_loss if args.internal_loss else None,
    )
    table = Table(
        "chain-scan",
        {"n": n, "t": t, "Delta": delta, "theta": theta,
         "omega_range": args.omega_range},
        ["omega", "gain_right", "gain_left", "reflection"],
    )
    for i, w in enumerate(scan.omegas):
        table.add(w, scan.gain_right[i], scan.gain_left[i], scan.reflection[i])
    return table


def _cmd_evolve(args, extras):
    params, sweeps = _collect_params(extras)
    if sweeps:
        raise ParseError("evolve does not sweep")
    model, meta = _load_model_arg(args, params)
    times = parse_range(args.t_range)
    trace = squeezing_factor(model, times)
    k = to_quadrature(build_real_space(model))
    vac = GaussianState.vacuum(model.n_modes)
    table = Table(
        "evolve",
        {**meta, "t_range": args.t_range, "regime": trace.regime},
        ["t", "S", "E_N", "max_cov_eig"],
    )
    for i, t in enumerate(times):
        st = evolve_state(vac, propagate(k, float(t)))
        en = logarithmic_negativity(st, [0])
        table.add(t, trace.values[i], en, float(np.linalg.eigvalsh(st.cov).max()))
    return table


def _cmd_regime_map(args, extras):
    params, sweeps = _collect_params(extras)
    etas = sweeps.pop("eta", None)
    gs = sweeps.pop("g", None)
    if etas is None or gs is None or sweeps:
        raise ParseError("regime-map needs --eta-range and --g-range")
    tms = params.pop("J", 1.0)
    if params:
        raise ParseError(f"regime-map: unexpected parameters {sorted(params)}")
    points = regime_map(etas, gs, tms_strength=tms, t_max=args.t_max)
    table = Table(
        "regime-map", {"J": tms, "t_max": args.t_max},
        ["eta", "g", "regime", "dynamics", "agree"],
    )
    for p in points:
        table.add(p.eta, p.g, p.regime, p.dynamics, p.agree)
    return table


def _cmd_obc_pbc(args, extras):
    params, sweeps = _collect_params(extras)
    if sweeps:
        raise ParseError("obc-pbc does not sweep")
    model, meta = _load_model_arg(args, params)
    spectra = obc_pbc_spectra(model, n_grid=args.n_grid)
    meta = {**meta, "max_imag_obc": spectra.max_imag_obc,
            "pbc_encloses_obc": spectra.pbc_encloses_obc, "n_grid": args.n_grid}
    table = Table("obc-pbc", meta, ["which", "re", "im"])
    for lam in np.sort_complex(spectra.obc):
        table.add("obc", lam.real, lam.imag)
    for lam in np.sort_complex(spectra.pbc):
        table.add("pbc", lam.real, lam.imag)
    return table


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "ep-scan": _cmd_ep_scan,
    "winding": _cmd_winding,
    "skin": _cmd_skin,
    "transport": _cmd_transport,
    "chain-scan": _cmd_chain_scan,
    "evolve": _cmd_evolve,
    "regime-map": _cmd_regime_map,
    "obc-pbc": _cmd_obc_pbc,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qbsim",
        description="batch scans over quadratic bosonic lattice models",
        allow_abbrev=False,
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub_kw = {"allow_abbrev": False}

    def common(p, preset_help="named preset"):
        p.add_argument("--preset", choices=PRESET_NAMES, help=preset_help)
        p.add_argument("--config", help="model document file (JSON)")
        p.add_argument("-o", "--output", default="-", help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("spectrum", **sub_kw, help="eigenvalues, optionally over one parameter sweep")
    common(p)
    p.add_argument("--regime-tol", type=float, default=1e-8)

    p = sub.add_parser("ep-scan", **sub_kw, help="exceptional points along a parameter sweep")
    common(p)

    p = sub.add_parser("winding", **sub_kw, help="point-gap winding numbers at a reference energy")
    common(p)
    p.add_argument("--eref", dest="eref_re", type=float, default=0.0)
    p.add_argument("--eref-imag", dest="eref_im", type=float, default=0.0)
    p.add_argument("--n-grid", type=int, default=1024)

    p = sub.add_parser("skin", **sub_kw, help="skin-effect localization metrics")
    common(p)
    p.add_argument("--edge-fraction", type=float, default=0.1)
    p.add_argument("--profiles", action="store_true",
                   help="emit per-site profiles instead of per-mode summaries")

    p = sub.add_parser("transport", **sub_kw, help="susceptibility or scattering at one frequency")
    common(p)
    p.add_argument("--omega", type=float, default=0.0)
    p.add_argument("--phi", type=float, default=0.0, help="uniform gauge angle")
    p.add_argument("--ports", help="comma list mode=rate; empty for susceptibility")
    p.add_argument("--internal-loss", type=float, default=0.0)

    p = sub.add_parser("chain-scan", **sub_kw, help="three-port directional gain curves")
    common(p)
    p.add_argument("--omega-range", default="-3:3:201")
    p.add_argument("--internal-loss", type=float, default=0.0)

    p = sub.add_parser("evolve", **sub_kw, help="squeezing/entanglement trace of the detuned pair model")
    common(p)
    p.add_argument("--t-range", default="0:10:201")

    p = sub.add_parser("regime-map", **sub_kw, help="spectral vs dynamical classes on an (eta, g) grid")
    common(p)
    p.add_argument("--t-max", type=float, default=20.0)

    p = sub.add_parser("obc-pbc", **sub_kw, help="open vs periodic boundary spectra")
    common(p)
    p.add_argument("--n-grid", type=int, default=512)
    return parser


def main(argv=None):
    parser = build_parser()
    args, extras = parser.parse_known_args(argv)
    try:
        table = _COMMANDS[args.command](args, extras)
        table.write(args.output, args.format)
    except ParseError as exc:
        print(f"qbsim: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"qbsim: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"qbsim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except QbsimError as exc:
        print(f"qbsim: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"qbsim: {exc}", file=sys.stderr)
        return EXIT_PARSE
    return 0


if __name__ == "__main__":
    sys.exit(main())
