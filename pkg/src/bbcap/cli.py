"""Command-line front end.

Subcommands compute region boundaries and conjecture reports and emit plain
CSV/JSON for plotting. Exit codes: 0 success, 1 usage problem, 2 a claimed
inequality or dominance was violated, 3 truncation/coverage failure. Outputs
are byte-identical for identical resolved configurations and seeds.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__, capacity, conjecture, fock
from .errors import CoverageError, TruncationError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VIOLATION = 2
EXIT_NUMERIC = 3

_TYPES = {
    "eta": float, "nbar": float, "K": float, "beta": float, "threshold": float,
    "beta_steps": int, "D": int, "seed": int, "instances": int, "M": int,
    "steps": int, "restarts": int, "initial_temperature": float,
    "cooling_ratio": float, "proposal_scale": float,
    "detection": str, "constraint": str, "family": str, "which": str,
    "format": str, "out": str, "outer": str, "inner": str,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_config(path: str) -> dict:
    vals = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"config line without '=': {raw.strip()!r}")
            key, value = line.split("=", 1)
            key = key.strip().replace("-", "_")
            if key not in _TYPES:
                raise UsageError(f"unknown config key {key!r}")
            vals[key] = _TYPES[key](value.strip())
    return vals


def _resolve(args, defaults: dict) -> dict:
    """Merge precedence: explicit flags > config file > built-in defaults."""
    cfg = dict(defaults)
    path = getattr(args, "config", None)
    if path:
        file_vals = _read_config(path)
        for key, value in file_vals.items():
            if key in cfg:
                cfg[key] = value
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _require(cfg: dict, *keys):
    for key in keys:
        if cfg.get(key) is None:
            raise UsageError(f"missing required parameter --{key.replace('_', '-')}")


def _emit(text: str, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt(x: float) -> str:
    return f"{float(x):.9g}"


def _csv_text(meta: dict, header: list, rows) -> str:
    lines = [f"# tool: bbcap {__version__}"]
    for key, value in meta.items():
        lines.append(f"# {key}: {value}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _meta(command: str, cfg: dict, skip=("format", "out")) -> dict:
    meta = {"command": command}
    for key, value in cfg.items():
        if key in skip or value is None:
            continue
        meta[key] = value
    return meta


def cmd_region_broadcast(args) -> int:
    defaults = {"eta": None, "nbar": None, "detection": "ultimate",
                "beta_steps": 201, "format": "csv", "out": None}
    cfg = _resolve(args, defaults)
    _require(cfg, "eta", "nbar")
    grid = np.linspace(0.0, 1.0, cfg["beta_steps"])
    curve = capacity.broadcast_region(cfg["detection"], cfg["eta"], cfg["nbar"], grid)
    meta = _meta("region broadcast", cfg)
    rows = list(zip(curve.betas, curve.rb, curve.rc))
    if cfg["format"] == "json":
        payload = {"tool": f"bbcap {__version__}", "metadata": meta,
                   "columns": ["beta", "R_B_bits", "R_C_bits"],
                   "rows": [[float(b), float(x), float(y)] for b, x, y in rows]}
        _emit(_json_text(payload), cfg["out"])
    else:
        _emit(_csv_text(meta, ["beta", "R_B_bits", "R_C_bits"], rows), cfg["out"])
    return EXIT_OK


def cmd_region_mac_envelope(args) -> int:
    defaults = {"eta": None, "nbar": None, "constraint": "total_transmit",
                "beta_steps": 201, "format": "csv", "out": None}
    cfg = _resolve(args, defaults)
    _require(cfg, "eta", "nbar")
    constraint = cfg["constraint"].replace("-", "_")
    env = capacity.mac_envelope(cfg["eta"], cfg["nbar"], constraint, cfg["beta_steps"])
    cfg["constraint"] = constraint
    meta = _meta("region mac-envelope", cfg)
    rows = list(zip(env.r1, env.r2))
    if cfg["format"] == "json":
        payload = {"tool": f"bbcap {__version__}", "metadata": meta,
                   "columns": ["R1_bits", "R2_bits"],
                   "rows": [[float(x), float(y)] for x, y in rows]}
        _emit(_json_text(payload), cfg["out"])
    else:
        _emit(_csv_text(meta, ["R1_bits", "R2_bits"], rows), cfg["out"])
    return EXIT_OK


def _report_exit(reports) -> int:
    if any(r.margin < -r.tolerance for r in reports):
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_conjecture_check(args) -> int:
    defaults = {"which": None, "family": "bose_einstein", "eta": None, "K": None,
                "D": None, "M": 20, "format": "json", "out": None}
    cfg = _resolve(args, defaults)
    _require(cfg, "which", "eta", "K")
    which = cfg["which"]
    family = cfg["family"].replace("-", "_")
    if which == "2":
        D = cfg["D"] if cfg["D"] is not None else 200
        m_arg = cfg["M"] if family == "binomial" else None
        report = conjecture.check_conj2_family(family, cfg["eta"], cfg["K"], D, M=m_arg)
    elif which == "1":
        D = cfg["D"] if cfg["D"] is not None else 40
        amps = np.zeros(D + 1, dtype=complex)
        amps[0] = 1.0
        report = conjecture.check_conj1_state(
            fock.FockVector(amps), cfg["eta"], cfg["K"], D)
    elif which in ("strong2", "strong2-gaussian"):
        report = conjecture.check_strong2_gaussian(cfg["eta"], cfg["K"])
    else:
        raise UsageError(f"unknown --which {which!r}; expected 1, 2 or strong2")
    payload = {"tool": f"bbcap {__version__}", "metadata": _meta("conjecture check", cfg),
               "report": report.to_dict()}
    _emit(_json_text(payload), cfg["out"])
    return _report_exit([report])


def cmd_conjecture_anneal(args) -> int:
    defaults = {"which": None, "eta": None, "K": None, "D": 40, "seed": 0,
                "steps": 2000, "restarts": 8, "initial_temperature": 0.1,
                "cooling_ratio": 0.97, "proposal_scale": 0.05,
                "format": "json", "out": None}
    cfg = _resolve(args, defaults)
    _require(cfg, "which", "eta", "K")
    config = conjecture.AnnealConfig(
        seed=cfg["seed"], initial_temperature=cfg["initial_temperature"],
        cooling_ratio=cfg["cooling_ratio"], steps=cfg["steps"],
        restarts=cfg["restarts"], proposal_scale=cfg["proposal_scale"], D=cfg["D"])
    if cfg["which"] == "1":
        result = conjecture.anneal_conj1(cfg["eta"], cfg["K"], config)
        state = [[float(np.real(a)), float(np.imag(a))] for a in result.best_state]
    elif cfg["which"] == "2":
        result = conjecture.anneal_conj2_diagonal(cfg["eta"], cfg["K"], config)
        state = [float(p) for p in result.best_state]
    else:
        raise UsageError(f"unknown --which {cfg['which']!r}; expected 1 or 2")
    payload = {"tool": f"bbcap {__version__}", "metadata": _meta("conjecture anneal", cfg),
               "report": result.report.to_dict(), "best_state": state}
    _emit(_json_text(payload), cfg["out"])
    return _report_exit([result.report])


def cmd_conjecture_lemma(args) -> int:
    defaults = {"eta": None, "nbar": None, "instances": 10000, "seed": 0,
                "format": "json", "out": None}
    cfg = _resolve(args, defaults)
    _require(cfg, "eta", "nbar")
    suite = conjecture.run_lemma_suite(cfg["eta"], cfg["nbar"], cfg["instances"],
                                       cfg["seed"])
    payload = {"tool": f"bbcap {__version__}", "metadata": _meta("conjecture lemma", cfg),
               "result": suite.to_dict()}
    _emit(_json_text(payload), cfg["out"])
    return EXIT_OK if not suite.failures else EXIT_VIOLATION


def cmd_verify_coherent_region(args) -> int:
    defaults = {"eta": None, "nbar": None, "beta": None, "D": 40, "instances": 5,
                "seed": 0, "threshold": 1e-4, "format": "json", "out": None}
    cfg = _resolve(args, defaults)
    _require(cfg, "eta", "nbar", "beta")
    rep = capacity.verify_coherent_region_numeric(
        cfg["eta"], cfg["nbar"], cfg["beta"], cfg["D"], t_samples=cfg["instances"],
        seed=cfg["seed"], threshold=cfg["threshold"])
    payload = {
        "tool": f"bbcap {__version__}",
        "metadata": _meta("verify coherent-region", cfg),
        "max_residual_bits": rep.max_residual,
        "residual_bob": list(rep.residual_bob),
        "residual_charlie_mixture": rep.residual_charlie_mixture,
        "residual_charlie_conditional": list(rep.residual_charlie_conditional),
        "passed": rep.passed,
    }
    _emit(_json_text(payload), cfg["out"])
    return EXIT_OK if rep.passed else EXIT_NUMERIC


def _build_comparison_curve(kind: str, cfg: dict):
    kind = kind.replace("-", "_")
    if kind == "mac":
        return capacity.mac_envelope(cfg["eta"], cfg["nbar"],
                                     cfg["constraint"].replace("-", "_"),
                                     cfg["beta_steps"])
    if kind in ("broadcast", "ultimate"):
        kind = "ultimate"
    if kind not in capacity.DETECTIONS:
        raise UsageError(f"unknown region kind {kind!r}")
    grid = np.linspace(0.0, 1.0, cfg["beta_steps"])
    return capacity.broadcast_region(kind, cfg["eta"], cfg["nbar"], grid)


def cmd_verify_dominance(args) -> int:
    defaults = {"outer": None, "inner": None, "eta": None, "nbar": None,
                "constraint": "total_transmit", "beta_steps": 201,
                "format": "json", "out": None}
    cfg = _resolve(args, defaults)
    _require(cfg, "outer", "inner", "eta", "nbar")
    outer = _build_comparison_curve(cfg["outer"], cfg)
    inner = _build_comparison_curve(cfg["inner"], cfg)
    ok, witness = capacity.region_dominates(outer, inner)
    payload = {
        "tool": f"bbcap {__version__}",
        "metadata": _meta("verify dominance", cfg),
        "dominates": bool(ok),
        "witness": None if witness is None else {"r1": witness[0], "r2": witness[1]},
    }
    try:
        ray_outer = capacity.equal_rate_crossing(outer)
        ray_inner = capacity.equal_rate_crossing(inner)
        payload["equal_rate"] = {
            "outer": ray_outer,
            "inner": ray_inner,
            "sum_rate_gap_bits": 2.0 * (ray_outer - ray_inner),
        }
    except ValueError:
        payload["equal_rate"] = None
    _emit(_json_text(payload), cfg["out"])
    return EXIT_OK if ok else EXIT_VIOLATION


def _add_common(parser, *names):
    flags = {
        "eta": dict(type=float, help="beam-splitter transmissivity"),
        "nbar": dict(type=float, help="mean photon budget per use"),
        "K": dict(type=float, help="partner-port mean photon number"),
        "beta": dict(type=float, help="power split in [0, 1]"),
        "beta_steps": dict(type=int, help="grid points along the sweep"),
        "D": dict(type=int, help="Fock-space cutoff"),
        "seed": dict(type=int, help="master RNG seed"),
        "instances": dict(type=int, help="sample or instance count"),
        "M": dict(type=int, help="binomial trial count"),
        "threshold": dict(type=float, help="residual pass threshold in bits"),
        "detection": dict(choices=["ultimate", "homodyne", "heterodyne"]),
        "constraint": dict(choices=["total-transmit", "total-receive", "per-user",
                                    "total_transmit", "total_receive", "per_user"]),
        "family": dict(choices=["poisson", "binomial", "bose-einstein", "bose_einstein"]),
        "which": dict(type=str, help="which conjecture (1, 2 or strong2)"),
        "outer": dict(type=str, help="outer region (mac/ultimate/homodyne/heterodyne)"),
        "inner": dict(type=str, help="inner region"),
        "format": dict(choices=["csv", "json"]),
        "out": dict(type=str, help="output file (stdout when omitted)"),
    }
    for name in names:
        parser.add_argument(f"--{name.replace('_', '-')}", dest=name,
                            default=None, **flags[name])
    parser.add_argument("--config", default=None,
                        help="key = value file merged under explicit flags")


def build_parser() -> _Parser:
    parser = _Parser(prog="bbcap",
                     description="Broadcast-channel capacity regions and "
                                 "minimum-output-entropy checks for the lossy "
                                 "bosonic beam-splitter channel.")
    sub = parser.add_subparsers(dest="group", parser_class=_Parser)

    region = sub.add_parser("region", help="region boundary sweeps")
    rsub = region.add_subparsers(dest="kind", parser_class=_Parser)
    rb = rsub.add_parser("broadcast", help="broadcast region boundary")
    _add_common(rb, "eta", "nbar", "detection", "beta_steps", "format", "out")
    rb.set_defaults(handler=cmd_region_broadcast)
    rm = rsub.add_parser("mac-envelope", help="multiple-access envelope")
    _add_common(rm, "eta", "nbar", "constraint", "beta_steps", "format", "out")
    rm.set_defaults(handler=cmd_region_mac_envelope)

    conj = sub.add_parser("conjecture", help="minimum-output-entropy checks")
    csub = conj.add_subparsers(dest="kind", parser_class=_Parser)
    cc = csub.add_parser("check", help="closed-form and Gaussian checks")
    _add_common(cc, "which", "family", "eta", "K", "D", "M", "format", "out")
    cc.set_defaults(handler=cmd_conjecture_check)
    ca = csub.add_parser("anneal", help="seeded annealing search")
    _add_common(ca, "which", "eta", "K", "D", "seed", "format", "out")
    ca.set_defaults(handler=cmd_conjecture_anneal)
    cl = csub.add_parser("lemma", help="power-split inequality Monte Carlo")
    _add_common(cl, "eta", "nbar", "instances", "seed", "format", "out")
    cl.set_defaults(handler=cmd_conjecture_lemma)

    ver = sub.add_parser("verify", help="numeric verifications")
    vsub = ver.add_subparsers(dest="kind", parser_class=_Parser)
    vc = vsub.add_parser("coherent-region", help="coherent-encoding entropy residuals")
    _add_common(vc, "eta", "nbar", "beta", "D", "instances", "seed", "threshold",
                "format", "out")
    vc.set_defaults(handler=cmd_verify_coherent_region)
    vd = vsub.add_parser("dominance", help="pointwise region comparison")
    _add_common(vd, "outer", "inner", "eta", "nbar", "constraint", "beta_steps",
                "format", "out")
    vd.set_defaults(handler=cmd_verify_dominance)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"bbcap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    handler = getattr(args, "handler", None)
    if handler is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return handler(args)
    except UsageError as exc:
        print(f"bbcap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TruncationError, CoverageError) as exc:
        print(f"bbcap: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"bbcap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
