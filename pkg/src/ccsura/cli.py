"""
Command-line front end.

Every subcommand reads a strict JSON config (one object, or
``{"points": [...]}`` for several), writes a CSV atomically and prints a
one-line summary.  Exit status: 0 success, 2 configuration error, 3 runtime
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from . import csvio
from .achannel import OuterChannelParams, capacity_estimate
from .bounds import (RcbConfig, SearchConstraints, TreeBoundConfig, greedy_bit_allocation,
                     min_ebno_search, rcb_error_prob, rcb_false_alarm, rcb_false_alarm_corollary,
                     ttree_bound)
from .phy import CHANNELS, estimate_roc, power_from_ebno
from .sim import ScenarioConfig, estimate_rates, sim_row, sweep

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class Key:
    name: str
    kind: str            # int, float, str, bool, ints, num_or_inf
    required: bool
    doc: str


def _k(name, kind, doc, required=True):
    return Key(name, kind, required, doc)


SCHEMAS: Dict[str, List[Key]] = {
    "capacity": [
        _k("Q", "int", "alphabet size"),
        _k("K_a", "int", "active users"),
        _k("p_m", "float", "miss probability"),
        _k("p_f", "float", "false-alarm probability"),
        _k("n_1", "int", "slot length; adds the rate C_u*log2(Q)/n_1", False),
    ],
    "rcb": [
        _k("k", "int", "message bits (M = 2^k)"),
        _k("L", "int", "slot count"),
        _k("Q", "int", "alphabet size"),
        _k("t", "int", "uncovered slots tolerated"),
        _k("K_a", "int", "active users"),
        _k("p_m", "float", "miss probability"),
        _k("p_f", "float", "false-alarm probability"),
        _k("form", "str", "'corollary' (default) or 'exact' false-alarm bound", False),
        _k("ebno_db", "float", "label carried to the output row", False),
        _k("K0", "int", "label carried to the output row", False),
    ],
    "ttree-bound": [
        _k("bit_allocation", "ints", "chunk sizes b_1..b_L"),
        _k("c", "int", "bits per slot symbol"),
        _k("K_a", "int", "active users"),
        _k("p_m", "float", "miss probability"),
        _k("p_f", "float", "false-alarm probability"),
        _k("t", "int", "uncovered slots tolerated"),
        _k("ebno_db", "float", "label carried to the output row", False),
        _k("K0", "int", "label carried to the output row", False),
    ],
    "alloc": [
        _k("k", "int", "message bits"),
        _k("c", "int", "bits per slot symbol"),
        _k("K_a", "int", "active users"),
        _k("p_m", "float", "miss probability"),
        _k("p_f", "float", "false-alarm probability"),
        _k("t", "int", "uncovered slots tolerated"),
        _k("v_star", "num_or_inf", "budget on expected surviving paths (\"inf\" allowed)"),
        _k("L_max", "int", "largest slot count tried"),
    ],
    "roc": [
        _k("n", "int", "frame length; slot length is n // L"),
        _k("L", "int", "slot count"),
        _k("k", "int", "message bits, for the power P = 10^(ebno/10) k / n"),
        _k("Q", "int", "codebook size"),
        _k("K_a", "int", "active users"),
        _k("channel", "str", f"one of {', '.join(CHANNELS)}"),
        _k("ebno_db", "float", "energy per bit in dB"),
        _k("K_0_max", "int", "largest inner list size measured"),
        _k("trials", "int", "slot transmissions simulated"),
        _k("seed", "int", "master seed"),
    ],
    "simulate": [
        _k("K_a", "int", "active users"),
        _k("k", "int", "message bits"),
        _k("n", "int", "frame length (multiple of L)"),
        _k("L", "int", "slot count"),
        _k("Q", "int", "slot alphabet size (power of two)"),
        _k("ebno_db", "float", "energy per bit in dB"),
        _k("channel", "str", "rayleigh, awgn or abstract"),
        _k("scheme", "str", "ttree or rs"),
        _k("trials", "int", "frames simulated"),
        _k("seed", "int", "master seed"),
        _k("K_0", "int", "inner list size (not for abstract)", False),
        _k("code_seed", "int", "codebook seed (defaults to seed)", False),
        _k("p_m", "float", "abstract channel miss probability", False),
        _k("p_f", "float", "abstract channel insertion probability", False),
        _k("t", "int", "ttree: uncovered slots tolerated", False),
        _k("path_cap", "int", "ttree: survivors kept per level", False),
        _k("bit_allocation", "ints", "ttree: chunk sizes b_1..b_L", False),
        _k("x_p", "int", "rs: prefix bits", False),
        _k("h", "int", "rs: CRC bits", False),
        _k("k_O", "int", "rs: code dimension", False),
        _k("m", "int", "rs: interpolation multiplicity", False),
        _k("carry_crc", "bool", "rs: transmit the CRC inside the code", False),
        _k("truncate", "bool", "keep at most K_a decoded messages", False),
    ],
    "optimize": [
        _k("roc", "str", "ROC CSV path (relative paths resolve against the config file)"),
        _k("k", "int", "message bits"),
        _k("K_a", "int", "active users"),
        _k("Q", "int", "alphabet size"),
        _k("t", "int", "uncovered slots tolerated"),
        _k("bound", "str", "'rcb' or 'ttree'"),
        _k("v_star", "num_or_inf", "ttree: path budget (\"inf\" allowed)", False),
        _k("pe_target", "float", "required P_e (default 0.1)", False),
        _k("pf_target", "float", "required P_f (default 1e-3)", False),
        _k("pf_pe_ratio", "float", "admissible P_f / P_e (default 1e-2)", False),
        _k("full_scan", "bool", "evaluate every L instead of walking", False),
    ],
}

SUMMARIES = {
    "capacity": "uniform-input capacity estimate of the outer channel",
    "rcb": "random coding bound (P_e and false-alarm bound)",
    "ttree-bound": "tree-code ensemble bound (P_e and expected paths at level L)",
    "alloc": "greedy bit allocation under a path budget",
    "roc": "estimate the OMP inner-decoder ROC",
    "simulate": "end-to-end Monte Carlo of PUPE and false alarms",
    "optimize": "minimum E_b/N_0 meeting the P_e and P_f targets",
}

SEEDED = ("roc", "simulate")


def _json_error(path: str, e: json.JSONDecodeError) -> ConfigError:
    return ConfigError(f"{path}:{e.lineno}:{e.colno}: malformed JSON: {e.msg}")


def _check_value(cmd: str, key: Key, v: Any):
    where = f"{cmd}: key {key.name!r}"
    if key.kind == "int":
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"{where} must be an integer")
        return v
    if key.kind == "float":
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{where} must be a number")
        return float(v)
    if key.kind == "num_or_inf":
        if v == "inf":
            return math.inf
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{where} must be a number or \"inf\"")
        return float(v)
    if key.kind == "str":
        if not isinstance(v, str):
            raise ConfigError(f"{where} must be a string")
        return v
    if key.kind == "bool":
        if not isinstance(v, bool):
            raise ConfigError(f"{where} must be true or false")
        return v
    if key.kind == "ints":
        if not isinstance(v, list) or any(isinstance(x, bool) or not isinstance(x, int) for x in v):
            raise ConfigError(f"{where} must be a list of integers")
        return tuple(v)
    raise AssertionError(key.kind)


def parse_points(cmd: str, text: str, path: str = "<config>") -> List[Dict[str, Any]]:
    """Validate a config document against the command's key schema."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise _json_error(path, e) from None
    if isinstance(doc, dict) and set(doc) == {"points"}:
        pts = doc["points"]
        if not isinstance(pts, list) or not pts:
            raise ConfigError(f"{path}: 'points' must be a nonempty list")
    else:
        pts = [doc]
    schema = {k.name: k for k in SCHEMAS[cmd]}
    out = []
    for i, p in enumerate(pts):
        if not isinstance(p, dict):
            raise ConfigError(f"{path}: point {i} is not an object")
        unknown = sorted(set(p) - set(schema))
        if unknown:
            raise ConfigError(f"{path}: point {i}: unknown keys {unknown}")
        missing = [k.name for k in SCHEMAS[cmd] if k.required and k.name not in p]
        if missing:
            raise ConfigError(f"{path}: point {i}: missing keys {missing}")
        out.append({k: _check_value(cmd, schema[k], v) for k, v in p.items()})
    return out


# command bodies: each returns (columns, rows, summary)

def _capacity(points, args, base):
    rows = []
    for p in points:
        cu = capacity_estimate(OuterChannelParams(p["Q"], p["K_a"], p["p_m"], p["p_f"]))
        n_1 = p.get("n_1")
        rate = cu * math.log2(p["Q"]) / n_1 if n_1 else None
        rows.append({"Q": p["Q"], "Ka": p["K_a"], "p_m": p["p_m"], "p_f": p["p_f"],
                     "n_1": n_1, "C_u": cu, "rate": rate})
    return ("Q", "Ka", "p_m", "p_f", "n_1", "C_u", "rate"), rows, f"{len(rows)} capacity rows"


def _rcb(points, args, base):
    rows = []
    for p in points:
        form = p.get("form", "corollary")
        if form not in ("corollary", "exact"):
            raise ConfigError(f"rcb: form must be 'corollary' or 'exact', got {form!r}")
        cfg = RcbConfig(p["k"], p["L"], p["Q"], p["t"], p["K_a"], p["p_m"], p["p_f"])
        pf = rcb_false_alarm_corollary(cfg) if form == "corollary" else rcb_false_alarm(cfg)
        rows.append({"Ka": p["K_a"], "t": p["t"], "ebno_db": p.get("ebno_db"), "L": p["L"],
                     "K0": p.get("K0"), "Pe": rcb_error_prob(p["L"], p["t"], p["p_m"]), "Pf": pf})
    return csvio.CURVE_COLUMNS, rows, f"{len(rows)} bound rows"


def _ttree_bound(points, args, base):
    rows = []
    for p in points:
        cfg = TreeBoundConfig(p["bit_allocation"], p["c"], p["K_a"], p["p_m"], p["p_f"], p["t"])
        pe, vL = ttree_bound(cfg)
        rows.append({"Ka": p["K_a"], "t": p["t"], "ebno_db": p.get("ebno_db"), "L": cfg.L,
                     "K0": p.get("K0"), "Pe": pe, "Pf": vL})
    return csvio.CURVE_COLUMNS, rows, f"{len(rows)} bound rows"


def _alloc(points, args, base):
    rows = []
    for p in points:
        a = greedy_bit_allocation(p["k"], p["c"], p["K_a"], p["p_m"], p["p_f"], p["t"],
                                  p["v_star"], p["L_max"])
        rows.append({"Ka": p["K_a"], "t": p["t"], "p_m": p["p_m"], "p_f": p["p_f"],
                     "v_star": p["v_star"], "L": len(a) if a else None,
                     "bit_allocation": " ".join(map(str, a)) if a else "saturated"})
    cols = ("Ka", "t", "p_m", "p_f", "v_star", "L", "bit_allocation")
    return cols, rows, f"{len(rows)} allocations"


def _roc(points, args, base):
    rocs = {}
    for p in points:
        if p["channel"] not in CHANNELS:
            raise ConfigError(f"roc: channel must be one of {CHANNELS}")
        n_1 = p["n"] // p["L"]
        P = power_from_ebno(p["ebno_db"], p["k"], p["n"])
        rocs[(p["ebno_db"], p["L"])] = estimate_roc(
            n_1, p["Q"], P, p["K_a"], p["channel"], p["K_0_max"], p["trials"], p["seed"],
            ebno_db=p["ebno_db"], L=p["L"], workers=args.workers)
    rows = csvio.roc_rows(rocs)
    return csvio.ROC_COLUMNS, rows, f"{len(rocs)} ROC curves, {len(rows)} rows"


def _scenario(p) -> ScenarioConfig:
    kw = dict(p)
    if "bit_allocation" in kw:
        kw["bit_allocation"] = tuple(kw["bit_allocation"])
    return ScenarioConfig(**kw)


def _simulate(points, args, base):
    configs = [_scenario(p) for p in points]
    if args.out:
        rows = sweep(configs, args.out, workers=args.workers, resume=args.resume)
    else:
        rows = [sim_row(c, estimate_rates(c, args.workers)) for c in configs]
    return csvio.SIM_COLUMNS, rows, f"{len(rows)} simulated points"


def _optimize(points, args, base):
    rows = []
    sat = 0
    for p in points:
        path = p["roc"] if os.path.isabs(p["roc"]) else os.path.join(base, p["roc"])
        try:
            rocs = csvio.read_roc_csv(path)
        except (OSError, ValueError, KeyError) as e:
            raise ConfigError(f"cannot read ROC table {path}: {e}") from None
        kw = {k: p[k] for k in ("v_star", "pe_target", "pf_target", "pf_pe_ratio", "full_scan")
              if k in p}
        cons = SearchConstraints(p["k"], p["K_a"], p["Q"], p["t"], bound=p["bound"], **kw)
        op = min_ebno_search(rocs, cons)
        sat += op.saturated
        rows.append({"Ka": p["K_a"], "t": p["t"], "ebno_db": op.ebno_db, "L": op.L,
                     "K0": op.K_0, "Pe": op.P_e, "Pf": op.P_f})
    return csvio.CURVE_COLUMNS, rows, f"{len(rows)} operating points ({sat} saturated)"


COMMANDS: Dict[str, Callable] = {
    "capacity": _capacity, "rcb": _rcb, "ttree-bound": _ttree_bound, "alloc": _alloc,
    "roc": _roc, "simulate": _simulate, "optimize": _optimize,
}


def _epilog(cmd: str) -> str:
    lines = ["config keys (* required):"]
    for k in SCHEMAS[cmd]:
        lines.append(f"  {'*' if k.required else ' '} {k.name:<15} {k.kind:<10} {k.doc}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ccsura", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        sp = sub.add_parser(cmd, help=SUMMARIES[cmd], description=SUMMARIES[cmd],
                            epilog=_epilog(cmd),
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.add_argument("--config", required=True, help="JSON config file")
        sp.add_argument("--out", help="output CSV (stdout when omitted)")
        sp.add_argument("--seed", type=int, help="override the config seed (also CCS_SEED)")
        sp.add_argument("--workers", type=int, default=1, help="worker processes")
        if cmd == "simulate":
            sp.add_argument("--resume", action="store_true",
                            help="keep rows already present in --out")
    return ap


def _apply_seed(cmd: str, points, args):
    seed = args.seed
    if seed is None and os.environ.get("CCS_SEED"):
        try:
            seed = int(os.environ["CCS_SEED"])
        except ValueError:
            raise ConfigError(f"CCS_SEED must be an integer, got {os.environ['CCS_SEED']!r}")
    if seed is not None and cmd in SEEDED:
        for p in points:
            p["seed"] = seed


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_CONFIG
    cmd = args.command
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as e:
            raise ConfigError(f"cannot read config {args.config}: {e.strerror}") from None
        points = parse_points(cmd, text, args.config)
        _apply_seed(cmd, points, args)
        if cmd == "simulate":
            try:
                [_scenario(p) for p in points]
            except (TypeError, ValueError) as e:
                raise ConfigError(f"simulate: {e}") from None
        base = os.path.dirname(os.path.abspath(args.config))
        try:
            cols, rows, summary = COMMANDS[cmd](points, args, base)
        except ConfigError:
            raise
        except ValueError as e:
            # parameter combinations rejected by the library are config errors
            raise ConfigError(f"{cmd}: {e}") from None
        text = csvio.render_csv(cols, rows)
        if args.out:
            csvio.write_atomic(args.out, text)
            print(f"{cmd}: {summary} -> {args.out}")
        else:
            sys.stdout.write(text)
            print(f"{cmd}: {summary}", file=sys.stderr)
        return EXIT_OK
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:  # noqa: BLE001 - reported as a runtime failure
        print(f"error: {cmd} failed: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run_cli())
