"""Command-line front end.

Subcommands: ``construct``, ``verify``, ``poa``, ``table``, ``bound``, ``suite``.
Settings come from an optional YAML file (``--config``) with flags taking
precedence; the seed falls back to ``POA_LAB_SEED``. Exit status: 0 on
success or PASS, 1 on FAIL, 2 on INDETERMINATE, usage or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import jsonschema
import numpy as np
import yaml

from poalab import analysis as A
from poalab import constructions as C
from poalab import suite as S
from poalab import verifier as V
from poalab.errors import PoaLabError
from poalab.rng import resolve_seed

TABLE_SCHEMA = "poalab-table/1"
BOUND_SCHEMA = "poalab-bound/1"
COMMANDS = ("construct", "verify", "poa", "table", "bound", "suite")
SIZE_PARAMS = ("n", "m", "d")
VALUE_PARAMS = ("v", "V")

_scalar = {"type": ["number", "string", "boolean"]}
CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "construction": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name"],
            "properties": {
                "name": {"enum": sorted(C.REGISTRY)},
                "params": {"type": "object", "additionalProperties": _scalar},
            },
        },
        "verifier": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "eps": {"type": "number", "exclusiveMinimum": 0},
                "samples": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "method": {"enum": ["auto", "closed-form", "exact", "monte-carlo"]},
                "points": {"type": "integer", "minimum": 2},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "param": {"enum": list(SIZE_PARAMS)},
                "values": {"oneOf": [{"type": "string"}, {"type": "array", "items": {"type": "integer"}}]},
                "theta": {"type": "string"},
                "steps": {"type": "integer", "minimum": 2},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "path": {"type": "string"},
                "format": {"enum": ["json", "text", "csv"]},
            },
        },
    },
}


class ConfigError(Exception):
    pass


def _node_line(root, path) -> int | None:
    node = root
    line = None if node is None else node.start_mark.line + 1
    for key in path:
        if isinstance(node, yaml.MappingNode):
            nxt = None
            for k, v in node.value:
                if k.value == key:
                    line = k.start_mark.line + 1
                    nxt = v
                    break
            node = nxt
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
            line = node.start_mark.line + 1
        else:
            break
        if node is None:
            break
    return line


def load_config(path: str) -> dict:
    """Parse and validate a YAML config; errors carry ``file:line``."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{path}:{mark.line + 1}" if mark else path
        raise ConfigError(f"{where}: invalid YAML ({getattr(exc, 'problem', exc)})") from exc
    errors = sorted(jsonschema.Draft7Validator(CONFIG_SCHEMA).iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        line = _node_line(root, list(err.absolute_path))
        if err.validator == "additionalProperties":
            extra = [k for k in err.instance if k not in err.schema.get("properties", {})]
            line = _node_line(root, list(err.absolute_path) + extra[:1]) or line
        where = f"{path}:{line}" if line else path
        loc = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {loc}: {err.message}")
    return data


def parse_range(text: str, integer: bool = True):
    """``"2..6"`` or ``"2,3,5"`` into a list; ``integer=False`` returns float endpoints."""
    text = str(text).strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        if integer:
            a, b = int(lo), int(hi)
            if b < a:
                raise ConfigError(f"empty range {text!r}")
            return list(range(a, b + 1))
        return [float(lo), float(hi)]
    parts = [p for p in text.split(",") if p.strip()]
    return [int(p) for p in parts] if integer else [float(p) for p in parts]


def _coerce(value):
    if isinstance(value, str):
        for cast in (int, float):
            try:
                return cast(value)
            except ValueError:
                pass
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="poalab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command")

    def common(p, construction=True):
        p.add_argument("--config", help="YAML config file")
        p.add_argument("--seed", type=int, help="random seed (default: POA_LAB_SEED or built-in)")
        p.add_argument("--out", help="write the JSON/CSV artifact here")
        p.add_argument("--format", choices=["json", "text", "csv"])
        if construction:
            p.add_argument("--construction", choices=sorted(C.REGISTRY))
            for name in SIZE_PARAMS:
                p.add_argument(f"--{name}", dest=f"p_{name}")
            for name in VALUE_PARAMS:
                p.add_argument(f"--{name}", dest=f"p_{name}", type=float)
            p.add_argument("--rule", dest="p_rule", choices=["first-price", "all-pay", "rank-all-pay"])
            p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                           help="extra construction parameter")

    p = sub.add_parser("construct", help="dump an instance and its predicted numbers")
    common(p)
    p = sub.add_parser("verify", help="certify an equilibrium and print the regret table")
    common(p)
    p.add_argument("--eps", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--method", choices=["auto", "closed-form", "exact", "monte-carlo"])
    p.add_argument("--points", type=int, help="deviation grid size")
    p = sub.add_parser("poa", help="price of anarchy of an instance")
    common(p)
    p.add_argument("--mc", action="store_true", help="attach a Monte Carlo welfare estimate")
    p.add_argument("--samples", type=int)
    p = sub.add_parser("table", help="PoA over a range of sizes as CSV")
    common(p)
    p = sub.add_parser("bound", help="lambda(theta) and the PoA bound as CSV")
    common(p, construction=False)
    p.add_argument("--theta", help="range a..b")
    p.add_argument("--steps", type=int)
    p = sub.add_parser("suite", help="run the acceptance criteria")
    common(p, construction=False)
    p.add_argument("--skip-determinism", action="store_true", help="do not rerun the suite to compare bytes")
    p.add_argument("--quiet", action="store_true")
    return parser


def merge(args, cfg: dict) -> dict:
    """Flags over file values."""
    out = {
        "command": args.command,
        "construction": dict(cfg.get("construction", {})),
        "verifier": dict(cfg.get("verifier", {})),
        "sweep": dict(cfg.get("sweep", {})),
        "output": dict(cfg.get("output", {})),
    }
    if cfg.get("command") and cfg["command"] != args.command:
        raise ConfigError(f"config is for {cfg['command']!r}, command line asks for {args.command!r}")
    con = out["construction"]
    params = dict(con.get("params", {}))
    if getattr(args, "construction", None):
        con["name"] = args.construction
    for name in SIZE_PARAMS + VALUE_PARAMS + ("rule",):
        val = getattr(args, f"p_{name}", None)
        if val is not None:
            params[name] = val
    for item in getattr(args, "param", []) or []:
        if "=" not in item:
            raise ConfigError(f"--param expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        params[k.strip()] = _coerce(v.strip())
    con["params"] = params
    ver = out["verifier"]
    for key in ("eps", "samples", "method", "points"):
        val = getattr(args, key, None)
        if val is not None:
            ver[key] = val
    if args.seed is not None:
        ver["seed"] = args.seed
    ver["seed"] = resolve_seed(ver.get("seed"))
    sw = out["sweep"]
    if getattr(args, "theta", None):
        sw["theta"] = args.theta
    if getattr(args, "steps", None):
        sw["steps"] = args.steps
    if args.out:
        out["output"]["path"] = args.out
    if args.format:
        out["output"]["format"] = args.format
    return out


def _instance(run: dict, sweep_ok: bool = False):
    con = run["construction"]
    if "name" not in con:
        raise ConfigError("a construction name is required (--construction or construction.name)")
    params = {}
    for k, v in con["params"].items():
        if k in SIZE_PARAMS and isinstance(v, str) and not sweep_ok:
            v = int(v)
        params[k] = _coerce(v) if k != "rule" else v
    return con["name"], params


def _emit(run: dict, text: str, fmt_default: str, stdout) -> None:
    path = run["output"].get("path")
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def cmd_construct(run, stdout) -> int:
    name, params = _instance(run)
    inst = C.construct(name, **params)
    _emit(run, _json(inst.to_json()), "json", stdout)
    return 0


def cmd_verify(run, stdout) -> int:
    name, params = _instance(run)
    inst = C.construct(name, **params)
    ver = run["verifier"]
    rep = V.verify_instance(inst, eps=ver.get("eps", S.CERT_EPS), points=ver.get("points", 257),
                            method=ver.get("method", "auto"), samples=ver.get("samples", V.DEFAULT_MC_SAMPLES),
                            seed=ver["seed"])
    body = rep.to_json()
    body["construction"] = inst.to_json()
    if run["output"].get("path"):
        _emit(run, _json(body), "json", stdout)
        stdout.write(rep.summary() + "\n")
    elif run["output"].get("format") == "json":
        stdout.write(_json(body))
    else:
        stdout.write(rep.summary() + "\n")
    return {"PASS": 0, "FAIL": 1}.get(rep.verdict, 2)


def cmd_poa(run, stdout) -> int:
    name, params = _instance(run)
    inst = C.construct(name, **params)
    ver = run["verifier"]
    res = A.poa(inst, samples=ver.get("samples", 10**6), seed=ver["seed"],
                attach_mc=bool(run.get("mc")))
    body = {"construction": inst.to_json(), "poa": res.to_json()}
    if run["output"].get("format") == "text" and not run["output"].get("path"):
        stdout.write(f"{name}: PoA = {res.ratio:.9f} ({res.tag}), OPT = {res.optimal_sw:.9g}, "
                     f"E[SW] = {res.expected_sw.value:.9g} via {res.expected_sw.method}\n")
    else:
        _emit(run, _json(body), "json", stdout)
    return 0


def _csv(schema: str, header: list, rows: list) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: {schema}\n")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


def cmd_table(run, stdout) -> int:
    name, params = _instance(run, sweep_ok=True)
    sweep = run["sweep"]
    ranged = [k for k in SIZE_PARAMS if isinstance(params.get(k), str)]
    if sweep.get("param"):
        key = sweep["param"]
        values = sweep.get("values", params.get(key))
    elif len(ranged) == 1:
        key, values = ranged[0], params[ranged[0]]
    else:
        raise ConfigError("table needs exactly one size parameter given as a range, e.g. --n 2..6")
    values = parse_range(values) if isinstance(values, str) else [int(x) for x in values]
    rows = []
    for val in values:
        p = {k: v for k, v in params.items() if k != key}
        p[key] = int(val)
        if name in ("grid", "grid-d"):
            p["store"] = False
        inst = C.construct(name, **p)
        rows.append([name, key, int(val), float(inst.poa.value),
                     "" if inst.limit is None else float(inst.limit),
                     A.LOWER_BOUND_TAG if inst.poa_is_lower_bound else A.EXACT_TAG])
    _emit(run, _csv(TABLE_SCHEMA, ["construction", "parameter", "value", "poa", "limit", "tag"], rows), "csv", stdout)
    return 0


def cmd_bound(run, stdout) -> int:
    sweep = run["sweep"]
    lo, hi = parse_range(sweep.get("theta", "0..1"), integer=False)[:2]
    steps = int(sweep.get("steps", 11))
    rows = []
    for t in np.linspace(lo, hi, steps):
        lam = A.lambda_theta(float(t))
        rows.append([float(t), lam, 1.0 / lam])
    _emit(run, _csv(BOUND_SCHEMA, ["theta", "lambda", "poa_bound"], rows), "csv", stdout)
    return 0


def cmd_suite(run, stdout, skip_determinism=False, quiet=False) -> int:
    seed = run["verifier"]["seed"]
    progress = None if quiet else (lambda c: stdout.write(S.summary_lines({"criteria": [c]})[0] + "\n") or stdout.flush())
    report = S.run_suite(seed, determinism=not skip_determinism, progress=progress)
    path = run["output"].get("path")
    if path:
        with open(path, "wb") as fh:
            fh.write(S.dumps(report))
    if not quiet:
        stdout.write(f"overall: {report['verdict']}\n")
    return 0 if report["verdict"] == "PASS" else 1


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        cfg = load_config(args.config) if args.config else {}
        run = merge(args, cfg)
        if args.command == "construct":
            return cmd_construct(run, stdout)
        if args.command == "verify":
            return cmd_verify(run, stdout)
        if args.command == "poa":
            run["mc"] = args.mc
            return cmd_poa(run, stdout)
        if args.command == "table":
            return cmd_table(run, stdout)
        if args.command == "bound":
            return cmd_bound(run, stdout)
        return cmd_suite(run, stdout, args.skip_determinism, args.quiet)
    except ConfigError as exc:
        sys.stderr.write(f"poalab: config error: {exc}\n")
        return 2
    except (PoaLabError, ValueError) as exc:
        sys.stderr.write(f"poalab: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
