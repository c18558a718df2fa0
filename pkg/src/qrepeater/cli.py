"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import resources as res
from . import robustness as rob
from .measures import fef, measure_report, ofef_family, teleport_avg_fidelity_mc
from .protocols.chain import (
    ChainScenario,
    ScenarioError,
    SegmentSpec,
    average_ofef_two_node,
    reduce_chain_end_noise,
    reduce_chain_mid_noise,
    saved_resource_at_position,
    saved_resource_of,
    two_node_feasibility,
)
from .protocols.measurement import measure_node, post_states_closed_form, pvm_basis, single_node_ensemble
from .protocols.single_node import (
    NotFamilyError,
    average_ofef_single_node,
    family_params_extract,
    feasibility_single_node,
    lemma1_bound_check,
    theorem_fidelity,
)
from .qcore import kron
from .states import bell, family_state, nmes, photon_loss_state

EXIT_OK, EXIT_INPUT, EXIT_IO = 0, 2, 3


class InputError(ValueError):
    """Malformed command input."""


def default_seed() -> int:
    raw = os.environ.get("REPEATER_SEED", "0")
    try:
        return int(raw)
    except ValueError as exc:
        raise InputError(f"REPEATER_SEED={raw!r} is not an integer") from exc


def fmt(x) -> str:
    """Locale-free 17-significant-digit rendering that reparses exactly."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if x is None:
        return ""
    return format(float(x), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def emit(out, payload: dict, as_json: bool, text: str) -> None:
    if as_json:
        out.write(json.dumps(_jsonable(payload), sort_keys=True) + "\n")
    else:
        out.write(text.rstrip("\n") + "\n")


def _kv_pairs(items: Sequence[str]) -> Dict[str, float]:
    out = {}
    for it in items:
        if "=" not in it:
            raise InputError(f"expected key=value, got {it!r}")
        k, v = it.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError as exc:
            raise InputError(f"value for {k!r} is not a number: {v!r}") from exc
    return out


# measures

def _state_from_spec(kind: str, params: Dict[str, float]):
    """Build a state and, for family states, its closed-form parameters."""
    if kind == "bell":
        if set(params) != {"index"}:
            raise InputError("bell needs index=0..3")
        return bell(int(params["index"])), None
    if kind == "photon_loss":
        if set(params) != {"p", "omega"}:
            raise InputError("photon_loss needs p and omega")
        return photon_loss_state(params["p"], params["omega"]), None
    try:
        spec = SegmentSpec.make(kind, **params)
    except ScenarioError as exc:
        raise InputError(str(exc)) from exc
    fam = (params["p"], params["delta"]) if kind == "family" else None
    return spec.state(), fam


def cmd_measures(args, out) -> int:
    rho, fam = _state_from_spec(args.kind, _kv_pairs(args.params))
    rep = measure_report(rho, family=fam)
    payload = {"state": {"kind": args.kind, **_kv_pairs(args.params)}, **rep.to_dict()}
    lines = [f"state {args.kind} {' '.join(args.params)}"]
    for k in ("concurrence", "negativity", "fef", "ofef_upper", "ofef", "otf"):
        v = getattr(rep, k)
        lines.append(f"  {k:<12} {'n/a' if v is None else fmt(v)}")
    lines.append(f"  otf_source   {rep.otf_source}")
    if args.mc:
        seed = default_seed() if args.seed is None else args.seed
        mc = teleport_avg_fidelity_mc(rho, samples=args.samples, seed=seed)
        payload["teleport_mc"] = {"value": mc, "samples": args.samples, "seed": seed}
        lines.append(f"  teleport_mc  {fmt(mc)} (samples={args.samples}, seed={seed})")
    emit(out, payload, args.json, "\n".join(lines))
    return EXIT_OK


# single-node

def cmd_single_node(args, out) -> int:
    p, d, a, b = args.p, args.delta, args.alpha, args.beta
    rep = feasibility_single_node(p, d, a, b)
    if args.source == "engine":
        ens = measure_node(kron(family_state(p, d), nmes(a)), (1, 2), pvm_basis(b))
    else:
        ens = post_states_closed_form(p, d, a, b)
    rows = []
    for o in ens:
        if o.state is None:
            rows.append({"label": o.label, "probability": o.probability, "p_eff": None, "delta_eff": None, "ofef": None})
            continue
        fp = family_params_extract(o.state)
        rows.append({"label": o.label, "probability": o.probability, "p_eff": fp.p, "delta_eff": fp.delta, "ofef": fp.ofef()})
    avg = average_ofef_single_node(p, d, a, b, source=args.source)
    target = ofef_family(p, d)
    payload = {
        "inputs": {"p": p, "delta": d, "alpha": a, "beta": b, "source": args.source},
        "feasibility": rep.to_dict(),
        "outcomes": rows,
        "average_ofef": avg,
        "ofef_family": target,
        "theorem_fidelity": theorem_fidelity(p, d) if p > 0 else math.inf,
        "gap": target - avg,
    }
    lines = [f"single node p={fmt(p)} delta={fmt(d)} alpha={fmt(a)} beta={fmt(b)}"]
    lines += [f"  {k:<12} {v}" for k, v in rep.to_dict().items()]
    lines.append(f"  {'outcome':<8}{'prob':>24}{'p_eff':>24}{'delta_eff':>24}{'ofef':>24}")
    for r in rows:
        lines.append(f"  {r['label']:<8}" + "".join(f"{fmt(r[k]) if r[k] is not None else '-':>24}" for k in ("probability", "p_eff", "delta_eff", "ofef")))
    lines.append(f"  average_ofef {fmt(avg)}")
    lines.append(f"  ofef_family  {fmt(target)}")
    emit(out, payload, args.json, "\n".join(lines))
    return EXIT_OK


# chain

def _read_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IOError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def run_chain(sc: ChainScenario) -> dict:
    """Reduce a scenario and return its trace, fidelity and saved resource."""
    segs = sc.segments
    last = len(segs)
    result: dict = {"segments": [s.to_dict() for s in segs], "noisy_index": sc.noisy_index}
    reducible = sc.noisy.kind == "family" and all(s.is_pure_nmes for s in sc.free_segments())
    if reducible and sc.noisy_index in (1, last):
        red = reduce_chain_end_noise(sc)
        p, d, ap, b = red.single_node_inputs
        fid = average_ofef_single_node(p, d, ap, b)
        alphas = sc.free_alphas()
        result.update(
            method="end_noise",
            steps=[{"alpha_in": s.alpha_in, "alpha_acc": s.alpha_acc, "concurrence_acc": s.concurrence_acc} for s in red.steps],
            alpha_prime=red.alpha_prime,
            beta=b,
            alpha_threshold=red.alpha_threshold,
            feasible=red.b4_satisfied and feasibility_single_node(p, d, ap, b).region_a25,
            fidelity=fid,
            ofef_family=ofef_family(p, d),
            ceiling=lemma1_bound_check(2 * math.sqrt(d * (1 - d)) * (1 - p), red.concurrence_product),
            rv=saved_resource_of(alphas),
        )
        return result
    if reducible:
        red = reduce_chain_mid_noise(sc)
        p, d = sc.noisy_family()
        result.update(
            method="mid_noise",
            alpha_l=red.alpha_l,
            alpha_r=red.alpha_r,
            c_left=red.c_left,
            c_right=red.c_right,
            feasible=red.feasible,
            fidelity=average_ofef_two_node(p, d, red.alpha_l, red.alpha_r),
            ofef_family=ofef_family(p, d),
            ceiling=lemma1_bound_check(2 * math.sqrt(d * (1 - d)) * (1 - p), red.c_left * red.c_right),
            rv=saved_resource_of(sc.free_alphas()),
        )
        return result
    if len(segs) == 2:
        ens = single_node_ensemble(segs[0].state(), segs[1].state(), sc.node_measurements[0])
        rv = saved_resource_of(sc.free_alphas()) if all(s.is_pure_nmes for s in sc.free_segments()) else None
        result.update(
            method="engine",
            outcomes=[{"label": str(o.label), "probability": o.probability, "fef": None if o.state is None else fef(o.state)} for o in ens],
            fidelity=ens.average(fef),
            fidelity_kind="average fully entangled fraction",
            rv=rv,
        )
        return result
    raise ScenarioError("chains longer than two segments need a family noisy segment and pure nmes free segments")


def cmd_chain(args, out) -> int:
    cfg = _read_json(args.config)
    try:
        sc = ChainScenario.from_dict(cfg)
    except (TypeError, KeyError) as exc:
        raise InputError(f"malformed scenario: {exc}") from exc
    r = run_chain(sc)
    lines = [f"chain of {len(sc.segments)} segments, noisy segment {sc.noisy_index}, method {r['method']}"]
    for st in r.get("steps", []):
        lines.append(f"  fold alpha={fmt(st['alpha_in'])} -> alpha'={fmt(st['alpha_acc'])} C={fmt(st['concurrence_acc'])}")
    for k in ("alpha_prime", "alpha_threshold", "alpha_l", "alpha_r", "feasible", "fidelity", "ofef_family", "ceiling", "rv"):
        if k in r:
            v = r[k]
            lines.append(f"  {k:<16} {v if isinstance(v, bool) or v is None else fmt(v)}")
    emit(out, r, args.json, "\n".join(lines))
    return EXIT_OK


# sweep

def _rv_position(n, m, p, delta):
    return saved_resource_at_position(int(n), int(m), p, delta)


QUANTITIES: Dict[str, Tuple[Callable, Tuple[str, ...]]] = {
    "ofef_family": (ofef_family, ("p", "delta")),
    "theorem_fidelity": (theorem_fidelity, ("p", "delta")),
    "average_ofef": (average_ofef_single_node, ("p", "delta", "alpha", "beta")),
    "feasible": (lambda p, d, a, b: feasibility_single_node(p, d, a, b).region_a25, ("p", "delta", "alpha", "beta")),
    "alpha_bound": (lambda p, d: feasibility_single_node(p, d, 0.5, 0.5).alpha_bound, ("p", "delta")),
    "beta_bound": (lambda p, d, a: feasibility_single_node(p, d, a, 0.5).beta_bound, ("p", "delta", "alpha")),
    "two_node_feasible": (two_node_feasibility, ("p", "delta", "alpha_l", "alpha_r")),
    "rv": (lambda n, C: res.saved_resource(int(n), C), ("n", "C")),
    "rv_bound": (lambda n, p, d: res.saved_resource_bound(int(n), p, d), ("n", "p", "delta")),
    "rv_limit": (res.saved_resource_limit, ("p", "delta")),
    "rv_position": (_rv_position, ("n", "m", "p", "delta")),
    "max_nodes": (res.max_nodes, ("p", "delta", "C")),
    "hashing_rate": (res.hashing_rate, ("F",)),
    "alpha_for_noise": (res.alpha_for_noise, ("p",)),
    "copies_required": (lambda n, p, F: res.copies_required(int(n), p, F), ("n", "p", "F")),
    "entropy_from_rv": (lambda rv, n: res.entropy_from_rv(rv, int(n)), ("rv", "n")),
    "white_pct": (lambda p, q: rob.robustness_point("white", p, q).pct_change, ("p", "q")),
    "loss_pct": (lambda p, q: rob.robustness_point("photon_loss", p, q).pct_change, ("p", "q")),
    "me_nme_white_pct": (lambda p, q: rob.me_vs_nme_white(p, q)[2], ("p", "q")),
    "me_nme_loss_pct": (lambda p, q: rob.me_vs_nme_photonloss(p, q)[2], ("p", "q")),
    "povm_white_fidelity": (lambda q, eta: rob.povm_fidelity_white(q, eta)[0], ("q", "eta")),
    "povm_loss_fidelity": (lambda q, eta: rob.povm_fidelity_loss(q, eta)[0], ("q", "eta")),
}
INTEGER_PARAMS = {"n", "m"}


@dataclass(frozen=True)
class Axis:
    name: str
    values: Tuple[float, ...]


@dataclass(frozen=True)
class SweepSpec:
    """Grid of at most two axes, fixed parameters and requested quantities."""

    axes: Tuple[Axis, ...]
    fixed: Tuple[Tuple[str, float], ...]
    quantities: Tuple[str, ...]
    output: Optional[str] = None

    @classmethod
    def from_dict(cls, cfg: dict) -> "SweepSpec":
        if not isinstance(cfg, dict):
            raise InputError("sweep spec must be a JSON object")
        unknown = set(cfg) - {"axes", "fixed", "quantities", "output"}
        if unknown:
            raise InputError(f"unknown sweep fields {sorted(unknown)}")
        raw_axes = cfg.get("axes")
        if not isinstance(raw_axes, list) or not 1 <= len(raw_axes) <= 2:
            raise InputError("axes must list one or two axes")
        axes = []
        for ax in raw_axes:
            try:
                name, lo, hi, steps = ax["name"], float(ax["min"]), float(ax["max"]), int(ax["steps"])
            except (KeyError, TypeError, ValueError) as exc:
                raise InputError(f"axis needs name, min, max, steps: {ax!r}") from exc
            if steps < 2:
                raise InputError(f"axis {name!r}: steps must be >= 2")
            vals = np.linspace(lo, hi, steps)
            if name in INTEGER_PARAMS:
                r = np.round(vals)
                if np.any(np.abs(r - vals) > 1e-9):
                    raise InputError(f"axis {name!r} must land on integers")
                vals = r
            axes.append(Axis(str(name), tuple(float(v) for v in vals)))
        names = [a.name for a in axes]
        if len(set(names)) != len(names):
            raise InputError("axis names must differ")
        fixed = cfg.get("fixed", {})
        if not isinstance(fixed, dict):
            raise InputError("fixed must be an object")
        try:
            fixed_t = tuple(sorted((str(k), float(v)) for k, v in fixed.items()))
        except (TypeError, ValueError) as exc:
            raise InputError("fixed parameters must be numbers") from exc
        clash = set(names) & set(dict(fixed_t))
        if clash:
            raise InputError(f"parameters both swept and fixed: {sorted(clash)}")
        qs = cfg.get("quantities")
        if not isinstance(qs, list) or not qs:
            raise InputError("quantities must be a non-empty list")
        have = set(names) | set(dict(fixed_t))
        for q in qs:
            if q not in QUANTITIES:
                raise InputError(f"unknown quantity {q!r}; known: {', '.join(sorted(QUANTITIES))}")
            missing = set(QUANTITIES[q][1]) - have
            if missing:
                raise InputError(f"quantity {q!r} needs parameters {sorted(missing)}")
        return cls(tuple(axes), fixed_t, tuple(qs), cfg.get("output"))

    def points(self) -> List[Dict[str, float]]:
        """Grid points in row-major order, the first axis varying slowest."""
        base = dict(self.fixed)
        return [{**base, **{a.name: v for a, v in zip(self.axes, combo)}} for combo in product(*(a.values for a in self.axes))]


def _eval_point(args: Tuple[Dict[str, float], Tuple[str, ...]]) -> List[float]:
    point, quantities = args
    row = []
    for q in quantities:
        fn, names = QUANTITIES[q]
        try:
            v = fn(*(point[n] for n in names))
            row.append(float(v))
        except (ValueError, ZeroDivisionError, OverflowError):
            # Points outside a quantity's domain are recorded rather than aborting the grid.
            row.append(math.nan)
    return row


def run_sweep(spec: SweepSpec, workers: int = 1) -> Tuple[List[Dict[str, float]], List[List[float]]]:
    pts = spec.points()
    jobs = [(pt, spec.quantities) for pt in pts]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_eval_point, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        rows = [_eval_point(j) for j in jobs]
    return pts, rows


def write_csv(fh, meta: dict, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    fh.write("# meta: " + json.dumps(_jsonable(meta), sort_keys=True) + "\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])


def read_csv(text: str) -> Tuple[dict, List[str], List[List[float]]]:
    """Parse a file produced by :func:`write_csv`."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# meta: "):
        raise InputError("missing meta header")
    meta = json.loads(lines[0][len("# meta: "):])
    rdr = csv.reader(lines[1:])
    header = next(rdr)
    return meta, header, [[float(v) if v else math.nan for v in row] for row in rdr]


def _write_output(path: Optional[str], writer: Callable[[io.TextIOBase], None], out) -> None:
    if path is None or path == "-":
        writer(out)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer(fh)
    except OSError as exc:
        raise IOError(f"cannot write {path}: {exc}") from exc


def cmd_sweep(args, out) -> int:
    spec = SweepSpec.from_dict(_read_json(args.spec))
    target = args.out if args.out is not None else spec.output
    pts, rows = run_sweep(spec, workers=args.workers)
    names = [a.name for a in spec.axes]
    header = names + list(spec.quantities)
    table = [[pt[n] for n in names] + r for pt, r in zip(pts, rows)]
    meta = {
        "command": "sweep",
        "axes": [{"name": a.name, "min": a.values[0], "max": a.values[-1], "steps": len(a.values)} for a in spec.axes],
        "fixed": dict(spec.fixed),
        "quantities": list(spec.quantities),
    }
    _write_output(target, lambda fh: write_csv(fh, meta, header, table), out)
    if target not in (None, "-"):
        emit(out, {"rows": len(table), "output": target}, args.json, f"wrote {len(table)} rows to {target}")
    return EXIT_OK


# table1

def cmd_table1(args, out) -> int:
    t = rob.table1()
    header = ["p"] + [f"q={q:g}" for q in rob.TABLE1_Q]
    rows = [[p] + list(r) for p, r in zip(rob.TABLE1_P, t)]
    if args.csv is not None:
        meta = {"command": "table1", "p": list(rob.TABLE1_P), "q": list(rob.TABLE1_Q), "quantity": "white_pct"}
        _write_output(args.csv, lambda fh: write_csv(fh, meta, header, rows), out)
        if args.csv == "-":
            return EXIT_OK
    lines = ["percentage change in fidelity (white noise)", "  " + "".join(f"{h:>10}" for h in header)]
    for r in rows:
        lines.append("  " + f"{r[0]:>10.2f}" + "".join(f"{v:>10.2f}" for v in r[1:]))
    payload = {"p": list(rob.TABLE1_P), "q": list(rob.TABLE1_Q), "pct": t.tolist()}
    emit(out, payload, args.json, "\n".join(lines))
    return EXIT_OK


# resources

def cmd_resources(args, out) -> int:
    if args.n < 1:
        raise InputError("n must be >= 1")
    rep = res.resource_report(args.n, args.p, args.delta, args.F, C=args.C)
    payload = rep.to_dict()
    payload["hashing_rate"] = res.hashing_rate(args.F)
    if args.ceil and rep.copies_required is not None:
        payload["copies_required_ceil"] = math.ceil(rep.copies_required)
    lines = [f"resources n={args.n} p={fmt(args.p)} delta={fmt(args.delta)} F={fmt(args.F)}"]
    for k, v in payload.items():
        lines.append(f"  {k:<24} {v if isinstance(v, (bool, int)) or v is None else fmt(v)}")
    emit(out, payload, args.json, "\n".join(lines))
    return EXIT_OK


# robustness

def cmd_robustness(args, out) -> int:
    pt = rob.robustness_point(args.case, args.p, args.q, args.eta)
    payload = pt.to_dict()
    if args.engine:
        chk = rob.engine_check(args.case, pt.p, pt.q, pt.eta or 0.0)
        payload["engine"] = {k: {"filtered": v.filtered, "avg_fef": v.avg_fef} for k, v in chk.items()}
    lines = [f"robustness case={pt.case}"]
    for k, v in pt.to_dict().items():
        if k != "case":
            lines.append(f"  {k:<18} {v if isinstance(v, bool) or v is None else fmt(v)}")
    for k, v in payload.get("engine", {}).items():
        lines.append(f"  engine {k:<11} filtered={fmt(v['filtered'])} avg_fef={fmt(v['avg_fef'])}")
    emit(out, payload, args.json, "\n".join(lines))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qrepeater", description="Repeater-chain teleportation toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.set_defaults(func=fn)
        return p

    p = add("measures", cmd_measures, "entanglement quantifiers of one state")
    p.add_argument("kind", choices=["family", "nmes", "werner", "white_mix", "loss_mix", "bell", "photon_loss"])
    p.add_argument("params", nargs="*", help="key=value parameters, e.g. p=0.2 delta=0.6")
    p.add_argument("--mc", action="store_true", help="also run the Monte-Carlo teleportation estimate")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=None, help="defaults to REPEATER_SEED or 0")

    p = add("single-node", cmd_single_node, "feasibility and per-outcome fidelities for one node")
    for k in ("p", "delta", "alpha", "beta"):
        p.add_argument(k, type=float)
    p.add_argument("--source", choices=["closed_form", "engine"], default="closed_form")

    p = add("chain", cmd_chain, "reduce a chain scenario from a JSON config")
    p.add_argument("config")

    p = add("sweep", cmd_sweep, "evaluate quantities over a parameter grid into CSV")
    p.add_argument("spec")
    p.add_argument("--out", default=None, help="CSV path, '-' for stdout; overrides the spec's output")
    p.add_argument("--workers", type=int, default=1)

    p = add("table1", cmd_table1, "percentage fidelity change under white noise")
    p.add_argument("--csv", default=None, help="also write CSV to this path ('-' for stdout)")

    p = add("resources", cmd_resources, "saved resource, bounds and copy counts")
    p.add_argument("n", type=int)
    p.add_argument("p", type=float)
    p.add_argument("delta", type=float)
    p.add_argument("F", type=float)
    p.add_argument("--C", type=float, default=None, help="per-segment concurrence; defaults to the minimal feasible one")
    p.add_argument("--ceil", action="store_true", help="also report the integer copy count")

    p = add("robustness", cmd_robustness, "noise-robustness point")
    p.add_argument("case", choices=rob.CASES)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--engine", action="store_true", help="cross-check with the Born-rule engine")
    return ap


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args, out)
    except IOError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IO
    except (InputError, ScenarioError, NotFamilyError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
