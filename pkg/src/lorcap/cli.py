"""Command-line front end: ``lorcap <command> ...``.

Every command is turned into an experiment config (a JSON object with
command, params, output, seed and budgets), validated against the shipped
schemas and executed. With ``-o`` the main artifact goes to the given path
and a run record (config, config hash, checks, summary) to
``<path>.run.json``; without it the artifact is printed.

Exit codes: 0 success, 1 input error, 2 a mathematical check failed.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import cantor, capacity, hausdorff, orlicz, rearrange, testfn
from .cantor import CantorParams, Variant
from .surd import Surd, as_fraction

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2
COMMANDS = ("norm", "cantor", "testfn", "hausdorff", "capacity", "pipeline")


class InputError(Exception):
    pass


# -- schemas and serialization ---------------------------------------------------

def load_schema(name: str) -> dict:
    text = resources.files("lorcap").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def _pointer(path) -> str:
    return "/" + "/".join(str(p).replace("~", "~0").replace("/", "~1") for p in path)


def validate(instance, schema_name: str, prefix: str = "") -> None:
    validator = jsonschema.Draft202012Validator(load_schema(schema_name))
    errors = sorted(validator.iter_errors(instance), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        lines = [f"{prefix}{_pointer(e.absolute_path) if e.absolute_path or not prefix else ''}: {e.message}" for e in errors]
        raise InputError("schema violation:\n  " + "\n  ".join(lines))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return {"numerator": x.numerator, "denominator": x.denominator, "value": float(x)}
    if isinstance(x, Surd):
        if x.is_rational():
            return _jsonable(x.as_fraction())
        return {"root_of_two": x.den, "coefficients": [str(c) for c in x.coeffs], "value": float(x)}
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def config_hash(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


@dataclass
class Outcome:
    artifact: str  # main artifact text (CSV or JSON)
    stdout: str  # what to print when there is no output path
    checks: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)  # suffix -> text


# -- commands ----------------------------------------------------------------------

def _q(q):
    return "inf" if q in ("inf", "Infinity") else q


def _params(d) -> CantorParams:
    try:
        return CantorParams(int(d["n"]), as_fraction(d["p"]), Variant(d.get("variant", "uniform")))
    except ValueError as e:
        raise InputError(str(e)) from e


def cmd_norm(params: dict, seed: int) -> Outcome:
    prof = rearrange.StepProfile.from_json(params["profile"])
    p, q = params["p"], _q(params.get("q", 1))
    try:
        exp = rearrange.LorentzExponents(p, q)
    except ValueError as e:
        raise InputError(str(e)) from e
    value = float(rearrange.lorentz_norm(prof, exp.p, exp.q))
    lc = float(rearrange.layercake_p1(prof, exp.p))
    checks = {}
    if exp.finite_q and exp.q == 1:
        checks["factor_p_identity"] = rearrange.close(value, float(exp.p) * lc)
    if not exp.finite_q:
        checks["weak_forms_agree"] = rearrange.close(value, float(rearrange.weak_norm_mu(prof, exp.p)))
    out = {"p": float(exp.p), "q": float(exp.q) if exp.finite_q else "inf", "lorentz_norm": value, "layercake_p1": lc}
    return Outcome(dumps(out), repr(value) + "\n", checks, out)


def cmd_cantor(params: dict, seed: int) -> Outcome:
    cp = _params(params)
    depth = int(params["depth"])
    csv_text = cantor.frames_csv(cp, depth)
    n = cp.n
    gens = [cantor.generation_measure(cp, k) for k in range(1, depth + 1)]
    gaps = [cantor.gap_measure(cp, k) for k in range(1, depth + 1)]
    core = cantor.core_measure(cp, depth)
    total = sum(gens, Surd(0)) + sum(gaps, Surd(0)) + core
    summary = {
        "params": cp.to_json(),
        "depth": depth,
        "generation_measure": gens,
        "gap_measure": gaps,
        "core_measure": core,
        "tiling_total": total,
    }
    if params.get("line_model"):
        summary["line_model"] = [
            {"generation": r["generation"], "word": r["word"], "center": r["center"], "left": list(r["left"]), "right": list(r["right"])}
            for r in cantor.line_model_rows(3)
        ]
    checks = {"tiling_exact": total == 2 ** n}
    return Outcome(csv_text, csv_text, checks, _jsonable(summary))


def _rows_csv_verdicts(rows) -> dict:
    nf = [r.norm_f for r in rows]
    nd = [r.norm_Df for r in rows]
    return {
        "norm_f_decreasing": all(b < a for a, b in zip(nf, nf[1:])),
        "norm_Df_strictly_decreasing": all(b < a for a, b in zip(nd, nd[1:])),
    }


def cmd_testfn(params: dict, seed: int) -> Outcome:
    cp = _params(params)
    lo, hi = int(params["j_min"]), int(params["j_max"])
    if hi < lo:
        raise InputError("/params/j_max: must be >= j_min")
    rows = testfn.norm_table(cp, _q(params["q"]), range(lo, hi + 1))
    text = testfn.table_csv(rows)
    checks = {"rows_finite": all(math.isfinite(r.norm_Df) and math.isfinite(r.norm_f) for r in rows)}
    summary = {"params": cp.to_json(), "q": params["q"], "j_range": [lo, hi], **_rows_csv_verdicts(rows)}
    return Outcome(text, text, checks, summary)


def cmd_hausdorff(params: dict, seed: int) -> Outcome:
    cp = _params(params)
    n, p = cp.n, cp.p
    crit = n - p
    identity = []
    for k in range(1, 13):
        rep = hausdorff.covering_content(cp, crit, k)
        e = Fraction(0) if cp.variant is Variant.UNIFORM else p - n
        identity.append(rep.equals_power_of_depth(e))
    checks = {"critical_covering_identity": all(identity)}
    summary: dict = {"params": cp.to_json()}
    if "ds" in params or "ks" in params:
        ds = params.get("ds", [float(crit)])
        ks = params.get("ks", list(range(1, 13)))
        text = hausdorff.coverings_csv(cp, ds, ks)
        return Outcome(text, text, checks, summary)
    if params.get("estimate"):
        est = hausdorff.dimension_estimate(cp, int(params.get("depth", 12)), float(params.get("tol", 0.02)))
        out = est.to_json()
        summary["dimension"] = out
        return Outcome(dumps(out), dumps(out), checks, summary)
    if "d" not in params or "k" not in params:
        raise InputError("/params: need d and k, ds/ks, or estimate")
    rep = hausdorff.covering_content(cp, params["d"], int(params["k"]))
    out = {
        "variant": cp.variant.value,
        "d": rep.d,
        "k": rep.depth,
        "count": rep.count,
        "two_exponent": rep.two_exponent,
        "k_exponent": rep.k_exponent,
        "sum": rep.sum,
        "size_convention": rep.size_convention,
    }
    summary["covering"] = _jsonable(out)
    return Outcome(dumps(out), repr(rep.sum) + "\n", checks, summary)


def cmd_capacity(params: dict, seed: int, max_iter: int | None = None) -> Outcome:
    try:
        problem = capacity.CapacityProblem.from_json(params["problem"])
    except ValueError as e:
        raise InputError(f"/params/problem: {e}") from e
    cells = problem.cells_per_axis ** problem.n
    budget = cantor.word_budget()
    if cells > 2 ** budget:
        raise InputError(f"/params/problem: {cells} cells exceed the budget 2^{budget}")
    kw = {} if max_iter is None else {"max_iter": max_iter}
    checks: dict = {}
    extra: dict = {}
    try:
        if params.get("chain"):
            ch = capacity.chain_check(problem, **kw)
            out = {"chain": ch.to_json()}
            checks["chain_ordering"] = ch.holds
        elif params.get("refine"):
            ref = capacity.refine(problem, **kw)
            out = {
                "value": ref.values[-1],
                "iterations": sum(r.iterations for r in ref.results),
                "converged": all(r.converged for r in ref.results),
                "h_sequence": list(ref.hs),
                "values": list(ref.values),
                "extrapolated_value": ref.extrapolated,
                "order": ref.order,
            }
            res = ref.results[-1]
        else:
            res = capacity.minimize(problem, **kw)
            out = {
                "value": res.value,
                "iterations": res.iterations,
                "converged": res.converged,
                "h_sequence": [problem.h],
                "extrapolated_value": None,
            }
    except capacity.InfeasibleProblem as e:
        raise InputError(f"/params/problem: {e}") from e
    if not params.get("chain"):
        fine = problem.refined(res.minimizer.spacing)
        target, zero = fine.masks()
        g = res.minimizer.samples
        checks["minimizer_feasible"] = bool(np.all(g[target] >= 1) and np.all(g[zero] == 0) and g.min() >= 0 and g.max() <= 1)
        if params.get("dump_minimizer"):
            extra[".minimizer.json"] = dumps(res.minimizer.to_json())
    out["problem"] = problem.to_json()
    out["scheme"] = "forward differences, zero extension, Euclidean magnitude"
    text = dumps(out)
    return Outcome(text, text, checks, {k: v for k, v in out.items() if k != "problem"}, extra)


def cmd_pipeline(params: dict, seed: int) -> Outcome:
    cp = _params({**params, "variant": "harmonic"})
    if "young" in params:
        try:
            phi = orlicz.YoungFunction.from_json(params["young"])
        except ValueError as e:
            raise InputError(f"/params/young: {e}") from e
    else:
        phi = orlicz.calibrate_family(cp.p, params.get("eps", 1.0))
    try:
        state = orlicz.run_pipeline(cp, int(params["K"]), phi, max_j=int(params.get("max_j", 5000)))
    except orlicz.PipelineError as e:
        raise InputError(str(e)) from e
    text = orlicz.pipeline_csv(state)
    mods = [r.modular_Dg + r.modular_g for r in state.rows]
    ranges = [(j, J) for j, J, _, _ in state.selected]
    checks = {
        "norm_targets": all(r.norm_p <= 2.0 ** -r.k for r in state.rows),
        "disjoint_generations": all(a[1] < b[0] for a, b in zip(ranges, ranges[1:])),
        "modular_nonincreasing": all(b <= a for a, b in zip(mods, mods[1:])),
    }
    summary = {
        **state.to_json(),
        "admissibility_integral": orlicz.admissibility_integral(phi, cp.p),
        "young": phi.to_json(),
    }
    return Outcome(text, text, checks, summary)


HANDLERS = {
    "norm": cmd_norm,
    "cantor": cmd_cantor,
    "testfn": cmd_testfn,
    "hausdorff": cmd_hausdorff,
    "capacity": cmd_capacity,
    "pipeline": cmd_pipeline,
}


@contextlib.contextmanager
def _budget(words):
    if words is None:
        yield
        return
    old = os.environ.get("LORCAP_BUDGET_WORDS")
    os.environ["LORCAP_BUDGET_WORDS"] = str(words)
    try:
        yield
    finally:
        if old is None:
            os.environ.pop("LORCAP_BUDGET_WORDS", None)
        else:
            os.environ["LORCAP_BUDGET_WORDS"] = old


def execute(config: dict, out_dir: Path | None = None):
    """Run a validated config. Returns (Outcome, record) and writes
    artifacts when the config names an output."""
    validate(config, "config")
    command = config["command"]
    validate(config["params"], f"command_{command}", prefix="/params")
    seed = int(config.get("seed", 0))
    budgets = config.get("budgets", {})
    handler = HANDLERS[command]
    kwargs = {"max_iter": budgets["max_iter"]} if command == "capacity" and "max_iter" in budgets else {}
    try:
        with _budget(budgets.get("words")):
            outcome = handler(config["params"], seed, **kwargs)
    except (cantor.BudgetExceeded, ValueError, KeyError) as e:
        raise InputError(str(e)) from e
    record = None
    output = config.get("output")
    if output:
        path = Path(output) if out_dir is None else out_dir / output
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(outcome.artifact)
        artifacts = [Path(output).name]
        for suffix, text in outcome.extra.items():
            Path(str(path) + suffix).write_text(text)
            artifacts.append(Path(output).name + suffix)
        record = {
            "command": command,
            "config": config,
            "config_hash": config_hash(config),
            "artifacts": artifacts,
            "checks": outcome.checks,
            "summary": _jsonable(outcome.summary),
        }
        record = json.loads(dumps(record))
        validate(record, "record")
        Path(str(path) + ".run.json").write_text(dumps(record))
    return outcome, record


def run(config: dict) -> int:
    try:
        outcome, record = execute(config)
    except InputError as e:
        print(f"lorcap: {e}", file=sys.stderr)
        return EXIT_INPUT
    if not config.get("output"):
        sys.stdout.write(outcome.stdout)
    failed = [k for k, ok in outcome.checks.items() if not ok]
    if failed:
        print("lorcap: check failed: " + ", ".join(sorted(failed)), file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


# -- report ----------------------------------------------------------------------------

def _testfn_verdict_from_csv(path: Path) -> dict:
    with path.open() as f:
        rows = list(csv.DictReader(f))
    nf = [float(r["norm_f"]) for r in rows]
    nd = [float(r["norm_Df"]) for r in rows]
    return {
        "norm_f_decreasing": all(b < a for a, b in zip(nf, nf[1:])),
        "norm_Df_strictly_decreasing": all(b < a for a, b in zip(nd, nd[1:])),
    }


def build_report(record_paths) -> dict:
    """Merge run records. Raises InputError on missing files or when two
    records for the same artifact carry different config hashes."""
    sections = []
    seen: dict = {}
    conflicts = []
    for rp in sorted(Path(p) for p in record_paths):
        if not rp.exists():
            raise InputError(f"missing artifact {rp}")
        rec = json.loads(rp.read_text())
        validate(rec, "record", prefix=f"{rp.name}")
        key = (rec["command"], tuple(rec["artifacts"]))
        if key in seen and seen[key] != rec["config_hash"]:
            conflicts.append(f"{rec['command']} {list(key[1])}: {seen[key]} != {rec['config_hash']}")
        seen.setdefault(key, rec["config_hash"])
        section = {
            "command": rec["command"],
            "artifacts": rec["artifacts"],
            "config_hash": rec["config_hash"],
            "checks": rec["checks"],
            "summary": rec["summary"],
        }
        if rec["command"] == "testfn":
            main = rp.parent / rec["artifacts"][0]
            if not main.exists():
                raise InputError(f"missing artifact {main}")
            section["verdicts"] = _testfn_verdict_from_csv(main)
        sections.append(section)
    if conflicts:
        raise InputError("conflicting config hashes:\n  " + "\n  ".join(conflicts))
    report = {
        "sections": sections,
        "tolerance": {"relative": rearrange.REL_TOL, "absolute": rearrange.ABS_TOL},
        "all_checks_pass": all(all(s["checks"].values()) for s in sections),
    }
    validate(report, "report")
    return report


def _collect_records(paths) -> list:
    out = []
    for p in paths:
        p = Path(p)
        if p.is_dir():
            out.extend(sorted(p.glob("*.run.json")))
        else:
            out.append(p)
    return out


# -- suite ------------------------------------------------------------------------------

def suite_configs(seed: int) -> list:
    rng = np.random.default_rng(seed)
    configs = [
        {"command": "norm", "params": {"profile": [{"value": 2, "mass": 1}, {"value": 1, "mass": 3}], "p": 2, "q": 1}, "output": "norm.json"},
        {"command": "cantor", "params": {"n": 2, "p": 1.5, "variant": "uniform", "depth": 2, "line_model": True}, "output": "cantor_uniform.csv"},
        {"command": "cantor", "params": {"n": 2, "p": 1.5, "variant": "harmonic", "depth": 2}, "output": "cantor_harmonic.csv"},
        {"command": "testfn", "params": {"n": 2, "p": 1.5, "variant": "uniform", "q": 2, "j_min": 2, "j_max": 10}, "output": "testfn_uniform_q2.csv"},
        {"command": "testfn", "params": {"n": 2, "p": 1.5, "variant": "uniform", "q": "inf", "j_min": 2, "j_max": 12}, "output": "testfn_uniform_qinf.csv"},
        {"command": "testfn", "params": {"n": 2, "p": 1.5, "variant": "uniform", "q": 1, "j_min": 2, "j_max": 12}, "output": "testfn_uniform_q1.csv"},
        {"command": "testfn", "params": {"n": 2, "p": 1.5, "variant": "harmonic", "q": 1, "j_min": 2, "j_max": 10}, "output": "testfn_harmonic_q1.csv"},
        {"command": "hausdorff", "params": {"n": 2, "p": 1.5, "variant": "harmonic", "ds": [0.25, 0.5, 0.75], "ks": list(range(1, 13))}, "output": "coverings_harmonic.csv"},
        {"command": "hausdorff", "params": {"n": 2, "p": 1.5, "variant": "uniform", "estimate": True, "depth": 12, "tol": 0.02}, "output": "dimension_uniform.json"},
        {"command": "hausdorff", "params": {"n": 2, "p": 1.5, "variant": "harmonic", "estimate": True, "depth": 12, "tol": 0.02}, "output": "dimension_harmonic.json"},
        {
            "command": "capacity",
            "params": {"problem": {"n": 2, "p": 1.5, "q": 1, "variant": "gamma_rel", "box": 1.25, "h": 0.125, "target_box": 0.5, "domain_box": 1.0}, "refine": True},
            "output": "capacity_annulus.json",
        },
    ]
    for i in range(2):
        inst = capacity.random_chain_instance(rng, cells=16)
        pj = inst.to_json()
        configs.append({"command": "capacity", "params": {"problem": pj, "chain": True}, "output": f"chain_{i}.json"})
    configs.append({"command": "pipeline", "params": {"n": 3, "p": 1.5, "K": 3, "eps": 1.0}, "output": "pipeline.csv"})
    for c in configs:
        c["seed"] = seed
    return configs


def run_suite(seed: int, outdir: Path) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    records = []
    status = EXIT_OK
    for cfg in suite_configs(seed):
        try:
            outcome, _ = execute(cfg, outdir)
        except InputError as e:
            print(f"lorcap: {cfg['command']}: {e}", file=sys.stderr)
            return EXIT_INPUT
        failed = [k for k, ok in outcome.checks.items() if not ok]
        line = "ok" if not failed else "FAILED " + ",".join(sorted(failed))
        print(f"{cfg['output']}: {line}")
        if failed:
            status = EXIT_INVARIANT
        records.append(outdir / (cfg["output"] + ".run.json"))
    report = build_report(records)
    (outdir / "report.json").write_text(dumps(report))
    return status


# -- argument parsing ---------------------------------------------------------------------

def _j_range(text: str):
    if ".." in text:
        a, b = text.split("..", 1)
        return int(a), int(b)
    return int(text), int(text)


def _number_or_inf(text: str):
    if text.lower() in ("inf", "infinity"):
        return "inf"
    v = float(text)
    return int(v) if v.is_integer() else v


def _profile_arg(text: str):
    if Path(text).exists():
        return json.loads(Path(text).read_text())
    return json.loads(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lorcap", description="Lorentz norms, Cantor constructions and grid capacities.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, output=True):
        sp.add_argument("--seed", type=int, default=0)
        if output:
            sp.add_argument("-o", "--output", default=None, help="write the artifact here (plus <output>.run.json)")

    def cantor_args(sp, variant_default="uniform"):
        sp.add_argument("--n", type=int, required=True)
        sp.add_argument("--p", type=float, required=True)
        sp.add_argument("--variant", choices=["uniform", "harmonic"], default=variant_default)

    sp = sub.add_parser("norm", help="Lorentz norm of a step profile")
    sp.add_argument("--profile", required=True, help="JSON file or inline JSON array of {value, mass}")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--q", type=_number_or_inf, default=1)
    common(sp)

    sp = sub.add_parser("cantor", help="frame geometry dump and exact measures")
    cantor_args(sp)
    sp.add_argument("--depth", type=int, default=2)
    sp.add_argument("--line-model", action="store_true", help="include the one-dimensional picture data")
    common(sp)

    sp = sub.add_parser("testfn", help="norm table of the test functions f_j")
    cantor_args(sp)
    sp.add_argument("--q", type=_number_or_inf, default=1)
    sp.add_argument("--j", type=_j_range, default=(2, 10), help="range like 2..10")
    common(sp)

    sp = sub.add_parser("hausdorff", help="covering sums and dimension estimates")
    cantor_args(sp)
    sp.add_argument("--d", type=float)
    sp.add_argument("--k", type=int)
    sp.add_argument("--ds", type=float, nargs="+")
    sp.add_argument("--ks", type=_j_range, help="range like 1..12")
    sp.add_argument("--estimate", action="store_true")
    sp.add_argument("--depth", type=int, default=12)
    sp.add_argument("--tol", type=float, default=0.02)
    common(sp)

    sp = sub.add_parser("capacity", help="grid capacity minimization")
    sp.add_argument("problem", help="problem JSON file")
    sp.add_argument("--refine", action="store_true", help="three grids and Richardson extrapolation")
    sp.add_argument("--chain", action="store_true", help="all four functionals and their ordering")
    sp.add_argument("--dump-minimizer", action="store_true")
    sp.add_argument("--max-iter", type=int)
    common(sp)

    sp = sub.add_parser("pipeline", help="decaying sequence and Orlicz modulars (harmonic construction)")
    sp.add_argument("--n", type=int, default=3)
    sp.add_argument("--p", type=float, default=1.5)
    sp.add_argument("--K", type=int, default=5)
    sp.add_argument("--eps", type=float, default=1.0)
    sp.add_argument("--young", help="Young function JSON file (segments)")
    sp.add_argument("--max-j", type=int, default=5000)
    common(sp)

    sp = sub.add_parser("run", help="execute an experiment config file")
    sp.add_argument("config")

    sp = sub.add_parser("report", help="merge run records into one summary")
    sp.add_argument("records", nargs="*", help="*.run.json files or directories")
    sp.add_argument("-o", "--output")

    sp = sub.add_parser("suite", help="run the fixed experiment suite")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--outdir", default="lorcap-suite")
    return ap


def config_from_args(args) -> dict:
    c = args.command
    if c == "norm":
        params = {"profile": _profile_arg(args.profile), "p": args.p, "q": args.q}
    elif c == "cantor":
        params = {"n": args.n, "p": args.p, "variant": args.variant, "depth": args.depth}
        if args.line_model:
            params["line_model"] = True
    elif c == "testfn":
        params = {"n": args.n, "p": args.p, "variant": args.variant, "q": args.q, "j_min": args.j[0], "j_max": args.j[1]}
    elif c == "hausdorff":
        params = {"n": args.n, "p": args.p, "variant": args.variant}
        if args.estimate:
            params.update(estimate=True, depth=args.depth, tol=args.tol)
        elif args.ds or args.ks:
            if args.ds:
                params["ds"] = args.ds
            if args.ks:
                params["ks"] = list(range(args.ks[0], args.ks[1] + 1))
        else:
            if args.d is not None:
                params["d"] = args.d
            if args.k is not None:
                params["k"] = args.k
    elif c == "capacity":
        params = {"problem": json.loads(Path(args.problem).read_text())}
        for flag in ("refine", "chain", "dump_minimizer"):
            if getattr(args, flag):
                params[flag] = True
    elif c == "pipeline":
        params = {"n": args.n, "p": args.p, "K": args.K, "eps": args.eps, "max_j": args.max_j}
        if args.young:
            params["young"] = json.loads(Path(args.young).read_text())
    else:
        raise AssertionError(c)
    config = {"command": c, "params": params, "seed": args.seed}
    if args.output:
        config["output"] = args.output
    if c == "capacity" and args.max_iter:
        config["budgets"] = {"max_iter": args.max_iter}
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "suite":
            return run_suite(args.seed, Path(args.outdir))
        if args.command == "report":
            report = build_report(_collect_records(args.records))
            text = dumps(report)
            if args.output:
                Path(args.output).write_text(text)
            else:
                sys.stdout.write(text)
            return EXIT_OK
        if args.command == "run":
            config = json.loads(Path(args.config).read_text())
        else:
            config = config_from_args(args)
    except InputError as e:
        print(f"lorcap: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, json.JSONDecodeError) as e:
        print(f"lorcap: {e}", file=sys.stderr)
        return EXIT_INPUT
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
