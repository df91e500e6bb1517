"""Command-line interface: ``crowdwise {generate,diagnose,simulate,sweep,check}``.

Exit codes: 0 success, 1 usage or input error, 2 computation error,
3 a requested check or expected verdict failed.
"""

import argparse
import concurrent.futures
from importlib import resources
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .diagnostics import (
    DiagnosticConfig,
    InstanceCache,
    equal_neighbor_power_bound_check,
    recursive_influence_bound_check,
    trace_report,
    verdict,
)
from .exceptions import ConvergenceError, CrowdwiseError, ExceedsCapError, NotPrimitiveError
from .families import FAMILIES, PRNG_ALGORITHM, FamilyGenerator
from .io import (
    build_manifest,
    read_triplets,
    write_csv,
    write_json,
    write_trace_long,
    write_trace_summary,
    write_triplets,
)
from .simulation import FIGURE_PRESETS, SimulationConfig, mean_checks, simulate, variance_checks
from .stochastic import (
    EQUAL_NEIGHBOR,
    WeightGraph,
    build_from_weights,
    column_sums,
    influence_curve,
    is_primitive,
    iter_influence,
    stationary_distribution,
)

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE, EXIT_CHECK = 0, 1, 2, 3
PARAM_OPTIONS = ("n", "L", "m", "m0", "nu", "c", "exponent")
INT_PARAMS = {"n", "L", "m", "m0"}
BOUND_CHECKS = ("power", "recursive")
BUNDLED_SWEEPS = {"paper-figures": "paper_figures.json"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _str_list(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _add_family_options(p):
    g = p.add_argument_group("family size and parameters")
    g.add_argument("--n", type=int)
    g.add_argument("--L", type=int, help="layers of the reversed binary tree")
    g.add_argument("--m", type=int, help="double-star size, or edges per new node in PA models")
    g.add_argument("--m0", type=int)
    g.add_argument("--nu", type=float)
    g.add_argument("--c", type=float)
    g.add_argument("--exponent", type=float)
    g.add_argument("--seed", type=int, help="required for random families")


def _family_from_args(name, args, *, with_size=True):
    """Split the generic options into (FamilyGenerator, size) for ``name``."""
    if name not in FAMILIES:
        raise UsageError(f"unknown family {name!r}; expected one of {sorted(FAMILIES)}")
    entry = FAMILIES[name]
    given = {k: getattr(args, k) for k in PARAM_OPTIONS if getattr(args, k, None) is not None}
    size = given.pop(entry.size_name, None)
    if with_size and size is None:
        raise UsageError(f"family {name!r} needs --{entry.size_name}")
    extra = set(given) - set(entry.params)
    if extra:
        raise UsageError(f"family {name!r} does not take {', '.join('--' + e for e in sorted(extra))}")
    if entry.random and args.seed is None:
        raise UsageError(f"random family {name!r} needs --seed")
    return FamilyGenerator(name, given, args.seed), size


def _notion_file(notion):
    return "trace_" + notion.replace(":", "_") + ".csv"


def _family_bound_checks(family, grid, checks, k_max):
    out = []
    for size in grid:
        fam = family.generate(size)
        for check in checks:
            if check == "power":
                if fam.W.kind != EQUAL_NEIGHBOR:
                    raise UsageError(
                        f"power bound needs equal-neighbor weights; {family.name!r} is {fam.W.kind!r}"
                    )
                rep = equal_neighbor_power_bound_check(fam.W, k_max)
            else:
                rep = recursive_influence_bound_check(fam.P, fam.P)
            out.append({"size": size, **rep.to_dict()})
    return out


def run_diagnose(job, out_dir):
    """Run one diagnose job dict; returns a result summary.

    Keys: ``family``, ``params``, ``seed``, ``grid``, ``notions``,
    ``config`` (DiagnosticConfig fields), ``bound_checks``, ``expect``.
    """
    os.makedirs(out_dir, exist_ok=True)
    family = FamilyGenerator(job["family"], job.get("params"), job.get("seed"))
    config = DiagnosticConfig.from_dict(job.get("config", {}))
    grid = job["grid"]
    notions = job.get("notions")
    cache = InstanceCache()
    build = verdict if len(grid) >= 4 else trace_report
    report = build(family, grid, config, notions, cache=cache)
    doc = report.to_dict()
    if job.get("bound_checks"):
        doc["checks"] = _family_bound_checks(family, grid, job["bound_checks"], job.get("k_max", 50))
    outputs = [os.path.join(out_dir, "report.json")]
    write_json(doc, outputs[0])
    for name, tr in report.traces.items():
        path = os.path.join(out_dir, _notion_file(name))
        with open(path, "w", newline="\n") as fh:
            fh.write(tr.to_csv())
        outputs.append(path)
    mismatches = {
        k: {"expected": v, "got": report.verdicts.get(k)}
        for k, v in (job.get("expect") or {}).items()
        if report.verdicts.get(k) != v
    }
    failed_checks = [c for c in doc.get("checks", []) if not c["holds"]]
    return {
        "summary": report.summary_table(),
        "verdicts": report.verdicts,
        "flags": report.flags,
        "mismatches": mismatches,
        "ok": not (mismatches or report.flags or failed_checks),
        "outputs": outputs,
        "config": job,
    }


def _load_matrix_job(job):
    if "matrix" in job:
        return read_triplets(job["matrix"]), {"matrix": job["matrix"]}
    family = FamilyGenerator(job["family"], job.get("params"), job.get("seed"))
    return family.generate(job["size"]).P, family.describe() | {"size": job["size"]}


def run_simulate(job, out_dir):
    """Run one simulate job dict (``matrix`` path or ``family``/``size``/``params``)."""
    os.makedirs(out_dir, exist_ok=True)
    P, source = _load_matrix_job(job)
    cfg = SimulationConfig(**job.get("sim", {}))
    trace = simulate(P, cfg)
    long_path = os.path.join(out_dir, "trace_long.csv")
    summary_path = os.path.join(out_dir, "summary.csv")
    write_trace_long(trace, long_path)
    write_trace_summary(trace, P, summary_path)
    outputs = [long_path, summary_path]
    if cfg.record_individuals:
        path = os.path.join(out_dir, "individuals.csv")
        rows = (
            (k, r, i, repr(float(trace.individuals[r, k, i])))
            for r in range(trace.runs) for k in range(trace.horizon + 1) for i in range(trace.n)
        )
        write_csv(path, ["k", "run", "node", "x"], rows)
        outputs.append(path)
    checks, ok = None, True
    if job.get("check_variance"):
        ks = sorted({k for k in (0, 1, 2, 5, trace.horizon) if k <= trace.horizon})
        var = variance_checks(trace, P, ks)
        mean = mean_checks(trace, P, ks) if cfg.pin_first is None else []
        checks = [
            {"kind": kind, "k": c.k, "empirical": c.empirical, "analytic": c.analytic,
             "tolerance": c.tolerance, "ok": c.ok}
            for kind, group in (("variance", var), ("mean", mean)) for c in group
        ]
        ok = all(c["ok"] for c in checks)
    manifest_path = os.path.join(out_dir, "manifest.json")
    write_json(
        build_manifest(outputs, config=job, prng=PRNG_ALGORITHM,
                       extra={"source": source, "checks": checks}),
        manifest_path,
    )
    lines = [f"simulated n={trace.n} runs={trace.runs} T={trace.horizon}"]
    if checks:
        lines += [
            f"{c['kind']:<8} k={c['k']:<6} empirical={c['empirical']:.6g} "
            f"analytic={c['analytic']:.6g} tol={c['tolerance']:.3g} {'ok' if c['ok'] else 'FAIL'}"
            for c in checks
        ]
    return {"summary": "\n".join(lines), "ok": ok, "outputs": outputs + [manifest_path], "config": job}


def _exit_code_for(err):
    if isinstance(err, (ExceedsCapError, ConvergenceError, NotPrimitiveError)):
        return EXIT_COMPUTE
    if isinstance(err, (UsageError, ValueError, TypeError, KeyError, OSError)):
        return EXIT_USAGE
    return EXIT_COMPUTE


def cmd_generate(args):
    family, size = _family_from_args(args.family, args)
    fam = family.generate(size)
    prefix = args.out or f"{args.family}_{size}"
    triplet, meta = prefix + ".triplet", prefix + ".json"
    write_triplets(fam.P, triplet)
    write_json(
        {**family.describe(), "size": size, "kind": fam.W.kind, "prng": PRNG_ALGORITHM,
         "metadata": fam.meta.to_dict()},
        meta,
    )
    print(triplet)
    return EXIT_OK


def cmd_diagnose(args):
    family, _ = _family_from_args(args.family, args, with_size=False)
    grids = [g for g in (args.n_grid, args.m_grid, args.L_grid) if g is not None]
    if len(grids) != 1:
        raise UsageError("give exactly one of --n-grid, --m-grid, --L-grid")
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
    for key in ("k_list", "K_cap", "alphas", "n_seeds", "mixing_cap", "slope_min",
                "value_max", "value_floor"):
        val = getattr(args, key)
        if val is not None:
            cfg[key] = val
    if cfg.get("K_cap") not in (None, "auto"):
        cfg["K_cap"] = int(cfg["K_cap"])
    checks = args.bound_checks or []
    for c in checks:
        if c not in BOUND_CHECKS:
            raise UsageError(f"unknown bound check {c!r}; expected one of {BOUND_CHECKS}")
    expect = {}
    for item in args.expect or []:
        notion, sep, v = item.partition("=")
        if not sep:
            raise UsageError(f"--expect entries look like notion=verdict, got {item!r}")
        expect[notion] = v
    job = {"family": family.name, "params": family.params, "seed": family.seed, "grid": grids[0],
           "notions": args.notions, "config": cfg, "bound_checks": checks, "expect": expect}
    result = run_diagnose(job, args.out)
    print(result["summary"])
    for k, v in result["mismatches"].items():
        print(f"expected {k}={v['expected']}, got {v['got']}", file=sys.stderr)
    return EXIT_OK if result["ok"] else EXIT_CHECK


def cmd_simulate(args):
    sim = {}
    job = {}
    if args.preset:
        preset = FIGURE_PRESETS[args.preset]
        job = {"family": preset["family"], "params": preset["params"], "size": preset["size"]}
        sim = {"horizon": preset["horizon"], "pin_first": 1.0}
    if args.matrix:
        if args.family or args.preset:
            raise UsageError("--matrix excludes --family and --preset")
        job = {"matrix": args.matrix}
    elif args.family:
        family, size = _family_from_args(args.family, args)
        job = {"family": family.name, "params": family.params, "seed": family.seed, "size": size}
    elif not args.preset:
        raise UsageError("give --matrix, --family or --preset")
    for key, val in (("horizon", args.T), ("mu", args.mu), ("sigma", args.sigma),
                     ("runs", args.runs), ("pin_first", args.pin_first)):
        if val is not None:
            sim[key] = val
    sim["seed"] = args.sim_seed if args.sim_seed is not None else (args.seed or 0)
    sim["record_individuals"] = args.record_individuals
    job["sim"] = sim
    job["check_variance"] = args.check_variance
    result = run_simulate(job, args.out)
    print(result["summary"])
    return EXIT_OK if result["ok"] else EXIT_CHECK


def _run_job(job, out_dir):
    kind = job.get("kind", "diagnose")
    name = job["name"]
    path = os.path.join(out_dir, name)
    try:
        if kind == "diagnose":
            res = run_diagnose(job, path)
        elif kind == "simulate":
            res = run_simulate(job, path)
        else:
            raise UsageError(f"unknown job kind {kind!r}")
    except Exception as err:  # recorded per job, never aborts the sweep
        return {"name": name, "kind": kind, "status": "error", "error": f"{type(err).__name__}: {err}"}
    status = "ok" if res["ok"] else "check-failed"
    out = {"name": name, "kind": kind, "status": status,
           "outputs": [os.path.relpath(p, out_dir) for p in res["outputs"]]}
    if kind == "diagnose":
        out.update(verdicts=res["verdicts"], flags=res["flags"], mismatches=res["mismatches"])
    return out


def load_sweep(source):
    if source in BUNDLED_SWEEPS:
        text = resources.files("crowdwise").joinpath("data", BUNDLED_SWEEPS[source]).read_text()
    else:
        with open(source) as fh:
            text = fh.read()
    doc = json.loads(text)
    jobs = doc.get("jobs", [])
    if not isinstance(jobs, list):
        raise UsageError("sweep config 'jobs' must be a list")
    names = [j.get("name") for j in jobs]
    if None in names or len(set(names)) != len(names):
        raise UsageError("every sweep job needs a unique 'name'")
    return doc, text


def resolve_jobs(flag):
    env = os.environ.get("CROWDWISE_JOBS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise UsageError(f"CROWDWISE_JOBS must be an integer, got {env!r}") from None
    else:
        value = flag
    if value < 1:
        raise UsageError(f"job count must be >= 1, got {value}")
    return value


def cmd_sweep(args):
    doc, text = load_sweep(args.config)
    n_jobs = resolve_jobs(args.jobs)
    os.makedirs(args.out, exist_ok=True)
    jobs = doc.get("jobs", [])
    if n_jobs > 1 and len(jobs) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_run_job, jobs, [args.out] * len(jobs)))
    else:
        results = [_run_job(j, args.out) for j in jobs]
    outputs = [os.path.join(args.out, p) for r in results for p in r.get("outputs", [])]
    manifest = build_manifest(outputs, config=doc, prng=PRNG_ALGORITHM,
                              extra={"jobs": results, "workers": n_jobs})
    manifest["outputs"] = [
        {**o, "path": os.path.relpath(p, args.out)} for o, p in zip(manifest["outputs"], outputs)
    ]
    write_json(manifest, os.path.join(args.out, "manifest.json"))
    for r in results:
        line = f"{r['name']:<28} {r['status']}"
        if r["status"] == "error":
            line += f"  {r['error']}"
        print(line)
    if any(r["status"] == "error" for r in results):
        return EXIT_COMPUTE
    if any(r["status"] == "check-failed" for r in results):
        return EXIT_CHECK
    return EXIT_OK


def _equal_neighbor_weights(P):
    """Recover ``W`` if ``P`` is exactly an equal-neighbor matrix, else ``None``."""
    B = (P.csr != 0).astype(float)
    if (B != B.T).nnz:
        return None
    W = WeightGraph(B)
    Q = build_from_weights(W)
    if abs(Q.csr - P.csr).max() > 1e-12:
        return None
    return W


def run_check(P, k_max=50, deltas=(0.5, 1, 2, 5, 10)):
    """Property battery on one matrix; returns a list of ``(name, ok, detail)``."""
    results = []
    n = P.n
    sandwich = True
    vectors = [chi for _, chi in iter_influence(P, k_max)]
    primitive = is_primitive(P)
    results.append(("primitive", True, str(primitive)))
    if primitive:
        pi = stationary_distribution(P)[0]
        vectors.append(pi)
        resid = float(np.abs(P.rmatvec(pi) - pi).sum())
        results.append(("stationary residual < 1e-10", resid < 1e-10, f"{resid:.3e}"))
    for x in vectors:
        inf, sq = float(x.max()), float(x @ x)
        sandwich &= inf**2 <= sq * (1 + 1e-12) and sq <= inf * (1 + 1e-12)
        sandwich &= abs(x.sum() - 1) < 1e-9 and bool((x >= 0).all())
    results.append(("simplex sandwich", sandwich, f"{len(vectors)} vectors"))
    curve = influence_curve(P)
    mono = bool(np.all(np.diff(curve) >= -1e-12))
    results.append(("influence curve monotone", mono, f"Phi(n)={curve[-1]:.12g}"))
    one = float(column_sums(P).max() / n)
    results.append(("Phi(1)/n equals one-time value", math.isclose(curve[1] / n, one, rel_tol=1e-12),
                    f"{one:.12g}"))
    rec = recursive_influence_bound_check(P, P, deltas)
    results.append(("recursive influence bound (Q=P)", rec.holds, f"min slack {rec.min_slack:.4g}"))
    W = _equal_neighbor_weights(P)
    if W is not None:
        pw = equal_neighbor_power_bound_check(W, k_max)
        results.append(("equal-neighbor power bound", pw.holds, f"max ratio {pw.max_ratio:.4g}"))
    return results


def cmd_check(args):
    P = read_triplets(args.matrix)
    results = run_check(P, args.k_max)
    width = max(len(r[0]) for r in results)
    for name, ok, detail in results:
        print(f"{name:<{width}}  {'ok' if ok else 'FAIL':<4}  {detail}")
    if args.out:
        write_json([{"name": n, "ok": o, "detail": d} for n, o, d in results], args.out)
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_CHECK


def build_parser():
    parser = _Parser(prog="crowdwise", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"crowdwise {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write a family member as a triplet file plus metadata")
    p.add_argument("family", choices=sorted(FAMILIES))
    _add_family_options(p)
    p.add_argument("-o", "--out", help="output prefix (default: FAMILY_SIZE)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("diagnose", help="trace wisdom notions over a size grid")
    p.add_argument("family", choices=sorted(FAMILIES))
    _add_family_options(p)
    p.add_argument("--n-grid", type=_int_list)
    p.add_argument("--m-grid", type=_int_list)
    p.add_argument("--L-grid", type=_int_list)
    p.add_argument("--notions", type=_str_list, help="e.g. one-time,finite-time:2,wise")
    p.add_argument("--config", help="JSON file with diagnostic thresholds")
    p.add_argument("--k-list", type=_int_list)
    p.add_argument("--K-cap", help="'auto' or an integer horizon for pre-uniform sups")
    p.add_argument("--alphas", type=_float_list)
    p.add_argument("--n-seeds", type=int)
    p.add_argument("--mixing-cap", type=int)
    p.add_argument("--slope-min", type=float)
    p.add_argument("--value-max", type=float)
    p.add_argument("--value-floor", type=float)
    p.add_argument("--bound-checks", type=_str_list, help=f"subset of {','.join(BOUND_CHECKS)}")
    p.add_argument("--expect", type=_str_list, help="notion=verdict pairs; mismatch exits 3")
    p.add_argument("-o", "--out", default="diagnose-out", help="output directory")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("simulate", help="Monte Carlo DeGroot runs with CSV output")
    p.add_argument("--matrix", help="triplet file")
    p.add_argument("--family", choices=sorted(FAMILIES))
    p.add_argument("--preset", choices=sorted(FIGURE_PRESETS))
    _add_family_options(p)
    p.add_argument("--T", type=int, help="horizon")
    p.add_argument("--mu", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--runs", type=int)
    p.add_argument("--sim-seed", type=int, help="noise seed (default: --seed, else 0)")
    p.add_argument("--pin-first", type=float, help="fixed initial opinion of node 0")
    p.add_argument("--record-individuals", action="store_true")
    p.add_argument("--check-variance", action="store_true",
                   help="exit 3 unless mean and variance match theory within 4 SE")
    p.add_argument("-o", "--out", default="simulate-out", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a JSON batch of diagnose/simulate jobs")
    p.add_argument("config", help=f"JSON file or bundled name: {', '.join(BUNDLED_SWEEPS)}")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (CROWDWISE_JOBS overrides)")
    p.add_argument("-o", "--out", default="sweep-out", help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check", help="run the property battery on a triplet matrix")
    p.add_argument("matrix")
    p.add_argument("--k-max", type=int, default=50)
    p.add_argument("-o", "--out", help="optional JSON results file")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CrowdwiseError, UsageError, ValueError, TypeError, KeyError, OSError) as err:
        print(f"crowdwise: error: {err}", file=sys.stderr)
        return _exit_code_for(err)


if __name__ == "__main__":
    sys.exit(main())
