"""Command-line front end: ``kslab run``, ``kslab list``, ``kslab eval``."""

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from importlib import resources

import numpy as np

from . import reports
from .errors import KslabError, PoleHitError, ScenarioError
from .scenario import (CATALOG, Context, build_model, catalog, check_expectation, default_scenario,
                       load_document, run_analysis, validate)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERIC = 2
EXIT_EXPECTATION = 3


def bundled_scenarios():
    """Names of the scenario files shipped with the package."""
    root = resources.files("kslab").joinpath("scenarios")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def resolve_scenario(ref):
    """A path to a scenario file, or the name of a bundled scenario or catalog model."""
    if os.path.exists(ref):
        return load_document(ref)
    if ref in bundled_scenarios():
        text = resources.files("kslab").joinpath(f"scenarios/{ref}.json").read_text()
        return json.loads(text)
    if ref in CATALOG:
        return default_scenario(ref)
    raise ScenarioError(f"no scenario file or bundled scenario named {ref!r}")


def run_scenario(doc, out_dir=None, seed=None, threads=1, log=print):
    """Run every analysis of a validated scenario; returns ``(exit_code, summary)``."""
    validate(doc)
    seed = doc.get("seed", 0) if seed is None else seed
    out_dir = out_dir or doc.get("output") or os.path.join("kslab-out", doc["name"])
    tols = doc.get("tolerances", {})
    model = build_model(doc["model"])

    def one(spec):
        # each analysis gets its own generator so results do not depend on scheduling
        idx = doc["analyses"].index(spec)
        ctx = Context(doc, np.random.default_rng([seed, idx]),
                      tols.get("eval", 1e-12), tols.get("quad", 1e-9))
        return run_analysis(model, spec, ctx)

    t0 = time.perf_counter()
    try:
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(one, doc["analyses"]))
        else:
            results = [one(spec) for spec in doc["analyses"]]
    except ScenarioError:
        raise
    except KslabError as exc:
        summary = {"scenario": doc["name"], "status": "numeric-failure",
                   "error": f"{type(exc).__name__}: {exc}"}
        reports.write_json(os.path.join(out_dir, "summary.json"), summary)
        return EXIT_NUMERIC, summary

    by_name = {r.name: r for r in results}
    for r in results:
        for fname, (header, rows) in r.tables.items():
            reports.write_csv(os.path.join(out_dir, f"{r.name}.{fname}"), header, rows)
        for fname, obj in r.documents.items():
            reports.write_json(os.path.join(out_dir, f"{r.name}.{fname}"), obj)

    checks = []
    for exp in doc.get("expectations", []):
        ok, observed = check_expectation(exp, by_name)
        checks.append({"id": exp["id"], "analysis": exp["analysis"], "metric": exp["metric"],
                       "op": exp["op"], "value": exp["value"], "observed": observed, "passed": ok})
        log(f"{'PASS' if ok else 'FAIL'} {exp['id']} {exp['analysis']}.{exp['metric']} "
            f"{exp['op']} {exp['value']} (observed {observed})")
    passed = all(c["passed"] for c in checks)
    summary = {
        "scenario": doc["name"],
        "seed": seed,
        "status": "pass" if passed else "expectation-failure",
        "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "runtime": time.perf_counter() - t0,
        "analyses": {r.name: {"kind": r.kind, "runtime": r.runtime, "metrics": r.metrics}
                     for r in results},
        "expectations": checks,
    }
    reports.write_json(os.path.join(out_dir, "summary.json"), summary)
    return (EXIT_OK if passed else EXIT_EXPECTATION), summary


def _parse_complex(text):
    parts = text.split(",")
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise argparse.ArgumentTypeError(f"expected RE or RE,IM, got {text!r}")


def cmd_run(args):
    try:
        doc = resolve_scenario(args.scenario)
        code, summary = run_scenario(doc, args.out, args.seed, args.threads)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if code == EXIT_NUMERIC:
        print(f"numeric failure: {summary['error']}", file=sys.stderr)
    print(f"{summary['scenario']}: {summary['status']}")
    return code


def cmd_list(args):
    entries = catalog()
    if args.json:
        print(json.dumps({"models": entries, "scenarios": bundled_scenarios()}, indent=2))
        return EXIT_OK
    for e in entries:
        params = ", ".join(f"{k}={v}" for k, v in e["params"].items())
        print(f"{e['name']:14s} {e['description']}" + (f" [{params}]" if params else ""))
    print("bundled scenarios: " + ", ".join(bundled_scenarios()))
    return EXIT_OK


def cmd_eval(args):
    if args.example not in CATALOG:
        print(f"error: unknown example {args.example!r}; see 'kslab list'", file=sys.stderr)
        return EXIT_VALIDATION
    model = build_model({"example": args.example})
    z = args.z
    try:
        if model.kernel is not None:
            res = model.kernel.evaluate(z, args.tol)
            value, bound = complex(res.value), float(res.tail_bound)
        else:
            # models without a kernel sum report 1/g
            value, bound = complex(1.0 / model.entire.value(np.asarray(z))), None
    except PoleHitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except KslabError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    out = {"example": args.example, "z": [z.real, z.imag], "value": [value.real, value.imag],
           "bound": bound}
    if model.closed is not None:
        ref = complex(model.closed(np.asarray(z)))
        out["closed_form"] = [ref.real, ref.imag]
    print(json.dumps(out))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="kslab", description="Kernel sums of inverse squares: experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario file or bundled scenario")
    p.add_argument("scenario")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("list", help="list named models and bundled scenarios")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("eval", help="evaluate a named model at one point")
    p.add_argument("--example", required=True)
    p.add_argument("--z", required=True, type=_parse_complex, help="RE,IM")
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
