"""Command-line entry point: ``idss <subcommand> ...``.

Exit codes: 0 success, 1 domain error (one ``error: ...`` line on stderr),
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from idss import __version__
from idss.advisor import AuditLog, make_advisor, advise_plan
from idss.cachesim import capacity_for, simulate, sweep, sweep_csv
from idss.config import load_loop_config, load_trace_ref
from idss.control import (
    CacheConfigObjective,
    CacheSimEvaluator,
    ExperienceDB,
    LoopError,
    ParamSpace,
    ab_test,
    greedy_fine,
    rollback,
    run_loop,
)
from idss.experiments import canonical_traces, select_policy, selection_study
from idss.policyir import PolicyPlan, load_guardrails, translate, validate
from idss.telemetry import extract_profile, organize
from idss.trace import (
    DEFAULT_PARAMS,
    FormatSpec,
    gen_synthetic,
    load_trace,
    prefix,
    save_trace,
    trace_stats,
)


class CliError(Exception):
    pass


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _kv(pairs: list[str] | None) -> dict:
    out = {}
    for p in pairs or []:
        if "=" not in p:
            raise CliError(f"expected key=value, got {p!r}")
        k, v = p.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def _trace(args):
    fmt = args.format
    if fmt not in ("csv", "plain"):
        fmt = FormatSpec.from_json(Path(fmt).read_text(encoding="utf-8"))
    return load_trace(args.trace, fmt)


def _capacity(args, trace) -> int:
    if args.capacity is not None:
        return args.capacity
    return capacity_for(trace_stats(trace), args.capacity_frac)


def _plan(path: str) -> PolicyPlan:
    return PolicyPlan.from_json(Path(path).read_text(encoding="utf-8"))


# -- subcommands --------------------------------------------------------------

def cmd_gen_trace(args):
    params = DEFAULT_PARAMS[args.kind](**_kv(args.param))
    trace = gen_synthetic(args.kind, params, args.seed)
    if args.out:
        save_trace(trace, args.out)
    print(f"{args.kind}: {len(trace)} requests -> {args.out or '(not saved)'}")


def cmd_load_check(args):
    print(json.dumps(asdict(trace_stats(_trace(args))), sort_keys=True))


def cmd_simulate(args):
    trace = _trace(args)
    res = simulate(trace, args.policy, _capacity(args, trace), _kv(args.hp))
    print(json.dumps({"policy": res.policy.value, "capacity": res.capacity,
                      "hits": res.hits, "misses": res.misses,
                      "hit_rate": res.hit_rate}, sort_keys=True))


def cmd_sweep(args):
    trace = _trace(args)
    rep = sweep(trace, _capacity(args, trace), parallel=args.parallel)
    _write(sweep_csv([rep]), args.out)


def cmd_select_policy(args):
    advisor = make_advisor(args.advisor)
    choice, _ = select_policy(_trace(args), advisor, args.prefix,
                              audit=AuditLog(args.audit) if args.audit else None)
    print(choice.policy.value)


def cmd_plan(args):
    cfg = load_loop_config(args.config)
    entries = [(c.telemetry, extract_profile(prefix(c.trace, c.prefix_len)), c.intent)
               for c in cfg.clients]
    doc = organize(entries, cfg.server, cfg.constraints, cfg.whitelist)
    if args.doc_out:
        Path(args.doc_out).write_text(doc.to_json(), encoding="utf-8")
    plan = advise_plan(cfg.advisor, doc, cfg.objective, cfg.knowledge, audit=cfg.audit)
    _write(json.dumps(plan.to_dict(), indent=1, sort_keys=True) + "\n", args.out)


def cmd_validate(args):
    result = validate(_plan(args.plan), load_guardrails(args.guardrails))
    print(json.dumps(result.to_dict(), sort_keys=True))
    if not result.accepted:
        raise CliError("rejected: " + "; ".join(v.message for v in result.violations))


def cmd_translate(args):
    _write(translate(_plan(args.plan), args.backend).render(), args.out)


def cmd_run_loop(args):
    cfg = load_loop_config(args.config)
    try:
        report = run_loop(cfg.clients, cfg.server, cfg.objective, cfg.guardrails,
                          cfg.advisor, cfg.backend, cfg.evaluator, cfg.db, cfg.knowledge,
                          cfg.constraints, threshold=cfg.threshold,
                          whitelist=cfg.whitelist, audit=cfg.audit)
    except LoopError as exc:
        _write(json.dumps(exc.report.to_dict(), indent=1, sort_keys=True) + "\n", args.out)
        raise CliError(str(exc)) from exc
    _write(json.dumps(report.to_dict(), indent=1, sort_keys=True) + "\n", args.out)
    if not report.accepted:
        raise CliError("plan rejected by guardrails")


def cmd_ab_test(args):
    trace = _trace(args)
    ev = CacheSimEvaluator(trace, args.capacity_frac)
    res = ab_test(_plan(args.plan_a), _plan(args.plan_b), ev, args.trials)
    print(json.dumps({"winner": res.winner, "mean_a": res.mean_a, "mean_b": res.mean_b,
                      "values_a": res.values_a, "values_b": res.values_b,
                      "error": res.error}, sort_keys=True))
    if res.error:
        raise CliError(res.error)


def cmd_greedy(args):
    space = ParamSpace.from_dict(json.loads(Path(args.space).read_text(encoding="utf-8")))
    res = greedy_fine(space, CacheConfigObjective(_trace(args)), args.budget)
    print(json.dumps({"config": res.config, "value": res.value,
                      "baseline_value": res.baseline_value,
                      "evaluations": res.evaluations, "influence": res.influence,
                      "exhausted": res.exhausted, "warning": res.warning}, sort_keys=True))


def cmd_experience(args):
    db = ExperienceDB(args.db)
    if args.action == "list":
        for r in db.records():
            print(f"v{r.version}\t{r.status}\t{r.plan.digest()}\t"
                  f"{json.dumps(r.metrics, sort_keys=True)}\t{r.note}")
        return
    if args.version is None:
        raise CliError("experience rollback needs --version")
    plan = rollback(db, args.version)
    if args.record:
        v = db.append(plan, db.get(args.version).metrics,
                      f"rollback to v{args.version}", "rollback", rollback_of=args.version)
        print(f"recorded v{v}", file=sys.stderr)
    _write(plan.to_json(), args.out)


def cmd_report(args):
    traces = {}
    if args.synthetic or not args.trace:
        traces.update(canonical_traces())
    for t in args.trace or []:
        tr = load_trace_ref(t, Path.cwd())
        traces[tr.label] = tr
    audit = AuditLog(args.audit) if args.audit else None
    study = selection_study(traces, make_advisor(args.advisor), args.capacity_frac,
                            args.prefix, exclude=args.exclude, parallel=args.parallel,
                            audit=audit)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.csv").write_text(sweep_csv(list(study.sweeps.values())), encoding="utf-8")
    (out / "normalized.csv").write_text(study.report.to_csv(), encoding="utf-8")
    if not args.no_figures:
        from idss.plotting import plot_normalized, plot_sweeps
        plot_sweeps(study.sweeps, study.choices, out / "sweeps.png")
        plot_normalized(study.report, out / "normalized.png")
    sys.stdout.write(study.report.to_csv())


# -- parser ---------------------------------------------------------------------

def _add_trace(p, required=True):
    p.add_argument("--trace", required=required, help="trace file")
    p.add_argument("--format", default="csv",
                   help="csv (native), plain, or path to a FormatSpec JSON file")


def _add_capacity(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--capacity", type=int, help="cache size in blocks")
    g.add_argument("--capacity-frac", type=float, default=0.001,
                   help="cache size as a fraction of the working set (default 0.001)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="idss", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    p = sub.add_parser("gen-trace", help="generate a synthetic trace (A-D)")
    p.add_argument("--kind", required=True, choices=list("ABCD"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="override a generator parameter")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_trace)

    p = sub.add_parser("load-check", help="load a trace and print its statistics")
    _add_trace(p)
    p.set_defaults(func=cmd_load_check)

    p = sub.add_parser("simulate", help="simulate one policy")
    _add_trace(p)
    p.add_argument("--policy", required=True)
    _add_capacity(p)
    p.add_argument("--hp", action="append", metavar="KEY=VALUE", help="hyperparameter")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="simulate all six policies, CSV output")
    _add_trace(p)
    _add_capacity(p)
    p.add_argument("--parallel", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("select-policy", help="ask the advisor for a policy from a prefix")
    _add_trace(p)
    p.add_argument("--prefix", type=int, default=400)
    p.add_argument("--advisor", choices=["mock", "live"], default="mock")
    p.add_argument("--audit", help="append prompts/responses to this NDJSON file")
    p.set_defaults(func=cmd_select_policy)

    p = sub.add_parser("plan", help="organize telemetry and ask the advisor for a plan")
    p.add_argument("--config", required=True, help="loop configuration JSON")
    p.add_argument("--doc-out", help="also write the organized system-state document")
    p.add_argument("--out")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("validate", help="check a plan against guardrails")
    p.add_argument("--plan", required=True)
    p.add_argument("--guardrails", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("translate", help="render a plan for a backend (dry run)")
    p.add_argument("--plan", required=True)
    p.add_argument("--backend", choices=["linux-dryrun", "mockvendor"], default="mockvendor")
    p.add_argument("--out")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("run-loop", help="run one pass of the control loop")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="write the loop report JSON here")
    p.set_defaults(func=cmd_run_loop)

    p = sub.add_parser("ab-test", help="compare two plans on a trace")
    p.add_argument("--plan-a", required=True)
    p.add_argument("--plan-b", required=True)
    _add_trace(p)
    p.add_argument("--capacity-frac", type=float, default=0.001)
    p.add_argument("--trials", type=int, default=3)
    p.set_defaults(func=cmd_ab_test)

    p = sub.add_parser("greedy", help="Greedy-Fine search over cache parameters")
    p.add_argument("--space", required=True,
                   help='JSON {"params": {"policy": [...], "capacity_frac": [...]}, "baseline": {...}}')
    _add_trace(p)
    p.add_argument("--budget", type=int, default=50)
    p.set_defaults(func=cmd_greedy)

    p = sub.add_parser("experience", help="inspect or roll back the experience log")
    p.add_argument("action", choices=["list", "rollback"])
    p.add_argument("--db", required=True)
    p.add_argument("--version", type=int)
    p.add_argument("--record", action="store_true",
                   help="log the re-emitted plan as a new rollback record")
    p.add_argument("--out")
    p.set_defaults(func=cmd_experience)

    p = sub.add_parser("report", help="policy-selection study with CSV and figures")
    p.add_argument("--trace", action="append",
                   help="trace file (repeatable); default: synthetic A-D")
    p.add_argument("--synthetic", action="store_true", help="include synthetic A-D")
    p.add_argument("--advisor", choices=["mock", "live"], default="mock")
    p.add_argument("--capacity-frac", type=float, default=0.001)
    p.add_argument("--prefix", type=int, default=400)
    p.add_argument("--exclude", action="append", default=None,
                   help="policy left out of the worst-policy comparison (default FIFO)")
    p.add_argument("--parallel", type=int, default=1)
    p.add_argument("--audit")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--out-dir", default="report")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "exclude", "unset") is None:
        args.exclude = ["FIFO"]
    try:
        args.func(args)
    except (CliError, ValueError, RuntimeError, OSError, KeyError) as exc:
        msg = str(exc).strip().splitlines()[0] if str(exc).strip() else type(exc).__name__
        print(f"error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
