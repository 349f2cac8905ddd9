"""Command line interface.

Subcommands: ``check-theorems``, ``gap``, ``claims``, ``simulate`` and
``validate``. Exit status is 0 on success, 1 when a check fails, 2 on
bad input and 3 when an enumeration budget is exceeded.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import __version__
from .exceptions import EnumerationBudgetError, StackTimeError, TheoremViolationError
from .gap import arpeggio_check, capacity_experiment, chord_check, gap_report, verify_report
from .kernel import Statement, Vocabulary
from .model import ContributorSection, ModelFile, load_model
from .report import render, with_table
from .stack import StackState, ground, validate_stack
from .theorems import MUTANTS, Bounds, Operators, run_all

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


def _programs(l: Statement, v: Vocabulary) -> list[list[str]]:
    return [v[i].labels() for i in l]


def cmd_check_theorems(bounds: Bounds = Bounds(), seed: int = 0, mutant: str | None = None,
                       only: list[str] | None = None, timings: bool = False) -> dict:
    ops = MUTANTS[mutant] if mutant else Operators()
    results = run_all(seed=seed, bounds=bounds, ops=ops, only=only)
    rows = [r.to_dict(timings) for r in results]
    report = {
        "command": "check-theorems",
        "inputs": {"seed": seed, "bounds": dataclasses.asdict(bounds), "mutant": mutant, "only": only},
        "ok": all(r.passed for r in results),
        "suites": rows,
    }
    columns = ["name", "passed", "cases", "n_failures"] + (["seconds"] if timings else [])
    return with_table(report, rows, columns)


def _require_valid_stack(model: ModelFile):
    check = validate_stack(model.stack, model.caps.vocabulary)
    if not check.ok:
        raise StackTimeError("stack does not validate: " + "; ".join(check.problems))


def _substack(stack: StackState, layer: int) -> StackState:
    return StackState(stack.vocabularies[:layer + 1], stack.policies[:layer], stack.tasks[:layer])


def cmd_gap(model: ModelFile, content: str, trajectory: str, delta_max: int | None = None,
            source: str = "") -> dict:
    _require_valid_stack(model)
    layer, l = model.statement(content)
    tau = model.trajectory(trajectory)
    stack = _substack(model.stack, layer)
    if delta_max is None:
        delta_max = model.delta_max
    trace = ground(stack, l, model.caps.vocabulary)
    rep = gap_report(stack, l, tau, delta_max)
    out = rep.to_dict(stack.base)
    out.update({
        "command": "gap",
        "inputs": {"model": source, "content": content, "layer": layer, "trajectory": trajectory,
                   "delta_max": delta_max, "trajectory_length": len(tau)},
        "grounding": [
            {"layer": i, "statement": _programs(g, stack.vocabularies[i])}
            for i, g in reversed(list(enumerate(trace.statements)))
        ],
        "witnesses_verified": verify_report(rep, stack.base, tau),
        "ok": True,
    })
    out["ok"] = out["witnesses_verified"]
    if delta_max is not None and delta_max > rep.horizon:
        out["notes"] = [f"delta_max {delta_max} exceeds the trajectory horizon {rep.horizon}; "
                        f"windows with delta > {rep.horizon} are out of range"]
    row = {k: out[k] for k in ("w_ing", "w_co", "strict_gap", "horizon")}
    return with_table(out, [dict(row, content=content, trajectory=trajectory)],
                      ["content", "trajectory", "w_ing", "w_co", "strict_gap", "horizon"])


def cmd_claims(model: ModelFile, source: str = "") -> dict:
    _require_valid_stack(model)
    claims = model.phen_claims()
    if not claims:
        raise StackTimeError("model declares no claims")
    rows = []
    for claim, traj_name in claims:
        tau = model.trajectory(traj_name)
        (cv,) = chord_check([claim], model.stack, tau)
        (av,) = arpeggio_check([claim], model.stack, tau)
        v = model.stack.base
        rows.append({
            "claim": claim.name,
            "statement": model.claims[claim.name].statement,
            "trajectory": traj_name,
            "t": claim.t,
            "delta": claim.delta,
            "grounded": _programs(cv.grounded, v),
            "window": [tau.env.label(s) for s in tau.states[claim.t:claim.t + claim.delta + 1]],
            "chord": cv.verdict,
            "chord_witness_u": None if cv.witness is None else cv.witness.u,
            "arpeggio": av.verdict,
            "truth_mask": list(cv.truth_mask),
            "ingredient_masks": {",".join(v[i].labels()): list(m) for i, m in sorted(av.ingredient_masks.items())},
        })
    report = {"command": "claims", "inputs": {"model": source}, "ok": True, "claims": rows}
    return with_table(report, rows, ["claim", "t", "delta", "chord", "arpeggio", "truth_mask"])


def _experiment(section: ContributorSection, delta_max: int | None) -> dict:
    rec = capacity_experiment(section.model, section.scheduler, section.steps, delta_max)
    d = rec.to_dict()
    if delta_max is not None and delta_max > rec.delta_max:
        d["notes"] = [f"delta_max {delta_max} exceeds the trajectory horizon {rec.delta_max}; "
                      f"windows with delta > {rec.delta_max} are out of range"]
    return d


def cmd_simulate(model: ModelFile, section: str, paired: bool = False, seed: int | None = None,
                 delta_max: int | None = None, source: str = "") -> dict:
    sec = model.contributor(section)
    if seed is not None:
        sec = dataclasses.replace(sec, scheduler=dataclasses.replace(sec.scheduler, seed=seed))
    if delta_max is None:
        delta_max = model.delta_max
    report = {
        "command": "simulate",
        "inputs": {"model": source, "section": section, "paired": paired, "seed": sec.scheduler.seed,
                   "delta_max": delta_max},
        "ok": True,
    }
    cols = ["system", "n", "capacity", "steps", "w_ing", "w_co", "strict_gap"]
    if not paired:
        rec = _experiment(sec, delta_max)
        report["experiment"] = rec
        return with_table(report, [dict(rec, system=section)], cols)
    other = sec.partner()
    sync, seq = (sec, other) if sec.model.capacity >= sec.model.n else (other, sec)
    left, right = _experiment(sync, delta_max), _experiment(seq, delta_max)
    report["synchronous"] = left
    report["sequential"] = right
    return with_table(report, [dict(left, system="synchronous"), dict(right, system="sequential")], cols)


def cmd_validate(model: ModelFile, source: str = "") -> dict:
    check = validate_stack(model.stack, model.caps.vocabulary)
    rows = [
        {"layer": c.layer, "vocabulary_ok": c.vocabulary_ok, "policy_ok": c.policy_ok,
         "problems": "; ".join(c.problems)}
        for c in check.layers
    ]
    report = {
        "command": "validate",
        "inputs": {"model": source},
        "ok": check.ok,
        "summary": {
            "environment_size": model.env.size,
            "stack_depth": model.stack.depth,
            "vocabulary_sizes": [len(v) for v in model.stack.vocabularies],
            "statements": sorted(model.statements),
            "trajectories": sorted(model.trajectories),
            "contributor_sections": sorted(model.contributors),
            "claims": sorted(model.claims),
        },
        "layers": rows,
    }
    return with_table(report, rows, ["layer", "vocabulary_ok", "policy_ok", "problems"])


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "table"], default="json")
    common.add_argument("--out", type=Path, help="write the report here instead of stdout")

    with_model = argparse.ArgumentParser(add_help=False)
    with_model.add_argument("--model", required=True, help="model file path or bundled fixture name")

    parser = argparse.ArgumentParser(prog="stacktime", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-theorems", parents=[common], help="run every oracle suite")
    p.add_argument("--seed", type=int, default=0)
    defaults = Bounds()
    for f in dataclasses.fields(Bounds):
        p.add_argument("--" + f.name.replace("_", "-"), type=int, default=getattr(defaults, f.name))
    p.add_argument("--only", action="append", help="run suites whose name contains this (repeatable)")
    p.add_argument("--inject-mutant", choices=sorted(MUTANTS), help="swap a lift operator to check the suite bites")
    p.add_argument("--timings", action="store_true", help="include wall-clock seconds per suite")

    p = sub.add_parser("gap", parents=[common, with_model], help="w_ing / w_co for one content and trajectory")
    p.add_argument("--content", required=True)
    p.add_argument("--trajectory", required=True)
    p.add_argument("--delta-max", type=int)

    sub.add_parser("claims", parents=[common, with_model], help="Chord and Arpeggio verdicts per claim")

    p = sub.add_parser("simulate", parents=[common, with_model], help="capacity-constrained contributor run")
    p.add_argument("--section", required=True)
    p.add_argument("--paired", action="store_true", help="also run the partner system across the threshold")
    p.add_argument("--seed", type=int)
    p.add_argument("--delta-max", type=int)

    sub.add_parser("validate", parents=[common, with_model], help="lint a model file")
    return parser


def _dispatch(args) -> dict:
    if args.command == "check-theorems":
        bounds = Bounds(**{f.name: getattr(args, f.name) for f in dataclasses.fields(Bounds)})
        return cmd_check_theorems(bounds, args.seed, args.inject_mutant, args.only, args.timings)
    model = load_model(args.model)
    if args.command == "gap":
        return cmd_gap(model, args.content, args.trajectory, args.delta_max, source=args.model)
    if args.command == "claims":
        return cmd_claims(model, source=args.model)
    if args.command == "simulate":
        return cmd_simulate(model, args.section, args.paired, args.seed, args.delta_max, source=args.model)
    return cmd_validate(model, source=args.model)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = _dispatch(args)
    except TheoremViolationError as e:
        print(f"error: theorem violation: {e}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except EnumerationBudgetError as e:
        print(f"error: budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except StackTimeError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    text = render(report, args.format)
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.get("ok", True) else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
