"""Command line interface.

Subcommands: fraction, reduce, make, evolve, experiment, serve.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys

from .errors import KnotdynError


def _cmd_fraction(args):
    from .notation import parse_tangle
    from .tangles import Denominator, Family, Numerator, eval_fraction, expand_family

    expr = parse_tangle(args.expr)
    if isinstance(expr, Family):
        expr = expand_family(expr)
    if isinstance(expr, (Numerator, Denominator)):
        expr = expr.tangle
    print(eval_fraction(expr))


def _cmd_reduce(args):
    from .notation import parse_tangle
    from .tangles import (
        CF_INFINITY,
        Denominator,
        Family,
        Numerator,
        cf_value,
        reduce_closure,
    )

    expr = parse_tangle(args.expr)
    if not isinstance(expr, (Numerator, Denominator, Family)):
        expr = Numerator(expr)
    terms, klass = reduce_closure(expr)
    if terms is CF_INFINITY:
        shown, value = "[inf]", "1/0"
    else:
        shown = "(" + ",".join(map(str, terms)) + ")"
        value = str(cf_value(terms))
    print(f"terms={shown} fraction={value} class={klass.tag.value}({klass.p},{klass.q})")


def _cmd_make(args):
    from .io import save_curve
    from .specs import build_curve_from_spec

    curve = build_curve_from_spec(args.spec, args.beads)
    save_curve(curve, args.out)
    print(f"wrote {args.out}: {len(curve)} beads, length {curve.total_length():.6f}")


def _cmd_evolve(args):
    from .dynamics import Mode, Phase, SimParams, SimState, evolve, params_for_curve
    from .io import TrajectoryWriter, load_curve

    curve = load_curve(args.infile)
    schedule_spec = json.loads(open(args.schedule).read())
    if not isinstance(schedule_spec, list) or not schedule_spec:
        raise KnotdynError("schedule file must be a non-empty JSON list")
    base = params_for_curve(curve)
    phases = []
    for entry in schedule_spec:
        mode = Mode.CONSTRAINED if entry.get("mode", "constrained") == "constrained" else Mode.FREE_SPRINGS
        params = SimParams(
            **{
                **base.to_dict(),
                "mode": mode,
                "dt": entry.get("dt", 1e-3),
                "spring_constant": entry.get("spring_k", 0.0),
                "viscous_damping": entry.get("gamma", 0.0),
            }
        )
        phases.append(
            Phase(
                params,
                max_steps=entry.get("steps", 1000),
                record_every=entry.get("record_every", 100),
            )
        )
    state = SimState.at_rest(curve)
    if args.seed is not None:
        from .dynamics import perturb

        state = SimState.at_rest(perturb(curve, 0.1 * curve.min_gap(), args.seed))
    with TrajectoryWriter(args.out, base.to_dict(), schedule_spec) as writer:
        traj = evolve(
            state,
            phases,
            frame_sink=lambda f: writer.write_frame(f.step_index, f.simon_energy, f.points),
        )
    print(
        f"wrote {args.out}: {traj.accepted_steps} steps, "
        f"final energy {traj.final_state.last_energy:.4f}"
    )


def _cmd_experiment(args):
    from .experiments import SCENARIOS, report_table, run_all, run_scenario

    overrides = {}
    if args.beads:
        overrides["beads"] = args.beads
    if args.steps:
        overrides["max_steps"] = args.steps
    if args.all:
        reports = run_all((args.seed,), args.out, overrides)
        print(report_table(reports))
        return
    if args.name is None:
        print("available scenarios: " + ", ".join(sorted(SCENARIOS)))
        return
    report = run_scenario(args.name, args.seed, args.out, overrides)
    print(report_table([report]))


def _cmd_serve(args):
    from .service import serve

    async def main():
        print(f"serving on port {args.port}", flush=True)
        await serve(args.port, args.record)

    try:
        asyncio.run(main())
    except KeyboardInterrupt:
        pass


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="knotdyn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fraction", help="print the fraction p/q of a tangle expression")
    p.add_argument("expr")
    p.set_defaults(func=_cmd_fraction)

    p = sub.add_parser("reduce", help="reduce a closure to canonical terms and class")
    p.add_argument("expr")
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("make", help="embed a specification as a bead curve")
    p.add_argument("--spec", required=True)
    p.add_argument("--beads", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_make)

    p = sub.add_parser("evolve", help="evolve a curve file under a schedule")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--schedule", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_evolve)

    p = sub.add_parser("experiment", help="run a named scenario (or --all)")
    p.add_argument("name", nargs="?")
    p.add_argument("--all", action="store_true")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--beads", type=int, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("serve", help="run the steering service")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--record", default=None)
    p.set_defaults(func=_cmd_serve)

    args = parser.parse_args(argv)
    try:
        args.func(args)
    except KnotdynError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
