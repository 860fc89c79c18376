"""Command-line front door.

Subcommands: ``bounds`` (closed-form intervals), ``predict`` (weak/strong
verdicts), ``oracle`` (LP certification of the closed forms), ``relax``
(ball/proxy relaxations).  Reports go to stdout, single-line diagnostics to
stderr.

Exit codes: 0 success; 2 parse/domain errors; 3 ``predict --require-verdict``
with nothing ruled out; 4 oracle certification delta over tolerance; 5 atom
limit breached.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bounds as bnd
from . import fileio, relaxations
from .errors import AtomLimitError, BeliefBoundError, InputError
from .oracle import SkeletonVariable, build_polytope, optimize_gap
from .predictability import strong_verdict, weak_verdict
from .report import Report
from .tables import BehaviouralDataset, DistTable, Value

THEOREMS = (
    "intervention",
    "multidomain",
    "unknown-shift",
    "covariate-shift",
    "fairness",
    "harm",
    "direct-discrimination",
    "causal-harm",
)


def _parse_value(raw: str) -> Value:
    try:
        return int(raw)
    except ValueError:
        return raw


def parse_assignment(raw: str | None) -> dict[str, Value]:
    """Comma-separated name=value pairs; values parse as int when possible."""
    if not raw:
        return {}
    out: dict[str, Value] = {}
    for chunk in raw.split(","):
        if "=" not in chunk:
            raise InputError(f"bad assignment chunk {chunk!r} (want name=value)")
        name, value = chunk.split("=", 1)
        name = name.strip()
        if name in out:
            raise InputError(f"variable {name!r} assigned twice")
        out[name] = _parse_value(value.strip())
    return out


def parse_sigma_context(raw: str, data: BehaviouralDataset) -> DistTable:
    """Shifted covariate table from "Z=1:0.9" style pairs (';'-separated).

    With a single variable, one omitted domain value absorbs the leftover
    mass, so binary covariates need only the shifted cell.
    """
    cells: dict[tuple[Value, ...], float] = {}
    names: set[str] = set()
    for chunk in raw.split(";"):
        if ":" not in chunk:
            raise InputError(f"bad shifted-covariate chunk {chunk!r} (want name=value:prob)")
        assignment_part, prob_part = chunk.rsplit(":", 1)
        assignment = parse_assignment(assignment_part)
        names.update(assignment)
        key = tuple(assignment[n] for n in sorted(assignment))
        cells[key] = float(prob_part)
    sorted_names = sorted(names)
    refs = [data.table(data.decisions[0]).ref(n) for n in sorted_names]
    total = sum(cells.values())
    if total < 1.0 - 1e-12 and len(refs) == 1:
        missing = [v for v in refs[0].domain if (v,) not in cells]
        if len(missing) == 1:
            cells[(missing[0],)] = 1.0 - total
    return DistTable(tuple(refs), cells)


def _load_data(path: str):
    """(kind, payload) where kind is scm | dataset | table | log."""
    p = Path(path)
    if p.suffix.lower() == ".csv":
        return "log", fileio.load_csv_log(p)
    doc = json.loads(p.read_text(encoding="utf-8"))
    if "mechanisms" in doc:
        return "scm", fileio.load_scm(doc)
    if "per_decision" in doc:
        return "dataset", fileio.load_dataset(doc)
    if "entries" in doc:
        return "table", fileio.load_table(doc)
    raise InputError(f"{path}: unrecognised input format")


def _dataset_from_args(args) -> BehaviouralDataset:
    if not args.data:
        raise InputError("this request needs --data")
    kind, payload = _load_data(args.data)
    if kind == "dataset":
        return payload
    if kind == "scm":
        return fileio.scm_to_dataset(payload, args.decision_var, args.utility_var)
    if kind == "log":
        rows, weights = payload
        context = [s for s in (args.context_vars or "").split(",") if s]
        if not context:
            raise InputError("CSV ingestion needs --context-vars naming the policy inputs")
        return fileio.dataset_from_log(
            rows, weights, args.decision_var, context, args.utility_var
        )
    raise InputError("--data must be a model, dataset, or CSV log for this command")


def _joint_from_args(args) -> DistTable:
    if not args.data:
        raise InputError("this request needs --data")
    kind, payload = _load_data(args.data)
    if kind == "table":
        return payload
    if kind == "log":
        rows, weights = payload
        return fileio.joint_from_log(rows, weights)
    raise InputError(
        "causal-harm needs a joint distribution (table JSON or CSV log) including "
        "the decision column"
    )


def _require(args, names: list[str], label: str | None = None) -> None:
    missing = [n for n in names if getattr(args, n.replace("-", "_"), None) in (None, "")]
    if missing:
        label = label or f"--theorem {getattr(args, 'theorem', args.command)}"
        raise InputError(f"{label} needs " + ", ".join(f"--{n}" for n in missing))


def _interval_warnings(intervals: list[dict]) -> list[str]:
    skip = ("lower from domain pair", "upper from domain pair")
    return [
        note
        for interval in intervals
        for note in interval.get("notes", [])
        if not note.startswith(skip)
    ]


def _emit(args, report: Report) -> None:
    sys.stdout.write(report.render(args.format))


def cmd_bounds(args) -> int:
    c = parse_assignment(args.context)
    z = parse_assignment(args.shift)
    request = {
        "theorem": args.theorem,
        "data": args.data,
        "context": c,
        "shift": z,
        "decision": args.decision,
        "baseline": args.baseline,
    }
    theorem = args.theorem
    if theorem == "unknown-shift":
        interval = bnd.thm3_unknown_shift_interval()
    elif theorem == "causal-harm":
        _require(args, ["decision", "baseline"])
        joint = _joint_from_args(args)
        interval = bnd.causal_harm_interval(
            joint,
            _parse_value(args.decision),
            _parse_value(args.baseline),
            c,
            decision=args.decision_var,
            utility=args.utility_var,
            harm_value=_parse_value(args.harm_value),
        )
    else:
        data = _dataset_from_args(args)
        d = _parse_value(args.decision) if args.decision is not None else None
        d0 = _parse_value(args.baseline) if args.baseline is not None else None
        if theorem == "intervention":
            _require(args, ["decision", "baseline", "shift"])
            interval = bnd.thm1_gap_interval(data, c, z, d, d0)
        elif theorem == "multidomain":
            _require(args, ["decision", "baseline", "shift"])
            interval = bnd.thm2_multidomain_lower(data, c, z, d, d0)
        elif theorem == "covariate-shift":
            _require(args, ["decision", "baseline", "shift", "sigma-context"])
            sigma = parse_sigma_context(args.sigma_context, data)
            interval = bnd.thm4_covariate_shift_lower(data, sigma, c, z, d, d0)
            request["sigma_context"] = args.sigma_context
        elif theorem == "fairness":
            _require(args, ["decision", "attribute-baseline"])
            z0 = parse_assignment(args.attribute_baseline)
            interval = bnd.fairness_gap_interval(data, d, z0, c)
            request["attribute_baseline"] = z0
        elif theorem == "harm":
            _require(args, ["decision", "baseline"])
            interval = bnd.harm_gap_interval(data, d, d0, c)
        elif theorem == "direct-discrimination":
            _require(args, ["decision", "attribute-baseline", "attribute-value"])
            z0 = parse_assignment(args.attribute_baseline)
            z1 = parse_assignment(args.attribute_value)
            interval = bnd.direct_discrimination_interval(data, d, z0, z1, c)
            request["attribute_baseline"] = z0
            request["attribute_value"] = z1
        else:  # pragma: no cover - argparse rejects other values
            raise InputError(f"unknown theorem {theorem!r}")
    intervals = [interval.as_dict()]
    report = Report(
        command="bounds",
        request=request,
        intervals=intervals,
        warnings=_interval_warnings(intervals),
        seed=args.seed,
    )
    _emit(args, report)
    return 0


def _bound_provider(args, data: BehaviouralDataset, c, z):
    theorem = args.theorem
    if theorem == "intervention":
        return lambda d, d_star: bnd.thm1_gap_interval(data, c, z, d, d_star).lower
    if theorem == "multidomain":
        return lambda d, d_star: bnd.thm2_multidomain_lower(data, c, z, d, d_star).lower
    if theorem == "unknown-shift":
        return lambda d, d_star: bnd.thm3_unknown_shift_interval().lower
    raise InputError(
        f"--theorem {theorem} is not a preference-gap provider; "
        "use intervention, multidomain, or unknown-shift"
    )


def cmd_predict(args) -> int:
    data = _dataset_from_args(args)
    c = parse_assignment(args.context)
    z = parse_assignment(args.shift)
    provider = _bound_provider(args, data, c, z)
    run = weak_verdict if args.mode == "weak" else strong_verdict
    verdict = run(provider, data.decisions, c, args.lam)
    report = Report(
        command="predict",
        request={
            "theorem": args.theorem,
            "data": args.data,
            "context": c,
            "shift": z,
            "mode": args.mode,
            "lambda": args.lam,
        },
        verdict=verdict.as_dict(),
        seed=args.seed,
    )
    _emit(args, report)
    if args.require_verdict and not verdict.ruled_out:
        sys.stderr.write("error: no decision could be ruled out\n")
        return 3
    return 0


def _skeleton_from_args(args, data: BehaviouralDataset) -> list[SkeletonVariable]:
    if args.skeleton:
        doc = json.loads(Path(args.skeleton).read_text(encoding="utf-8"))
        refs = {r.name: r for r in data.scope}
        out = []
        for item in doc["variables"]:
            if item["name"] not in refs:
                raise InputError(f"skeleton variable {item['name']!r} not in data scope")
            out.append(
                SkeletonVariable(
                    item["name"],
                    tuple(item.get("domain", refs[item["name"]].domain)),
                    tuple(item.get("parents", ())),
                )
            )
        return out
    # Default: the utility responds to the decision and every other variable;
    # everything else is a root.
    out = []
    for ref in data.scope:
        if ref.name == data.utility:
            parents = (data.decision.name, *[r.name for r in data.scope if r.name != ref.name])
            out.append(SkeletonVariable(ref.name, ref.domain, parents))
        else:
            out.append(SkeletonVariable(ref.name, ref.domain))
    return out


def cmd_oracle(args) -> int:
    _require(args, ["decision", "baseline", "shift"], label="oracle")
    data = _dataset_from_args(args)
    c = parse_assignment(args.context)
    z = parse_assignment(args.shift)
    d = _parse_value(args.decision)
    d0 = _parse_value(args.baseline)
    skeleton = _skeleton_from_args(args, data)
    polytope = build_polytope(data, skeleton, args.atom_limit)
    lp_value = optimize_gap(polytope, z, c, d, d0, args.direction)
    closed = bnd.thm1_gap_interval(data, c, z, d, d0)
    closed_value = closed.lower if args.direction == "min" else closed.upper
    delta = abs(lp_value - closed_value)
    certified = delta <= args.tol
    report = Report(
        command="oracle",
        request={
            "data": args.data,
            "context": c,
            "shift": z,
            "decision": args.decision,
            "baseline": args.baseline,
            "direction": args.direction,
            "tolerance": args.tol,
        },
        oracle={
            "atoms": polytope.space.dimension,
            "constraints": int(polytope.a_eq.shape[0]),
            "direction": args.direction,
            "lp_value": lp_value,
            "closed_form": float(closed_value),
            "delta": delta,
            "certified": certified,
            "tight_claimed": closed.tight,
        },
        seed=args.seed,
    )
    _emit(args, report)
    if not certified:
        sys.stderr.write(
            f"error: oracle delta {delta:.3e} exceeds tolerance {args.tol:.3e}\n"
        )
        return 4
    return 0


def cmd_relax(args) -> int:
    _require(args, ["decision", "baseline", "shift"], label="relax")
    data = _dataset_from_args(args)
    c = parse_assignment(args.context)
    z = parse_assignment(args.shift)
    d = _parse_value(args.decision)
    d0 = _parse_value(args.baseline)
    if args.kind == "approx-grounding":
        if args.delta is None:
            raise InputError("approx-grounding needs --delta")
        if args.method == "sample" and args.seed is None:
            raise InputError("sampling needs an explicit --seed")
        ball = relaxations.GroundingBall(args.delta)
        value = relaxations.approx_grounding_lower(
            data, ball, c, z, d, d0,
            method=args.method,
            n_samples=args.samples,
            seed=args.seed,
            concentration=args.concentration,
        )
        payload = {
            "kind": "approx-grounding",
            "method": args.method,
            "delta": args.delta,
            "value": value,
        }
        if args.method == "sample":
            payload.update(samples=args.samples, concentration=args.concentration)
    else:
        if args.alpha is None:
            raise InputError("proxy needs --alpha")
        value = relaxations.proxy_alignment_lower(data, args.alpha, z, d, d0)
        payload = {"kind": "proxy", "method": "closed-form", "alpha": args.alpha,
                   "value": value}
    report = Report(
        command="relax",
        request={
            "data": args.data,
            "context": c,
            "shift": z,
            "decision": args.decision,
            "baseline": args.baseline,
        },
        relaxation=payload,
        seed=args.seed,
    )
    _emit(args, report)
    return 0


def _add_common(sub) -> None:
    sub.add_argument("--data", help="model JSON, dataset JSON, table JSON, or CSV log")
    sub.add_argument("--decision-var", default="D", help="decision variable name")
    sub.add_argument("--utility-var", default="Y", help="utility variable name")
    sub.add_argument("--context-vars", help="policy inputs for CSV ingestion (comma list)")
    sub.add_argument("--shift", help="shift assignment, e.g. Z=1")
    sub.add_argument("--context", help="context assignment, e.g. Z=1")
    sub.add_argument("--decision", help="decision value")
    sub.add_argument("--baseline", help="baseline decision value")
    sub.add_argument("--format", choices=("json", "table"), default="json")
    sub.add_argument("--seed", type=int, default=None, help="echoed into the report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beliefbound",
        description="Behavioural bounds on preference, fairness, and harm gaps",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    b = commands.add_parser("bounds", help="closed-form gap intervals")
    _add_common(b)
    b.add_argument("--theorem", choices=THEOREMS, required=True)
    b.add_argument("--sigma-context", help='shifted covariate cells, e.g. "Z=1:0.9"')
    b.add_argument("--attribute-baseline", help="protected attribute baseline, e.g. Z=0")
    b.add_argument("--attribute-value", help="protected attribute flip value, e.g. Z=1")
    b.add_argument("--harm-value", default="1", help="utility value counted as the harm event")
    b.set_defaults(func=cmd_bounds)

    p = commands.add_parser("predict", help="weak/strong predictability verdicts")
    _add_common(p)
    p.add_argument(
        "--theorem",
        choices=("intervention", "multidomain", "unknown-shift"),
        default="intervention",
    )
    p.add_argument("--mode", choices=("weak", "strong"), required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0,
                   help="rationality margin")
    p.add_argument("--require-verdict", action="store_true",
                   help="exit 3 when nothing is ruled out")
    p.set_defaults(func=cmd_predict)

    o = commands.add_parser("oracle", help="LP certification of the closed forms")
    _add_common(o)
    o.add_argument("--direction", choices=("min", "max"), required=True)
    o.add_argument("--tol", type=float, default=1e-6)
    o.add_argument("--skeleton", help="JSON variable/parent declaration")
    o.add_argument("--atom-limit", type=int, default=None)
    o.set_defaults(func=cmd_oracle)

    r = commands.add_parser("relax", help="approximate-grounding and proxy bounds")
    _add_common(r)
    r.add_argument("--kind", choices=("approx-grounding", "proxy"), required=True)
    r.add_argument("--delta", type=float, default=None, help="total-variation radius")
    r.add_argument("--alpha", type=float, default=None, help="proxy alignment level")
    r.add_argument("--method", choices=("exact-lp", "sample"), default="exact-lp")
    r.add_argument("--samples", type=int, default=relaxations.DEFAULT_SAMPLES)
    r.add_argument("--concentration", type=float,
                   default=relaxations.DEFAULT_CONCENTRATION)
    r.set_defaults(func=cmd_relax)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AtomLimitError as exc:
        sys.stderr.write(f"error: {str(exc).splitlines()[0]}\n")
        return 5
    except BeliefBoundError as exc:
        sys.stderr.write(f"error: {str(exc).splitlines()[0]}\n")
        return 2
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        sys.stderr.write(f"error: {exc.__class__.__name__}: {str(exc).splitlines()[0]}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
