"""Command-line interface: ``volbench run | classify | tables | circuit``."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .circuit import deserialize, serialize
from .errors import CapacityError, ClassificationError, DatasetError, VolbenchError
from .protocol import compute_score, qv1_to_quantum_volume
from .randomgen import SeedSpec, build_model_circuit
from .report import RunConfig, build_report, load_config_file, summary_lines
from .routing import parse_topology
from .sim import NoiseModel, ideal_probabilities, sample_noisy_trajectory
from . import survey

EXIT_USAGE, EXIT_CAPACITY, EXIT_CHECK = 2, 3, 4


class UsageError(Exception):
    pass


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"{text} is not a 64-bit unsigned integer")
    return value


def _prob(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not a probability")
    return value


def _classes(text: str) -> list[int]:
    if text == "all":
        return [1, 2, 3, 4, 5]
    try:
        ks = [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad class list {text!r}") from None
    if any(k not in range(1, 6) for k in ks):
        raise argparse.ArgumentTypeError("classes must be in 1..5")
    return ks


def _add_noise_flags(p):
    p.add_argument("--p1", type=_prob, help="depolarizing rate on idle qubits")
    p.add_argument("--p2", type=_prob, help="depolarizing rate per SU(4) gate")
    p.add_argument("--p-swap", type=_prob, help="depolarizing rate per routing SWAP")
    p.add_argument("--p-readout", type=_prob, help="readout bit-flip probability")


def _noise_overrides(args) -> dict:
    names = {"p1": args.p1, "p2": args.p2, "p_swap": args.p_swap, "p_readout": args.p_readout}
    return {k: v for k, v in names.items() if v is not None}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="volbench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="compute QV-k scores under a noise model")
    run.add_argument("--config", help="JSON config file or a previous report to replay")
    run.add_argument("--class", dest="classes", type=_classes, help="1..5, comma list, or 'all'")
    run.add_argument("--n-max", type=int)
    run.add_argument("--circuits", type=int)
    run.add_argument("--shots", type=int)
    _add_noise_flags(run)
    run.add_argument("--topology", help="all2all | line | ring | grid | grid:WxH")
    run.add_argument("--pairing", choices=["adjacent", "random-disjoint"])
    run.add_argument("--seed", type=_u64, help="master seed (falls back to $VOLBENCH_SEED)")
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--out", default="volbench-report.json")

    cls = sub.add_parser("classify", help="QV class of a depth scaling")
    cls.add_argument("--scaling", required=True, help='e.g. "n^2", "n^3*log", "sqrt(n)*polylog", "1"')
    cls.add_argument("--estimate", choices=sorted(survey.ESTIMATE_ALIASES), default="gate-depth")
    cls.add_argument("--json", action="store_true")

    tab = sub.add_parser("tables", help="reproduce the survey tables")
    tab.add_argument("--dataset", help="CSV dataset (default: bundled)")
    tab.add_argument("--json", action="store_true")
    tab.add_argument("--check", action="store_true", help="fail if any count differs from the published tables")

    circ = sub.add_parser("circuit", help="generate or simulate model circuits")
    csub = circ.add_subparsers(dest="action", required=True)
    gen = csub.add_parser("gen")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--depth", type=int, required=True)
    gen.add_argument("--seed", type=_u64, default=None)
    gen.add_argument("--stream", default="", help="comma-separated stream path")
    gen.add_argument("--pairing", choices=["adjacent", "random-disjoint"], default="adjacent")
    gen.add_argument("--out")
    simc = csub.add_parser("simulate")
    simc.add_argument("--in", dest="infile", required=True)
    simc.add_argument("--shots", type=int, help="sample noisy counts instead of ideal probabilities")
    _add_noise_flags(simc)
    simc.add_argument("--topology", default="all2all")
    simc.add_argument("--seed", type=_u64, default=None)
    simc.add_argument("--out")
    return parser


def _env_seed() -> int | None:
    raw = os.environ.get("VOLBENCH_SEED")
    if raw is None:
        return None
    try:
        return _u64(raw)
    except (ValueError, argparse.ArgumentTypeError):
        raise UsageError(f"VOLBENCH_SEED={raw!r} is not a 64-bit unsigned integer") from None


def resolve_run_config(args) -> RunConfig:
    """Flags override the config file, which overrides defaults."""
    data = load_config_file(args.config) if args.config else {}
    if "seed" not in data and args.seed is None and (env := _env_seed()) is not None:
        data["seed"] = env
    flags = {
        "classes": args.classes,
        "n_max": args.n_max,
        "circuits": args.circuits,
        "shots": args.shots,
        "topology": args.topology,
        "pairing": args.pairing,
        "seed": args.seed,
    }
    data.update({k: v for k, v in flags.items() if v is not None})
    noise = _noise_overrides(args)
    if noise:
        data["noise"] = {**(data.get("noise") or {}), **noise}
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    return RunConfig.from_dict(data, jobs=args.jobs)


def cmd_run(args) -> int:
    config = resolve_run_config(args)
    timings = {}
    scores = []
    for k in config.classes:
        t0 = time.perf_counter()
        scores.append(compute_score(k, config.noise, config.protocol(), config.n_max_for(k), config.seed))
        timings[f"QV-{k}_seconds"] = round(time.perf_counter() - t0, 3)
    report = build_report(config, scores, timings)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    for line in summary_lines(scores):
        print(line)
    qv1 = next((s for s in scores if s.k == 1), None)
    if qv1 is not None:
        print(f"quantum volume (2^QV-1) = {qv1_to_quantum_volume(qv1.score)}")
    print(f"report written to {args.out}")
    return 0


def cmd_classify(args) -> int:
    try:
        s = survey.parse_scaling(args.scaling)
    except (ValueError, ClassificationError) as exc:
        raise UsageError(str(exc)) from None
    estimate = survey.ESTIMATE_ALIASES[args.estimate]
    initial = survey.classify_initial(s)
    adjusted = survey.classify_adjusted(s, estimate)
    if args.json:
        print(json.dumps({
            "scaling": s.label(),
            "conformant": s.conformant,
            "estimate": estimate.value,
            "initial": f"QV-{initial}",
            "adjusted": f"QV-{adjusted}",
        }))
    else:
        if not s.conformant:
            print(f"warning: {s.label()} is not one of the surveyed depth forms", file=sys.stderr)
        print(f"{s.label()} [{estimate.value}]: initial QV-{initial}, adjusted QV-{adjusted}")
    return 0


def cmd_tables(args) -> int:
    if args.dataset:
        with open(args.dataset, encoding="utf-8") as fh:
            records = survey.load_dataset(fh.read())
    else:
        records = survey.load_bundled()
    tables = survey.survey_tables(records)
    if args.json:
        print(json.dumps({
            "initial": tables["initial"].to_dict(),
            "adjustments": {k: {"adjusted": a, "kept": b} for k, (a, b) in tables["adjustments"].items()},
            "adjusted": tables["adjusted"].to_dict(),
            "estimate_types": tables["estimate_types"],
            "areas": tables["areas"],
            "eras": tables["eras"],
        }, indent=2))
    else:
        print(tables["initial"].render())
        print()
        print("Boundary adjustments (adjusted / kept)")
        for label, (a, b) in tables["adjustments"].items():
            print(f"  {label:<8} {a:>3} {b:>3}")
        print()
        print(tables["adjusted"].render())
        print()
        print("Estimate types: " + ", ".join(f"{k} {v}" for k, v in tables["estimate_types"].items()))
        print("Eras: " + ", ".join(f"{k} {v}" for k, v in tables["eras"].items()))
        print("Application areas (NISQ/FT/All):")
        for area, cols in tables["areas"].items():
            print(f"  {area:<26} {cols['NISQ']:>3} {cols['FT']:>3} {cols['All']:>3}")
    if args.check:
        diffs = survey.compare_to_published(tables)
        if diffs:
            print(f"check failed: {diffs[0]} ({len(diffs)} mismatched cells)", file=sys.stderr)
            return EXIT_CHECK
        print("check passed: all counts match the published tables", file=sys.stderr)
    return 0


def _write(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_circuit(args) -> int:
    if args.action == "gen":
        seed = args.seed if args.seed is not None else (_env_seed() or 0)
        stream = tuple(int(s) for s in args.stream.split(",") if s.strip())
        circuit = build_model_circuit(args.n, args.depth, SeedSpec(seed, stream), args.pairing)
        _write(serialize(circuit), args.out)
        return 0
    with open(args.infile, encoding="utf-8") as fh:
        circuit = deserialize(fh.read())
    if args.shots is None:
        probs = ideal_probabilities(circuit)
        _write(json.dumps({"width": circuit.width, "probabilities": probs.tolist()}), args.out)
        return 0
    seed = args.seed if args.seed is not None else (_env_seed() or 0)
    noise = NoiseModel(**_noise_overrides(args))
    topology = parse_topology(args.topology).for_width(circuit.width)
    counts = sample_noisy_trajectory(circuit, noise, args.shots, SeedSpec(seed), topology)
    _write(counts.to_json(), args.out)
    return 0


COMMANDS = {"run": cmd_run, "classify": cmd_classify, "tables": cmd_tables, "circuit": cmd_circuit}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CapacityError as exc:
        print(f"volbench: capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (UsageError, DatasetError, VolbenchError, OSError, json.JSONDecodeError) as exc:
        print(f"volbench: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
