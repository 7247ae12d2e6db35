"""Command line interface.

Subcommands cover the full workflow: derive a class label, mask a table,
score information loss, split train/test for downstream learners, run a
full evaluation grid, and report per-cluster sensitivities.

Exit codes: 0 on success, 2 for bad parameters or configs, 3 for data
errors (malformed files, misaligned tables, domain violations).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import (
    AttributeDomain,
    compute_domains,
    derive_class,
    load_csv,
    split_train_test,
    write_csv,
)
from .errors import IdpmaskError, ParameterError, SchemaError
from .evaluation import (
    NORMALIZATIONS,
    ExperimentGrid,
    cell_averages,
    run_experiment,
    sse,
    write_averages_csv,
    write_results_csv,
)
from .mechanisms import METHODS, MechanismConfig, apply_mechanism
from .microagg import microaggregate, write_cluster_dump
from .sensitivity import SENSITIVITY_KINDS, sensitivity_rows

CONFIG_SCHEMA_VERSION = 1
MANIFEST_SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3

_CONFIG_KEYS = {
    "schema_version": (int,),
    "methods": (list,),
    "epsilons": (list,),
    "ks": (list,),
    "alphas": (list,),
    "repetitions": (int,),
    "base_seed": (int,),
    "clamp": (bool,),
    "normalize": (str,),
}
_CONFIG_REQUIRED = ("schema_version", "methods", "epsilons", "alphas",
                    "repetitions", "base_seed")

log = logging.getLogger("idpmask")

__all__ = ["main"]


def _parse_domains(text: str, attributes: tuple[str, ...]):
    """Accept either a JSON list of [low, high] pairs (header order) or a
    JSON object keyed by attribute name covering every attribute."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParameterError(f"--domains is not valid JSON: {exc}") from exc
    if isinstance(raw, dict):
        missing = [a for a in attributes if a not in raw]
        if missing:
            raise ParameterError(f"--domains misses attribute(s) {missing}")
        extra = [name for name in raw if name not in attributes]
        if extra:
            raise ParameterError(f"--domains names unknown attribute(s) {extra}")
        raw = [raw[a] for a in attributes]
    if not isinstance(raw, list) or len(raw) != len(attributes):
        raise ParameterError(
            f"--domains must list one [low, high] pair per attribute "
            f"({len(attributes)} expected)"
        )
    domains = []
    for name, pair in zip(attributes, raw):
        if (not isinstance(pair, list) or len(pair) != 2
                or not all(isinstance(v, (int, float)) for v in pair)):
            raise ParameterError(
                f"domain for {name!r} must be a [low, high] number pair"
            )
        domains.append(AttributeDomain(float(pair[0]), float(pair[1])))
    return tuple(domains)


def _attribute_list(text: str | None) -> tuple[str, ...] | None:
    if text is None:
        return None
    names = tuple(part.strip() for part in text.split(",") if part.strip())
    if not names:
        raise ParameterError("--attributes must name at least one column")
    return names


def _sensitivity_digest(result) -> dict:
    digest = {}
    for j, name in enumerate(result.dataset.attributes):
        sens = np.asarray(result.scales[j]) * result.budget.shares[j]
        digest[name] = {
            "clusters": int(sens.size),
            "min": float(sens.min()),
            "median": float(np.median(sens)),
            "max": float(sens.max()),
        }
    return digest


def _write_manifest(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _cmd_anonymize(args) -> int:
    dataset = load_csv(args.input, attributes=_attribute_list(args.attributes),
                       label_column=args.class_column)
    if args.method == "dp" and args.k is not None:
        raise ParameterError("dp works on raw values; drop --k")
    if args.method == "idp-cbls" and args.alpha is not None:
        raise ParameterError(
            "idp-cbls derives nothing from --alpha; pass --domains only if "
            "you want clamped output"
        )
    domains = None
    if args.domains is not None:
        if args.alpha is not None:
            raise ParameterError("--alpha and --domains are mutually exclusive")
        domains = _parse_domains(args.domains, dataset.attributes)
    config = MechanismConfig(
        method=args.method,
        epsilon=args.epsilon,
        seed=args.seed,
        k=args.k,
        alpha=args.alpha,
        clamp=args.clamp,
    )
    result = apply_mechanism(dataset, config, domains)
    write_csv(result.dataset, args.output)
    if args.cluster_dump is not None:
        if result.clusterings is None:
            raise ParameterError("dp builds no clusters; drop --cluster-dump")
        write_cluster_dump(dataset, result.clusterings, args.cluster_dump)
    if args.manifest is not None:
        payload = {
            "tool": "idpmask",
            "tool_version": __version__,
            "schema_version": MANIFEST_SCHEMA_VERSION,
            "command": "anonymize",
            "input": str(args.input),
            "output": str(args.output),
            "method": result.method,
            "epsilon": result.budget.total,
            "k": result.k,
            "seed": result.seed,
            "clamped": result.clamped,
            "rows": result.dataset.n,
            "attributes": list(result.dataset.attributes),
            "budget_per_attribute": {
                name: share for name, share in
                zip(result.dataset.attributes, result.budget.shares)
            },
            "domains": None if result.domains is None else {
                name: [dom.lower, dom.upper] for name, dom in
                zip(result.dataset.attributes, result.domains)
            },
            "sensitivity_digest": _sensitivity_digest(result),
        }
        _write_manifest(Path(args.manifest), payload)
    print(f"wrote {args.output} ({result.dataset.n} rows, "
          f"method={result.method})")
    return EXIT_OK


def _cmd_sse(args) -> int:
    original = load_csv(args.original, label_column=args.class_column)
    masked = load_csv(args.masked, label_column=args.class_column)
    total, mean = sse(original, masked.replace_values(masked.values, "masked"),
                      normalize=args.normalize)
    print(f"sse={total!r}")
    print(f"mean_sse={mean!r}")
    return EXIT_OK


def _cmd_split(args) -> int:
    original = load_csv(args.original, label_column=args.class_column)
    masked_raw = load_csv(args.masked, label_column=args.class_column)
    masked = masked_raw.replace_values(masked_raw.values, "masked")
    train, test = split_train_test(original, masked, args.fraction)
    write_csv(train, args.train)
    write_csv(test, args.test)
    print(f"wrote {args.train} ({train.n} rows) and {args.test} "
          f"({test.n} rows)")
    return EXIT_OK


def _cmd_derive_class(args) -> int:
    dataset = load_csv(args.input)
    labeled = derive_class(
        dataset, args.attribute, args.threshold,
        low_label=args.low_label, high_label=args.high_label,
        class_name=args.class_name,
    )
    write_csv(labeled, args.output)
    counts = {}
    for label in labeled.labels:
        counts[label] = counts.get(label, 0) + 1
    summary = ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))
    print(f"wrote {args.output} ({labeled.n} rows; {summary})")
    return EXIT_OK


def _load_config(path: str) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ParameterError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise SchemaError("config must be a JSON object")
    unknown = sorted(set(raw) - set(_CONFIG_KEYS))
    if unknown:
        raise SchemaError(f"unknown config key(s): {unknown}")
    missing = [key for key in _CONFIG_REQUIRED if key not in raw]
    if missing:
        raise SchemaError(f"config misses required key(s): {missing}")
    for key, types in _CONFIG_KEYS.items():
        if key in raw and not isinstance(raw[key], types):
            raise SchemaError(
                f"config key {key!r} must be {types[0].__name__}"
            )
    if raw["schema_version"] != CONFIG_SCHEMA_VERSION:
        raise SchemaError(
            f"config schema_version {raw['schema_version']} is not "
            f"supported (expected {CONFIG_SCHEMA_VERSION})"
        )
    return raw


def _cmd_experiment(args) -> int:
    raw = _load_config(args.config)
    grid = ExperimentGrid(
        methods=tuple(raw["methods"]),
        epsilons=tuple(float(e) for e in raw["epsilons"]),
        ks=tuple(int(k) for k in raw.get("ks", [])),
        alphas=tuple(float(a) for a in raw["alphas"]),
        repetitions=int(raw["repetitions"]),
        base_seed=int(raw["base_seed"]),
        clamp=bool(raw.get("clamp", True)),
        normalize=raw.get("normalize", "variance"),
    )
    dataset = load_csv(args.input, label_column=args.class_column)
    results = run_experiment(grid, dataset, threads=args.threads)
    write_results_csv(results, args.results)
    averages = cell_averages(results)
    write_averages_csv(averages, args.averages)
    print(f"wrote {len(results)} runs to {args.results} and "
          f"{len(averages)} cell averages to {args.averages}")
    return EXIT_OK


def _cmd_sensitivity_report(args) -> int:
    dataset = load_csv(args.input, label_column=args.class_column)
    domains = None
    if args.kind in ("global", "local"):
        if args.domains is not None:
            domains = _parse_domains(args.domains, dataset.attributes)
        elif args.alpha is not None:
            domains = compute_domains(dataset, args.alpha)
        else:
            raise ParameterError(
                f"kind {args.kind!r} needs --alpha or --domains"
            )
    _, clusterings = microaggregate(dataset, args.k)
    rows = sensitivity_rows(dataset, clusterings, (args.kind,), domains)
    with Path(args.output).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["attribute", "cluster_index", "kind", "size",
                         "sensitivity"])
        for row in rows:
            writer.writerow([row.attribute, row.cluster_index, row.kind,
                             row.size, repr(row.sensitivity)])
    print(f"wrote {args.output} ({len(rows)} clusters)")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="idpmask",
        description="Microaggregation-based masking with calibrated noise.",
    )
    parser.add_argument("--version", action="version",
                        version=f"idpmask {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log progress details to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    anonymize = sub.add_parser(
        "anonymize", help="mask a numeric CSV with one of the four methods")
    anonymize.add_argument("--input", required=True)
    anonymize.add_argument("--output", required=True)
    anonymize.add_argument("--method", required=True, choices=METHODS)
    anonymize.add_argument("--epsilon", required=True, type=float,
                           help="total privacy budget across attributes")
    anonymize.add_argument("--seed", required=True, type=int,
                           help="RNG seed; runs never fall back to the clock")
    anonymize.add_argument("--k", type=int, default=None,
                           help="minimum cluster size (cluster methods)")
    anonymize.add_argument("--alpha", type=float, default=None,
                           help="domain factor: bounds become [0, alpha*max]")
    anonymize.add_argument("--domains", default=None,
                           help="explicit JSON domains instead of --alpha")
    anonymize.add_argument("--clamp", action=argparse.BooleanOptionalAction,
                           default=None,
                           help="clamp outputs into the domains "
                                "(default: on when domains exist)")
    anonymize.add_argument("--class-column", default=None,
                           help="label column carried through unchanged")
    anonymize.add_argument("--attributes", default=None,
                           help="comma-separated columns to mask "
                                "(default: all non-id, non-class)")
    anonymize.add_argument("--manifest", default=None,
                           help="write a JSON run manifest here")
    anonymize.add_argument("--cluster-dump", default=None,
                           help="write per-cluster debug CSV here")
    anonymize.set_defaults(func=_cmd_anonymize)

    sse_cmd = sub.add_parser(
        "sse", help="variance-normalized SSE between two aligned CSVs")
    sse_cmd.add_argument("--original", required=True)
    sse_cmd.add_argument("--masked", required=True)
    sse_cmd.add_argument("--class-column", default=None)
    sse_cmd.add_argument("--normalize", choices=NORMALIZATIONS,
                         default="variance")
    sse_cmd.set_defaults(func=_cmd_sse)

    split = sub.add_parser(
        "split", help="head of the masked file for training, original tail "
                      "for testing")
    split.add_argument("--original", required=True)
    split.add_argument("--masked", required=True)
    split.add_argument("--fraction", required=True, type=float)
    split.add_argument("--train", required=True)
    split.add_argument("--test", required=True)
    split.add_argument("--class-column", default=None)
    split.set_defaults(func=_cmd_split)

    derive = sub.add_parser(
        "derive-class", help="turn one numeric column into a binary label")
    derive.add_argument("--input", required=True)
    derive.add_argument("--output", required=True)
    derive.add_argument("--attribute", required=True)
    derive.add_argument("--threshold", required=True, type=float)
    derive.add_argument("--low-label", default="low")
    derive.add_argument("--high-label", default="high")
    derive.add_argument("--class-name", default="class")
    derive.set_defaults(func=_cmd_derive_class)

    experiment = sub.add_parser(
        "experiment", help="run a JSON-configured grid of masking runs")
    experiment.add_argument("--config", required=True)
    experiment.add_argument("--input", required=True)
    experiment.add_argument("--results", required=True)
    experiment.add_argument("--averages", required=True)
    experiment.add_argument("--threads", type=int, default=1)
    experiment.add_argument("--class-column", default=None)
    experiment.set_defaults(func=_cmd_experiment)

    report = sub.add_parser(
        "sensitivity-report", help="per-cluster sensitivities as CSV")
    report.add_argument("--input", required=True)
    report.add_argument("--output", required=True)
    report.add_argument("--k", required=True, type=int)
    report.add_argument("--kind", required=True, choices=SENSITIVITY_KINDS)
    report.add_argument("--alpha", type=float, default=None)
    report.add_argument("--domains", default=None)
    report.add_argument("--class-column", default=None)
    report.set_defaults(func=_cmd_sensitivity_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IdpmaskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
