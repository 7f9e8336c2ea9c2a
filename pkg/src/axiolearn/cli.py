"""Command line front end: ingest -> extract/score -> matrices -> train ->
predict -> eval -> compare, one subcommand per step, composable via files.

Handlers only wire module operations together; they compute no math of
their own (enforced by an architectural test: no numeric literals in
command handlers).  Exit codes: 0 ok, 2 config error, 3 data error,
4 numeric error.  Partial artifacts are removed on failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from axiolearn import __version__, _kernels
from axiolearn.axiom_similarity import (
    Asf,
    AxiomSimilarityMatrix,
    LabeledAxiomSet,
    build_axiom_matrix,
    encode_axiom,
)
from axiolearn.hierarchy import (
    ConceptSimilarityMatrix,
    CycleError,
    Hierarchy,
    UnknownConceptError,
)
from axiolearn.instance_baseline import build_instance_matrix, instance_similarity, SubsumptionPair
from axiolearn.learner import (
    SingularSystemError,
    cross_validate,
    fit,
    load_model,
    predict_detailed,
    rmse,
    explained_variance,
    save_model,
    split_no_leakage,
)
from axiolearn.rdf_store import Dataset, ParseError, parse_file
from axiolearn.scorer import Axiom, AxiomKind, NegMode, extract_labeled_axioms, score_axiom

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

DEFAULT_TRAIN_FRAC = 0.8
DEFAULT_FOLDS = 5
DEFAULT_SEED = 0
DEFAULT_JOBS = 1
HASH_WIDTH = 12
MIN_VARIANCE_POINTS = 2


class CliConfigError(ValueError):
    pass


class _Artifacts:
    """Tracks files written by a command so failures leave nothing behind."""

    def __init__(self):
        self.paths: list[str] = []

    def register(self, path) -> str:
        self.paths.append(str(path))
        return path

    def cleanup(self):
        for p in self.paths:
            try:
                os.unlink(p)
            except OSError:
                pass


def _config_hash(args: argparse.Namespace) -> str:
    payload = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    digest = hashlib.sha256(json.dumps(payload, sort_keys=True, default=str).encode())
    return digest.hexdigest()[:HASH_WIDTH]


def _stamp(args) -> dict:
    return {"config": _config_hash(args), "seed": getattr(args, "seed", DEFAULT_SEED)}


def _json_dump(doc, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=1, sort_keys=True, default=str)
        f.write("\n")


def _load_datasets(paths) -> Dataset:
    merged = frozenset()
    for p in paths:
        merged |= parse_file(p).triples
    return Dataset(merged)


def _parse_grid(text: str | None) -> dict | None:
    if text is None:
        return None
    try:
        grid = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliConfigError(f"--grid is not valid JSON: {exc}")
    if not isinstance(grid, dict) or not all(isinstance(v, list) for v in grid.values()):
        raise CliConfigError("--grid must be a JSON object mapping names to value lists")
    return grid


def _validate(args: argparse.Namespace):
    """Reject bad enumerated/range values before any work starts."""
    frac = getattr(args, "train_frac", None)
    if frac is not None and not 0.0 < frac < 1.0:
        raise CliConfigError(f"--train-frac must be in (0, 1), got {frac}")
    folds = getattr(args, "folds", None)
    if folds is not None and folds < 2:
        raise CliConfigError(f"--folds must be >= 2, got {folds}")
    jobs = getattr(args, "jobs", None)
    if jobs is not None and jobs < 1:
        raise CliConfigError(f"--jobs must be >= 1, got {jobs}")
    floor = getattr(args, "unknown_concept_floor", None)
    if floor is not None and not 0.0 <= floor <= 1.0:
        raise CliConfigError(f"--unknown-concept-floor must be in [0, 1], got {floor}")
    if hasattr(args, "grid"):
        _parse_grid(args.grid)


def _scored_set(d, args) -> LabeledAxiomSet:
    """Extract labeled axioms, rescoring with the possibilistic scorer when
    --rescore is set."""
    kind = AxiomKind(args.kind)
    pairs = extract_labeled_axioms(d, kind, balance=args.balance)
    if not pairs:
        raise ValueError(f"no {kind.value} axioms found in the data")
    if args.rescore:
        neg = NegMode(args.neg_mode)
        pairs = [
            (a, score_axiom(d, a, neg, args.inferred).headline) for a, _ in pairs
        ]
    return LabeledAxiomSet.from_pairs(pairs)


# --- command handlers (no numeric literals allowed here) ---------------------


def cmd_ingest(args, art) -> int:
    d = _load_datasets(args.data)
    with open(art.register(args.out), "w", encoding="utf-8") as f:
        f.write(d.to_ntriples())
    print(f"ingest: {len(d.triples)} triples, {len(d.classes())} classes, "
          f"{len(d.individuals)} individuals -> {args.out}")
    return EXIT_OK


def cmd_extract(args, art) -> int:
    d = _load_datasets(args.data)
    t = _scored_set(d, args)
    t.to_tsv(art.register(args.out), meta=_stamp(args))
    print(f"extract: {len(t)} labeled {t.kind.value} axioms -> {args.out}")
    return EXIT_OK


def cmd_score(args, art) -> int:
    d = _load_datasets(args.data)
    t = LabeledAxiomSet.from_tsv(args.axioms)
    neg = NegMode(args.neg_mode)
    reports = [score_axiom(d, a, neg, args.inferred) for a in t.axioms]
    rescored = LabeledAxiomSet(t.axioms, tuple(r.headline for r in reports))
    rescored.to_tsv(art.register(args.out), meta=_stamp(args))
    measure = next(iter(reports)).headline_measure
    print(f"score: {len(rescored)} axioms scored ({measure}) -> {args.out}")
    return EXIT_OK


def cmd_concept_matrix(args, art) -> int:
    d = _load_datasets(args.data)
    h = Hierarchy.from_dataset(d, collapse_cycles=args.collapse_cycles)
    concepts = sorted(d.classes())
    started = time.perf_counter()
    mc = h.concept_matrix(concepts, jobs=args.jobs)
    elapsed = time.perf_counter() - started
    mc.to_csv(art.register(args.out), meta=_stamp(args))
    print(f"concept-matrix: {len(mc)} concepts in {elapsed:.4f}s -> {args.out}")
    return EXIT_OK


def cmd_axiom_matrix(args, art) -> int:
    mc = ConceptSimilarityMatrix.from_csv(args.concept_matrix)
    t = LabeledAxiomSet.from_tsv(args.axioms)
    started = time.perf_counter()
    ma = build_axiom_matrix(
        mc, t, asf=Asf(args.asf), jobs=args.jobs, unknown_floor=args.unknown_concept_floor
    )
    elapsed = time.perf_counter() - started
    meta = _stamp(args) | {"asf": args.asf, "kind": t.kind.value}
    ma.to_csv(art.register(args.out), meta=meta)
    print(f"axiom-matrix: {len(ma)}x{len(ma)} {t.kind.value} matrix in {elapsed:.4f}s -> {args.out}")
    return EXIT_OK


def cmd_train(args, art) -> int:
    ma, meta = AxiomSimilarityMatrix.from_csv(args.axiom_matrix)
    kind = ma.basis.kind
    grid = _parse_grid(args.grid)
    report = cross_validate(
        args.backend,
        ma.values,
        ma.basis.scores,
        folds=args.folds,
        grid=grid,
        seed=args.seed,
        score_range=kind.score_range,
    )
    model = fit(
        args.backend, ma.values, ma.basis.scores, report.best_hyperparams, kind.score_range
    )
    save_model(
        model,
        art.register(args.out),
        meta=_stamp(args)
        | {
            "kind": kind.value,
            "asf": meta.get("asf", Asf.AVERAGE.value),
            "basis_axioms": [str(a) for a in ma.basis.axioms],
            "basis_scores": list(ma.basis.scores),
        },
    )
    print(report.to_text())
    print(f"train: model -> {args.out}")
    return EXIT_OK


def cmd_predict(args, art) -> int:
    model, meta = load_model(args.model)
    mc = ConceptSimilarityMatrix.from_csv(args.concept_matrix)
    candidate = Axiom.parse(args.axiom)
    if candidate.kind.value != meta.get("kind"):
        raise ValueError(
            f"candidate kind {candidate.kind.value} does not match model kind {meta.get('kind')}"
        )
    basis = LabeledAxiomSet(
        tuple(Axiom.parse(s) for s in meta["basis_axioms"]),
        tuple(meta["basis_scores"]),
    )
    v = encode_axiom(
        mc, candidate, basis, asf=Asf(meta.get("asf", Asf.AVERAGE.value)),
        unknown_floor=args.unknown_concept_floor,
    )
    pred = predict_detailed(model, v)
    print(f"{pred.value:.17g}")
    if pred.clamped:
        print(f"note: raw prediction {pred.raw:.17g} clamped to the score range", file=sys.stderr)
    return EXIT_OK


def cmd_eval(args, art) -> int:
    ma, _ = AxiomSimilarityMatrix.from_csv(args.axiom_matrix)
    kind = ma.basis.kind
    split = split_no_leakage(ma.values, ma.basis.scores, args.train_frac, args.seed)
    report = cross_validate(
        args.backend,
        split.x_train,
        split.y_train,
        folds=args.folds,
        grid=_parse_grid(args.grid),
        seed=args.seed,
        score_range=kind.score_range,
    )
    model = fit(args.backend, split.x_train, split.y_train, report.best_hyperparams, kind.score_range)
    lo, hi = kind.score_range
    pred = np.clip(model.predict_batch(split.x_test), lo, hi)
    holdout_rmse = rmse(pred, split.y_test)
    enough = len(split.y_test) >= MIN_VARIANCE_POINTS
    holdout_ev = explained_variance(pred, split.y_test) if enough else None
    report.extras["holdout rmse"] = f"{holdout_rmse:.5f}"
    report.extras["holdout expl var"] = "degenerate" if holdout_ev is None else f"{holdout_ev:.5f}"
    print(report.to_text())
    if args.out:
        report.to_csv(art.register(args.out))
        print(f"eval: report -> {args.out}")
    return EXIT_OK


def cmd_compare(args, art) -> int:
    d = _load_datasets(args.data)
    t = LabeledAxiomSet.from_tsv(args.axioms)

    started = time.perf_counter()
    h = Hierarchy.from_dataset(d, collapse_cycles=args.collapse_cycles)
    mc = h.concept_matrix(sorted(d.classes()), jobs=args.jobs)
    onto = build_axiom_matrix(mc, t, asf=Asf(args.asf), jobs=args.jobs)
    onto_build = time.perf_counter() - started

    started = time.perf_counter()
    first = next(iter(t.axioms))
    encode_axiom(mc, first, t, asf=Asf(args.asf))
    onto_encode = time.perf_counter() - started

    started = time.perf_counter()
    inst = build_instance_matrix(d, t, inferred=args.inferred)
    inst_build = time.perf_counter() - started

    started = time.perf_counter()
    probe = SubsumptionPair(first.lhs, first.rhs)
    for other in t.axioms:
        instance_similarity(d, probe, SubsumptionPair(other.lhs, other.rhs), inferred=args.inferred)
    inst_encode = time.perf_counter() - started

    starved = np.array_equal(inst.values, np.eye(len(inst)))
    rows = []
    for label, matrix in (("ontological", onto), ("instance", inst)):
        report = cross_validate(
            args.backend,
            matrix.values,
            t.scores,
            folds=args.folds,
            seed=args.seed,
            grid=_parse_grid(args.grid),
            score_range=t.kind.score_range,
        )
        rows.append((label, report))

    print(f"{'similarity':<14}{'matrix_s':>10}{'encode_s':>10}{'rmse':>9}{'expl_var':>10}{'baseline_rmse':>15}")
    timings = {"ontological": (onto_build, onto_encode), "instance": (inst_build, inst_encode)}
    for label, report in rows:
        build_s, encode_s = timings[label]
        ev = "degenerate" if report.explained_variance is None else f"{report.explained_variance:.5f}"
        print(
            f"{label:<14}{build_s:>10.4f}{encode_s:>10.4f}"
            f"{report.rmse:>9.5f}{ev:>10}{report.baseline_rmse:>15.5f}"
        )
    if starved:
        print("note: instance baseline is evidence-starved "
              "(no shared individuals; all off-diagonal similarities are 0)")
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        onto.to_csv(art.register(os.path.join(args.out_dir, "asm_ontological.csv")), meta=_stamp(args))
        inst.to_csv(art.register(os.path.join(args.out_dir, "asm_instance.csv")), meta=_stamp(args))
        print(f"compare: matrices -> {args.out_dir}")
    return EXIT_OK


def cmd_pipeline(args, art) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    out = lambda name: art.register(os.path.join(args.out_dir, name))
    stamp = _stamp(args)

    d = _load_datasets(args.data)
    t = _scored_set(d, args)
    axioms_path = out("axioms.tsv")
    t.to_tsv(axioms_path, meta=stamp)

    h = Hierarchy.from_dataset(d, collapse_cycles=args.collapse_cycles)
    mc = h.concept_matrix(sorted(d.classes()), jobs=args.jobs)
    csm_path = out("concept_matrix.csv")
    mc.to_csv(csm_path, meta=stamp)

    ma = build_axiom_matrix(
        mc, t, asf=Asf(args.asf), jobs=args.jobs, unknown_floor=args.unknown_concept_floor
    )
    asm_path = out("axiom_matrix.csv")
    ma.to_csv(asm_path, meta=stamp | {"asf": args.asf, "kind": t.kind.value})

    kind = t.kind
    report = cross_validate(
        args.backend,
        ma.values,
        t.scores,
        folds=args.folds,
        grid=_parse_grid(args.grid),
        seed=args.seed,
        score_range=kind.score_range,
    )
    model = fit(args.backend, ma.values, t.scores, report.best_hyperparams, kind.score_range)
    model_path = out("model.json")
    save_model(
        model,
        model_path,
        meta=stamp
        | {
            "kind": kind.value,
            "asf": args.asf,
            "basis_axioms": [str(a) for a in t.axioms],
            "basis_scores": list(t.scores),
        },
    )
    eval_path = out("eval.txt")
    with open(eval_path, "w", encoding="utf-8") as f:
        f.write(report.to_text())
        f.write("\n")

    manifest = {
        "config": {k: v for k, v in sorted(vars(args).items()) if k != "func"},
        "config_hash": stamp["config"],
        "seed": args.seed,
        "kernel_backend": _kernels.BACKEND,
        "artifacts": {
            "axioms": os.path.basename(axioms_path),
            "concept_matrix": os.path.basename(csm_path),
            "axiom_matrix": os.path.basename(asm_path),
            "model": os.path.basename(model_path),
            "eval": os.path.basename(eval_path),
        },
    }
    _json_dump(manifest, out("manifest.json"))
    print(report.to_text())
    print(f"pipeline: artifacts -> {args.out_dir}")
    return EXIT_OK


# --- parser -------------------------------------------------------------------


def _add_common(p, *flags):
    if "seed" in flags:
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    if "jobs" in flags:
        p.add_argument("--jobs", type=int, default=DEFAULT_JOBS, help="worker thread cap")
    if "asf" in flags:
        p.add_argument("--asf", choices=[a.value for a in Asf], default=Asf.AVERAGE.value,
                       help="axiom similarity aggregator")
    if "neg" in flags:
        p.add_argument("--neg-mode", choices=[n.value for n in NegMode],
                       default=NegMode.DISJOINTNESS.value,
                       help="how counterexamples are recognized")
        p.add_argument("--inferred", action=argparse.BooleanOptionalAction, default=True,
                       help="count inferred (subclass-closed) instance memberships")
    if "backend" in flags:
        p.add_argument("--backend", choices=["knn", "ridge", "tree_ensemble"], default="knn")
        p.add_argument("--grid", help="JSON hyperparameter grid, e.g. '{\"k\": [1, 3]}'")
        p.add_argument("--folds", type=int, default=DEFAULT_FOLDS)
    if "floor" in flags:
        p.add_argument("--unknown-concept-floor", type=float,
                       help="similarity substituted for concepts missing from the matrix")
    if "cycles" in flags:
        p.add_argument("--collapse-cycles", action="store_true",
                       help="merge subClassOf cycles instead of failing")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="axiolearn",
        description="Score atomic OWL class axioms and train fast score predictors.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="merge RDF files into one N-Triples file")
    p.add_argument("--data", action="append", required=True, help=".nt or .ttl input (repeatable)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("extract", help="extract labeled axioms of one kind")
    p.add_argument("--data", action="append", required=True)
    p.add_argument("--kind", choices=[k.value for k in AxiomKind], required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--balance", action="store_true", help="equal label-group sizes")
    p.add_argument("--rescore", action="store_true",
                   help="score labels with the possibilistic scorer instead of endpoints")
    _add_common(p, "neg", "seed")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("score", help="score axioms from a TSV against instance data")
    p.add_argument("--data", action="append", required=True)
    p.add_argument("--axioms", required=True, help="TSV kind<TAB>lhs<TAB>rhs<TAB>score")
    p.add_argument("--out", required=True)
    _add_common(p, "neg", "seed")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("concept-matrix", help="build the concept similarity matrix")
    p.add_argument("--data", action="append", required=True)
    p.add_argument("--out", required=True)
    _add_common(p, "cycles", "jobs", "seed")
    p.set_defaults(func=cmd_concept_matrix)

    p = sub.add_parser("axiom-matrix", help="build the axiom similarity matrix")
    p.add_argument("--concept-matrix", required=True)
    p.add_argument("--axioms", required=True)
    p.add_argument("--out", required=True)
    _add_common(p, "asf", "floor", "jobs", "seed")
    p.set_defaults(func=cmd_axiom_matrix)

    p = sub.add_parser("train", help="grid-search, cross-validate and fit a model")
    p.add_argument("--axiom-matrix", required=True)
    p.add_argument("--out", required=True)
    _add_common(p, "backend", "seed")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict the score of one candidate axiom")
    p.add_argument("--model", required=True)
    p.add_argument("--concept-matrix", required=True)
    p.add_argument("--axiom", required=True, help="e.g. \"SubClassOf <http://a> <http://b>\"")
    _add_common(p, "floor")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="holdout evaluation with CV model selection")
    p.add_argument("--axiom-matrix", required=True)
    p.add_argument("--train-frac", type=float, default=DEFAULT_TRAIN_FRAC)
    p.add_argument("--out", help="optional per-fold CSV report")
    _add_common(p, "backend", "seed")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="ontological vs instance-based similarity, side by side")
    p.add_argument("--data", action="append", required=True)
    p.add_argument("--axioms", required=True, help="scored SubClassOf TSV")
    p.add_argument("--out-dir")
    _add_common(p, "backend", "asf", "neg", "cycles", "jobs", "seed")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("pipeline", help="run extract -> matrices -> train -> eval end to end")
    p.add_argument("--data", action="append", required=True)
    p.add_argument("--kind", choices=[k.value for k in AxiomKind], required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--balance", action="store_true")
    p.add_argument("--rescore", action="store_true")
    _add_common(p, "backend", "asf", "neg", "floor", "cycles", "jobs", "seed")
    p.set_defaults(func=cmd_pipeline)

    return parser


_DATA_ERRORS = (ParseError, CycleError, UnknownConceptError, OSError, ValueError, KeyError)
_NUMERIC_ERRORS = (SingularSystemError, np.linalg.LinAlgError, FloatingPointError, OverflowError)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    art = _Artifacts()
    try:
        _validate(args)
        return args.func(args, art)
    except CliConfigError as exc:
        art.cleanup()
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERIC_ERRORS as exc:
        art.cleanup()
        print(f"{_origin(exc)}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except _DATA_ERRORS as exc:
        art.cleanup()
        print(f"{_origin(exc)}: {exc}", file=sys.stderr)
        return EXIT_DATA


def _origin(exc) -> str:
    module = type(exc).__module__
    if module.startswith("axiolearn."):
        return module.removeprefix("axiolearn.")
    return type(exc).__name__


if __name__ == "__main__":
    sys.exit(main())
