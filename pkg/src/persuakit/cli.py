"""Command-line entry point: one subcommand per pipeline stage.

Dataflow is file based: every stage reads and writes the documented JSON
formats, so stages can be chained from shell scripts or CI. stdout carries
requested data only; diagnostics and logs go to stderr.

Exit codes: 0 success, 1 validation/contract error, 2 I/O or provider error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import augmentation, dataset, ensembling, pipeline, scoring, services
from . import taxonomy, thresholding
from .errors import PlanExecutionError, ProviderError, ValidationError

log = logging.getLogger("persuakit")


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract reserves 2 for I/O
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _manifest_path(args) -> str | None:
    if getattr(args, "manifest", None):
        return args.manifest
    out = getattr(args, "out", None)
    return f"{out}.manifest.json" if out else None


def _write_manifest(args, command: str, parameters: dict, inputs, outputs,
                    translation_failures=None) -> None:
    path = _manifest_path(args)
    if path is None:
        return
    manifest = pipeline.RunManifest(
        command=command,
        parameters=parameters,
        translation_failures=translation_failures,
    )
    for p in inputs:
        manifest.add_input(p)
    for p in outputs:
        manifest.add_output(p)
    manifest.write(path)
    log.info("manifest written to %s", path)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.write("\n")
        log.info("wrote %s", out)
    else:
        print(text)


def cmd_score(args) -> int:
    h = taxonomy.load_hierarchy(args.hierarchy)
    gold = pipeline.load_label_map(args.gold, h)
    pred = pipeline.load_label_map(args.pred, h)
    report = scoring.hierarchical_prf(gold, pred, h)
    _emit(report.dumps(), args.out)
    log.info(
        "hP=%.6f hR=%.6f hF1=%.6f over %d instances",
        report.h_precision, report.h_recall, report.h_f1, len(gold),
    )
    _write_manifest(
        args, "score", {"gold": args.gold, "pred": args.pred, "hierarchy": args.hierarchy},
        [args.gold, args.pred, args.hierarchy], [args.out] if args.out else [],
    )
    return 0


def cmd_tune_thresholds(args) -> int:
    h = taxonomy.load_hierarchy(args.hierarchy)
    matrix = thresholding.as_probabilities(thresholding.load_matrix(args.matrix))
    gold = pipeline.load_label_map(args.gold, h)
    grid = thresholding.Grid(lo=args.lo, hi=args.hi, step=args.step)
    profile = thresholding.tune_thresholds(matrix, gold, grid, h)
    _emit(profile.dumps(), args.out)
    _write_manifest(
        args, "tune-thresholds",
        {"matrix": args.matrix, "gold": args.gold, "hierarchy": args.hierarchy,
         "grid": {"lo": args.lo, "hi": args.hi, "step": args.step}},
        [args.matrix, args.gold, args.hierarchy], [args.out] if args.out else [],
    )
    return 0


def cmd_ensemble(args) -> int:
    members = [
        thresholding.as_probabilities(thresholding.load_matrix(p)) for p in args.member
    ]
    fused = ensembling.mean_ensemble(members)
    _emit(thresholding.dumps_matrix(fused), args.out)
    _write_manifest(
        args, "ensemble", {"members": list(args.member)},
        list(args.member), [args.out] if args.out else [],
    )
    return 0


def cmd_predict(args) -> int:
    h = taxonomy.load_hierarchy(args.hierarchy) if args.hierarchy else None
    members = [thresholding.load_matrix(p) for p in args.member]
    profile = thresholding.load_profile(args.profile)
    labels = pipeline.predict_labels(members, profile, h)
    _emit(pipeline.dumps_labels(labels), args.out)
    inputs = list(args.member) + [args.profile] + ([args.hierarchy] if args.hierarchy else [])
    _write_manifest(
        args, "predict",
        {"members": list(args.member), "profile": args.profile, "hierarchy": args.hierarchy},
        inputs, [args.out] if args.out else [],
    )
    return 0


def _load_benefit_set(path, epsilon: float) -> scoring.BenefitSet:
    with open(path, "rb") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"benefit-set file is not valid JSON: {exc}") from exc
    if isinstance(obj, list):
        names = obj
    elif isinstance(obj, dict) and isinstance(obj.get("techniques"), list):
        names = obj["techniques"]
        epsilon = float(obj.get("epsilon", epsilon))
    else:
        raise ValidationError(
            "benefit-set file must be a JSON array of technique names or "
            '{"techniques": [...], "epsilon": ...}'
        )
    if not all(isinstance(x, str) for x in names):
        raise ValidationError("benefit-set techniques must be strings")
    return scoring.BenefitSet(techniques=frozenset(names), epsilon=epsilon)


def cmd_plan_augment(args) -> int:
    h = taxonomy.load_hierarchy(args.hierarchy)
    ds = dataset.load_dataset(args.dataset, h, name=args.dataset_name or args.dataset)
    if args.strategy == "para_n":
        plan = augmentation.plan_para_n(ds, args.n, h)
    elif args.strategy == "para_benef":
        if not args.benefit_set:
            raise ValidationError("--benefit-set is required for strategy para_benef")
        benefit = _load_benefit_set(args.benefit_set, args.epsilon)
        plan = augmentation.plan_para_benef(ds, benefit, args.m, h)
    else:
        plan = augmentation.plan_para_bal(ds, args.target, args.batch, h)
    _emit(plan.dumps(), args.out)
    inputs = [args.dataset, args.hierarchy] + ([args.benefit_set] if args.benefit_set else [])
    _write_manifest(
        args, "plan-augment",
        {"strategy": args.strategy, "dataset": args.dataset, "n": args.n, "m": args.m,
         "target": args.target, "batch": args.batch},
        inputs, [args.out] if args.out else [],
    )
    return 0


def _paraphrase_provider(args):
    if args.mock:
        return services.MockParaphraseProvider()
    if not args.endpoint:
        raise ValidationError("--endpoint is required without --mock")
    cfg = services.ProviderConfig(
        endpoint=args.endpoint,
        model_name=args.model,
        temperature=args.temperature,
        max_retries=args.max_retries,
        rate_limit=args.rate_limit,
    )
    return services.ChatCompletionParaphraser(cfg, prompt_path=args.prompt)


def cmd_execute_plan(args) -> int:
    h = taxonomy.load_hierarchy(args.hierarchy)
    ds = dataset.load_dataset(args.dataset, h, name=args.dataset_name or args.dataset)
    plan = augmentation.load_plan(args.plan)
    provider = _paraphrase_provider(args)
    try:
        augmented = augmentation.execute_plan(plan, ds, provider, workers=args.workers)
    except PlanExecutionError as exc:
        partial_path = f"{args.out}.partial.json" if args.out else "plan-output.partial.json"
        if exc.partial is not None:
            dataset.save_dataset(exc.partial, partial_path)
        log.error("plan aborted: %s; partial output in %s", exc, partial_path)
        raise
    text = dataset.dumps_dataset(augmented)
    _emit(text, args.out)
    _write_manifest(
        args, "execute-plan",
        {"plan": args.plan, "dataset": args.dataset, "mock": args.mock,
         "workers": args.workers},
        [args.plan, args.dataset, args.hierarchy], [args.out] if args.out else [],
    )
    return 0


def cmd_translate_predict(args) -> int:
    h = taxonomy.load_hierarchy(args.hierarchy)
    ds = dataset.load_dataset(args.dataset, h, name=args.dataset_name or args.dataset)
    profile = thresholding.load_profile(args.profile)
    if args.mock:
        translator = services.MockTranslator()
    else:
        if not args.endpoint:
            raise ValidationError("--endpoint is required without --mock")
        cfg = services.ProviderConfig(
            endpoint=args.endpoint,
            model_name=args.model,
            max_retries=args.max_retries,
            rate_limit=args.rate_limit,
            api_key_env=services.TRANSLATE_KEY_ENV,
        )
        translator = services.HttpTranslator(cfg)
    # model inference lives outside the primary toolkit; predictions come
    # from the deterministic mock source (see README for the live recipe)
    producer = pipeline.mock_members_producer(
        h.leaf_order, n_members=args.members, seed=args.seed
    )
    result = pipeline.zero_shot_predict(
        ds, translator, producer, profile, h, target_lang=args.target_lang
    )
    _emit(pipeline.dumps_labels(result.labels), args.out)
    if result.failures:
        log.warning("%d instances failed translation", len(result.failures))
    _write_manifest(
        args, "translate-predict",
        {"dataset": args.dataset, "profile": args.profile, "mock": args.mock,
         "target_lang": args.target_lang, "members": args.members, "seed": args.seed},
        [args.dataset, args.profile, args.hierarchy],
        [args.out] if args.out else [],
        translation_failures=result.failures,
    )
    return 0


def cmd_stats(args) -> int:
    h = taxonomy.load_hierarchy(args.hierarchy)
    ds = dataset.load_dataset(args.dataset, h, name=args.dataset_name or args.dataset)
    stats = {
        "size": len(ds),
        "label_counts": dataset.label_counts(ds, h),
        "cardinality": dataset.cardinality_stats(ds),
    }
    _emit(json.dumps(stats, ensure_ascii=False, indent=1), args.out)
    _write_manifest(
        args, "stats", {"dataset": args.dataset, "hierarchy": args.hierarchy},
        [args.dataset, args.hierarchy], [args.out] if args.out else [],
    )
    return 0


def cmd_validate(args) -> int:
    h = taxonomy.load_hierarchy(args.hierarchy)
    problems: list[str] = []
    if args.dataset:
        ds = dataset.load_dataset(args.dataset, h=None)
        problems += dataset.dataset_problems(ds, h)
    if args.matrix:
        m = thresholding.load_matrix(args.matrix)
        if m.technique_order != h.leaf_order:
            problems.append(
                f"matrix {args.matrix}: technique_order does not match hierarchy leaf order"
            )
    if args.plan:
        plan = augmentation.load_plan(args.plan)
        unknown = set(plan.projected_counts) - set(h.leaf_order)
        if unknown:
            problems.append(f"plan {args.plan}: unknown techniques {sorted(unknown)}")
        for r in plan.requests:
            for lab in sorted(r.assigned_labels - h.leaves):
                problems.append(
                    f"plan {args.plan}: request for {r.source_id!r} has unknown label {lab!r}"
                )
    if args.profile:
        profile = thresholding.load_profile(args.profile)
        if set(profile.thresholds) != set(h.leaf_order):
            problems.append(
                f"profile {args.profile}: thresholds do not cover the leaf techniques exactly"
            )
    for p in problems:
        print(p, file=sys.stderr)
    if problems:
        return 1
    log.info("all inputs valid")
    return 0


def cmd_merge(args) -> int:
    h = taxonomy.load_hierarchy(args.hierarchy)
    current = dataset.load_dataset(args.current, h, name=args.current_name or "current")
    legacy = dataset.load_dataset(args.legacy, h=None, name=args.legacy_name or "legacy")
    split_map = (
        dataset.load_split_map(args.split_map, h)
        if args.split_map
        else dataset.bundled_split_map(h)
    )
    merged = dataset.merge_with_split(current, legacy, split_map, h)
    _emit(dataset.dumps_dataset(merged), args.out)
    inputs = [args.current, args.legacy, args.hierarchy] + (
        [args.split_map] if args.split_map else []
    )
    _write_manifest(
        args, "merge", {"current": args.current, "legacy": args.legacy},
        inputs, [args.out] if args.out else [],
    )
    return 0


def cmd_benefit(args) -> int:
    with open(args.after, "rb") as fh:
        after = scoring.ScoreReport.from_dict(json.load(fh))
    with open(args.before, "rb") as fh:
        before = scoring.ScoreReport.from_dict(json.load(fh))
    deltas = scoring.f1_delta(after, before)
    b = scoring.benefit_set(deltas, args.epsilon)
    obj = {"techniques": sorted(b.techniques), "epsilon": b.epsilon, "deltas": deltas}
    _emit(json.dumps(obj, ensure_ascii=False, indent=1, sort_keys=True), args.out)
    _write_manifest(
        args, "benefit", {"after": args.after, "before": args.before, "epsilon": args.epsilon},
        [args.after, args.before], [args.out] if args.out else [],
    )
    return 0


def _add_common(p) -> None:
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--manifest", help="manifest path (default: <out>.manifest.json)")
    p.add_argument("--quiet", action="store_true", help="suppress logs")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for randomized fixtures; planning ignores it")


def _add_provider_flags(p) -> None:
    p.add_argument("--mock", action="store_true", help="use the offline mock provider")
    p.add_argument("--endpoint", help="provider endpoint URL")
    p.add_argument("--model", default="gpt-3.5-turbo")
    p.add_argument("--temperature", type=float, default=0.7)
    p.add_argument("--max-retries", type=int, default=3)
    p.add_argument("--rate-limit", type=float, default=None, help="requests per second")


def build_parser() -> _Parser:
    parser = _Parser(prog="persuakit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="hierarchical P/R/F1 of predictions vs gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--hierarchy", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("tune-thresholds", help="grid-search per-technique thresholds")
    p.add_argument("--matrix", required=True, help="prediction matrix (logits accepted)")
    p.add_argument("--gold", required=True)
    p.add_argument("--hierarchy", required=True)
    p.add_argument("--lo", type=float, default=thresholding.DEFAULT_GRID_LO)
    p.add_argument("--hi", type=float, default=thresholding.DEFAULT_GRID_HI)
    p.add_argument("--step", type=float, default=thresholding.DEFAULT_GRID_STEP)
    _add_common(p)
    p.set_defaults(func=cmd_tune_thresholds)

    p = sub.add_parser("ensemble", help="mean-fuse prediction matrices")
    p.add_argument("--member", action="append", required=True,
                   help="member matrix file; repeat per member")
    _add_common(p)
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("predict", help="ensemble + thresholds -> label sets")
    p.add_argument("--member", action="append", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--hierarchy")
    _add_common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("plan-augment", help="build a paraphrase-augmentation plan")
    p.add_argument("--strategy", required=True, choices=augmentation.STRATEGIES)
    p.add_argument("--dataset", required=True)
    p.add_argument("--hierarchy", required=True)
    p.add_argument("--dataset-name", help="dataset name recorded in the plan")
    p.add_argument("--n", type=int, default=1, help="para_n: paraphrases per instance")
    p.add_argument("--benefit-set", help="para_benef: benefit-set file")
    p.add_argument("--m", type=int, default=10,
                   help="para_benef: paraphrases per benefiting technique")
    p.add_argument("--epsilon", type=float, default=0.03)
    p.add_argument("--target", type=int, default=1500,
                   help="para_bal: target instances per technique")
    p.add_argument("--batch", type=int, default=5, help="para_bal: paraphrases per request")
    _add_common(p)
    p.set_defaults(func=cmd_plan_augment)

    p = sub.add_parser("execute-plan", help="run a plan against a paraphrase provider")
    p.add_argument("--plan", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--hierarchy", required=True)
    p.add_argument("--dataset-name")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--prompt", help="override the bundled prompt-template file")
    _add_provider_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_execute_plan)

    p = sub.add_parser("translate-predict",
                       help="zero-shot: translate then ensemble-predict")
    p.add_argument("--dataset", required=True)
    p.add_argument("--hierarchy", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--dataset-name")
    p.add_argument("--target-lang", default="en")
    p.add_argument("--members", type=int, default=3,
                   help="mock prediction members to simulate")
    _add_provider_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_translate_predict)

    p = sub.add_parser("stats", help="label counts and cardinality fractions")
    p.add_argument("--dataset", required=True)
    p.add_argument("--hierarchy", required=True)
    p.add_argument("--dataset-name")
    _add_common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("validate", help="validate files against a hierarchy")
    p.add_argument("--hierarchy", required=True)
    p.add_argument("--dataset")
    p.add_argument("--matrix")
    p.add_argument("--plan")
    p.add_argument("--profile")
    _add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("merge", help="merge a legacy dataset with technique splitting")
    p.add_argument("--current", required=True)
    p.add_argument("--legacy", required=True)
    p.add_argument("--hierarchy", required=True)
    p.add_argument("--split-map", help="conversion map (default: bundled fixture)")
    p.add_argument("--current-name")
    p.add_argument("--legacy-name")
    _add_common(p)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("benefit", help="benefit set from two score reports")
    p.add_argument("--after", required=True, help="score report on augmented training")
    p.add_argument("--before", required=True, help="baseline score report")
    p.add_argument("--epsilon", type=float, default=0.03)
    _add_common(p)
    p.set_defaults(func=cmd_benefit)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.ERROR if args.quiet else logging.INFO,
        format="%(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"persuakit: {exc}", file=sys.stderr)
        return 1
    except ProviderError as exc:
        print(f"persuakit: provider error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"persuakit: i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
