"""Command-line interface: ingest, classify, train, evaluate, agree, validate.

Exit codes: 0 on success, 1 when validation finds violations, 2 for usage
and parse errors. Report documents carry a generated_at timestamp unless
--deterministic is given, so reruns can be byte-identical.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from contextlib import contextmanager
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .evaluation import (
    LAYERS,
    NoAlignedItems,
    confusion,
    disagreement_report,
    pairwise_agreement,
    score,
)
from .features import ExtractorConfig, extract_features, load_extractor_config
from .ingestion import (
    Dialogue,
    parse_dialogue_jsonl,
    parse_eaf,
    parse_tsv_transcript,
    read_annotations,
    write_annotations,
    write_dialogues,
)
from .lexicon import load_lexicon
from .model import (
    QUESTION_TYPE_ORDER,
    AnswerAnnotation,
    QuestionAnnotation,
    QuestionType,
    Utterance,
    validate_corpus,
)
from .rules import RuleConfig, load_wh_feature_map, map_wh_feature, rule_classify
from .text import tokenize
from .tree import (
    LabeledInstance,
    TrainConfig,
    load_model,
    majority_baseline,
    predict,
    save_model,
    train_tree,
)

log = logging.getLogger("qapkit")


class MissingModel(ValueError):
    """Tree mode invoked without a model file."""


LEXICON_NAMES = ("wh", "aux", "tag", "cliche")


def _utc_stamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _write_json(doc: dict, path: Optional[str]) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


@contextmanager
def _open_out(path: Optional[str]):
    if path:
        with open(path, "w", encoding="utf-8") as f:
            yield f
    else:
        yield sys.stdout


def _load_corpus(paths: Sequence[str]) -> list[Dialogue]:
    dialogues: list[Dialogue] = []
    seen: set[str] = set()
    for path in paths:
        with open(path, encoding="utf-8") as f:
            for dialogue in parse_dialogue_jsonl(f):
                if dialogue.dialogue_id in seen:
                    raise ValueError(f"dialogue {dialogue.dialogue_id!r} appears in more than one input")
                seen.add(dialogue.dialogue_id)
                dialogues.append(dialogue)
    dialogues.sort(key=lambda d: d.dialogue_id)
    return dialogues


def _read_annotation_files(paths: Sequence[str]) -> list:
    records = []
    for path in paths:
        with open(path, encoding="utf-8") as f:
            try:
                records.extend(read_annotations(f))
            except ValueError as exc:
                raise ValueError(f"{path}: {exc}") from exc
    return records


def _extraction_setup(args) -> tuple[ExtractorConfig, RuleConfig, Optional[dict]]:
    if args.extractor_config:
        ext_cfg, cap = load_extractor_config(args.extractor_config)
    else:
        ext_cfg, cap = ExtractorConfig(), None

    overrides = {}
    for item in args.lexicon:
        name, sep, path = item.partition("=")
        if not sep or not name or not path:
            raise ValueError(f"--lexicon expects NAME=PATH, got {item!r}")
        if name not in LEXICON_NAMES:
            raise ValueError(f"unknown lexicon name {name!r} (use one of {', '.join(LEXICON_NAMES)})")
        overrides[f"{name}_lexicon"] = load_lexicon(path, name=name)
    if args.threshold is not None:
        overrides["similarity_threshold"] = args.threshold
    if overrides:
        ext_cfg = replace(ext_cfg, **overrides)

    if getattr(args, "cliche_length_cap", None) is not None:
        cap = args.cliche_length_cap
    rule_cfg = RuleConfig(cliche_length_cap=cap) if cap is not None else RuleConfig()

    wh_map = None
    if args.wh_map:
        wh_map = load_wh_feature_map(args.wh_map)
        single = {e[0] for e in ext_cfg.wh_lexicon.entries if len(e) == 1}
        missing = sorted(single - set(wh_map))
        if missing:
            log.warning("wh-feature map misses wh tokens: %s", ", ".join(missing))
    return ext_cfg, rule_cfg, wh_map


def cmd_ingest(args) -> int:
    path = Path(args.input)
    if args.format == "eaf":
        dialogues = parse_eaf(
            path,
            dialogue_id=args.dialogue_id or path.stem,
            language=args.language,
            interruption_marker=args.interruption_marker,
        )
    else:
        with open(path, encoding="utf-8") as f:
            if args.format == "tsv":
                dialogues = parse_tsv_transcript(
                    f,
                    dialogue_id=args.dialogue_id or path.stem,
                    language=args.language,
                    interruption_marker=args.interruption_marker,
                )
            else:
                dialogues = parse_dialogue_jsonl(f)
    with _open_out(args.output) as out:
        write_dialogues(dialogues, out)
    for dialogue in dialogues:
        log.info("dialogue %s: %d utterances", dialogue.dialogue_id, len(dialogue.utterances))
    return 0


def _question_targets(
    dialogues: Sequence[Dialogue], question_spans: Optional[dict]
) -> list[tuple[Utterance, tuple[int, int], Optional[Utterance]]]:
    """Pick the (utterance, span, previous) triples to classify."""
    targets = []
    for dialogue in dialogues:
        for i, utt in enumerate(dialogue.utterances):
            previous = dialogue.utterances[i - 1] if i > 0 else None
            if question_spans is not None:
                for span in question_spans.get((utt.dialogue_id, utt.turn_index), ()):
                    if span[1] > len(utt.text):
                        raise ValueError(
                            f"question span {span} exceeds utterance "
                            f"{utt.dialogue_id}:{utt.turn_index} (length {len(utt.text)})"
                        )
                    targets.append((utt, span, previous))
            elif utt.text.rstrip().endswith("?"):
                targets.append((utt, (0, len(utt.text)), previous))
    return targets


def cmd_classify(args) -> int:
    ext_cfg, rule_cfg, wh_map = _extraction_setup(args)
    dialogues = _load_corpus([args.input])
    if args.language:
        dialogues = [d for d in dialogues if d.language == args.language]

    model = None
    if args.mode == "tree":
        if not args.model:
            raise MissingModel("tree mode requires --model")
        with open(args.model, encoding="utf-8") as f:
            model = load_model(f)

    question_spans = None
    if args.questions:
        question_spans = {}
        for rec in _read_annotation_files([args.questions]):
            if isinstance(rec, QuestionAnnotation):
                question_spans.setdefault((rec.dialogue_id, rec.turn_index), set()).add(rec.span)
        question_spans = {key: sorted(spans) for key, spans in question_spans.items()}

    annotator = args.annotator_id or args.mode
    records = []
    for utt, span, previous in _question_targets(dialogues, question_spans):
        fv = extract_features(utt, span, previous, ext_cfg)
        if model is not None:
            q_type = predict(model, fv)
        else:
            q_type = rule_classify(fv, rule_cfg)
        feature = None
        if q_type is QuestionType.WH:
            feature = map_wh_feature(tokenize(utt.text[span[0] : span[1]]), wh_map)
        records.append(
            QuestionAnnotation(utt.dialogue_id, utt.turn_index, span, q_type, feature, annotator)
        )

    with _open_out(args.output) as out:
        write_annotations(records, out)
    log.info("classified %d questions in %d dialogues", len(records), len(dialogues))
    return 0


def cmd_train(args) -> int:
    ext_cfg, _, _ = _extraction_setup(args)
    dialogues = _load_corpus(args.input)
    records = _read_annotation_files(args.annotations)
    questions = [r for r in records if isinstance(r, QuestionAnnotation)]

    if args.limit_utterances is not None:
        total = sum(len(d.utterances) for d in dialogues)
        if args.limit_utterances > total:
            raise ValueError(f"--limit-utterances {args.limit_utterances} exceeds corpus size {total}")
        allowed: set[tuple[str, int]] = set()
        budget = args.limit_utterances
        for dialogue in dialogues:
            for utt in dialogue.utterances:
                if budget == 0:
                    break
                allowed.add((utt.dialogue_id, utt.turn_index))
                budget -= 1
        questions = [q for q in questions if (q.dialogue_id, q.turn_index) in allowed]

    index = {(u.dialogue_id, u.turn_index): u for d in dialogues for u in d.utterances}
    instances = []
    for q in sorted(questions, key=lambda q: (q.dialogue_id, q.turn_index, q.span)):
        utt = index.get((q.dialogue_id, q.turn_index))
        if utt is None:
            raise ValueError(f"annotation {q.ref} has no matching utterance")
        if q.span[1] > len(utt.text):
            raise ValueError(f"annotation {q.ref}: span exceeds utterance length {len(utt.text)}")
        previous = index.get((q.dialogue_id, q.turn_index - 1))
        fv = extract_features(utt, q.span, previous, ext_cfg)
        instances.append(LabeledInstance(fv, q.q_type))

    if args.baseline:
        model = majority_baseline(inst.label for inst in instances)
    else:
        model = train_tree(
            instances, TrainConfig(max_depth=args.max_depth, min_samples_leaf=args.min_samples_leaf)
        )
    with open(args.output, "w", encoding="utf-8") as f:
        save_model(model, f)

    correct = sum(1 for inst in instances if predict(model, inst.fv) == inst.label)
    distribution: dict[str, int] = {}
    for inst in instances:
        distribution[str(inst.label)] = distribution.get(str(inst.label), 0) + 1
    summary = {
        "instances": len(instances),
        "training_accuracy": correct / len(instances),
        "depth": model.depth(),
        "label_distribution": distribution,
        "model": str(args.output),
    }
    if not args.deterministic:
        summary["generated_at"] = _utc_stamp()
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def _question_labels(path: str) -> dict[tuple, str]:
    labels: dict[tuple, str] = {}
    for rec in _read_annotation_files([path]):
        if isinstance(rec, QuestionAnnotation):
            labels.setdefault((rec.dialogue_id, rec.turn_index, rec.span), rec.q_type.value)
    return labels


def cmd_evaluate(args) -> int:
    gold = _question_labels(args.gold)
    pred = _question_labels(args.pred)
    keys = sorted(set(gold) & set(pred))
    if not keys:
        raise NoAlignedItems("gold and prediction files share no question annotations")
    order = [q.value for q in QUESTION_TYPE_ORDER]
    matrix = confusion([gold[k] for k in keys], [pred[k] for k in keys], labels=order)
    report = score(matrix)

    doc = report.to_json_dict()
    doc["n_items"] = len(keys)
    doc["confusion_text"] = matrix.to_text()
    if not args.deterministic:
        doc["generated_at"] = _utc_stamp()
    _write_json(doc, args.output)
    if args.output:
        print(matrix.to_text())
        print(f"accuracy {report.accuracy:.4f}  macro_f1 {report.macro_f1:.4f}  weighted_f1 {report.weighted_f1:.4f}")
    return 0


def cmd_agree(args) -> int:
    records = _read_annotation_files(args.input)
    by_annotator: dict[str, list] = {}
    for rec in records:
        by_annotator.setdefault(rec.annotator_id, []).append(rec)

    layers = LAYERS if args.layer == "all" else (args.layer,)
    layer_reports: dict[str, list[dict]] = {}
    for layer in layers:
        try:
            reports = pairwise_agreement(by_annotator, layer)
        except NoAlignedItems as exc:
            if args.layer != "all":
                raise
            log.warning("layer %s skipped: %s", layer, exc)
            continue
        layer_reports[layer] = [r.to_json_dict() for r in reports]
        for r in reports:
            who = "mean" if r.is_mean else "~".join(r.annotators)
            log.info(
                "%s %s: observed %.4f kappa %.4f (n=%d)", layer, who, r.observed, r.kappa, r.n_items
            )
    if not layer_reports:
        raise NoAlignedItems("no layer had items aligned across annotators")

    doc = {
        "layers": layer_reports,
        "disagreements": [r.to_json_dict() for r in disagreement_report(by_annotator)],
    }
    if not args.deterministic:
        doc["generated_at"] = _utc_stamp()
    _write_json(doc, args.output)
    return 0


def cmd_validate(args) -> int:
    records = _read_annotation_files(args.input)
    questions = [r for r in records if isinstance(r, QuestionAnnotation)]
    answers = [r for r in records if isinstance(r, AnswerAnnotation)]
    violations = validate_corpus(questions, answers)

    doc = {
        "count": len(violations),
        "violations": [
            {"kind": v.kind.value, "item": v.item, "message": v.message} for v in violations
        ],
    }
    if not args.deterministic:
        doc["generated_at"] = _utc_stamp()
    _write_json(doc, args.output)
    log.info("%d questions, %d answers, %d violations", len(questions), len(answers), len(violations))
    return 1 if violations else 0


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--output", help="output path (default: stdout)")
    parser.add_argument(
        "--deterministic",
        action="store_true",
        help="omit the generated_at timestamp so reruns are byte-identical",
    )


def _add_extractor_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--lexicon",
        action="append",
        default=[],
        metavar="NAME=PATH",
        help="override a built-in lexicon (names: wh, aux, tag, cliche); repeatable",
    )
    parser.add_argument(
        "--threshold",
        type=float,
        help="token-overlap threshold for last_utt_similar (default 0.5)",
    )
    parser.add_argument("--extractor-config", help="JSON file with lexicons and thresholds")
    parser.add_argument("--wh-map", help="two-column file mapping wh-words to feature tags")
    parser.add_argument(
        "--cliche-length-cap",
        type=int,
        help="maximum token length still counting as short (default 5)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qapkit",
        description="Annotate, classify, and score question-answer pairs in dialogue transcripts.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="normalize a transcript into canonical dialogue JSONL")
    p.add_argument("--input", required=True, help="transcript file")
    p.add_argument("--format", choices=("jsonl", "tsv", "eaf"), default="jsonl")
    p.add_argument("--dialogue-id", help="dialogue id for single-dialogue formats (default: file stem)")
    p.add_argument("--language", default="en", help="language code attached to ingested dialogues")
    p.add_argument("--interruption-marker", default="--", help="trailing marker flagging a cut-off turn")
    _add_common_flags(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("classify", help="annotate question types over a canonical corpus")
    p.add_argument("--input", required=True, help="canonical dialogue JSONL")
    p.add_argument("--mode", choices=("rule", "tree"), default="rule")
    p.add_argument("--model", help="model file (required for tree mode)")
    p.add_argument(
        "--questions",
        help="annotation JSONL whose question spans override ?-based detection",
    )
    p.add_argument("--language", help="only classify dialogues with this language code")
    p.add_argument("--annotator-id", help="annotator id written to output records (default: mode name)")
    _add_extractor_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("train", help="fit a decision tree (or majority baseline) from annotations")
    p.add_argument("--input", required=True, nargs="+", help="canonical dialogue JSONL file(s)")
    p.add_argument("--annotations", required=True, nargs="+", help="gold annotation JSONL file(s)")
    p.add_argument("--max-depth", type=int, help="maximum tree depth (default: unlimited)")
    p.add_argument("--min-samples-leaf", type=int, default=1)
    p.add_argument(
        "--limit-utterances",
        type=int,
        help="train only on annotations within the first N utterances of the corpus",
    )
    p.add_argument("--baseline", action="store_true", help="fit the majority-class baseline instead")
    _add_extractor_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score predicted question annotations against gold")
    p.add_argument("--gold", required=True, help="gold annotation JSONL")
    p.add_argument("--pred", required=True, help="predicted annotation JSONL")
    _add_common_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("agree", help="inter-annotator agreement and disagreement report")
    p.add_argument("--input", required=True, nargs="+", help="annotation JSONL file(s), all annotators")
    p.add_argument("--layer", choices=(*LAYERS, "all"), default="all")
    _add_common_flags(p)
    p.set_defaults(func=cmd_agree)

    p = sub.add_parser("validate", help="check annotation files against the compatibility constraints")
    p.add_argument("--input", required=True, nargs="+", help="annotation JSONL file(s)")
    _add_common_flags(p)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if not logging.getLogger().handlers:
        logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
