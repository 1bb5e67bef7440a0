"""Command-line front end: parse sentences or corpora, print trees, role
structures, meanings, traces and per-sentence metrics.

Exit codes: 0 when every sentence reached a complete interpretation,
2 when at least one ended in fragments, 1 for usage, knowledge-base or
unknown-word errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .kb import KbError, KnowledgeBase, UnknownWordError, load_default_kb, load_kb_dir
from .engine import (COMPLETE, EngineConfig, Interpretation, process_sentence,
                     tokenize)
from . import oracle as oracle_mod

METRICS_HEADER = ("sentence\ttokens\tstatus\trecoveries\tretained_peak\t"
                  "node_constructions\tattachments\tdetachments\t"
                  "events_per_word\terror")


# -- rendering -------------------------------------------------------------


def render_tree(state, node_id: int, indent: int = 0) -> str:
    node = state.nodes[node_id]
    pad = "  " * indent
    if node.word is not None:
        return f"{pad}({node.category} {node.word})"
    if not node.children:
        return f"{pad}({node.category})"
    if all(state.nodes[c].word is not None for c in node.children):
        inner = " ".join(f"({state.nodes[c].category} {state.nodes[c].word})"
                         for c in node.children)
        return f"{pad}({node.category} {inner})"
    lines = [f"{pad}({node.category}"]
    for child in node.children:
        lines.append(render_tree(state, child, indent + 1))
    lines[-1] += ")"
    return "\n".join(lines)


def render_role_tree(state, role_id: int, indent: int = 0) -> str:
    role = state.role_nodes[role_id]
    pad = "  " * indent
    tag = state.meanings[role.filler].tag if role.filler is not None else "-"
    live = [c for c in role.children if not state.role_nodes[c].dead]
    if not live:
        return f"{pad}({role.label}:{tag})"
    lines = [f"{pad}({role.label}:{tag}"]
    for child in live:
        lines.append(render_role_tree(state, child, indent + 1))
    lines[-1] += ")"
    return "\n".join(lines)


def render_meanings(state) -> list[str]:
    lines = []
    for mid in sorted(state.meanings):
        instance = state.meanings[mid]
        parts = [f"{instance.tag}:{instance.concept}"]
        for role, filler_mid in instance.bindings.items():
            filler = state.meanings[filler_mid]
            parts.append(f"{role}={filler.tag}:{filler.concept}")
        lines.append(" ".join(parts))
    return lines


def render_interpretation(result: Interpretation, fmt: str) -> list[str]:
    state = result.state
    out = [f"status: {result.status}"]
    sections = ("tree", "roles", "meaning") if fmt == "all" else (fmt,)
    for section in sections:
        if fmt == "all":
            out.append(f"== {section} ==")
        if section == "tree":
            for root in result.parse_roots:
                out.append(render_tree(state, root))
        elif section == "roles":
            for root in result.role_roots:
                out.append(render_role_tree(state, root))
        else:
            out.extend(render_meanings(state))
    return out


def render_oracle_tree(node, indent: int = 0) -> str:
    pad = "  " * indent
    if node.word is not None:
        return f"{pad}({node.category} {node.word})"
    if all(c.word is not None for c in node.children):
        inner = " ".join(f"({c.category} {c.word})" for c in node.children)
        return f"{pad}({node.category} {inner})"
    lines = [f"{pad}({node.category}"]
    for child in node.children:
        lines.append(render_oracle_tree(child, indent + 1))
    lines[-1] += ")"
    return "\n".join(lines)


def events_per_word(trace: tuple[str, ...], n_tokens: int) -> list[int]:
    """Engine events per word, counted between ACCESS boundaries."""
    counts: list[int] = []
    for line in trace:
        if line.startswith("ACCESS "):
            counts.append(1)
        elif counts:
            counts[-1] += 1
    while len(counts) < n_tokens:
        counts.append(0)
    return counts


# -- commands ---------------------------------------------------------------


def _load_kb(args) -> KnowledgeBase:
    if args.kb:
        return load_kb_dir(args.kb)
    return load_default_kb()


def _config(args) -> EngineConfig:
    return EngineConfig(capacity=args.capacity,
                        lesion=frozenset(args.lesion or ()),
                        unknown_as_noun=args.unknown_as_noun)


def cmd_parse(args) -> int:
    kb = _load_kb(args)
    tokens = tokenize(args.sentence)
    if not tokens:
        print("error: empty sentence", file=sys.stderr)
        return 1
    result = process_sentence(tokens, kb, _config(args))
    lines = []
    if args.trace:
        lines.extend(result.trace)
    lines.extend(render_interpretation(result, args.format))
    print("\n".join(lines))
    return 0 if result.status == COMPLETE else 2


def cmd_corpus(args) -> int:
    kb = _load_kb(args)
    config = _config(args)
    try:
        text = Path(args.path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    rows = [METRICS_HEADER]
    worst = 0
    for line in text.splitlines():
        sentence = line.strip()
        if not sentence or sentence.startswith("#"):
            continue
        tokens = tokenize(sentence)
        if not tokens:
            continue
        try:
            result = process_sentence(tokens, kb, config)
        except UnknownWordError as exc:
            rows.append(f"{sentence}\t{len(tokens)}\terror\t\t\t\t\t\t\t{exc}")
            worst = max(worst, 2)
            continue
        counters = result.counters
        events = ",".join(str(c) for c in events_per_word(result.trace, len(tokens)))
        rows.append("\t".join([
            sentence, str(len(tokens)), result.status,
            str(counters.recoveries), str(counters.retained_peak),
            str(counters.node_constructions), str(counters.attachments),
            str(counters.detachments), events, ""]))
        if result.status != COMPLETE:
            worst = max(worst, 2)
    print("\n".join(rows))
    return worst


def cmd_oracle(args) -> int:
    kb = _load_kb(args)
    tokens = tokenize(args.sentence)
    if not tokens:
        print("error: empty sentence", file=sys.stderr)
        return 1
    parses = oracle_mod.enumerate_parses(tokens, kb)
    lines = [f"parses: {len(parses)}"]
    for index, parse in enumerate(parses, start=1):
        flag = "clean" if oracle_mod.semantically_clean(parse) else "violations"
        lines.append(f"-- parse {index} {flag} --")
        lines.append(render_oracle_tree(parse.root))
        concept_of = {inst.tag: inst.concept for inst in parse.instances}
        for inst in parse.instances:
            parts = [f"{inst.tag}:{inst.concept}"]
            for role, filler_tag in inst.bindings:
                parts.append(f"{role}={filler_tag}:{concept_of[filler_tag]}")
            lines.append(" ".join(parts))
    print("\n".join(lines))
    return 0 if parses else 2


def cmd_check_kb(args) -> int:
    kb = _load_kb(args)
    print(f"kb ok: {len(kb.words)} words, {len(kb.categories)} categories, "
          f"{len(kb.concepts)} concepts, {len(kb.roles)} roles")
    return 0


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--kb", metavar="DIR", default=None,
                        help="directory with lexicon.sexp, grammar.sexp, "
                             "concepts.sexp (default: bundled)")
    shared.add_argument("--lesion", action="append",
                        choices=["syntax", "semantics", "link"], default=None,
                        help="disable a knowledge source or the link "
                             "between them (repeatable)")
    shared.add_argument("--capacity", type=int, default=None, metavar="N",
                        help="retention store capacity (default unlimited)")
    shared.add_argument("--unknown-as-noun", action="store_true",
                        help="treat unknown words as generic common nouns")

    parser = argparse.ArgumentParser(
        prog="parsemend",
        description="incremental sentence understanding with tree repair")
    commands = parser.add_subparsers(dest="command", required=True)

    p_parse = commands.add_parser("parse", parents=[shared],
                                  help="interpret one sentence")
    p_parse.add_argument("sentence")
    p_parse.add_argument("--trace", action="store_true",
                         help="print engine events before the structures")
    p_parse.add_argument("--format", choices=["tree", "roles", "meaning", "all"],
                         default="all")
    p_parse.set_defaults(func=cmd_parse)

    p_corpus = commands.add_parser("corpus", parents=[shared],
                                   help="per-sentence metrics for a corpus file")
    p_corpus.add_argument("path")
    p_corpus.set_defaults(func=cmd_corpus)

    p_oracle = commands.add_parser("oracle", parents=[shared],
                                   help="exhaustively enumerate complete parses")
    p_oracle.add_argument("sentence")
    p_oracle.set_defaults(func=cmd_oracle)

    p_check = commands.add_parser("check-kb", parents=[shared],
                                  help="load and validate the knowledge base")
    p_check.set_defaults(func=cmd_check_kb)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        return args.func(args)
    except (KbError, UnknownWordError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))
