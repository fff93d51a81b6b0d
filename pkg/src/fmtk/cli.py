"""Batch command-line front-end.

Every command reads text inputs, runs the corresponding library operation,
re-verifies its postconditions, and emits a deterministic report: a short
human-readable part, then a stable ``key: value`` block. Identical invocations
produce byte-identical reports. Exit codes: 0 success, 1 bad input, 2 guard
exceeded, 3 verification failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

from . import algebra, equiv, folog, shrink, translate, wqo
from .errors import (
    FormulaSyntaxError,
    GuardExceeded,
    StructureFormatError,
    VerificationFailed,
)
from .structures import (
    MarkedStructure,
    Structure,
    parse_structures,
    serialize_structure,
)

DEFAULT_SEED = 20240901


@dataclass
class RunConfig:
    command: str
    m: int | None = None
    k: int | None = None
    seed: int = DEFAULT_SEED
    max_size: int = 64
    out: str | None = None
    extras: dict[str, str] = field(default_factory=dict)

    def header_lines(self) -> list[str]:
        lines = [f"command: {self.command}"]
        for key in ("m", "k"):
            value = getattr(self, key)
            if value is not None:
                lines.append(f"{key}: {value}")
        lines.append(f"seed: {self.seed}")
        lines.append(f"max-size: {self.max_size}")
        for key in sorted(self.extras):
            lines.append(f"{key}: {self.extras[key]}")
        return lines


class Report:
    def __init__(self, config: RunConfig):
        self.config = config
        self.human: list[str] = []
        self.keys: list[tuple[str, str]] = []

    def say(self, line: str):
        self.human.append(line)

    def put(self, key: str, value):
        self.keys.append((key, str(value)))

    def render(self) -> str:
        lines = ["fmtk report"]
        lines.extend(self.config.header_lines())
        lines.append("")
        lines.extend(self.human)
        lines.append("---")
        lines.extend(f"{k}: {v}" for k, v in self.keys)
        return "\n".join(lines) + "\n"


def _emit(report: Report, out: str | None):
    text = report.render()
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_structures(path: str) -> dict[str, Structure]:
    with open(path) as fh:
        return parse_structures(fh.read())


def _pick(named: dict[str, Structure], name: str | None, what: str) -> tuple[str, Structure]:
    if name is None:
        first = next(iter(named))
        return first, named[first]
    if name not in named:
        raise StructureFormatError(f"no structure named {name!r} in {what}")
    return name, named[name]


def _parse_marks(text: str | None) -> list[int]:
    if not text:
        return []
    return [int(x) for x in text.replace(",", " ").split()]


def _check_size(A: Structure, config: RunConfig):
    if A.size > config.max_size:
        raise GuardExceeded(
            f"structure of size {A.size} exceeds --max-size {config.max_size}"
        )


GEN_CLASSES = ("linorder", "path", "cycle", "hn", "gn", "grid")


def _sample_from_spec(spec: str) -> tuple[translate.ClassSample, str]:
    """``cycles:3:8``-style ranges over generators, or ``file:PATH``."""
    if spec.startswith("file:"):
        named = _load_structures(spec[len("file:"):])
        return translate.ClassSample(list(named.values())), spec
    parts = spec.split(":")
    if len(parts) != 3:
        raise StructureFormatError(
            "sample spec must be CLASS:LO:HI (cycles, paths, linorders) or file:PATH"
        )
    kind, lo, hi = parts[0], int(parts[1]), int(parts[2])
    makers = {
        "cycles": (wqo.make_cycle, translate.is_cycle_graph),
        "paths": (wqo.make_path, translate.is_path_graph),
        "linorders": (wqo.make_linear_order, translate.is_linear_order),
    }
    if kind not in makers:
        raise StructureFormatError(f"unknown sample class {kind!r}")
    maker, member = makers[kind]
    return (
        translate.ClassSample([maker(n) for n in range(lo, hi + 1)], membership=member),
        spec,
    )


# ---------------------------------------------------------------------------
# commands


def cmd_equiv(args, config: RunConfig) -> int:
    name_a, A = _pick(_load_structures(args.file_a), args.name_a, args.file_a)
    name_b, B = _pick(_load_structures(args.file_b), args.name_b, args.file_b)
    _check_size(A, config)
    _check_size(B, config)
    config.extras.update({"file-a": args.file_a, "file-b": args.file_b,
                          "name-a": name_a, "name-b": name_b})
    verdict = equiv.m_equivalent(A, B, config.m)
    report = Report(config)
    word = "equivalent" if verdict else "distinguishable"
    report.say(
        f"The structures {name_a} ({A.size} elements) and {name_b} ({B.size} elements)"
    )
    report.say(f"are {word} at quantifier rank {config.m}.")
    report.put("verdict", word)
    report.put("fingerprint-a", equiv.class_fingerprint(A, (), config.m))
    report.put("fingerprint-b", equiv.class_fingerprint(B, (), config.m))
    _emit(report, config.out)
    return 0


def cmd_shrink(args, config: RunConfig) -> int:
    with open(args.file) as fh:
        trees = shrink.parse_trees(fh.read())
    if args.name is None:
        name = next(iter(trees))
    elif args.name in trees:
        name = args.name
    else:
        raise StructureFormatError(f"no tree named {args.name!r} in {args.file}")
    tree, file_marks = trees[name]
    marks = _parse_marks(args.marks) if args.marks else list(file_marks)
    if tree.size > config.max_size:
        raise GuardExceeded(f"tree of size {tree.size} exceeds --max-size {config.max_size}")
    config.extras.update({"file": args.file, "name": name,
                          "marks": " ".join(map(str, sorted(marks))) or "-"})
    out, rep = shrink.shrink_tree(tree, marks, config.m, config.k)
    report = Report(config)
    report.say(f"Shrunk tree {name} from {rep.input_size} to {rep.output_size} nodes.")
    for phase, before, after in rep.phases:
        report.say(f"  {phase}: {before} -> {after}")
    report.say("All postconditions re-verified: "
               + ", ".join(sorted(k for k, v in rep.verdicts.items() if v)))
    report.put("input-size", rep.input_size)
    report.put("output-size", rep.output_size)
    for key in sorted(rep.verdicts):
        report.put(f"verified-{key.replace('_', '-')}", rep.verdicts[key])
    report.put("tree", "")
    _emit(report, config.out)
    text = shrink.serialize_tree(name + "_shrunk", out, sorted(set(marks)))
    if config.out:
        with open(config.out, "a") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_translate(args, config: RunConfig) -> int:
    sample, spec = _sample_from_spec(args.sample)
    vocab = sample.structures[0].vocab
    phi = folog.parse(vocab, args.formula)
    config.extras.update({"sample": spec, "formula": args.formula, "p": args.p})
    report = Report(config)
    if args.p == "auto":
        result = translate.translate_auto(phi, config.k, sample, max_p=args.max_p)
        ps, p_used, verified = result.sentence, result.p, result.verified
    else:
        ps = translate.translate_to_exists_forall(phi, config.k, int(args.p))
        p_used = int(args.p)
        verified = not translate.sample_agreement(phi, ps, sample)
    sentence = folog.print_formula(folog.to_formula(ps))
    report.say(f"Translated over sample {spec} with {config.k} existentials, {p_used} universals.")
    report.say(f"Sentence: {sentence}")
    report.say(
        "The translation agrees with the input on every sample structure."
        if verified
        else "DISAGREEMENT: the translation differs from the input on the sample."
    )
    report.put("p-used", p_used)
    report.put("sentence", sentence)
    report.put("sample-agreement", verified)
    _emit(report, config.out)
    return 0 if verified else 3


def cmd_cores(args, config: RunConfig) -> int:
    named = _load_structures(args.file)
    member = translate.CLASS_TESTS[args.klass]
    sample = translate.ClassSample(list(named.values()), membership=member)
    vocab = sample.structures[0].vocab
    phi = folog.parse(vocab, args.formula)
    config.extras.update({"file": args.file, "formula": args.formula, "class": args.klass})
    ok, certs = translate.psc_check(phi, config.k, sample)
    report = Report(config)
    names = {id(A): n for n, A in named.items()}
    report.say(f"Checked {len(certs)} model(s) of the sentence for cores of size <= {config.k}.")
    for cert in certs:
        sets = " ".join("{" + ",".join(map(str, c)) + "}" for c in cert.cores) or "none"
        report.say(f"  {names[id(cert.structure)]}: cores {sets}")
        report.put(f"cores-{names[id(cert.structure)]}", sets)
    report.put("models-checked", len(certs))
    report.put("every-model-has-core", ok)
    _emit(report, config.out)
    return 0


def cmd_wqo_scan(args, config: RunConfig) -> int:
    named = _load_structures(args.file)
    items = []
    for name, A in named.items():
        consts = sorted(A.vocab.constants)
        marks = tuple(A.constant_interp[c] for c in consts)
        if len(marks) != config.k:
            raise StructureFormatError(
                f"{name} carries {len(marks)} marks (constants); expected k = {config.k}"
            )
        items.append((_strip_constants(A), marks))
    config.extras.update({"file": args.file, "items": str(len(items))})
    pair = wqo.linear_order_embedding_pair(items, config.k)
    report = Report(config)
    if pair:
        report.say(f"Item {pair[0]} embeds into item {pair[1]} (marks onto marks).")
        report.put("pair", f"{pair[0]} {pair[1]}")
    else:
        report.say("No embedding pair: the sequence is an antichain.")
        report.put("pair", "none")
    _emit(report, config.out)
    return 0


def _strip_constants(A: Structure) -> Structure:
    from .structures import Vocabulary

    vocab = Vocabulary(A.vocab.predicates, ())
    return Structure(vocab, A.size, A.relations)


def cmd_algebra_eval(args, config: RunConfig) -> int:
    named = _load_structures(args.structs)
    expr_text = _expression_text(args)
    tree = algebra.parse_expression(expr_text, named)
    out = algebra.eval_expression_tree(tree)
    _check_size(out, config)
    config.extras.update({"structs": args.structs, "expr": expr_text})
    report = Report(config)
    report.say(f"Evaluated the expression to a structure with {out.size} elements.")
    report.put("output-size", out.size)
    report.put("structure", "")
    _emit(report, config.out)
    text = serialize_structure("result", out)
    if config.out:
        with open(config.out, "a") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_algebra_shrink(args, config: RunConfig) -> int:
    named = _load_structures(args.structs)
    expr_text = _expression_text(args)
    tree = algebra.parse_expression(expr_text, named)
    marks = _parse_marks(args.marks)
    shrinker = (
        algebra.identity_leaf_shrinker
        if args.leaf_shrinker == "identity"
        else algebra.exhaustive_leaf_shrinker(config.max_size)
    )
    config.extras.update({
        "structs": args.structs, "expr": expr_text,
        "marks": " ".join(map(str, sorted(marks))) or "-",
        "leaf-shrinker": args.leaf_shrinker,
    })
    out, rep = algebra.shrink_algebraic(tree, marks, config.m, config.k, shrinker)
    report = Report(config)
    report.say(f"Shrunk the evaluation from {rep.input_size} to {rep.output_size} elements.")
    for phase, before, after in rep.phases:
        report.say(f"  {phase}: {before} -> {after}")
    report.say(f"Certificate expression: {rep.certificate}")
    report.put("input-size", rep.input_size)
    report.put("output-size", rep.output_size)
    for key in sorted(rep.verdicts):
        report.put(f"verified-{key.replace('_', '-')}", rep.verdicts[key])
    report.put("certificate", rep.certificate)
    report.put("structure", "")
    _emit(report, config.out)
    text = serialize_structure("result", out)
    if config.out:
        with open(config.out, "a") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _expression_text(args) -> str:
    if args.expr:
        return args.expr
    with open(args.expr_file) as fh:
        return fh.read().strip()


def cmd_gen(args, config: RunConfig) -> int:
    marks = _parse_marks(args.marks)
    name = args.name
    if args.klass == "linorder":
        A = wqo.make_linear_order(args.n)
    elif args.klass == "path":
        A = wqo.make_path(args.n)
    elif args.klass == "cycle":
        A = wqo.make_cycle(args.n)
    elif args.klass == "hn":
        A = wqo.make_Hn(args.n, override_guard=args.force)
    elif args.klass == "gn":
        A = wqo.make_Gn(args.n, override_guard=args.force)
    elif args.klass == "grid":
        dims = [int(d) for d in args.dims.split("x")]
        A = wqo.make_grid(*dims)
        name = name or "grid"
    else:
        raise StructureFormatError(f"unknown class {args.klass!r}")
    name = name or args.klass
    if marks:
        A = MarkedStructure(A, tuple(marks)).expand()
    text = serialize_structure(name, A)
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# argument wiring


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", type=int, default=None, help="quantifier-rank bound")
    common.add_argument("--k", type=int, default=None, help="mark-set size bound")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--max-size", type=int, default=64)
    common.add_argument("--out", default=None, help="write the report here instead of stdout")

    parser = argparse.ArgumentParser(prog="fmtk", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("equiv", parents=[common], help="decide rank-m equivalence of two structures")
    p.add_argument("--file-a", required=True)
    p.add_argument("--file-b", required=True)
    p.add_argument("--name-a", default=None)
    p.add_argument("--name-b", default=None)
    p.set_defaults(fn=cmd_equiv, need_m=True)

    p = sub.add_parser("shrink", parents=[common], help="shrink a labeled tree or word around marks")
    p.add_argument("--file", required=True)
    p.add_argument("--name", default=None)
    p.add_argument("--marks", default=None, help="override the marks from the file")
    p.set_defaults(fn=cmd_shrink, need_m=True, need_k=True)

    p = sub.add_parser("translate", parents=[common], help="translate a sentence to prefix form over a sample")
    p.add_argument("--formula", required=True)
    p.add_argument("--sample", required=True, help="CLASS:LO:HI or file:PATH")
    p.add_argument("--p", default="auto", help="universal-block size, or 'auto'")
    p.add_argument("--max-p", type=int, default=16)
    p.set_defaults(fn=cmd_translate, need_k=True)

    p = sub.add_parser("cores", parents=[common], help="find cores of the sentence's models in a file")
    p.add_argument("--file", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--class", dest="klass", default="all", choices=sorted(translate.CLASS_TESTS))
    p.set_defaults(fn=cmd_cores, need_k=True)

    p = sub.add_parser("wqo-scan", parents=[common], help="scan marked linear orders for an embedding pair")
    p.add_argument("--file", required=True)
    p.set_defaults(fn=cmd_wqo_scan, need_k=True)

    p = sub.add_parser("algebra-eval", parents=[common], help="evaluate an operation expression")
    p.add_argument("--structs", required=True)
    p.add_argument("--expr", default=None)
    p.add_argument("--expr-file", default=None)
    p.set_defaults(fn=cmd_algebra_eval)

    p = sub.add_parser("algebra-shrink", parents=[common], help="shrink a union/complement expression around marks")
    p.add_argument("--structs", required=True)
    p.add_argument("--expr", default=None)
    p.add_argument("--expr-file", default=None)
    p.add_argument("--marks", default=None)
    p.add_argument("--leaf-shrinker", default="exhaustive", choices=("exhaustive", "identity"))
    p.set_defaults(fn=cmd_algebra_shrink, need_m=True, need_k=True)

    p = sub.add_parser("gen", parents=[common], help="generate an example structure")
    p.add_argument("--class", dest="klass", required=True, choices=GEN_CLASSES)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--dims", default="3x4", help="grid dimensions, e.g. 3x4")
    p.add_argument("--marks", default=None)
    p.add_argument("--name", default=None)
    p.add_argument("--force", action="store_true", help="override desk-scale guards")
    p.set_defaults(fn=cmd_gen)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "need_m", False) and args.m is None:
        parser.error(f"{args.command} requires --m")
    if getattr(args, "need_k", False) and args.k is None:
        parser.error(f"{args.command} requires --k")
    config = RunConfig(
        command=args.command,
        m=args.m,
        k=args.k,
        seed=args.seed,
        max_size=args.max_size,
        out=args.out,
    )
    try:
        return args.fn(args, config)
    except GuardExceeded as exc:
        print(f"guard exceeded: {exc}", file=sys.stderr)
        return 2
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 3
    except (StructureFormatError, FormulaSyntaxError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
