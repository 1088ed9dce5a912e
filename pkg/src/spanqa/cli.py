"""Command-line entry points: train, parse, ablate, eval.

Exit codes: 0 ok, 1 user error (bad input, bad flags), 2 internal error.
"""
from __future__ import annotations

import argparse
import json
import logging
import multiprocessing as mp
import os
import sys
import traceback
from dataclasses import replace

from . import __version__
from .config import RunConfig, resolve
from .conllu import TreebankDoc, dumps, read_conllu, write_conllu
from .errors import Infeasible, SpanQAError
from .eval import bucket_report, corpus_uas_las, recall_counts
from .model import DepTree, gold_spans
from .pipeline import candidates_for, parse_tables
from .scorer import LogLinearModel, TrainConfig, load_table_records, train
from .errors import NonProjectiveError

log = logging.getLogger("spanqa")

EXIT_OK, EXIT_USER, EXIT_INTERNAL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USER, f"{self.prog}: error: {message}\n")


def _write_manifest(path, command, args, cfg: RunConfig, extra=None):
    manifest = {
        "command": command,
        "version": __version__,
        "argv": sys.argv[1:],
        "flags": {k: v for k, v in vars(args).items() if k != "func"},
        "config": cfg.as_dict(),
    }
    if extra:
        manifest.update(extra)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True, default=str)
        f.write("\n")


def _config(args, keys) -> RunConfig:
    overrides = {k: getattr(args, k, None) for k in keys}
    return resolve(getattr(args, "config", None), overrides)


def _report_projectivity(doc: TreebankDoc, cfg: RunConfig):
    frac = doc.projective_fraction()
    msg = f"{doc.provenance or 'treebank'}: {len(doc)} sentences, {100 * frac:.1f}% projective"
    if 1 - frac > cfg.nonproj_threshold:
        msg += "; --decoder mst recommended"
    print(msg, file=sys.stderr)


# -- parsing helpers (module-level so worker processes can use them)

_WORKER = {}


def _parse_one(i):
    w = _WORKER
    sent = w["doc"].sentences[i][0]
    tables = w["tables"][i] if w["tables"] is not None else w["model"].tables(sent)
    if tables.n != sent.n:
        raise SpanQAError(f"sentence {i + 1}: tables for n={tables.n}, sentence has n={sent.n}")
    cfg = w["cfg"]
    res = parse_tables(tables, sent, cfg.k, cfg.lam, cfg.decoder)
    return res.tree, res.fell_back, res.score


def _parse_doc(doc, model, tables, cfg: RunConfig):
    _WORKER.update(doc=doc, model=model, tables=tables, cfg=cfg)
    idx = range(len(doc))
    if cfg.jobs > 1 and len(doc) > 1:
        ctx = mp.get_context("fork")
        with ctx.Pool(cfg.jobs) as pool:
            return pool.map(_parse_one, idx, chunksize=max(1, len(doc) // (4 * cfg.jobs)))
    return [_parse_one(i) for i in idx]


def _evaluate(doc, model, cfg, k=None, lam=None):
    cfg = replace(cfg, k=k or cfg.k, lam=cfg.lam if lam is None else lam)
    results = _parse_doc(doc, model, None, cfg)
    preds = [r[0] for r in results]
    sents = [s for s, _ in doc.sentences]
    golds = [t for _, t in doc.sentences]
    return corpus_uas_las(preds, golds, sents, set(cfg.punct)), results


# -- commands


def cmd_train(args) -> int:
    cfg = _config(args, ("k", "epochs", "lr", "lr_decay", "l2", "feature_bits", "seed", "lambda_grid", "jobs"))
    train_doc = read_conllu(args.train)
    dev_doc = read_conllu(args.dev)
    _report_projectivity(train_doc, cfg)
    tc = TrainConfig(epochs=cfg.epochs, lr=cfg.lr, lr_decay=cfg.lr_decay, l2=cfg.l2, seed=cfg.seed,
                     feature_bits=cfg.feature_bits)
    init = LogLinearModel.load(args.resume) if args.resume else None
    dev_log = []

    def on_epoch(ep, model, loss):
        (uas, las), _ = _evaluate(dev_doc, model, cfg)
        dev_log.append({"epoch": ep, "loss": loss, "dev_uas": uas, "dev_las": las})
        print(f"epoch {ep}\tloss {loss:.4f}\tdev UAS {uas:.4f}\tLAS {las:.4f}", file=sys.stderr)

    model = train(train_doc, tc, model=init, callback=on_epoch)
    best_lam, best_uas = None, -1.0
    for lam in cfg.lambda_grid:
        (uas, _), _ = _evaluate(dev_doc, model, cfg, lam=lam)
        print(f"lambda {lam:g}\tdev UAS {uas:.4f}", file=sys.stderr)
        if uas > best_uas:
            best_lam, best_uas = lam, uas
    model.settings = {"lambda": best_lam, "k": cfg.k}
    model.save(args.out)
    print(f"wrote {args.out} (lambda={best_lam:g}, dev UAS {best_uas:.4f})", file=sys.stderr)
    _write_manifest(args.out + ".manifest.json", "train", args, cfg,
                    {"dev_log": dev_log, "lambda": best_lam, "dev_uas": best_uas})
    return EXIT_OK


def cmd_parse(args) -> int:
    cfg = _config(args, ("k", "decoder", "jobs"))
    if args.lam is not None:
        cfg.lam = args.lam
    doc = read_conllu(args.input)
    _report_projectivity(doc, cfg)
    model = tables = None
    if args.model:
        model = LogLinearModel.load(args.model)
        if args.lam is None and "lambda" in model.settings:
            cfg.lam = float(model.settings["lambda"])
    else:
        tables = load_table_records(args.tables)
        if len(tables) != len(doc):
            raise SpanQAError(f"{args.tables} has {len(tables)} table records for {len(doc)} sentences")
    results = _parse_doc(doc, model, tables, cfg)
    out = TreebankDoc(provenance=args.out)
    fallbacks = 0
    for i, ((sent, _), (tree, fell_back, _)) in enumerate(zip(doc.sentences, results), 1):
        if fell_back:
            fallbacks += 1
            print(f"sentence {i}: projective decoding infeasible, used mst", file=sys.stderr)
            sent = replace(sent, comments=sent.comments + ("# spanqa_decoder = mst (fallback)",))
        out.sentences.append((sent, tree))
    write_conllu(out, args.out)
    _write_manifest(args.out + ".manifest.json", "parse", args, cfg, {"fallbacks": fallbacks})
    return EXIT_OK


def cmd_ablate(args) -> int:
    cfg = _config(args, ("sweep", "decoder", "jobs"))
    doc = read_conllu(args.treebank)
    model = LogLinearModel.load(args.model)
    cfg.lam = args.lam if args.lam is not None else float(model.settings.get("lambda", cfg.lam))
    sents = [s for s, _ in doc.sentences]
    golds = [t for _, t in doc.sentences]
    gspans = []
    for t in golds:
        try:
            gspans.append(gold_spans(t))
        except NonProjectiveError:
            gspans.append(None)
    tables = [model.tables(s) for s in sents]
    rows = []
    prev_sets = None
    for k in cfg.sweep:
        kcfg = replace(cfg, k=k)
        found_wo = found_w = total = 0
        sets = []
        for t, gs in zip(tables, gspans):
            proposed, cands = candidates_for(t, None, k, retrieve=True)
            sets.append(cands.span_set())
            if gs is not None:
                a, n_ = recall_counts(proposed, gs)
                b, _ = recall_counts(cands, gs)
                found_wo, found_w, total = found_wo + a, found_w + b, total + n_
        nested = prev_sets is None or all(p <= s for p, s in zip(prev_sets, sets))
        prev_sets = sets
        results = _parse_doc(doc, None, tables, kcfg)
        preds = [r[0] for r in results]
        uas, las = corpus_uas_las(preds, golds, sents, set(cfg.punct))
        rows.append({
            "k": k, "uas": uas, "las": las, "tree_score": sum(r[2] for r in results),
            "recall_wo_link": found_wo / max(1, total), "recall_w_link": found_w / max(1, total),
            "candidates": sum(len(s) for s in sets), "nested": nested,
        })
    cols = ["k", "uas", "las", "tree_score", "recall_wo_link", "recall_w_link", "candidates", "nested"]
    lines = ["\t".join(cols)]
    for r in rows:
        lines.append("\t".join(
            f"{r[c]:.6f}" if isinstance(r[c], float) else str(r[c]).lower() if isinstance(r[c], bool) else str(r[c])
            for c in cols))
    tsv = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(tsv)
        _write_manifest(args.out + ".manifest.json", "ablate", args, cfg)
    sys.stdout.write(tsv)
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = _config(args, ("punct",))
    gold = read_conllu(args.gold)
    pred = read_conllu(args.pred)
    if len(gold) != len(pred):
        raise SpanQAError(f"{args.gold} has {len(gold)} sentences, {args.pred} has {len(pred)}")
    sents = [s for s, _ in gold.sentences]
    golds = [t for _, t in gold.sentences]
    preds = [t for _, t in pred.sentences]
    punct = set(cfg.punct)
    uas, las = corpus_uas_las(preds, golds, sents, punct)
    chunks = [f"metric\tvalue\nUAS\t{uas:.6f}\nLAS\t{las:.6f}\n"]
    sys.stdout.write(f"UAS {uas:.4f}  LAS {las:.4f}\n")
    for b in args.buckets:
        rep = bucket_report(preds, golds, sents, b, punct_set=punct)
        sys.stdout.write("\n" + rep.to_text())
        chunks.append(f"# {b}\n" + rep.to_tsv())
    if args.tsv:
        with open(args.tsv, "w", encoding="utf-8") as f:
            f.write("\n".join(chunks))
        _write_manifest(args.tsv + ".manifest.json", "eval", args, cfg, {"uas": uas, "las": las})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spanqa", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="key = value config file; flags override it")
        sp.add_argument("--jobs", type=int, help="sentence-parallel worker processes")

    t = sub.add_parser("train", help="train the log-linear scorer")
    t.add_argument("train")
    t.add_argument("dev")
    t.add_argument("-o", "--out", required=True, help="model file to write")
    t.add_argument("--epochs", type=int)
    t.add_argument("--lr", type=float)
    t.add_argument("--lr-decay", dest="lr_decay", type=float)
    t.add_argument("--l2", type=float)
    t.add_argument("--feature-bits", dest="feature_bits", type=int)
    t.add_argument("--seed", type=int)
    t.add_argument("--k", type=int, help="candidates per token for dev decoding")
    t.add_argument("--lambda-grid", dest="lambda_grid", help="comma-separated lambda values tried on dev")
    t.add_argument("--resume", help="continue training this model")
    common(t)
    t.set_defaults(func=cmd_train)

    pa = sub.add_parser("parse", help="parse a CoNLL-U file")
    pa.add_argument("input")
    src = pa.add_mutually_exclusive_group(required=True)
    src.add_argument("--model")
    src.add_argument("--tables", help="score-table file with one record per sentence")
    pa.add_argument("-o", "--out", required=True)
    pa.add_argument("--decoder", choices=("proj", "mst"))
    pa.add_argument("--k", type=int)
    pa.add_argument("--lambda", dest="lam", type=float)
    pa.add_argument("--seed", type=int, help="recorded in the manifest; decoding is deterministic")
    common(pa)
    pa.set_defaults(func=cmd_parse)

    ab = sub.add_parser("ablate", help="UAS and span recall across k")
    ab.add_argument("treebank")
    ab.add_argument("--model", required=True)
    ab.add_argument("--sweep", help="comma-separated k values (default 1,2,5,10,15)")
    ab.add_argument("--lambda", dest="lam", type=float)
    ab.add_argument("--decoder", choices=("proj", "mst"))
    ab.add_argument("-o", "--out", help="TSV output path")
    ab.add_argument("--seed", type=int)
    common(ab)
    ab.set_defaults(func=cmd_ablate)

    ev = sub.add_parser("eval", help="UAS/LAS with length-bucketed reports")
    ev.add_argument("gold")
    ev.add_argument("pred")
    ev.add_argument("--punct", help="comma-separated POS tags excluded from scoring")
    ev.add_argument("--buckets", nargs="*", default=["sentence-length", "dependency-length", "subtree-span-length"],
                    choices=("sentence-length", "dependency-length", "subtree-span-length"))
    ev.add_argument("--tsv", help="write all tables as TSV here")
    ev.add_argument("--config")
    ev.set_defaults(func=cmd_eval)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (SpanQAError, OSError) as exc:
        print(f"spanqa: error: {exc}", file=sys.stderr)
        return EXIT_USER
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
