"""Command-line entry point: graph building, oracle labels, training,
prediction and evaluation over JSONL corpora.

Config precedence is CLI flag > config file (--config, JSON) > built-in
default; the effective configuration is echoed into the output directory so
every run is reproducible from its artifacts.  All randomness flows from one
seed.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import graphs, oracle, select
from .corpus import CorpusError, Document, load_corpus
from .metrics import rouge_l, rouge_n
from .nn import model as nn_model
from .nn import train as nn_train
from .rst import RstParseError, parse_rst_sexpr, to_dependency

log = logging.getLogger("edusum")

SUBCOMMANDS = ("build-graphs", "oracle", "train", "predict", "evaluate", "stats")


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    corpus: str
    dev: str | None
    test: str | None
    out: str | None
    checkpoint: str | None
    predictions: str | None
    embed: str
    jobs: int
    budget_edus: int | None
    budget_tokens: int | None
    steps: int
    batch_size: int
    lr: float
    eval_every: int
    max_doc_tokens: int | None
    model: nn_model.ModelConfig

    def budget(self) -> select.SelectionBudget:
        return select.SelectionBudget(max_edus=self.budget_edus, max_tokens=self.budget_tokens)


_MODEL_FLAG_MAP = {
    "layers": "layers",
    "hidden": "d_h",
    "d_ff": "d_ff",
    "dropout": "dropout_p",
    "graphs": "graphs_enabled",
    "rst_directed": "rst_directed_messages",
    "seed": "seed",
    "dtype": "dtype",
}

_RUN_DEFAULTS = {
    "dev": None,
    "test": None,
    "out": None,
    "checkpoint": None,
    "predictions": None,
    "embed": "lookup",
    "jobs": 1,
    "budget_edus": 6,
    "budget_tokens": None,
    "steps": 500,
    "batch_size": 8,
    "lr": 5e-3,
    "eval_every": 50,
    "max_doc_tokens": None,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edusum",
        description="Discourse-unit extractive summarization toolkit",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--corpus", help="training/input corpus (JSONL)")
    parser.add_argument("--dev", help="validation corpus (JSONL)")
    parser.add_argument("--test", help="test corpus (JSONL); used by predict when set")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--config", help="JSON config file (flags override it)")
    parser.add_argument("--checkpoint", help="model checkpoint (predict)")
    parser.add_argument("--predictions", help="predictions JSONL (evaluate)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--layers", type=int, help="graph encoder depth")
    parser.add_argument("--hidden", type=int, help="hidden size")
    parser.add_argument("--d-ff", dest="d_ff", type=int, help="feed-forward inner size")
    parser.add_argument("--dropout", type=float)
    parser.add_argument("--graphs", choices=nn_model.GRAPH_CHOICES)
    parser.add_argument("--rst-directed", dest="rst_directed", action="store_true", default=None,
                        help="directed message passing over the dependency graph")
    parser.add_argument("--dtype", choices=("f32", "f64"))
    parser.add_argument("--budget-edus", dest="budget_edus", type=int)
    parser.add_argument("--budget-tokens", dest="budget_tokens", type=int)
    parser.add_argument("--jobs", type=int)
    parser.add_argument("--embed", help="'lookup' or 'file:PATH'")
    parser.add_argument("--steps", type=int)
    parser.add_argument("--batch-size", dest="batch_size", type=int)
    parser.add_argument("--lr", type=float)
    parser.add_argument("--eval-every", dest="eval_every", type=int)
    parser.add_argument("--max-doc-tokens", dest="max_doc_tokens", type=int,
                        help="truncate longer documents by whole EDUs")
    return parser


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    file_cfg: dict = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise CorpusError(f"config file not found: {path}")
        with path.open("r", encoding="utf-8") as fh:
            file_cfg = json.load(fh)

    def pick(name: str, default):
        flag = getattr(args, name, None)
        if flag is not None:
            return flag
        if name in file_cfg:
            return file_cfg[name]
        return default

    model_kwargs = {}
    model_defaults = {f.name: f.default for f in fields(nn_model.ModelConfig)}
    for flag, field_name in _MODEL_FLAG_MAP.items():
        model_kwargs[field_name] = pick(flag, file_cfg.get(field_name, model_defaults[field_name]))

    run_kwargs = {name: pick(name, default) for name, default in _RUN_DEFAULTS.items()}
    corpus = pick("corpus", None)
    if corpus is None:
        raise CorpusError("--corpus is required")
    return RunConfig(
        subcommand=args.subcommand,
        corpus=corpus,
        model=nn_model.ModelConfig(**model_kwargs),
        **run_kwargs,
    )


def _require(path: str | None, what: str) -> Path:
    if path is None:
        raise CorpusError(f"{what} is required for this subcommand")
    p = Path(path)
    if not p.exists():
        raise CorpusError(f"{what} not found: {p}")
    return p


def _echo_config(cfg: RunConfig, out_dir: Path) -> None:
    blob = asdict(cfg)
    with (out_dir / "effective_config.json").open("w", encoding="utf-8") as fh:
        json.dump(blob, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_jsonl(records: Iterable[dict], path: Path) -> None:
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _pmap(fn: Callable, items: Sequence, jobs: int) -> list:
    """Order-preserving map, optionally across processes."""
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _doc_dep(doc: Document):
    return to_dependency(parse_rst_sexpr(doc.rst_tree), doc.edus)


# Top-level workers so --jobs can pickle them.


def _graphs_record(doc: Document) -> dict:
    g_r, g_c = graphs.document_graphs(doc)
    rst_edges = [[int(i), int(j)] for i, j in zip(*np.nonzero(g_r.entries))]
    coref_edges = [
        [int(i), int(j)] for i, j in zip(*np.nonzero(np.triu(g_c.entries, k=1)))
    ]
    return {"id": doc.id, "n": g_r.n, "rst_edges": rst_edges, "coref_edges": coref_edges}


def _oracle_record(doc: Document) -> dict:
    labels = oracle.make_oracle_labels(doc, _doc_dep(doc))
    return {"id": doc.id, "labels": list(labels.labels), "r1": labels.achieved_r1}


def cmd_stats(cfg: RunConfig) -> int:
    docs = load_corpus(_require(cfg.corpus, "--corpus"), max_tokens=cfg.max_doc_tokens)
    st = graphs.graph_stats(docs)
    header = "docs\tsentences\tedus\ttokens\trst_edges\tcoref_edges"
    row = (
        f"{st.documents}\t{st.sentences:.2f}\t{st.edus:.2f}\t{st.tokens:.2f}"
        f"\t{st.rst_edges:.2f}\t{st.coref_edges:.2f}"
    )
    print(header)
    print(row)
    if cfg.out:
        out_dir = Path(cfg.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "stats.tsv").write_text(header + "\n" + row + "\n", encoding="utf-8")
        _echo_config(cfg, out_dir)
    return 0


def cmd_build_graphs(cfg: RunConfig) -> int:
    docs = load_corpus(_require(cfg.corpus, "--corpus"), max_tokens=cfg.max_doc_tokens)
    out_dir = Path(_require_out(cfg))
    records = _pmap(_graphs_record, docs, cfg.jobs)
    _write_jsonl(records, out_dir / "graphs.jsonl")
    _echo_config(cfg, out_dir)
    return 0


def cmd_oracle(cfg: RunConfig) -> int:
    docs = load_corpus(_require(cfg.corpus, "--corpus"), max_tokens=cfg.max_doc_tokens)
    out_dir = Path(_require_out(cfg))
    records = _pmap(_oracle_record, docs, cfg.jobs)
    _write_jsonl(records, out_dir / "oracle.jsonl")
    _echo_config(cfg, out_dir)
    return 0


def _embedding(cfg: RunConfig):
    """Returns (vocab, table) for file mode, (None, None) for lookup mode."""
    if cfg.embed == "lookup":
        return None, None
    if cfg.embed.startswith("file:"):
        vocab, table = nn_model.load_embedding_file(cfg.embed[5:], expected_dim=cfg.model.d_h)
        return vocab, table
    raise CorpusError(f"--embed must be 'lookup' or 'file:PATH', got '{cfg.embed}'")


def cmd_train(cfg: RunConfig) -> int:
    docs = load_corpus(_require(cfg.corpus, "--corpus"), max_tokens=cfg.max_doc_tokens)
    dev_docs = None
    if cfg.dev:
        dev_docs = load_corpus(_require(cfg.dev, "--dev"), max_tokens=cfg.max_doc_tokens)
    out_dir = Path(_require_out(cfg))

    labels = [oracle.make_oracle_labels(doc, _doc_dep(doc)).labels for doc in docs]
    vocab, table = _embedding(cfg)
    log.info("training: %d docs, config %s", len(docs), cfg.model)
    result = nn_train.train(
        docs,
        labels,
        cfg.model,
        dev_docs=dev_docs,
        steps=cfg.steps,
        batch_size=cfg.batch_size,
        lr=cfg.lr,
        eval_every=cfg.eval_every,
        budget=cfg.budget(),
        embed_table=table,
        vocab=vocab,
    )
    nn_model.save_checkpoint(out_dir / "checkpoint.json", result.params, cfg.model, result.vocab)
    _write_jsonl(result.log, out_dir / "train_log.jsonl")
    _echo_config(cfg, out_dir)
    return 0


def cmd_predict(cfg: RunConfig) -> int:
    source = cfg.test if cfg.test else cfg.corpus
    docs = load_corpus(_require(source, "--test/--corpus"), max_tokens=cfg.max_doc_tokens)
    ckpt = _require(cfg.checkpoint, "--checkpoint")
    out_dir = Path(_require_out(cfg))
    params, model_cfg, vocab = nn_model.load_checkpoint(ckpt)
    budget = cfg.budget()
    records = []
    for doc in docs:
        views = nn_model.document_views(doc, model_cfg)
        scores = nn_model.forward_document(doc, views, params, model_cfg, vocab).data
        sel = select.select_summary(scores, _doc_dep(doc), budget, doc)
        records.append({"id": doc.id, "edus": list(sel.edus), "summary": list(sel.rendered)})
    _write_jsonl(records, out_dir / "predictions.jsonl")
    _echo_config(cfg, out_dir)
    return 0


def cmd_evaluate(cfg: RunConfig) -> int:
    docs = load_corpus(_require(cfg.corpus, "--corpus"), max_tokens=cfg.max_doc_tokens)
    pred_path = _require(cfg.predictions, "--predictions")
    by_id = {}
    with pred_path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as err:
                raise CorpusError(f"{pred_path}: line {lineno}: invalid JSON: {err.msg}")
            by_id[rec["id"]] = rec
    r1 = r2 = rl = 0.0
    for doc in docs:
        rec = by_id.get(doc.id)
        if rec is None:
            raise CorpusError(f"no prediction for document '{doc.id}'")
        cand = [t.lower() for t in rec["summary"]]
        r1 += rouge_n(cand, doc.reference, 1).f1
        r2 += rouge_n(cand, doc.reference, 2).f1
        rl += rouge_l(cand, doc.reference).f1
    n = len(docs)
    header = "R-1\tR-2\tR-L"
    row = f"{100 * r1 / n:.2f}\t{100 * r2 / n:.2f}\t{100 * rl / n:.2f}" if n else "0.00\t0.00\t0.00"
    print(header)
    print(row)
    if cfg.out:
        out_dir = Path(cfg.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "scores.tsv").write_text(header + "\n" + row + "\n", encoding="utf-8")
        _echo_config(cfg, out_dir)
    return 0


def _require_out(cfg: RunConfig) -> Path:
    if cfg.out is None:
        raise CorpusError("--out is required for this subcommand")
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


_DISPATCH = {
    "stats": cmd_stats,
    "build-graphs": cmd_build_graphs,
    "oracle": cmd_oracle,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
}


def run(argv: Sequence[str]) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        cfg = _resolve_config(args)
        log.info("subcommand=%s seed=%d", cfg.subcommand, cfg.model.seed)
        return _DISPATCH[cfg.subcommand](cfg)
    except (CorpusError, RstParseError, ValueError, FileNotFoundError, nn_train.TrainingDiverged) as err:
        print(f"edusum: error: {err}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
