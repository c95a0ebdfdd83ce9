"""
Batch pipeline behind the command line: one `RunConfig`, one command, artifacts on disk.

`Pipeline.run` returns the process exit status: 0 on success, 2 for any
engine error (`PGBNError`), 1 for anything unexpected.  Failures also print
one line `error=<ClassName> message="<text>"` to stderr.
"""
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config import Config
from errors import ConfigError, DimensionError, PGBNError
from evaluation.diagnostics import distribution_self_tests, format_table, vmr_diagnostic
from evaluation.features import extract_features, save_features
from evaluation.perplexity import heldout_perplexity
from evaluation.topics import generate_documents, save_documents, save_topics
from ingestion.bow_loader import BowLoader, load_bow, save_bow
from ingestion.corpus import CountMatrix, Vocabulary
from ingestion.preprocessing import filter_vocab, mask_tokens, top_terms
from model.network import Network
from model.params import Hyperparams
from model.serialization import load_network, save_network, to_plain
from sampling.rng import Rng
from structure.layerwise import train_layerwise

logger = logging.getLogger(__name__)

Command = Literal["train", "eval", "features", "generate", "topics", "diagnose"]

REQUIRED_PATHS: Dict[str, tuple] = {
    "train": ("corpus", "model_out"),
    "eval": ("corpus", "model_in"),
    "features": ("corpus", "model_in", "report_out"),
    "generate": ("model_in", "report_out"),
    "topics": ("model_in", "report_out"),
    "diagnose": (),
}

# config.yaml section/key -> RunConfig field
YAML_FIELDS = {
    ("model", "eta"): "eta",
    ("model", "a0"): "a0",
    ("model", "b0"): "b0",
    ("model", "e0"): "e0",
    ("model", "f0"): "f0",
    ("model", "gamma0"): "gamma0",
    ("model", "c0"): "c0",
    ("training", "k1_max"): "k1max",
    ("training", "t_max"): "tmax",
    ("training", "burn"): "burn",
    ("training", "collect"): "collect",
    ("training", "layer1_sampler"): "layer1_sampler",
    ("training", "network_output"): "network_output",
    ("training", "log_every"): "log_every",
    ("evaluation", "heldout_fraction"): "heldout_fraction",
    ("evaluation", "burnin"): "eval_burnin",
    ("evaluation", "collect"): "eval_collect",
    ("evaluation", "thin"): "thin",
    ("evaluation", "frozen_phi"): "frozen_phi",
    ("ingestion", "min_count"): "min_count",
    ("ingestion", "top_terms"): "top_terms",
    ("generation", "n_docs"): "n_docs",
    ("generation", "top_m"): "top_m",
    ("diagnostics", "vmr_draws"): "vmr_draws",
    ("diagnostics", "self_test_draws"): "self_test_draws",
}


class RunConfig(BaseModel):
    """Fully resolved settings of one command invocation."""
    model_config = ConfigDict(extra="forbid")

    command: Command
    # Paths
    corpus: Optional[str] = None
    vocab: Optional[str] = None
    stoplist: Optional[str] = None
    test_corpus: Optional[str] = None
    model_in: Optional[str] = None
    model_out: Optional[str] = None
    report_out: Optional[str] = None
    # Reproducibility and parallelism
    seed: int = Field(default_factory=lambda: Config.SEED, ge=0)
    workers: int = Field(default_factory=lambda: Config.WORKERS, ge=1)
    verbose: bool = False
    # Hyperparameters
    eta: List[float] = Field(default_factory=lambda: [0.05])
    a0: float = Field(0.01, gt=0)
    b0: float = Field(0.01, gt=0)
    e0: float = Field(1.0, gt=0)
    f0: float = Field(1.0, gt=0)
    gamma0: float = Field(1.0, gt=0)
    c0: float = Field(1.0, gt=0)
    k1max: int = Field(100, ge=1)
    tmax: int = Field(1, ge=1)
    burn: List[int] = Field(default_factory=lambda: [1000])
    collect: List[int] = Field(default_factory=lambda: [500])
    layer1_sampler: Literal["collapsed", "blocked"] = "collapsed"
    network_output: Literal["last", "mean"] = "last"
    log_every: int = Field(50, ge=1)
    # Corpus preparation
    min_count: int = Field(0, ge=0)
    top_terms: int = Field(0, ge=0)
    # Evaluation
    heldout_fraction: float = Field(0.3, gt=0, lt=1)
    eval_burnin: int = Field(500, ge=0)
    eval_collect: int = Field(500, ge=1)
    thin: int = Field(5, ge=1)
    frozen_phi: bool = False
    # Generation and topics
    n_docs: int = Field(10, ge=0)
    top_m: int = Field(100, ge=1)
    top_words: int = Field(5, ge=1)
    c_schedule: Optional[List[float]] = None
    # Diagnostics
    vmr_draws: int = Field(1_000_000, ge=2)
    self_test_draws: int = Field(100_000, ge=2)
    vmr_depths: List[int] = Field(default_factory=lambda: [1, 2, 3, 5])
    vmr_p: List[float] = Field(default_factory=lambda: [0.3, 0.5])

    @model_validator(mode="before")
    @classmethod
    def _listify(cls, values: Any) -> Any:
        if isinstance(values, dict):
            for key in ("eta", "burn", "collect"):
                if key in values and not isinstance(values[key], (list, tuple)):
                    values[key] = [values[key]]
        return values

    @model_validator(mode="after")
    def _required_paths(self) -> "RunConfig":
        missing = [name for name in REQUIRED_PATHS[self.command] if not getattr(self, name)]
        if missing:
            flags = ", ".join("--" + name.replace("_", "-") for name in missing)
            raise ValueError(f"command '{self.command}' requires {flags}")
        return self

    @classmethod
    def resolve(cls, overrides: Dict[str, Any]) -> "RunConfig":
        """config.yaml defaults, then every override that is not None; `train` writes to PGBN_OUTPUT_DIR unless told otherwise."""
        values: Dict[str, Any] = {}
        for (section, key), name in YAML_FIELDS.items():
            block = Config.section(section)
            if key in block and block[key] is not None:
                values[name] = block[key]
        values.update({k: v for k, v in overrides.items() if v is not None})
        if values.get("command") == "train":
            values.setdefault("model_out", str(Config.OUTPUT_DIR))
        try:
            return cls(**values)
        except ValidationError as e:
            details = "; ".join(
                f"{'.'.join(map(str, err['loc'])) or 'config'}: {err['msg']}" for err in e.errors()
            )
            raise ConfigError(f"invalid run configuration: {details}") from e

    def hyperparams(self) -> Hyperparams:
        return Hyperparams.from_mapping({
            "eta": self.eta, "a0": self.a0, "b0": self.b0, "e0": self.e0, "f0": self.f0,
            "gamma0": self.gamma0, "c0": self.c0, "k1_max": self.k1max, "t_max": self.tmax,
            "b_iters": self.burn, "c_iters": self.collect,
        })

    def echo(self) -> Dict[str, Any]:
        """Resolved settings written into every artifact header."""
        return {k: v for k, v in self.model_dump().items() if v is not None and k != "verbose"}


def error_line(exc: BaseException) -> str:
    message = str(exc).replace("\\", "\\\\").replace('"', '\\"').replace("\n", " ")
    return f'error={type(exc).__name__} message="{message}"'


class Pipeline:
    """Dispatches a `RunConfig` to its command."""

    def __init__(self, run_config: RunConfig):
        self.config = run_config
        self.rng = Rng(run_config.seed)

    def run(self) -> int:
        command = self.config.command
        logger.info(f"Running {command} with seed={self.config.seed} workers={self.config.workers}")
        try:
            getattr(self, f"_{command}")()
        except PGBNError as e:
            logger.error(f"{command} failed: {e}")
            print(error_line(e), file=sys.stderr)
            return 2
        except Exception as e:
            logger.exception(f"{command} failed unexpectedly")
            print(error_line(e), file=sys.stderr)
            return 1
        return 0

    # Shared steps

    def _load_corpus(self, path: str) -> tuple:
        vocab, counts = load_bow(path, self.config.vocab)
        return vocab, counts

    def _prepare_training_corpus(self) -> tuple:
        cfg = self.config
        vocab, counts = self._load_corpus(cfg.corpus)
        source_terms = counts.V
        labels = vocab or Vocabulary(tuple(str(i + 1) for i in range(counts.V)))
        stop = []
        if cfg.stoplist:
            stop = [w.strip() for w in Path(cfg.stoplist).read_text(encoding="utf-8").splitlines() if w.strip()]
        labels, counts = filter_vocab(counts, labels, stop, cfg.min_count)
        labels, counts = top_terms(counts, labels, cfg.top_terms)
        kept = None
        if counts.V != source_terms:
            position = {term: i for i, term in enumerate(vocab.terms)} if vocab is not None else None
            kept = [position[term] if position is not None else int(term) - 1 for term in labels.terms]
        return (labels if vocab is not None else None), counts, source_terms, kept

    def _align(self, counts: CountMatrix, vocab: Optional[Vocabulary], network: Network):
        """Apply the training-time term selection to a corpus in the original vocabulary."""
        kept = network.metadata.get("kept_terms")
        if kept is not None and counts.V == network.metadata.get("source_terms") and counts.V != network.V:
            counts = counts.select_terms(kept)
            vocab = vocab.subset(kept) if vocab is not None else None
        if counts.V != network.V:
            raise DimensionError(f"corpus has {counts.V} terms but the network was trained on {network.V}")
        return vocab, counts

    def _write_report(self, path: str, body: Dict[str, Any]) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        doc = to_plain({"config": self.config.echo(), **body})
        path.write_text(yaml.safe_dump(doc, sort_keys=False, default_flow_style=None, width=1000), encoding="utf-8")
        logger.info(f"Wrote report to {path}")

    # Commands

    def _train(self) -> None:
        cfg = self.config
        vocab, counts, source_terms, kept = self._prepare_training_corpus()
        hyper = cfg.hyperparams()
        schedule = hyper.schedule(
            layer1_sampler=cfg.layer1_sampler,
            network_output=cfg.network_output,
            workers=cfg.workers,
            log_every=cfg.log_every,
        )
        out_dir = Path(cfg.model_out)
        out_dir.mkdir(parents=True, exist_ok=True)
        echo = cfg.echo()

        def checkpoint(network: Network) -> None:
            if kept is not None:
                network.metadata["source_terms"] = source_terms
                network.metadata["kept_terms"] = kept
            save_network(str(out_dir / f"network_T{network.depth}.yaml"), network, echo)

        stack = train_layerwise(counts, hyper, schedule, self.rng.spawn(0), verbose=cfg.verbose, on_network=checkpoint)
        if vocab is not None:
            (out_dir / "vocab.txt").write_text("\n".join(vocab.terms) + "\n", encoding="utf-8")
        lines = [f"# {k}={v}" for k, v in echo.items()]
        for reports in stack.reports:
            lines.extend(r.progress_line() for r in reports)
        (out_dir / "train.log").write_text("\n".join(lines) + "\n", encoding="utf-8")
        logger.info(f"Trained widths {stack.widths}")

    def _eval(self) -> None:
        cfg = self.config
        network = load_network(cfg.model_in)
        vocab, counts = self._load_corpus(cfg.corpus)
        vocab, counts = self._align(counts, vocab, network)
        mask = mask_tokens(counts, cfg.heldout_fraction, self.rng.spawn(0))
        report = heldout_perplexity(
            network, mask, cfg.eval_burnin, cfg.eval_collect, cfg.thin, self.rng.spawn(1),
            frozen_phi=cfg.frozen_phi, layer1_sampler=cfg.layer1_sampler, workers=cfg.workers,
        )
        print(f"perplexity={report.perplexity!r} samples={report.samples_used} heldout_tokens={report.heldout_tokens}")
        if cfg.report_out:
            self._write_report(cfg.report_out, report.as_dict())

    def _features(self) -> None:
        cfg = self.config
        network = load_network(cfg.model_in)
        echo = cfg.echo()
        targets = [(cfg.corpus, cfg.report_out)]
        if cfg.test_corpus:
            out = Path(cfg.report_out)
            targets.append((cfg.test_corpus, str(out.with_name(out.stem + ".test" + out.suffix))))
        for i, (corpus_path, out_path) in enumerate(targets):
            vocab, counts = self._load_corpus(corpus_path)
            _, counts = self._align(counts, vocab, network)
            summary = extract_features(
                network, counts, cfg.eval_burnin, cfg.eval_collect, self.rng.spawn(i), workers=cfg.workers
            )
            save_features(out_path, summary, config_echo=echo)

    def _generate(self) -> None:
        cfg = self.config
        network = load_network(cfg.model_in)
        vocab = self._vocab_for(network)
        docs = generate_documents(network, cfg.c_schedule, cfg.n_docs, cfg.top_m, self.rng.spawn(0))
        save_documents(cfg.report_out, docs, vocab, config_echo=cfg.echo())
        if docs:
            counts = CountMatrix.from_dense(np.column_stack([d.counts for d in docs]))
            save_bow(str(Path(cfg.report_out).with_suffix(".bow")), counts, config_echo=cfg.echo())

    def _topics(self) -> None:
        cfg = self.config
        network = load_network(cfg.model_in)
        save_topics(cfg.report_out, network, self._vocab_for(network), cfg.top_words, config_echo=cfg.echo())

    def _diagnose(self) -> None:
        cfg = self.config
        rows = []
        for i, T in enumerate(cfg.vmr_depths):
            for k, p in enumerate(cfg.vmr_p):
                rep = vmr_diagnostic(T, p, 1.0, cfg.vmr_draws, self.rng.spawn(i).spawn(k))
                rows.append({
                    "depth": T, "p2": p, "mean": rep.mean, "expected_mean": rep.expected_mean,
                    "vmr": rep.vmr, "expected_vmr": rep.expected_vmr, "relative_error": rep.relative_error,
                })
        tests = distribution_self_tests(self.rng.spawn(len(cfg.vmr_depths)), cfg.self_test_draws)
        print(format_table(tests))
        for row in rows:
            print(" ".join(f"{k}={v}" for k, v in row.items()))
        if cfg.report_out:
            self._write_report(cfg.report_out, {
                "vmr": rows,
                "self_tests": [
                    {"name": t.name, "mean": t.mean, "expected_mean": t.expected_mean, "z": t.z, "passed": t.passed}
                    for t in tests
                ],
            })

    def _vocab_for(self, network: Network) -> Optional[Vocabulary]:
        """Term labels: --vocab if given (reduced like the training corpus), else vocab.txt beside the model."""
        cfg = self.config
        if cfg.vocab:
            vocab = BowLoader.load_vocab(cfg.vocab)
            kept = network.metadata.get("kept_terms")
            if kept is not None and vocab.size == network.metadata.get("source_terms"):
                vocab = vocab.subset(kept)
            if vocab.size != network.V:
                raise DimensionError(f"vocabulary has {vocab.size} terms but the network has {network.V}")
            return vocab
        sidecar = Path(cfg.model_in).parent / "vocab.txt"
        if sidecar.exists():
            vocab = BowLoader.load_vocab(str(sidecar))
            if vocab.size == network.V:
                return vocab
        return None
