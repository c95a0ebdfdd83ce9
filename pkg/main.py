"""
Main entrypoint for the gamma belief network engine.

Commands:
- `train`    -> layer-wise training, one network file per depth plus train.log
- `eval`     -> heldout per-word perplexity of a trained network
- `features` -> posterior-mean feature matrix of a corpus
- `generate` -> synthetic documents drawn top-down through a network
- `topics`   -> ranked, projected topic-word lists for every layer
- `diagnose` -> overdispersion check and sampler self-tests
"""
import argparse
import logging
import sys

from config import config
from errors import ConfigError


def _floats(text: str):
    return [float(v) for v in text.split(",")]


def _ints(text: str):
    return [int(v) for v in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Poisson gamma belief network topic engine")
    parser.add_argument("command", choices=["train", "eval", "features", "generate", "topics", "diagnose"])

    paths = parser.add_argument_group("paths")
    paths.add_argument("--corpus", type=str, help="UCI bag-of-words corpus")
    paths.add_argument("--vocab", type=str, help="Vocabulary file, one term per line")
    paths.add_argument("--stoplist", type=str, help="Stopwords to drop before training")
    paths.add_argument("--test-corpus", dest="test_corpus", type=str, help="Second corpus for features")
    paths.add_argument("--model-in", dest="model_in", type=str, help="Trained network file")
    paths.add_argument("--model-out", dest="model_out", type=str, help="Directory for trained networks")
    paths.add_argument("--report-out", dest="report_out", type=str, help="Report / feature / topic output file")

    run = parser.add_argument_group("run")
    run.add_argument("--seed", type=int, help=f"Random seed (default {config.SEED})")
    run.add_argument("--workers", type=int, help=f"Document shards (default {config.WORKERS})")
    run.add_argument("--verbose", action="store_true", default=None, help="Show progress bars")

    model = parser.add_argument_group("model")
    model.add_argument("--eta", type=_floats, help="Comma-separated per-layer eta")
    model.add_argument("--a0", type=float)
    model.add_argument("--b0", type=float)
    model.add_argument("--e0", type=float)
    model.add_argument("--f0", type=float)
    model.add_argument("--gamma0", type=float)
    model.add_argument("--c0", type=float)
    model.add_argument("--k1max", type=int, help="Width budget of layer 1")
    model.add_argument("--tmax", type=int, help="Depth budget")
    model.add_argument("--burn", type=_ints, help="Comma-separated per-depth burn-in B_T")
    model.add_argument("--collect", type=_ints, help="Comma-separated per-depth collection C_T")
    model.add_argument("--layer1-sampler", dest="layer1_sampler", choices=["collapsed", "blocked"])
    model.add_argument("--network-output", dest="network_output", choices=["last", "mean"])
    model.add_argument("--log-every", dest="log_every", type=int)
    model.add_argument("--min-count", dest="min_count", type=int)
    model.add_argument("--top-terms", dest="top_terms", type=int)

    ev = parser.add_argument_group("evaluation")
    ev.add_argument("--heldout-fraction", dest="heldout_fraction", type=float)
    ev.add_argument("--eval-burnin", dest="eval_burnin", type=int)
    ev.add_argument("--eval-collect", dest="eval_collect", type=int)
    ev.add_argument("--thin", type=int)
    ev.add_argument("--frozen-phi", dest="frozen_phi", action="store_true", default=None)

    gen = parser.add_argument_group("generation and topics")
    gen.add_argument("--n-docs", dest="n_docs", type=int)
    gen.add_argument("--top-m", dest="top_m", type=int)
    gen.add_argument("--top-words", dest="top_words", type=int)
    gen.add_argument("--c-schedule", dest="c_schedule", type=_floats, help="Comma-separated c^(2)..c^(T+1)")

    diag = parser.add_argument_group("diagnostics")
    diag.add_argument("--vmr-draws", dest="vmr_draws", type=int)
    diag.add_argument("--self-test-draws", dest="self_test_draws", type=int)
    diag.add_argument("--vmr-depths", dest="vmr_depths", type=_ints)
    diag.add_argument("--vmr-p", dest="vmr_p", type=_floats)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(config.LOG_LEVEL).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    from orchestration.pipeline import Pipeline, RunConfig, error_line

    try:
        config.validate()
        run_config = RunConfig.resolve(vars(args))
    except ConfigError as e:
        logging.getLogger(__name__).error(str(e))
        print(error_line(e), file=sys.stderr)
        return 2
    return Pipeline(run_config).run()


if __name__ == "__main__":
    sys.exit(main())
