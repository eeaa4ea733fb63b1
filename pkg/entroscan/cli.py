"""``entroscan`` command-line frontend."""

import argparse
import csv
import json
import logging
import sys
from contextlib import contextmanager
from pathlib import Path

from rich.console import Console
from rich.table import Table

from entroscan import __version__
from entroscan.classifier.forest import ForestConfig
from entroscan.classifier.model import expected_feature_dim, load_codebook, save
from entroscan.config import FAMILY_ORDER, ExperimentConfig, PipelineConfig
from entroscan.errors import CorpusIOError, EmptyInput, EntroscanError, ShapeError
from entroscan.evaluation.ablation import ablate
from entroscan.evaluation.dataset import load_series
from entroscan.evaluation.grid import grid_search, load_grid, sweep_grid
from entroscan.evaluation.holdout import PROTOCOLS, repeated_holdout
from entroscan.evaluation.metrics import roc_curve
from entroscan.pipelines.scan_pipeline import DocumentScanner
from entroscan.pipelines.train_pipeline import DetectorTrainer
from entroscan.preprocess.canonical import canonicalize
from entroscan.signal.entropy import compute_ets
from entroscan.tools.featurizer.families.global_stats import global_features
from entroscan.tools.featurizer.featurizer import (
    extract_paths,
    read_feature_file,
    write_feature_records,
)
from entroscan.utils.corpus import ingest
from entroscan.utils.log import setup_logging
from entroscan.utils.output import clean_result, dumps_line
from entroscan.utils.synthetic import SyntheticSpec, generate_synthetic

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2


class ArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@contextmanager
def open_output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fout:
            yield fout


def write_json(document, path=None):
    with open_output(path) as fout:
        json.dump(clean_result(document), fout, indent=2)
        fout.write("\n")


def _experiment(args) -> ExperimentConfig:
    return ExperimentConfig(
        pipeline=PipelineConfig(
            window_size=args.window_size,
            segment_length=args.segment_len,
            codebook_size=args.codebook_size,
            sample_fraction=args.sample_frac,
        ),
        forest=ForestConfig(n_trees=args.trees, max_depth=args.max_depth, seed=args.seed),
        threshold=args.threshold,
        max_fpr=args.max_fpr,
    )


def _report_table(title, rows) -> Table:
    table = Table(title=title)
    for column in ("families", "TPR", "FPR", "FNR", "PRE", "F1", "ACC", "AUC", "fit s"):
        table.add_column(column)
    for name, report in rows:
        table.add_row(
            name,
            *[f"{getattr(report, key):.4f}" for key in ("tpr", "fpr", "fnr", "precision", "f1", "accuracy", "auc")],
            f"{report.fit_seconds:.2f}",
        )
    return table


def cmd_entropy(args) -> int:
    data = Path(args.file).read_bytes()
    stream = canonicalize(data)
    ets = compute_ets(stream.bytes, args.window_size)
    if args.csv:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        for index, value in enumerate(ets.values):
            writer.writerow([index, f"{value:.6f}"])
        return EXIT_OK

    summary = global_features(ets)
    table = Table(title=str(args.file))
    table.add_column("property")
    table.add_column("value")
    table.add_row("kind", stream.source_kind.value)
    table.add_row("fallback", str(stream.fallback_used))
    table.add_row("canonical bytes", str(len(stream.bytes)))
    for key, value in summary.__dict__.items():
        table.add_row(key, f"{value:.6g}" if isinstance(value, float) else str(value))
    Console().print(table)
    return EXIT_OK


def _collect(paths, labels_csv):
    files, labels = [], []
    for path in map(Path, paths):
        if path.is_dir():
            corpus = ingest(path, labels_csv)
            files += [entry.path for entry in corpus]
            labels += [entry.label if entry.is_labeled else None for entry in corpus]
        else:
            files.append(path)
            labels.append(None)
    return files, labels


def cmd_extract(args) -> int:
    codebook = load_codebook(args.codebook)
    config = PipelineConfig(
        window_size=args.window_size, segment_length=codebook.segment_length, codebook_size=codebook.k
    )
    files, labels = _collect(args.paths, args.labels)
    vectors = extract_paths(files, codebook, config, labels=labels, n_jobs=args.n_jobs)
    with open_output(args.out) as fout:
        count = write_feature_records(vectors, fout, codebook=codebook)
    logger.info(f"Extracted {count} feature vectors of length {len(vectors[0]) if vectors else 0}")
    return EXIT_OK


def cmd_build_codebook(args) -> int:
    pipeline = PipelineConfig(
        window_size=args.window_size,
        segment_length=args.segment_len,
        codebook_size=args.codebook_size,
        sample_fraction=args.sample_frac,
    )
    trainer = DetectorTrainer(pipeline, ForestConfig(seed=args.seed), n_jobs=args.n_jobs)
    codebook = trainer.build_codebook(ingest(args.dir, args.labels))
    write_json(codebook.to_document(), args.out)
    logger.info(f"Wrote {codebook.k} codewords (segment length {codebook.segment_length}) to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    features, embedded = read_feature_file(args.features)
    # --codebook overrides the codebook line written by extract
    codebook = load_codebook(args.codebook) if args.codebook else embedded
    families = FAMILY_ORDER if codebook is not None else ("global", "dwt")
    pipeline = PipelineConfig(
        window_size=args.window_size,
        families=families,
        **({} if codebook is None else {"segment_length": codebook.segment_length, "codebook_size": codebook.k}),
    )
    expected = expected_feature_dim(families, pipeline.spectrum_levels, codebook)
    if features and len(features[0]) != expected:
        raise ShapeError(
            f"feature vectors have {len(features[0])} values, expected {expected} for families {families}"
            + ("" if codebook is not None else "; extract with --codebook or pass --codebook for bag-of-words features")
        )
    forest = ForestConfig(n_trees=args.trees, max_depth=args.max_depth, seed=args.seed)
    model = DetectorTrainer(pipeline, forest, n_jobs=args.n_jobs).process_features(features, codebook)
    model.threshold = args.threshold
    save(model, args.out)
    return EXIT_OK


def cmd_scan(args) -> int:
    scanner = DocumentScanner(args.model, threshold=args.threshold)
    records = scanner(args.paths, n_jobs=args.n_jobs)
    with open_output(args.out) as fout:
        for record in records:
            fout.write(dumps_line(record) + "\n")
    io_failures = [record for record in records if "error" in record and record["error"] != EmptyInput.__name__]
    return EXIT_IO if io_failures else EXIT_OK


def _dataset(args):
    dataset = load_series(ingest(args.dataset, args.labels), args.window_size, n_jobs=args.n_jobs)
    dataset.require_both_classes()
    return dataset


def cmd_evaluate(args) -> int:
    dataset = _dataset(args)
    report = repeated_holdout(
        dataset,
        _experiment(args),
        repeats=args.repeats,
        train_fraction=args.split,
        seed=args.seed,
        protocol=args.protocol,
        folds=args.folds,
        n_jobs=args.n_jobs,
    )
    Console(stderr=True).print(_report_table("evaluation", [("+".join(FAMILY_ORDER), report)]))
    write_json(report.to_dict(), args.out)
    if args.roc_out:
        thresholds, fpr, tpr = roc_curve(*report.pooled_scores())
        with open(args.roc_out, "w", encoding="utf-8", newline="") as fout:
            writer = csv.writer(fout, lineterminator="\n")
            writer.writerow(["threshold", "fpr", "tpr"])
            for row in zip(thresholds, fpr, tpr):
                writer.writerow([repr(float(value)) for value in row])
    return EXIT_OK


def cmd_gridsearch(args) -> int:
    grid = sweep_grid(args.grid) if args.grid in ("forest", "segment", "codebook") else load_grid(args.grid)
    results = grid_search(
        _dataset(args),
        grid,
        _experiment(args),
        seed=args.seed,
        repeats=args.repeats,
        train_fraction=args.split,
        n_jobs=args.n_jobs,
    )
    write_json([result.to_dict() for result in results], args.out)
    return EXIT_OK


def cmd_ablate(args) -> int:
    results = ablate(
        _dataset(args),
        _experiment(args),
        seed=args.seed,
        repeats=args.repeats,
        train_fraction=args.split,
        n_jobs=args.n_jobs,
    )
    Console(stderr=True).print(_report_table("feature ablation", [("+".join(f), r) for f, r in results]))
    write_json([{"families": list(families), "report": report.to_dict()} for families, report in results], args.out)
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = SyntheticSpec(
        n_benign=args.benign,
        n_malicious=args.malicious,
        blob_size_range=(args.blob_min, args.blob_max),
        base_size_range=(args.base_min, args.base_max),
        seed=args.seed,
    )
    generate_synthetic(spec, args.out)
    return EXIT_OK


def _add_forest_args(parser):
    parser.add_argument("--trees", type=int, default=500, help="number of trees")
    parser.add_argument("--max-depth", type=int, default=30, help="maximum tree depth")


def _add_experiment_args(parser):
    parser.add_argument("--dataset", required=True, help="corpus directory")
    parser.add_argument("--labels", required=True, help="path,label CSV")
    parser.add_argument("--repeats", type=int, default=3, help="holdout repeats")
    parser.add_argument("--split", type=float, default=0.7, help="training fraction per repeat")
    parser.add_argument("--seed", type=int, required=True)
    parser.add_argument("--segment-len", type=int, default=6)
    parser.add_argument("--codebook-size", type=int, default=250)
    parser.add_argument("--sample-frac", type=float, default=0.2)
    parser.add_argument("--threshold", type=float, default=0.5)
    parser.add_argument("--max-fpr", type=float, default=0.05, help="FPR budget for the reported TPR")
    parser.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    _add_forest_args(parser)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="entroscan", description="Entropy-signal detector for malicious documents.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("--n-jobs", type=int, default=1, help="parallel workers (-1 for all cores)")
    parser.add_argument("--window-size", type=int, default=256, help=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    p = sub.add_parser("entropy", help="print the entropy time series of a file")
    p.add_argument("file")
    p.add_argument("--csv", action="store_true", help="index,entropy rows instead of a summary")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("extract", help="feature vectors as JSON lines")
    p.add_argument("paths", nargs="+")
    p.add_argument("--codebook", required=True, help="codebook or model file")
    p.add_argument("--labels", default=None, help="path,label CSV for directory arguments")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("build-codebook", help="cluster local segments into a codebook")
    p.add_argument("dir")
    p.add_argument("--segment-len", type=int, default=6)
    p.add_argument("--codebook-size", type=int, default=250)
    p.add_argument("--sample-frac", type=float, default=0.2)
    p.add_argument("--labels", default=None, help="label CSV inside the corpus, skipped when walking")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_codebook)

    p = sub.add_parser("train", help="fit the random forest on extracted features")
    p.add_argument("--features", required=True)
    p.add_argument("--codebook", default=None, help="codebook the features were extracted with")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    _add_forest_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("scan", help="score documents with a trained model")
    p.add_argument("paths", nargs="+")
    p.add_argument("--model", required=True)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("evaluate", help="repeated holdout evaluation")
    _add_experiment_args(p)
    p.add_argument("--protocol", choices=PROTOCOLS, default="holdout")
    p.add_argument("--folds", type=int, default=3)
    p.add_argument("--roc-out", default=None, help="threshold,fpr,tpr CSV of the pooled test scores")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("gridsearch", help="rank parameter grids by mean AUC")
    _add_experiment_args(p)
    p.add_argument("--grid", required=True, help="JSON grid file, or one of forest, segment, codebook")
    p.set_defaults(func=cmd_gridsearch)

    p = sub.add_parser("ablate", help="evaluate every feature-family combination")
    _add_experiment_args(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("synth", help="write a synthetic labelled corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--benign", type=int, required=True)
    p.add_argument("--malicious", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--blob-min", type=int, default=4096)
    p.add_argument("--blob-max", type=int, default=65536)
    p.add_argument("--base-min", type=int, default=50 * 1024)
    p.add_argument("--base-max", type=int, default=500 * 1024)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    try:
        return args.func(args)
    except (OSError, CorpusIOError) as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO
    except (EntroscanError, ValueError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
