"""Command-line pipeline: corpus file in, tabular/plot artifacts out.

Each subcommand reads the corpus named in the config, runs the chain up to
its stage in memory, and writes that stage's artifacts plus a manifest with
the config, seed, library versions and a content hash per file.  All
randomness flows from the single --seed flag, so reruns are byte-identical.

Exit codes: 0 success, 2 config error, 3 data error, 4 numeric error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import platform
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy

from . import __version__, ca, corpus, impact, segmentation
from .cluster import cluster as build_dendrogram
from .cluster import dendrogram_csv_rows, dendrogram_json_dict, to_newick
from .errors import ChronosemError, ConfigError

SUBCOMMANDS = ("ingest", "ca", "cluster", "segment", "impact", "drilldown", "all")


@dataclass
class PipelineConfig:
    input: str
    out: str
    stopwords: str | None = None
    min_global_freq: int = 5
    min_doc_count: int = 5
    alpha: float = 0.15
    n_permutations: int = 5000
    rng_seed: int = 0
    campaign: int | None = None
    top_tweets: int = 10
    top_terms: int = 15
    dims: str = "full"


def _validate(config: PipelineConfig, subcommand: str):
    if not Path(config.input).exists():
        raise ConfigError(f"input file not found: {config.input}")
    if config.stopwords is not None and not Path(config.stopwords).exists():
        raise ConfigError(f"stopword file not found: {config.stopwords}")
    if config.min_global_freq < 1 or config.min_doc_count < 1:
        raise ConfigError("thresholds --min-freq and --min-docs must be >= 1")
    if not 0.0 < config.alpha < 1.0:
        raise ConfigError(f"--alpha {config.alpha} outside (0, 1)")
    if config.n_permutations < 1:
        raise ConfigError("--permutations must be >= 1")
    if config.rng_seed < 0:
        raise ConfigError("--seed must be nonnegative")
    if config.dims not in ("full", "plane"):
        raise ConfigError(f"--dims must be 'full' or 'plane', got {config.dims!r}")
    if subcommand == "drilldown" and config.campaign is None:
        raise ConfigError("drilldown requires --campaign")


def _write_json(path: Path, obj) -> Path:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _write_csv(path: Path, rows) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in rows:
            writer.writerow(row)
    return path


def _fmt(x: float) -> str:
    return repr(float(x))


class _Pipeline:
    """Runs stages lazily so each subcommand computes only what it needs."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = Path(config.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.artifacts: list[Path] = []
        self._docs = None
        self._vocab = None
        self._tdm = None
        self._model = None
        self._coords = None  # clustering/segmentation coordinate view

    # -- stage data ------------------------------------------------------
    def docs(self):
        if self._docs is None:
            raw = corpus.load_corpus(self.config.input)
            self._docs = corpus.merge_adjacent_initiating(raw)
        return self._docs

    def tdm(self):
        if self._tdm is None:
            stop = (
                corpus.load_stopwords(self.config.stopwords)
                if self.config.stopwords
                else corpus.DEFAULT_STOPWORDS
            )
            tok = corpus.TokenizerConfig(stopwords=stop)
            self._vocab = corpus.build_vocabulary(self.docs(), tok)
            self._tdm = corpus.threshold_matrix(
                self.docs(),
                self._vocab,
                self.config.min_global_freq,
                self.config.min_doc_count,
            )
        return self._tdm

    def model(self):
        if self._model is None:
            _, self._model = ca.fit_ca(self.tdm().principal_counts())
        return self._model

    def coords(self):
        if self._coords is None:
            full = self.model().row_coords
            self._coords = full[:, :2] if self.config.dims == "plane" else full
        return self._coords

    # -- stages ----------------------------------------------------------
    def stage_ingest(self):
        tdm = self.tdm()
        rows = [("row", "col", "value")]
        rows += list(corpus.matrix_to_coo_rows(tdm))
        self.artifacts.append(_write_csv(self.out / "matrix.csv", rows))
        self.artifacts.append(
            _write_json(self.out / "matrix_roles.json", corpus.matrix_roles_dict(tdm))
        )
        retained = set(tdm.terms)
        vocab_rows = [("term", "global_freq", "doc_count", "retained")]
        for t in self._vocab.terms:
            vocab_rows.append(
                (t, self._vocab.global_freq[t], self._vocab.doc_count[t], int(t in retained))
            )
        self.artifacts.append(_write_csv(self.out / "vocab.csv", vocab_rows))

    def stage_ca(self):
        tdm = self.tdm()
        model = self.model()
        seq = [int(s) for s in tdm.principal_seq_nos()]
        self.artifacts.append(
            _write_json(
                self.out / "model.json",
                ca.model_export_dict(model, row_ids=seq, col_ids=tdm.terms),
            )
        )
        header = ["id"] + [f"f{s + 1}" for s in range(model.n_factors)]
        rows = [header] + [
            [seq[i]] + [_fmt(v) for v in model.row_coords[i]]
            for i in range(len(seq))
        ]
        self.artifacts.append(_write_csv(self.out / "model_rows.csv", rows))
        rows = [header] + [
            [tdm.terms[j]] + [_fmt(v) for v in model.col_coords[j]]
            for j in range(len(tdm.terms))
        ]
        self.artifacts.append(_write_csv(self.out / "model_cols.csv", rows))

    def stage_cluster(self):
        tdm = self.tdm()
        seq = [int(s) for s in tdm.principal_seq_nos()]
        dendro = build_dendrogram(self.coords(), ids=seq)
        self.artifacts.append(
            _write_json(self.out / "dendrogram.json", dendrogram_json_dict(dendro))
        )
        with open(self.out / "dendrogram.newick", "w", encoding="utf-8") as fh:
            fh.write(to_newick(dendro) + "\n")
        self.artifacts.append(self.out / "dendrogram.newick")
        self.artifacts.append(
            _write_csv(self.out / "dendrogram.csv", dendrogram_csv_rows(dendro))
        )

    def stage_segment(self):
        tdm = self.tdm()
        seq = [int(s) for s in tdm.principal_seq_nos()]
        config = segmentation.PermTestConfig(
            alpha=self.config.alpha,
            n_permutations=self.config.n_permutations,
            rng_seed=self.config.rng_seed,
        )
        result = segmentation.segment(self.coords(), config, ids=seq)
        fmap = segmentation.segment_centroids_as_supplementary(
            result, tdm.principal_counts()
        )
        payload = {
            "config": {
                "alpha": config.alpha,
                "n_permutations": config.n_permutations,
                "rng_seed": config.rng_seed,
                "dims": self.config.dims,
            },
            "n_segments": result.n_segments,
            "segments": [
                {
                    "id": k + 1,
                    "start_seq": seg[0],
                    "end_seq": seg[-1],
                    "members": seg,
                    "singleton": len(seg) == 1,
                }
                for k, seg in enumerate(result.segments)
            ],
            "blocked": [
                {
                    "boundary_after_seq": b.boundary_after,
                    "h": b.h,
                    "p": b.p,
                }
                for b in result.blocked
            ],
        }
        self.artifacts.append(_write_json(self.out / "segments.json", payload))
        rows = [
            (
                "segment_id", "start_seq", "end_seq", "n_docs",
                "singleton", "role", "f1", "f2",
            )
        ]
        for k, seg in enumerate(result.segments):
            c = fmap.coords[k]
            f1 = c[0] if len(c) > 0 else 0.0
            f2 = c[1] if len(c) > 1 else 0.0
            rows.append(
                (
                    k + 1, seg[0], seg[-1], len(seg), int(len(seg) == 1),
                    "supplementary" if fmap.supplementary[k] else "principal",
                    _fmt(f1), _fmt(f2),
                )
            )
        self.artifacts.append(_write_csv(self.out / "segments.csv", rows))

    def stage_impact(self):
        report = impact.build_impact_report(self.tdm(), self.model())
        self.artifacts.append(_write_json(self.out / "impact.json", report.to_dict()))
        rows = [
            (
                "campaign", "distance_plane", "distance_full", "z_score",
                "two_sided_tail_percent", "percent_pairs_below",
            )
        ]
        for c in report.campaigns:
            rows.append(
                (
                    c.campaign, _fmt(c.distance_plane), _fmt(c.distance_full),
                    _fmt(c.z_score), _fmt(c.two_sided_tail_percent),
                    _fmt(c.percent_pairs_below),
                )
            )
        self.artifacts.append(_write_csv(self.out / "impact.csv", rows))
        rows = [("campaign", "distance_plane", "distance_full")]
        for c in report.campaigns:
            rows.append((c.campaign, _fmt(c.distance_plane), _fmt(c.distance_full)))
        self.artifacts.append(_write_csv(self.out / "impact_curve.csv", rows))

    def stage_drilldown(self):
        result = impact.drilldown(
            self.tdm(),
            self.config.campaign,
            top_tweets=self.config.top_tweets,
            top_terms=self.config.top_terms,
        )
        payload = {
            "campaign": result.campaign,
            "n_docs": int(len(result.seq_nos)),
            "n_terms": len(result.terms),
            "initiating_seq_nos": result.initiating_seq_nos,
            "percent_inertia_plane": result.model.percent_inertia[:2].tolist(),
            "top_tweets": result.top_tweets,
            "top_terms": result.top_terms,
        }
        self.artifacts.append(_write_json(self.out / "drilldown.json", payload))
        rows = [("seq_no", "plane_contribution_percent", "f1", "f2")]
        for t in result.top_tweets:
            coords = t["coords"] + [0.0] * (2 - len(t["coords"]))
            rows.append(
                (
                    t["seq_no"], _fmt(t["plane_contribution_percent"]),
                    _fmt(coords[0]), _fmt(coords[1]),
                )
            )
        self.artifacts.append(_write_csv(self.out / "drilldown_tweets.csv", rows))
        rows = [("term", "plane_magnitude", "f1", "f2")]
        for t in result.top_terms:
            coords = t["coords"] + [0.0] * (2 - len(t["coords"]))
            rows.append(
                (t["term"], _fmt(t["plane_magnitude"]), _fmt(coords[0]), _fmt(coords[1]))
            )
        self.artifacts.append(_write_csv(self.out / "drilldown_terms.csv", rows))

    def write_manifest(self, subcommand: str) -> Path:
        entries = []
        for path in sorted(self.artifacts):
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
            entries.append({"path": path.name, "sha256": digest})
        manifest = {
            "subcommand": subcommand,
            "config": dataclasses.asdict(self.config),
            "seed": self.config.rng_seed,
            "versions": {
                "chronosem": __version__,
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "artifacts": entries,
        }
        return _write_json(self.out / "manifest.json", manifest)


def run(subcommand: str, config: PipelineConfig) -> list[Path]:
    """Execute one subcommand; returns the written artifact paths."""
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    _validate(config, subcommand)
    pipe = _Pipeline(config)
    stages = {
        "ingest": [pipe.stage_ingest],
        "ca": [pipe.stage_ca],
        "cluster": [pipe.stage_cluster],
        "segment": [pipe.stage_segment],
        "impact": [pipe.stage_impact],
        "drilldown": [pipe.stage_drilldown],
        "all": [
            pipe.stage_ingest,
            pipe.stage_ca,
            pipe.stage_cluster,
            pipe.stage_segment,
            pipe.stage_impact,
        ],
    }[subcommand]
    for stage in stages:
        stage()
    manifest = pipe.write_manifest(subcommand)
    return pipe.artifacts + [manifest]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chronosem",
        description=(
            "Map a chronological text corpus into a latent factor space, "
            "segment it into homogeneous sub-narratives and score the impact "
            "of initiating documents."
        ),
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, help_text in (
        ("ingest", "corpus -> thresholded matrix + vocabulary report"),
        ("ca", "corpus -> factor model JSON/CSV"),
        ("cluster", "corpus -> constrained dendrogram exports"),
        ("segment", "corpus -> significant segments + segment factor map"),
        ("impact", "corpus -> per-campaign impact report and curve data"),
        ("drilldown", "corpus -> single-campaign factor space and top lists"),
        ("all", "run the full chain"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--input", required=True, help="corpus CSV or JSON-lines file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--stopwords", default=None, help="stopword file, one term per line")
        p.add_argument("--min-freq", type=int, default=5, dest="min_global_freq",
                       help="minimum global term frequency (default 5)")
        p.add_argument("--min-docs", type=int, default=5, dest="min_doc_count",
                       help="minimum number of documents per term (default 5)")
        p.add_argument("--alpha", type=float, default=0.15,
                       help="significance level for segment gating (default 0.15)")
        p.add_argument("--permutations", type=int, default=5000, dest="n_permutations",
                       help="Monte Carlo permutations per gate (default 5000)")
        p.add_argument("--seed", type=int, default=0, dest="rng_seed",
                       help="seed for all randomness (default 0)")
        p.add_argument("--campaign", type=int, default=None,
                       help="campaign id (required for drilldown)")
        p.add_argument("--top-tweets", type=int, default=10, dest="top_tweets",
                       help="documents to label in drilldown (default 10)")
        p.add_argument("--top-terms", type=int, default=15, dest="top_terms",
                       help="terms to label in drilldown (default 15)")
        p.add_argument("--dims", choices=("full", "plane"), default="full",
                       help="coordinate space for clustering/segmentation")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    fields = {f.name for f in dataclasses.fields(PipelineConfig)}
    config = PipelineConfig(**{k: v for k, v in vars(args).items() if k in fields})
    try:
        paths = run(args.subcommand, config)
    except ChronosemError as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ConfigError) and ": " in str(exc):
            payload["path"] = str(exc).rsplit(": ", 1)[-1]
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return exc.exit_code
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
