"""Corpus ingestion and term-document matrix construction.

Raw documents are tokenized with deliberately blunt rules (alphabetic runs
only, no stemming or lemmatization), a vocabulary is thresholded on global
frequency and document count, and the surviving counts are assembled into a
sparse matrix whose rows and columns carry analysis roles: ordinary documents
are principal rows, initiating documents are supplementary rows, terms are
principal columns and per-campaign indicator columns are supplementary.
"""

from __future__ import annotations

import csv
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    AllDocumentsEmpty,
    CorpusFormatError,
    MixedCampaign,
    NonAdjacent,
)

# Function-word and rump-token list used when no stopword file is supplied.
# Deliberately small: function words are kept unless they are pure noise,
# because they can be emotionally indicative in microblog text.
DEFAULT_STOPWORDS = frozenset(
    {
        "the", "to", "and", "of", "in", "it", "is", "for", "that", "on",
        "at", "be", "this", "what", "an", "if", "ve", "don", "ly", "th",
        "tr", "ll",
    }
)

# Leftovers of contraction splitting ("I'll" -> "ll" etc.).  "s" and "t"
# are already removed by the minimum-length rule; listed for clarity.
DEFAULT_PARTIAL_WORDS = frozenset({"ll", "s", "t"})

_ALPHA_RUN = re.compile(r"[A-Za-z]+")


@dataclass(frozen=True)
class TokenizerConfig:
    stopwords: frozenset = DEFAULT_STOPWORDS
    partial_words: frozenset = DEFAULT_PARTIAL_WORDS
    min_token_len: int = 2


@dataclass(frozen=True)
class Document:
    """One chronological document of the corpus.

    ``seq_no`` is the 1-based chronological index; ``campaign`` groups
    documents into intervention periods and is required whenever
    ``is_initiating`` is set.
    """

    seq_no: int
    raw_text: str
    is_initiating: bool = False
    campaign: Optional[int] = None

    def __post_init__(self):
        if self.is_initiating and self.campaign is None:
            raise CorpusFormatError(
                f"document {self.seq_no}: initiating documents need a campaign id"
            )


def tokenize(raw_text: str, config: TokenizerConfig = TokenizerConfig()) -> list[str]:
    """Split raw text into retained terms.

    Rules, in order: the literal HTML-entity sequence ``&amp;`` becomes the
    word "and"; every maximal run of non-alphabetic characters acts as a
    delimiter (so punctuation fragments words rather than being deleted
    in place); tokens are lowercased; tokens shorter than
    ``config.min_token_len`` are dropped; stopwords and contraction rumps
    are dropped.  Empty input yields an empty list.
    """
    if not raw_text:
        return []
    text = raw_text.replace("&amp;", "and")
    out = []
    for match in _ALPHA_RUN.finditer(text):
        tok = match.group().lower()
        if len(tok) < config.min_token_len:
            continue
        if tok in config.stopwords or tok in config.partial_words:
            continue
        out.append(tok)
    return out


@dataclass
class Vocabulary:
    """Distinct post-tokenization terms with usage counts.

    ``terms`` preserves first-appearance order; ``global_freq`` counts every
    occurrence, ``doc_count`` counts documents containing the term at least
    once.  The tokenizer config is kept so downstream matrix construction
    re-tokenizes identically.
    """

    terms: list[str]
    global_freq: dict[str, int]
    doc_count: dict[str, int]
    config: TokenizerConfig = field(default_factory=TokenizerConfig)


def build_vocabulary(
    docs: Sequence[Document], tokenizer: TokenizerConfig = TokenizerConfig()
) -> Vocabulary:
    """Collect all distinct terms with global and per-document counts."""
    if not docs:
        raise CorpusFormatError("cannot build a vocabulary from zero documents")
    terms: list[str] = []
    global_freq: dict[str, int] = {}
    doc_count: dict[str, int] = {}
    for doc in docs:
        counts = Counter(tokenize(doc.raw_text, tokenizer))
        for term, n in counts.items():
            if term not in global_freq:
                terms.append(term)
                global_freq[term] = 0
                doc_count[term] = 0
            global_freq[term] += n
            doc_count[term] += 1
    return Vocabulary(terms, global_freq, doc_count, tokenizer)


@dataclass
class TermDocMatrix:
    """Thresholded counts with row/column role annotations.

    Rows follow corpus order over the retained documents.  The first
    ``len(terms)`` columns are principal term columns; one supplementary
    indicator column per campaign id follows (value 1 in the row's campaign
    column for every labelled document).
    """

    counts: sp.csr_matrix
    seq_nos: np.ndarray
    row_supplementary: np.ndarray  # bool per row; True = initiating document
    campaigns: np.ndarray  # int per row, -1 when unlabelled
    terms: list[str]
    campaign_ids: list[int]
    dropped_docs: list[int]  # seq_nos emptied by thresholding
    dropped_terms: list[str]  # retained by thresholds but absent from principal rows

    @property
    def n_rows(self) -> int:
        return self.counts.shape[0]

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    def principal_counts(self) -> sp.csr_matrix:
        """Principal-row x principal-column block (the analyzed table)."""
        return self.counts[~self.row_supplementary][:, : self.n_terms]

    def principal_seq_nos(self) -> np.ndarray:
        return self.seq_nos[~self.row_supplementary]

    def principal_campaigns(self) -> np.ndarray:
        return self.campaigns[~self.row_supplementary]

    def supplementary_rows(self) -> list[tuple[int, int, np.ndarray]]:
        """(seq_no, campaign, term-count vector) per supplementary row."""
        out = []
        dense = self.counts[:, : self.n_terms]
        for i in np.flatnonzero(self.row_supplementary):
            out.append(
                (
                    int(self.seq_nos[i]),
                    int(self.campaigns[i]),
                    np.asarray(dense[i].todense()).ravel(),
                )
            )
        return out

    def col_roles(self) -> list[str]:
        return ["term"] * self.n_terms + ["campaign"] * len(self.campaign_ids)


def threshold_matrix(
    docs: Sequence[Document],
    vocab: Vocabulary,
    min_global_freq: int = 5,
    min_doc_count: int = 5,
) -> TermDocMatrix:
    """Retain sufficiently shared terms and assemble the role-tagged matrix.

    A term survives when ``global_freq >= min_global_freq`` and
    ``doc_count >= min_doc_count`` (counted over all documents).  Documents
    left with an all-zero row are dropped and recorded.  Initiating
    documents become supplementary rows; everything else is principal.
    Raises :class:`AllDocumentsEmpty` when no principal document survives.
    """
    if min_global_freq < 1 or min_doc_count < 1:
        raise CorpusFormatError("thresholds must be >= 1")
    retained = [
        t
        for t in vocab.terms
        if vocab.global_freq[t] >= min_global_freq
        and vocab.doc_count[t] >= min_doc_count
    ]
    term_index = {t: j for j, t in enumerate(retained)}

    rows: list[int] = []
    cols: list[int] = []
    vals: list[int] = []
    kept_docs: list[Document] = []
    dropped: list[int] = []
    for doc in docs:
        counts = Counter(tokenize(doc.raw_text, vocab.config))
        entries = [(term_index[t], n) for t, n in counts.items() if t in term_index]
        if not entries:
            dropped.append(doc.seq_no)
            continue
        r = len(kept_docs)
        kept_docs.append(doc)
        for j, n in entries:
            rows.append(r)
            cols.append(j)
            vals.append(n)

    supp = np.array([d.is_initiating for d in kept_docs], dtype=bool)
    if not kept_docs or not np.any(~supp):
        raise AllDocumentsEmpty(
            "no principal document survives thresholding "
            f"(min_global_freq={min_global_freq}, min_doc_count={min_doc_count})"
        )

    term_block = sp.csr_matrix(
        (vals, (rows, cols)), shape=(len(kept_docs), len(retained)), dtype=np.int64
    )

    # A term whose every occurrence sits in supplementary rows would leave a
    # zero column in the analyzed block; drop it so downstream margins stay
    # positive.
    principal_support = np.asarray(
        term_block[~supp].sum(axis=0)
    ).ravel()
    keep_cols = principal_support > 0
    dropped_terms = [t for t, k in zip(retained, keep_cols) if not k]
    if dropped_terms:
        term_block = term_block[:, keep_cols]
        retained = [t for t, k in zip(retained, keep_cols) if k]

    campaigns = np.array(
        [d.campaign if d.campaign is not None else -1 for d in kept_docs],
        dtype=np.int64,
    )
    campaign_ids = sorted({int(c) for c in campaigns if c >= 0})
    if campaign_ids:
        cat_rows = [i for i, c in enumerate(campaigns) if c >= 0]
        cat_cols = [campaign_ids.index(int(campaigns[i])) for i in cat_rows]
        cat_block = sp.csr_matrix(
            (np.ones(len(cat_rows), dtype=np.int64), (cat_rows, cat_cols)),
            shape=(len(kept_docs), len(campaign_ids)),
        )
        counts = sp.hstack([term_block, cat_block], format="csr")
    else:
        counts = term_block.tocsr()

    return TermDocMatrix(
        counts=counts,
        seq_nos=np.array([d.seq_no for d in kept_docs], dtype=np.int64),
        row_supplementary=supp,
        campaigns=campaigns,
        terms=retained,
        campaign_ids=campaign_ids,
        dropped_docs=dropped,
        dropped_terms=dropped_terms,
    )


def merge_initiating(docs: Sequence[Document], indices: Sequence[int]) -> Document:
    """Combine chronologically adjacent same-campaign documents into one.

    The merged document keeps the first seq_no, joins the raw texts with a
    space and is flagged initiating.  A single index returns that document
    unchanged.
    """
    if not indices:
        raise NonAdjacent("no indices to merge")
    by_seq = {d.seq_no: d for d in docs}
    try:
        chosen = [by_seq[i] for i in indices]
    except KeyError as exc:
        raise NonAdjacent(f"seq_no {exc.args[0]} not in corpus") from None
    if len(chosen) == 1:
        return chosen[0]

    positions = sorted(range(len(docs)), key=lambda k: docs[k].seq_no)
    pos_of = {docs[k].seq_no: rank for rank, k in enumerate(positions)}
    ranks = sorted(pos_of[d.seq_no] for d in chosen)
    if ranks != list(range(ranks[0], ranks[0] + len(ranks))):
        raise NonAdjacent(f"documents {list(indices)} are not chronologically adjacent")

    campaigns = {d.campaign for d in chosen}
    if len(campaigns) != 1 or campaigns == {None}:
        raise MixedCampaign(
            f"documents {list(indices)} do not share a single campaign id"
        )
    ordered = sorted(chosen, key=lambda d: d.seq_no)
    return Document(
        seq_no=ordered[0].seq_no,
        raw_text=" ".join(d.raw_text for d in ordered),
        is_initiating=True,
        campaign=campaigns.pop(),
    )


def merge_adjacent_initiating(docs: Sequence[Document]) -> list[Document]:
    """Collapse each run of adjacent same-campaign initiating documents.

    Campaigns occasionally launch with two back-to-back posts; the pair is
    analyzed as a single initiating document.
    """
    out: list[Document] = []
    i = 0
    while i < len(docs):
        d = docs[i]
        if not d.is_initiating:
            out.append(d)
            i += 1
            continue
        j = i + 1
        while (
            j < len(docs)
            and docs[j].is_initiating
            and docs[j].campaign == d.campaign
        ):
            j += 1
        if j - i > 1:
            out.append(merge_initiating(docs, [docs[k].seq_no for k in range(i, j)]))
        else:
            out.append(d)
        i = j
    return out


def load_corpus(path: str | Path) -> list[Document]:
    """Read a corpus from CSV or JSON-lines.

    Expected fields: ``seq_no``, ``text``, ``is_initiating`` (0/1) and
    ``campaign`` (int, may be empty).  Seq_nos must be strictly increasing.
    """
    path = Path(path)
    records: list[dict] = []
    if path.suffix.lower() in (".jsonl", ".ndjson", ".json"):
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(json.loads(line))
    else:
        with open(path, newline="", encoding="utf-8") as fh:
            records = list(csv.DictReader(fh))
    if not records:
        raise CorpusFormatError(f"{path}: corpus file is empty")

    docs: list[Document] = []
    prev = None
    for rec in records:
        try:
            seq_no = int(rec["seq_no"])
            text = str(rec["text"])
            init = str(rec.get("is_initiating", "0")).strip()
            camp = rec.get("campaign")
        except (KeyError, ValueError, TypeError) as exc:
            raise CorpusFormatError(f"{path}: bad record {rec!r}: {exc}") from None
        if prev is not None and seq_no <= prev:
            raise CorpusFormatError(
                f"{path}: seq_no {seq_no} not strictly increasing"
            )
        prev = seq_no
        campaign = None
        if camp is not None and str(camp).strip() != "":
            campaign = int(camp)
        docs.append(
            Document(
                seq_no=seq_no,
                raw_text=text,
                is_initiating=init in ("1", "true", "True"),
                campaign=campaign,
            )
        )
    return docs


def load_stopwords(path: str | Path) -> frozenset:
    """One term per line; blank lines ignored."""
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.strip() for line in fh if line.strip())


def matrix_to_coo_rows(tdm: TermDocMatrix) -> Iterable[tuple[int, int, int]]:
    """Coordinate-list triples (row, col, value) in row-major order."""
    coo = tdm.counts.tocoo()
    order = np.lexsort((coo.col, coo.row))
    for k in order:
        yield int(coo.row[k]), int(coo.col[k]), int(coo.data[k])


def matrix_roles_dict(tdm: TermDocMatrix) -> dict:
    """Sidecar metadata describing row/column roles for the COO export."""
    rows = []
    for i in range(tdm.n_rows):
        rows.append(
            {
                "seq_no": int(tdm.seq_nos[i]),
                "role": "supplementary" if tdm.row_supplementary[i] else "principal",
                "campaign": int(tdm.campaigns[i]) if tdm.campaigns[i] >= 0 else None,
            }
        )
    cols = [{"name": t, "role": "term"} for t in tdm.terms]
    cols += [{"name": f"campaign:{c}", "role": "campaign"} for c in tdm.campaign_ids]
    return {
        "shape": [tdm.n_rows, tdm.counts.shape[1]],
        "rows": rows,
        "cols": cols,
        "dropped_docs": list(tdm.dropped_docs),
        "dropped_terms": list(tdm.dropped_terms),
    }
