"""Text ingestion and featurization: tokenizing, utterance pools, scripts,
labeled corpora, and TF-IDF weighting.

All downstream models (universe classifier, retrieval index) consume the
tokenizer and :class:`TfidfModel` defined here. Natural log everywhere.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

__all__ = [
    "Utterance",
    "Dialogue",
    "LabeledDocument",
    "TfidfModel",
    "tokenize",
    "stopword_set",
    "load_utterance_pool",
    "load_script",
    "load_labeled_corpus",
    "load_label_map",
    "build_tfidf",
]

_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)

# sha256 of data/stopwords.txt; guards against accidental edits, since the
# list is a fixed contract (tests freeze token counts against it).
_STOPWORDS_SHA256 = "4e22be0ad71ae1c41dd7a8f944e851ead671d114edf4faad1ee8c698d2ba5084"

_stopwords_cache: frozenset[str] | None = None


def stopword_set() -> frozenset[str]:
    """The bundled English stop-word list (verified against its checksum)."""
    global _stopwords_cache
    if _stopwords_cache is None:
        raw = resources.files("narrative_arc.data").joinpath("stopwords.txt").read_bytes()
        digest = hashlib.sha256(raw).hexdigest()
        if digest != _STOPWORDS_SHA256:
            raise RuntimeError(f"stopwords.txt checksum mismatch: {digest}")
        _stopwords_cache = frozenset(raw.decode("utf-8").split())
    return _stopwords_cache


def tokenize(text: str, remove_stopwords: bool = False) -> list[str]:
    """Lowercase and split on Unicode word boundaries.

    Punctuation never survives (tokens are runs of word characters,
    underscore excluded). Deterministic; empty input gives an empty list.
    """
    tokens = _WORD_RE.findall(text.lower())
    if remove_stopwords:
        stop = stopword_set()
        tokens = [t for t in tokens if t not in stop]
    return tokens


@dataclass(frozen=True)
class Utterance:
    """One line of dialogue. ``tokens`` is derived from ``text`` and cached."""

    text: str
    tokens: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("utterance text is empty")
        object.__setattr__(self, "tokens", tuple(tokenize(self.text)))


@dataclass(frozen=True)
class Dialogue:
    """An ordered sequence of utterances, optionally speaker-tagged."""

    utterances: tuple[Utterance, ...]
    speakers: tuple[str, ...] | None = None

    def __post_init__(self):
        if len(self.utterances) < 1:
            raise ValueError("dialogue must contain at least one utterance")
        if self.speakers is not None and len(self.speakers) != len(self.utterances):
            raise ValueError("speakers must parallel utterances")

    def __len__(self) -> int:
        return len(self.utterances)


@dataclass(frozen=True)
class LabeledDocument:
    label: str
    text: str


def _decode_utf8(data: bytes, path) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ValueError(
            f"{path}: invalid UTF-8 at byte offset {exc.start}"
        ) from exc


def load_utterance_pool(path, min_chars: int = 10, dedupe: bool = True) -> list[Utterance]:
    """Read one utterance per line, dropping short lines and (optionally)
    exact duplicates. Survivors keep their original order.

    Blank lines are always dropped. ``min_chars`` defaults to 10, the
    threshold used when the subtitle-style corpora were cleaned.
    """
    text = _decode_utf8(Path(path).read_bytes(), path)
    seen: set[str] = set()
    out: list[Utterance] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or len(line) < min_chars:
            continue
        if dedupe:
            if line in seen:
                continue
            seen.add(line)
        out.append(Utterance(line))
    return out


# Screenplay-style speaker prefix: an all-caps name followed by a colon.
_SPEAKER_RE = re.compile(r"^([A-Z][A-Z0-9 .'\-]{0,40}):\s*(.+)$")


def load_script(path) -> Dialogue:
    """Load a script, one line per utterance.

    If every line carries a ``SPEAKER: `` prefix the speakers are split out;
    otherwise the file is taken as plain lines (mixed files fall back to
    plain interpretation).
    """
    text = _decode_utf8(Path(path).read_bytes(), path)
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty script")
    matches = [_SPEAKER_RE.match(ln) for ln in lines]
    if all(matches):
        speakers = tuple(m.group(1).strip() for m in matches)
        utts = tuple(Utterance(m.group(2)) for m in matches)
        return Dialogue(utts, speakers)
    return Dialogue(tuple(Utterance(ln) for ln in lines))


def load_labeled_corpus(path) -> list[LabeledDocument]:
    """Load labeled documents from either layout:

    - a directory ``<root>/<label>/<doc>.txt``, or
    - a single TSV file with ``label<TAB>text`` rows.
    """
    p = Path(path)
    docs: list[LabeledDocument] = []
    if p.is_dir():
        for label_dir in sorted(d for d in p.iterdir() if d.is_dir()):
            for doc in sorted(label_dir.glob("*.txt")):
                body = _decode_utf8(doc.read_bytes(), doc)
                docs.append(LabeledDocument(label_dir.name, body))
    else:
        text = _decode_utf8(p.read_bytes(), p)
        for i, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            if "\t" not in line:
                raise ValueError(f"{path}:{i}: expected label<TAB>text")
            label, body = line.split("\t", 1)
            docs.append(LabeledDocument(label.strip(), body))
    return docs


def load_label_map(path) -> dict[str, str]:
    """Load a raw-label to universe-label TSV map."""
    text = _decode_utf8(Path(path).read_bytes(), path)
    mapping: dict[str, str] = {}
    for i, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        if "\t" not in line:
            raise ValueError(f"{path}:{i}: expected raw_label<TAB>universe_label")
        raw, universe = line.split("\t", 1)
        mapping[raw.strip()] = universe.strip()
    return mapping


TFIDF_VERSION = 1


@dataclass(frozen=True)
class TfidfModel:
    """Vocabulary plus per-token IDF, idf(t) = ln(N / df(t)).

    Token ids are dense in [0, |V|) and assigned in sorted-token order so
    that serialization is byte-stable. No +1 smoothing; tokens unseen at
    build time are dropped at query time.
    """

    vocabulary: dict[str, int]
    idf: tuple[float, ...]
    doc_count: int

    def weights(self, tokens) -> dict[int, float]:
        """Sparse TF-IDF vector: raw term count times idf, unknowns dropped."""
        counts = Counter(tokens)
        out: dict[int, float] = {}
        for tok, tf in counts.items():
            idx = self.vocabulary.get(tok)
            if idx is not None:
                out[idx] = tf * self.idf[idx]
        return out

    def to_dict(self) -> dict:
        id_to_token = sorted(self.vocabulary, key=self.vocabulary.get)
        return {
            "version": TFIDF_VERSION,
            "doc_count": self.doc_count,
            "entries": [
                {"token": tok, "idf": self.idf[i]} for i, tok in enumerate(id_to_token)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TfidfModel":
        if d.get("version") != TFIDF_VERSION:
            raise ValueError(f"unsupported tfidf version: {d.get('version')!r}")
        vocab = {e["token"]: i for i, e in enumerate(d["entries"])}
        idf = tuple(float(e["idf"]) for e in d["entries"])
        return cls(vocabulary=vocab, idf=idf, doc_count=int(d["doc_count"]))

    def save(self, path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")),
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path) -> "TfidfModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def build_tfidf(docs) -> TfidfModel:
    """Fit IDF weights over a collection of token lists."""
    docs = list(docs)
    n = len(docs)
    if n == 0:
        raise ValueError("build_tfidf requires at least one document")
    df: Counter[str] = Counter()
    for tokens in docs:
        df.update(set(tokens))
    vocab = {tok: i for i, tok in enumerate(sorted(df))}
    idf = [0.0] * len(vocab)
    for tok, count in df.items():
        idf[vocab[tok]] = math.log(n / count)
    return TfidfModel(vocabulary=vocab, idf=tuple(idf), doc_count=n)
