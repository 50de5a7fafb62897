"""Auxiliary token features and comment-level statistics.

Three groups live here: per-token features fed to the encoders (edit
labels from an LCS diff of sub vs sup streams, Java keyword/operator
flags, lexical-overlap flags, and shallow comment features with a
deterministic rule-based POS tagger); specificity scoring by normalized
inverse word frequency with equal-frequency level binning; and coherence
scoring by cosine similarity of frequency-weighted bags of static PPMI
embeddings, also binned into levels.
"""

from __future__ import annotations

import enum
import hashlib
import json
import struct
from collections import Counter
from dataclasses import dataclass

import numpy as np

FEATURE_MAGIC = b"HCFEATS1"
FEATURE_SCHEMA_VERSION = 1

JAVA_KEYWORDS = frozenset("""
    abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package
    private protected public return short static strictfp super switch
    synchronized this throw throws transient try void volatile while
""".split())

JAVA_OPERATORS = frozenset([
    "+", "-", "*", "/", "%", "=", "==", "!=", "<", ">", "<=", ">=", "&&",
    "||", "!", "&", "|", "^", "~", "<<", ">>", ">>>", "++", "--", "+=",
    "-=", "*=", "/=", "%=", "&=", "|=", "^=", "?", ":", ".", ",", ";",
    "(", ")", "[", "]", "{", "}", "@", "->", "::",
])

STOP_WORDS = frozenset("""
    a about above after again against all also am an and any are as at be
    because been before being below between both but by can cannot could
    did do does doing down during each either etc few for from further had
    has have having he her here hers herself him himself his how i if in
    into is it its itself just may me might more most must my myself
    neither no nor not now of off on once only onto or other our ours
    ourselves out over own per same shall she should since so some such
    than that the their theirs them themselves then there these they this
    those through to too under until up upon us very via was we were what
    when where whether which while who whom whose why will with within
    without would you your yours yourself
""".split())

_DET = frozenset("the a an this that these those each every all any some no both either neither such".split())
_PREP = frozenset("""of in to for with on at by from into onto over under after before during
    through between within without about against via per upon across along around behind
    below above beneath beside toward towards until since as off out up down""".split())
_PRON = frozenset("it its itself they them their theirs he she him her his hers we us our ours you your i me my something anything everything nothing who whom whose what".split())
_ADV = frozenset("not also always never often currently already again once twice here there now then otherwise first lazily eagerly recursively".split())
_CONJ = frozenset("and or but nor if else when while whether because so than etc".split())
_ADJ = frozenset("new same other empty valid invalid true false null current next previous last underlying internal external default more most available".split())
_VERB_STEMS = frozenset("""
    accept add append apply bind build cache call can catch check clear
    close compare compute consume contain convert copy create decode
    delete destroy determine dispose do does emit encode ensure execute
    extend fetch fill filter find flush format generate get handle has have
    hold implement indicate initialize insert invoke is iterate join load
    log lookup make map may merge move must notify open override parse
    perform print process produce provide push pop read receive register
    reject release remove replace reset resolve retrieve return run save
    see send set should skip sleep sort specify split start stop store
    test throw transform trim try unwrap update use validate verify visit
    wait will wrap write
""".split())

POS_TAGS = ("NOUN", "VERB", "ADJ", "ADV", "DET", "PREP", "PRON", "NUM", "PUNCT", "OTHER")


def java_token_class(token: str) -> tuple[bool, bool]:
    """(is_keyword, is_operator) for one lowercased code token."""
    return token in JAVA_KEYWORDS, token in JAVA_OPERATORS


def pos_tag(token: str) -> str:
    """Deterministic coarse POS tag from small lexicons and suffix rules."""
    if not any(ch.isalnum() for ch in token):
        return "PUNCT"
    if all(ch.isdigit() for ch in token):
        return "NUM"
    if token in _DET:
        return "DET"
    if token in _PREP:
        return "PREP"
    if token in _PRON:
        return "PRON"
    if token in _CONJ:
        return "OTHER"
    if token in _ADV:
        return "ADV"
    if token in _ADJ:
        return "ADJ"
    if token in _VERB_STEMS:
        return "VERB"
    if token.endswith("s") and token[:-1] in _VERB_STEMS:
        return "VERB"
    if len(token) > 4 and (token.endswith("ing") or token.endswith("ed")):
        return "VERB"
    if token.endswith("ly") and len(token) > 3:
        return "ADV"
    if len(token) > 4 and token.endswith(("able", "ible", "ful", "ous", "ive", "less", "ish", "al")):
        return "ADJ"
    return "NOUN"


class EditLabel(enum.IntEnum):
    RETAIN = 0
    ADD = 1
    DELETE = 2
    REPLACE = 3


def lcs_pairs(a: list, b: list) -> list[tuple[int, int]]:
    """Matched (i, j) index pairs of one longest common subsequence."""
    n, m = len(a), len(b)
    L = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        row, prev = L[i], L[i - 1]
        ai = a[i - 1]
        for j in range(1, m + 1):
            if ai == b[j - 1]:
                row[j] = prev[j - 1] + 1
            else:
                row[j] = prev[j] if prev[j] >= row[j - 1] else row[j - 1]
    pairs = []
    i, j = n, m
    while i > 0 and j > 0:
        if a[i - 1] == b[j - 1] and L[i][j] == L[i - 1][j - 1] + 1:
            pairs.append((i - 1, j - 1))
            i -= 1
            j -= 1
        elif L[i - 1][j] >= L[i][j - 1]:
            i -= 1
        else:
            j -= 1
    pairs.reverse()
    return pairs


def diff_labels(sub_tokens: list[str], sup_tokens: list[str]) -> list[EditLabel]:
    """Edit label per sub token relative to the sup sequence.

    LCS members are RETAIN.  A run of sub-only tokens between the same
    two LCS anchors as a run of sup-only tokens is REPLACE; a sub-only
    run with no sup counterpart is ADD.  DELETE never appears here (it
    marks sup-only runs, see diff_labels_with_deletions).
    """
    labels, _ = diff_labels_with_deletions(sub_tokens, sup_tokens)
    return labels


def diff_labels_with_deletions(sub_tokens, sup_tokens):
    """(labels for sub tokens, diagnostic labels for sup tokens)."""
    pairs = lcs_pairs(sub_tokens, sup_tokens)
    sub_labels = [EditLabel.ADD] * len(sub_tokens)
    sup_labels = [EditLabel.DELETE] * len(sup_tokens)
    anchors = pairs + [(len(sub_tokens), len(sup_tokens))]
    prev_i, prev_j = 0, 0
    for i, j in anchors:
        gap_sub = range(prev_i, i)
        gap_sup = range(prev_j, j)
        if len(gap_sub) and len(gap_sup):
            for k in gap_sub:
                sub_labels[k] = EditLabel.REPLACE
        prev_i, prev_j = i + 1, j + 1
    for i, j in pairs:
        sub_labels[i] = EditLabel.RETAIN
        sup_labels[j] = EditLabel.RETAIN
    return sub_labels, sup_labels


def overlap_flags(tokens: list[str], other: set | frozenset) -> list[bool]:
    return [t in other for t in tokens]


def comment_token_features(tokens: list[str]) -> list[tuple[bool, bool, str]]:
    """(appears_more_than_once, is_stop_word, pos_tag) per comment token."""
    counts = Counter(tokens)
    return [(counts[t] > 1, t in STOP_WORDS, pos_tag(t)) for t in tokens]


# stream feature matrices ------------------------------------------------

STREAMS = ("method", "class_name", "sup_comment")
RAW_FEATURE_DIMS = {"method": 12, "class_name": 8, "sup_comment": 17}


def _stream_onehot(stream: str) -> list[float]:
    return [1.0 if s == stream else 0.0 for s in STREAMS]


def _edit_onehot(label: EditLabel) -> list[float]:
    return [1.0 if int(label) == k else 0.0 for k in range(4)]


def method_stream_features(sub_method_tokens, sup_method_tokens,
                           sub_name_tokens, sup_name_tokens,
                           sup_comment_tokens) -> np.ndarray:
    labels = diff_labels(sub_method_tokens, sup_method_tokens)
    sub_name = set(sub_name_tokens)
    sup_name = set(sup_name_tokens)
    sup_com = set(sup_comment_tokens)
    rows = []
    for tok, lab in zip(sub_method_tokens, labels):
        kw, op = java_token_class(tok)
        rows.append([float(kw), float(op)] + _edit_onehot(lab)
                    + [float(tok in sub_name), float(tok in sup_name), float(tok in sup_com)]
                    + _stream_onehot("method"))
    return np.asarray(rows, dtype=np.float64).reshape(len(rows), RAW_FEATURE_DIMS["method"])


def class_name_stream_features(sub_name_tokens, sup_name_tokens,
                               sub_method_tokens) -> np.ndarray:
    labels = diff_labels(sub_name_tokens, sup_name_tokens)
    method = set(sub_method_tokens)
    rows = []
    for tok, lab in zip(sub_name_tokens, labels):
        rows.append(_edit_onehot(lab) + [float(tok in method)] + _stream_onehot("class_name"))
    return np.asarray(rows, dtype=np.float64).reshape(len(rows), RAW_FEATURE_DIMS["class_name"])


def sup_comment_stream_features(sup_comment_tokens, sub_name_tokens,
                                sub_method_tokens) -> np.ndarray:
    name = set(sub_name_tokens)
    method = set(sub_method_tokens)
    shallow = comment_token_features(sup_comment_tokens)
    rows = []
    for tok, (multi, stop, tag) in zip(sup_comment_tokens, shallow):
        pos_onehot = [1.0 if tag == t else 0.0 for t in POS_TAGS]
        rows.append([float(tok in name), float(tok in method), float(multi), float(stop)]
                    + pos_onehot + _stream_onehot("sup_comment"))
    return np.asarray(rows, dtype=np.float64).reshape(len(rows), RAW_FEATURE_DIMS["sup_comment"])


# specificity ------------------------------------------------------------

@dataclass
class CommentStats:
    """Document frequencies over the training-split target comments."""
    n_comments: int
    doc_freq: dict

    @classmethod
    def fit(cls, comments: list[list[str]]) -> "CommentStats":
        df: Counter[str] = Counter()
        for toks in comments:
            df.update(set(toks))
        return cls(n_comments=len(comments), doc_freq=dict(df))

    def iwf(self, token: str) -> float:
        """Smoothed inverse word frequency log(1 + N) / (1 + f_w)."""
        return np.log(1.0 + self.n_comments) / (1.0 + self.doc_freq.get(token, 0))


def niwf_raw(tokens: list[str], stats: CommentStats) -> float:
    """Specificity of a comment: max inverse word frequency over tokens."""
    if not tokens:
        raise ValueError("cannot score empty comment")
    return max(stats.iwf(t) for t in tokens)


@dataclass
class QuantileBins:
    """Equal-frequency binning of a bounded score into K levels."""
    k: int
    lo: float
    hi: float
    edges: list

    @classmethod
    def fit(cls, values: list[float], k: int = 5) -> "QuantileBins":
        vals = sorted(float(v) for v in values)
        if len(set(vals)) < k:
            raise ValueError("need at least %d distinct values to fit %d levels, got %d"
                             % (k, k, len(set(vals))))
        lo, hi = vals[0], vals[-1]
        span = hi - lo
        norm = [(v - lo) / span for v in vals]
        n = len(norm)
        edges = [norm[(j * n) // k] for j in range(1, k)]
        return cls(k=k, lo=lo, hi=hi, edges=edges)

    def normalize(self, value: float) -> float:
        span = self.hi - self.lo
        if span <= 0:
            return 0.0
        return min(1.0, max(0.0, (value - self.lo) / span))

    def level(self, value: float) -> int:
        x = self.normalize(value)
        return 1 + sum(1 for e in self.edges if e < x)


def fit_specificity_bins(comments: list[list[str]], stats: CommentStats,
                         k: int = 5) -> QuantileBins:
    return QuantileBins.fit([niwf_raw(c, stats) for c in comments], k=k)


def niwf_normalized(tokens: list[str], stats: CommentStats, bins: QuantileBins) -> float:
    return bins.normalize(niwf_raw(tokens, stats))


# static embeddings and coherence ----------------------------------------

class StaticEmbeddingTable:
    """Frozen token embeddings from a PPMI co-occurrence factorization."""

    def __init__(self, tokens: list[str], matrix: np.ndarray):
        self.tokens = list(tokens)
        self.matrix = np.asarray(matrix, dtype=np.float64)
        self._index = {t: i for i, t in enumerate(self.tokens)}

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def vector(self, token: str) -> np.ndarray:
        i = self._index.get(token)
        if i is None:
            return np.zeros(self.dim)
        return self.matrix[i]


def train_static_embeddings(token_seqs: list[list[str]], dim: int = 64,
                            window: int = 5, seed: int = 0,
                            max_vocab: int = 5000) -> StaticEmbeddingTable:
    """PPMI co-occurrence counts factorized by symmetric eigendecomposition.

    Deterministic: the PPMI matrix is built over the `max_vocab` most
    frequent tokens (ties lexicographic), eigenvectors get a fixed sign
    convention, and tokens that never co-occur keep exact zero vectors.
    The effective dimension shrinks to the vocabulary size if smaller.
    """
    freq: Counter[str] = Counter()
    for seq in token_seqs:
        freq.update(seq)
    tokens = sorted(freq, key=lambda t: (-freq[t], t))[:max_vocab]
    tokens.sort()
    index = {t: i for i, t in enumerate(tokens)}
    n = len(tokens)
    if n == 0:
        return StaticEmbeddingTable([], np.zeros((0, 1)))

    counts = np.zeros((n, n), dtype=np.float64)
    for seq in token_seqs:
        ids = [index.get(t, -1) for t in seq]
        for i, ti in enumerate(ids):
            if ti < 0:
                continue
            for j in range(i + 1, min(i + 1 + window, len(ids))):
                tj = ids[j]
                if tj < 0:
                    continue
                counts[ti, tj] += 1.0
                counts[tj, ti] += 1.0

    total = counts.sum()
    d = min(dim, n)
    if total == 0:
        return StaticEmbeddingTable(tokens, np.zeros((n, d)))
    marg = counts.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        expected = np.outer(marg, marg) / total
        ratio = np.where(expected > 0, counts * total / np.maximum(expected * total, 1e-300), 0.0)
        ppmi = np.where(ratio > 0, np.log(np.maximum(ratio, 1e-300)), 0.0)
    ppmi = np.maximum(ppmi, 0.0)

    eigvals, eigvecs = np.linalg.eigh(ppmi)
    order = np.argsort(eigvals)[::-1][:d]
    lam = np.maximum(eigvals[order], 0.0)
    vecs = eigvecs[:, order]
    flip = np.sign(vecs[np.argmax(np.abs(vecs), axis=0), np.arange(vecs.shape[1])])
    flip[flip == 0] = 1.0
    vecs = vecs * flip
    emb = vecs * np.sqrt(lam)
    emb[marg == 0] = 0.0
    return StaticEmbeddingTable(tokens, emb)


def sentence_repr(tokens: list[str], emb: StaticEmbeddingTable,
                  stats: CommentStats) -> np.ndarray:
    """Frequency-discounted bag of embeddings: sum of e_w / (1 + f_w)."""
    out = np.zeros(emb.dim if emb.dim else 1)
    for t in tokens:
        out = out + emb.vector(t) / (1.0 + stats.doc_freq.get(t, 0))
    return out


def coherence(tokens_a: list[str], tokens_b: list[str],
              emb: StaticEmbeddingTable, stats: CommentStats) -> float:
    """Cosine similarity of sentence representations; 0 on zero vectors."""
    ra = sentence_repr(tokens_a, emb, stats)
    rb = sentence_repr(tokens_b, emb, stats)
    na, nb = np.linalg.norm(ra), np.linalg.norm(rb)
    if na == 0 or nb == 0:
        return 0.0
    return float(ra @ rb / (na * nb))


COHERENCE_SIDES = ("sup_comment", "sub_method", "sub_class_name")


def fit_coherence_bins(scores_by_side: dict, k: int = 5) -> dict:
    """One QuantileBins per coherence side, fit on training scores."""
    return {side: QuantileBins.fit(scores_by_side[side], k=k) for side in COHERENCE_SIDES}


def combine_coherence_levels(levels: dict) -> int:
    """One conditioning level from the per-side levels: rounded mean."""
    vals = [levels[s] for s in COHERENCE_SIDES]
    return int(np.floor(sum(vals) / len(vals) + 0.5))


# artifact bundle ---------------------------------------------------------

@dataclass
class FeatureArtifacts:
    mode: str
    dataset_hash: str
    stats: CommentStats
    spec_bins: QuantileBins
    coh_bins: dict
    embeddings: StaticEmbeddingTable

    def save(self, path: str) -> None:
        header = {
            "schema_version": FEATURE_SCHEMA_VERSION,
            "mode": self.mode,
            "dataset_hash": self.dataset_hash,
            "stats": {"n_comments": self.stats.n_comments, "doc_freq": self.stats.doc_freq},
            "spec_bins": {"k": self.spec_bins.k, "lo": self.spec_bins.lo,
                          "hi": self.spec_bins.hi, "edges": self.spec_bins.edges},
            "coh_bins": {
                side: {"k": b.k, "lo": b.lo, "hi": b.hi, "edges": b.edges}
                for side, b in self.coh_bins.items()
            },
            "emb_tokens": self.embeddings.tokens,
            "emb_shape": list(self.embeddings.matrix.shape),
        }
        blob = json.dumps(header, sort_keys=True).encode("utf-8")
        with open(path, "wb") as fh:
            fh.write(FEATURE_MAGIC)
            fh.write(struct.pack("<Q", len(blob)))
            fh.write(blob)
            fh.write(np.ascontiguousarray(self.embeddings.matrix, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path: str) -> "FeatureArtifacts":
        with open(path, "rb") as fh:
            if fh.read(8) != FEATURE_MAGIC:
                raise ValueError("not a feature artifact file: %s" % path)
            (hlen,) = struct.unpack("<Q", fh.read(8))
            header = json.loads(fh.read(hlen).decode("utf-8"))
            if header.get("schema_version") != FEATURE_SCHEMA_VERSION:
                raise ValueError("unsupported feature artifact schema_version")
            shape = tuple(header["emb_shape"])
            count = int(np.prod(shape)) if shape else 0
            buf = fh.read(count * 8)
            if len(buf) != count * 8:
                raise ValueError("truncated feature artifact payload")
            matrix = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()
        return cls(
            mode=header["mode"],
            dataset_hash=header["dataset_hash"],
            stats=CommentStats(header["stats"]["n_comments"], dict(header["stats"]["doc_freq"])),
            spec_bins=QuantileBins(**header["spec_bins"]),
            coh_bins={side: QuantileBins(**b) for side, b in header["coh_bins"].items()},
            embeddings=StaticEmbeddingTable(header["emb_tokens"], matrix),
        )


def dataset_hash(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
