"""Category lexica with prefix wildcards and multi-word phrases.

A lexicon file is UTF-8, one term per line: a trailing ``*`` marks a prefix
wildcard, inner whitespace separates the tokens of a phrase, ``#`` starts a
comment line and blank lines are ignored. The file name stem is the category
id. An exclusion file uses ``category<TAB>term`` lines with the same comment
and blank-line conventions.
"""
from __future__ import annotations

import hashlib
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping

log = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[^\W\d_]+")


class LexiconError(ValueError):
    """Raised for malformed lexicon files, duplicates, or empty lexica."""


def tokenize(text: str) -> list[str]:
    """Split text into maximal runs of Unicode letters, casefolded.

    Digits, punctuation, whitespace, ``#`` and ``@`` all act as separators,
    so "#angst" yields the token "angst". Casefolding (rather than plain
    lowercasing) keeps matching stable under German ß/SS case round-trips.
    """
    return [t.casefold() for t in _TOKEN_RE.findall(text)]


@dataclass(frozen=True)
class LexiconEntry:
    """One dictionary term: exact token, prefix wildcard, or phrase."""

    surface: str  # raw term as written, e.g. "tot*" or "Öffentlicher Dienst"
    category: str
    tokens: tuple[str, ...]  # casefolded, wildcard marker stripped
    wildcard: bool

    def __post_init__(self) -> None:
        if not self.tokens:
            raise LexiconError(f"entry {self.surface!r} has no tokens")
        for tok in self.tokens:
            if not tok or not all(ch.isalpha() for ch in tok):
                raise LexiconError(
                    f"entry {self.surface!r}: token {tok!r} is not letters-only"
                )


@dataclass(frozen=True)
class Lexicon:
    """Immutable category -> entries mapping plus a content version hash."""

    categories: Mapping[str, tuple[LexiconEntry, ...]]
    version: str

    def entries(self) -> Iterator[LexiconEntry]:
        for cat in sorted(self.categories):
            yield from self.categories[cat]

    def entry_count(self) -> int:
        return sum(len(v) for v in self.categories.values())

    def find(self, category: str, surface: str) -> LexiconEntry | None:
        folded = surface.casefold()
        for entry in self.categories.get(category, ()):
            if entry.surface.casefold() == folded:
                return entry
        return None


@dataclass(frozen=True)
class ExclusionList:
    """Terms to delete from a loaded lexicon, as (category, surface) pairs."""

    removals: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class ExclusionReport:
    removed_per_category: Mapping[str, int]
    unresolved: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class MatchResult:
    """Per-category and per-entry match counts for one post.

    ``category_counts`` carries every category of the lexicon (zeros
    included); ``term_counts`` is sparse and only holds entries that matched.
    """

    token_count: int
    category_counts: Mapping[str, int]
    term_counts: Mapping[LexiconEntry, int]
    lexicon_version: str


def _parse_term(raw: str) -> tuple[tuple[str, ...], bool]:
    """Parse one term into (tokens, wildcard). Raises LexiconError."""
    wildcard = raw.endswith("*")
    body = raw[:-1] if wildcard else raw
    if "*" in body:
        raise LexiconError("wildcard '*' is only allowed as the final character")
    pieces = body.split()
    if not pieces:
        raise LexiconError("term is empty after removing the wildcard marker")
    tokens = []
    for piece in pieces:
        folded = piece.casefold()
        if not folded or not all(ch.isalpha() for ch in folded):
            raise LexiconError(f"token {piece!r} is not letters-only")
        tokens.append(folded)
    return tuple(tokens), wildcard


def load_lexicon(paths: Iterable[str | Path]) -> Lexicon:
    """Load category files into a Lexicon.

    Each file name stem is the category id. Malformed lines and duplicate
    (category, surface) pairs are hard errors with file:line diagnostics.
    """
    paths = [Path(p) for p in paths]
    if not paths:
        raise LexiconError("no lexicon files given")
    categories: dict[str, list[LexiconEntry]] = {}
    problems: list[str] = []
    hasher = hashlib.sha256()
    for path in sorted(paths, key=lambda p: p.stem):
        if not path.exists():
            raise LexiconError(f"lexicon file not found: {path}")
        data = path.read_bytes()
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise LexiconError(f"{path}: not valid UTF-8 ({exc})") from exc
        category = path.stem
        hasher.update(category.encode("utf-8") + b"\x00" + data + b"\x00")
        entries = categories.setdefault(category, [])
        seen = {e.surface.casefold() for e in entries}
        for lineno, line in enumerate(text.splitlines(), start=1):
            term = line.strip()
            if not term or term.startswith("#"):
                continue
            try:
                tokens, wildcard = _parse_term(term)
            except LexiconError as exc:
                problems.append(f"{path}:{lineno}: {exc}")
                continue
            key = term.casefold()
            if key in seen:
                problems.append(
                    f"{path}:{lineno}: duplicate entry ({category}, {term!r})"
                )
                continue
            seen.add(key)
            entries.append(
                LexiconEntry(surface=term, category=category, tokens=tokens, wildcard=wildcard)
            )
    if problems:
        raise LexiconError("lexicon load failed:\n" + "\n".join(problems))
    frozen = {cat: tuple(entries) for cat, entries in categories.items()}
    return Lexicon(categories=frozen, version=hasher.hexdigest()[:16])


def load_exclusions(path: str | Path) -> ExclusionList:
    """Load an exclusion file of ``category<TAB>term`` lines."""
    path = Path(path)
    if not path.exists():
        raise LexiconError(f"exclusion file not found: {path}")
    removals: list[tuple[str, str]] = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
            raise LexiconError(f"{path}:{lineno}: expected 'category<TAB>term'")
        removals.append((parts[0].strip(), parts[1].strip()))
    return ExclusionList(removals=tuple(removals))


def apply_exclusions(
    lex: Lexicon, excl: ExclusionList
) -> tuple[Lexicon, ExclusionReport]:
    """Remove listed entries; unresolvable removals are reported, never silent.

    The returned lexicon keeps the base version hash and appends a digest of
    the removal list, so the same base with different cleanings is
    distinguishable.
    """
    wanted: dict[tuple[str, str], bool] = {
        (cat, surface.casefold()): False for cat, surface in excl.removals
    }
    removed_per_category: dict[str, int] = {}
    categories: dict[str, tuple[LexiconEntry, ...]] = {}
    for cat in sorted(lex.categories):
        kept = []
        for entry in lex.categories[cat]:
            key = (cat, entry.surface.casefold())
            if key in wanted:
                wanted[key] = True
                removed_per_category[cat] = removed_per_category.get(cat, 0) + 1
            else:
                kept.append(entry)
        categories[cat] = tuple(kept)
    unresolved = tuple(
        (cat, surface)
        for (cat, surface) in excl.removals
        if not wanted[(cat, surface.casefold())]
    )
    for cat, surface in unresolved:
        log.warning("exclusion (%s, %r) does not match any lexicon entry", cat, surface)
    digest = hashlib.sha256(
        "\n".join(f"{c}\t{s.casefold()}" for c, s in sorted(excl.removals)).encode("utf-8")
    ).hexdigest()[:8]
    new = Lexicon(categories=categories, version=f"{lex.version}-x{digest}")
    return new, ExclusionReport(
        removed_per_category=removed_per_category, unresolved=unresolved
    )


class Matcher:
    """Compiled lexicon, immutable after construction and safe to share.

    Exact single tokens sit in a hash map, wildcard stems in a character
    trie, phrases in an index keyed by their (exact) first token. Output is
    identical to a naive per-entry scan over the token stream; overlapping
    matches all count, and a phrase match never suppresses single-token
    matches inside its span.
    """

    def __init__(self, lexicon: Lexicon):
        if lexicon.entry_count() == 0:
            raise LexiconError("cannot compile an empty lexicon")
        self._lexicon = lexicon
        self._category_ids = tuple(sorted(lexicon.categories))
        self._exact: dict[str, tuple[LexiconEntry, ...]] = {}
        self._phrases: dict[str, tuple[LexiconEntry, ...]] = {}
        self._trie: dict = {}
        exact: dict[str, list[LexiconEntry]] = {}
        phrases: dict[str, list[LexiconEntry]] = {}
        for entry in lexicon.entries():
            if len(entry.tokens) > 1:
                phrases.setdefault(entry.tokens[0], []).append(entry)
            elif entry.wildcard:
                node = self._trie
                for ch in entry.tokens[0]:
                    node = node.setdefault(ch, {})
                node.setdefault("", []).append(entry)
            else:
                exact.setdefault(entry.tokens[0], []).append(entry)
        self._exact = {k: tuple(v) for k, v in exact.items()}
        self._phrases = {k: tuple(v) for k, v in phrases.items()}

    @property
    def lexicon(self) -> Lexicon:
        return self._lexicon

    @property
    def version(self) -> str:
        return self._lexicon.version

    def match(self, text: str) -> MatchResult:
        tokens = tokenize(text)
        n = len(tokens)
        term_counts: dict[LexiconEntry, int] = {}
        for i, tok in enumerate(tokens):
            for entry in self._exact.get(tok, ()):
                term_counts[entry] = term_counts.get(entry, 0) + 1
            node = self._trie
            for ch in tok:
                node = node.get(ch)
                if node is None:
                    break
                for entry in node.get("", ()):
                    term_counts[entry] = term_counts.get(entry, 0) + 1
            for entry in self._phrases.get(tok, ()):
                k = len(entry.tokens)
                if i + k > n:
                    continue
                if any(tokens[i + j] != entry.tokens[j] for j in range(1, k - 1)):
                    continue
                last = tokens[i + k - 1]
                if entry.wildcard:
                    if not last.startswith(entry.tokens[-1]):
                        continue
                elif last != entry.tokens[-1]:
                    continue
                term_counts[entry] = term_counts.get(entry, 0) + 1
        category_counts = {cat: 0 for cat in self._category_ids}
        for entry, count in term_counts.items():
            category_counts[entry.category] += count
        return MatchResult(
            token_count=n,
            category_counts=category_counts,
            term_counts=term_counts,
            lexicon_version=self._lexicon.version,
        )


def compile_matcher(lex: Lexicon) -> Matcher:
    return Matcher(lex)


def match_post(matcher: Matcher, text: str) -> MatchResult:
    return matcher.match(text)
