"""Word lists, number words, lemma table and stoplist used by the scorers.

All lexicon files are UTF-8, one entry per line, fields separated by tabs;
blank lines and lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import unicodedata
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ConfigError, ParseError, StructuralError

DATA_DIR = Path(__file__).resolve().parent / "data"
DEFAULT_LEXICON_DIR = DATA_DIR / "lexicons"

MMSE_ITEM_TYPES = ("word_count", "repeat", "spell_backwards", "unscorable")


class LexiconWarning(UserWarning):
    pass


@lru_cache(maxsize=1 << 16)
def normalize(surface: str) -> str:
    """Lower-case, drop punctuation, collapse whitespace.

    ``str.lower`` rather than ``casefold`` so that "ß" is not rewritten to "ss";
    umlauts are kept as they are.
    """
    lowered = surface.lower()
    kept = "".join(ch for ch in lowered if not unicodedata.category(ch).startswith("P"))
    return " ".join(kept.split())


@dataclass(frozen=True)
class TargetItem:
    canonical: str
    accepted_surfaces: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "accepted_surfaces",
                           frozenset(self.accepted_surfaces) | {self.canonical})


@dataclass(frozen=True)
class TargetList:
    subtest_id: str
    items: tuple[TargetItem, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        index: dict[str, int] = {}
        seen = set()
        for i, item in enumerate(self.items):
            if item.canonical in seen:
                raise StructuralError(f"{self.subtest_id}: duplicate canonical {item.canonical!r}")
            seen.add(item.canonical)
            for s in item.accepted_surfaces:
                # ties go to the earlier item
                index.setdefault(s, i)
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_words(cls, subtest_id: str, words: Iterable[str | Iterable[str]]) -> "TargetList":
        """Build from plain words or (canonical, alt, ...) sequences."""
        items = []
        for w in words:
            forms = [w] if isinstance(w, str) else list(w)
            forms = [normalize(f) for f in forms]
            items.append(TargetItem(forms[0], frozenset(forms)))
        return cls(subtest_id, tuple(items))

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    @property
    def canonicals(self) -> list[str]:
        return [item.canonical for item in self.items]

    def lookup(self, form: str) -> int | None:
        return self._index.get(form)

    def accepts(self, form: str) -> bool:
        return form in self._index


@dataclass(frozen=True)
class NumberMap:
    """Two-digit number words (10-99) in both directions; digit strings are accepted too."""

    word_to_value: Mapping[str, int]

    def __post_init__(self):
        missing = [n for n in range(10, 100) if n not in set(self.word_to_value.values())]
        if missing:
            raise StructuralError(f"number map lacks word forms for {missing[:5]}...")

    def parse(self, surface: str) -> int | None:
        form = normalize(surface)
        if len(form) == 2 and form.isascii() and form.isdigit():
            value = int(form)
            return value if value >= 10 else None
        return self.word_to_value.get(form)

    def words_for(self, value: int) -> list[str]:
        return [w for w, v in self.word_to_value.items() if v == value]


@dataclass(frozen=True)
class AnimalLexicon:
    members: frozenset[str]
    lemma_table: Mapping[str, str]

    def is_animal(self, lemma: str) -> bool:
        return lemma in self.members


@dataclass(frozen=True)
class MmseItem:
    item_id: str
    item_type: str
    points: int
    tolerance: float
    targets: tuple[tuple[str, ...], ...]

    @property
    def scorable(self) -> bool:
        return self.item_type != "unscorable"

    def reference(self) -> list[str]:
        """Expected symbol sequence for repeat / spell-backwards items."""
        if self.item_type == "repeat":
            return [t[0] for t in self.targets]
        if self.item_type == "spell_backwards":
            return list(reversed(self.targets[0][0]))
        raise ValueError(f"item {self.item_id} has no reference sequence")


@dataclass(frozen=True)
class LexiconSet:
    skt_objects: Mapping[str, TargetList]
    bnt: TargetList
    cerad_wordlist: TargetList
    cerad_distractors: TargetList
    mmse_items: tuple[MmseItem, ...]
    animals: AnimalLexicon
    numbers: NumberMap
    stoplist: frozenset[str]
    letter_names: Mapping[str, str]
    source: Path | None = None

    @property
    def lemma_table(self) -> Mapping[str, str]:
        return self.animals.lemma_table

    def lemma_of(self, surface: str) -> str:
        form = normalize(surface)
        return self.animals.lemma_table.get(form, form)

    def parse_number(self, surface: str) -> int | None:
        return self.numbers.parse(surface)

    def letter_of(self, surface: str) -> str | None:
        """The letter a token stands for: a bare letter or a listed letter name."""
        form = normalize(surface)
        if len(form) == 1 and form.isalpha():
            return form
        return self.letter_names.get(form)

    def is_stopword(self, surface: str) -> bool:
        return normalize(surface) in self.stoplist

    def skt_targets(self, form: str) -> TargetList:
        try:
            return self.skt_objects[form]
        except KeyError:
            raise ConfigError(f"no SKT object list for form {form!r}") from None

    def all_lexical_forms(self) -> set[str]:
        """Every surface any scorer could react to; used to keep synthetic distractors clean."""
        forms = set(self.stoplist) | set(self.animals.members) | set(self.lemma_table)
        forms |= set(self.lemma_table.values()) | set(self.numbers.word_to_value)
        forms |= set(self.letter_names)
        for lst in (*self.skt_objects.values(), self.bnt, self.cerad_wordlist, self.cerad_distractors):
            for item in lst:
                forms |= item.accepted_surfaces
        for item in self.mmse_items:
            for alts in item.targets:
                forms |= set(alts)
        return forms


# -- loading ----------------------------------------------------------------

def _rows(path) -> Iterable[tuple[int, list[str]]]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"{path} not found") from None
    except UnicodeDecodeError as exc:
        raise ParseError(f"not UTF-8 ({exc.reason})", path) from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, [f.strip() for f in line.rstrip("\r\n").split("\t")]


def _optional(path: Path) -> bool:
    if path.exists():
        return True
    warnings.warn(f"lexicon file {path.name} not found in {path.parent}; using an empty list",
                  LexiconWarning, stacklevel=3)
    return False


def load_target_list(path: Path, subtest_id: str) -> TargetList:
    items = []
    seen: dict[str, int] = {}
    for lineno, fields in _rows(path):
        forms = [normalize(f) for f in fields if f.strip()]
        if not forms or not forms[0]:
            raise ParseError("empty canonical", path, lineno)
        if forms[0] in seen:
            raise StructuralError(
                f"{path}:{lineno}: duplicate canonical {forms[0]!r} (first on line {seen[forms[0]]})")
        seen[forms[0]] = lineno
        items.append(TargetItem(forms[0], frozenset(forms)))
    return TargetList(subtest_id, tuple(items))


def _load_words(path: Path) -> frozenset[str]:
    words = set()
    for lineno, fields in _rows(path):
        if len(fields) != 1:
            raise ParseError("expected one word per line", path, lineno)
        words.add(normalize(fields[0]))
    return frozenset(words)


def _load_lemmas(path: Path) -> dict[str, str]:
    table: dict[str, str] = {}
    for lineno, fields in _rows(path):
        if len(fields) != 2:
            raise ParseError("expected 'surface<TAB>lemma'", path, lineno)
        surface, lemma = normalize(fields[0]), normalize(fields[1])
        if surface in table and table[surface] != lemma:
            raise StructuralError(f"{path}:{lineno}: {surface!r} mapped to two lemmas")
        table[surface] = lemma
    for surface, lemma in table.items():
        if lemma in table and table[lemma] != lemma:
            raise StructuralError(
                f"{path}: lemma table not closed: {surface!r} -> {lemma!r} -> {table[lemma]!r}")
    return table


def _load_numbers(path: Path) -> NumberMap:
    mapping: dict[str, int] = {}
    for lineno, fields in _rows(path):
        try:
            value = int(fields[0])
        except ValueError:
            raise ParseError(f"bad number value {fields[0]!r}", path, lineno) from None
        if not 10 <= value <= 99:
            raise ParseError(f"number {value} outside 10-99", path, lineno)
        if len(fields) < 2:
            raise ParseError("number without word form", path, lineno)
        for word in fields[1:]:
            form = normalize(word)
            if mapping.get(form, value) != value:
                raise StructuralError(f"{path}:{lineno}: {form!r} maps to two numbers")
            mapping[form] = value
    try:
        return NumberMap(mapping)
    except StructuralError as exc:
        raise StructuralError(f"{path}: {exc}") from None


def _load_letters(path: Path) -> dict[str, str]:
    names: dict[str, str] = {}
    for lineno, fields in _rows(path):
        letter = normalize(fields[0])
        if len(letter) != 1:
            raise ParseError(f"{letter!r} is not a single letter", path, lineno)
        for name in fields[1:]:
            names[normalize(name)] = letter
    return names


def load_mmse_items(path: Path) -> tuple[MmseItem, ...]:
    items = []
    seen = set()
    for lineno, fields in _rows(path):
        if len(fields) != 5:
            raise ParseError("expected 5 tab-separated fields", path, lineno)
        item_id, item_type, points, tolerance, targets = fields
        if item_type not in MMSE_ITEM_TYPES:
            raise ParseError(f"unknown item type {item_type!r}", path, lineno)
        if item_id in seen:
            raise StructuralError(f"{path}:{lineno}: duplicate item {item_id!r}")
        seen.add(item_id)
        try:
            pts, tol = int(points), float(tolerance)
        except ValueError:
            raise ParseError("points must be an integer, tolerance a number", path, lineno) from None
        if pts < 0 or tol < 0:
            raise ParseError("points and tolerance must be non-negative", path, lineno)
        if item_type == "word_count":
            parsed = tuple(tuple(normalize(a) for a in entry.split("|"))
                           for entry in targets.split(";") if entry.strip())
        elif item_type == "repeat":
            parsed = tuple((normalize(w),) for w in targets.split())
        elif item_type == "spell_backwards":
            parsed = ((normalize(targets),),)
        else:
            parsed = ()
        if item_type != "unscorable" and not parsed:
            raise ParseError("scorable item without targets", path, lineno)
        items.append(MmseItem(item_id, item_type, pts, tol, parsed))
    return tuple(items)


def load_lexicons(directory=None) -> LexiconSet:
    """Load every lexicon file from ``directory`` (the bundled seed set by default).

    ``numbers.tsv`` is required; any other missing file yields an empty
    structure and a :class:`LexiconWarning`.
    """
    root = Path(directory) if directory is not None else DEFAULT_LEXICON_DIR
    if not root.is_dir():
        raise ConfigError(f"lexicon directory {root} does not exist")
    numbers_path = root / "numbers.tsv"
    if not numbers_path.exists():
        raise ConfigError(f"required lexicon file {numbers_path} is missing")

    skt = {}
    for form in "ABCDE":
        p = root / f"skt_objects_{form}.tsv"
        if p.exists():
            skt[form] = load_target_list(p, "SKT")
    if not skt:
        warnings.warn(f"no skt_objects_<form>.tsv files in {root}", LexiconWarning, stacklevel=2)

    def target_list(name, subtest):
        p = root / name
        return load_target_list(p, subtest) if _optional(p) else TargetList(subtest, ())

    def word_set(name):
        p = root / name
        return _load_words(p) if _optional(p) else frozenset()

    stoplist = word_set("stoplist.txt")
    if not stoplist and (root / "stoplist.txt").exists():
        warnings.warn(f"stoplist {root / 'stoplist.txt'} is empty", LexiconWarning, stacklevel=2)
    lemmas_path = root / "lemmas.tsv"
    lemmas = _load_lemmas(lemmas_path) if _optional(lemmas_path) else {}
    letters_path = root / "letters.tsv"
    letters = _load_letters(letters_path) if _optional(letters_path) else {}
    mmse_path = root / "mmse_items.tsv"
    mmse = load_mmse_items(mmse_path) if _optional(mmse_path) else ()

    return LexiconSet(
        skt_objects=skt,
        bnt=target_list("bnt_items.tsv", "CERAD2"),
        cerad_wordlist=target_list("cerad_wordlist.tsv", "CERAD4"),
        cerad_distractors=target_list("cerad_recognition_distractors.tsv", "CERAD7"),
        mmse_items=mmse,
        animals=AnimalLexicon(word_set("animals.txt"), lemmas),
        numbers=_load_numbers(numbers_path),
        stoplist=stoplist,
        letter_names=letters,
        source=root,
    )
