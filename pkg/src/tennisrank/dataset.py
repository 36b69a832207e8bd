"""Ingestion of per-season match files into a three-table store.

Season files from different years disagree on column order and naming, so a
column map (one layout per known header shape) aligns them onto canonical
field names.  Player names are resolved to a single ``Surname F.M.`` form,
series labels are mapped onto the closed category enum, and the result is an
immutable :class:`MatchStore` persisted as three TSV files.
"""

from __future__ import annotations

import bisect
import configparser
import csv
import enum
import logging
import math
import re
import unicodedata
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from pathlib import Path
from typing import Iterable, Mapping

from .errors import (
    AmbiguousNameError,
    ConfigError,
    DatasetError,
    IntegrityError,
    UnknownLabelError,
    UnknownTournamentError,
    UnmappedLayoutError,
)

logger = logging.getLogger(__name__)


class Surface(str, enum.Enum):
    HARD = "Hard"
    CLAY = "Clay"
    GRASS = "Grass"


class Category(str, enum.Enum):
    ATP250 = "ATP250"
    ATP500 = "ATP500"
    MASTERS1000 = "Masters1000"
    GRAND_SLAM = "GrandSlam"
    MASTERS_CUP = "MastersCup"


class Round(str, enum.Enum):
    R128 = "R128"
    R64 = "R64"
    R32 = "R32"
    R16 = "R16"
    QF = "QF"
    SF = "SF"
    F = "F"
    RR = "RR"


# Knockout rounds, earliest first.
KNOCKOUT = (Round.R128, Round.R64, Round.R32, Round.R16, Round.QF, Round.SF, Round.F)

DEFAULT_SERIES_ALIASES = {
    "grand slam": Category.GRAND_SLAM,
    "grandslam": Category.GRAND_SLAM,
    "masters cup": Category.MASTERS_CUP,
    "masterscup": Category.MASTERS_CUP,
    "masters": Category.MASTERS1000,
    "masters 1000": Category.MASTERS1000,
    "masters1000": Category.MASTERS1000,
    "atp masters 1000": Category.MASTERS1000,
    "international gold": Category.ATP500,
    "atp500": Category.ATP500,
    "atp 500": Category.ATP500,
    "international": Category.ATP250,
    "international series": Category.ATP250,
    "atp250": Category.ATP250,
    "atp 250": Category.ATP250,
}

# Relative rounds ("2nd Round") are stored as ints and resolved per tournament.
DEFAULT_ROUND_ALIASES: dict[str, Round | int] = {
    "1st round": 1,
    "2nd round": 2,
    "3rd round": 3,
    "4th round": 4,
    "round of 128": Round.R128,
    "round of 64": Round.R64,
    "round of 32": Round.R32,
    "round of 16": Round.R16,
    "quarterfinals": Round.QF,
    "quarterfinal": Round.QF,
    "semifinals": Round.SF,
    "semifinal": Round.SF,
    "the final": Round.F,
    "final": Round.F,
    "round robin": Round.RR,
}
DEFAULT_ROUND_ALIASES.update({r.value.lower(): r for r in Round})

DEFAULT_SURFACE_ALIASES = {
    "hard": Surface.HARD,
    "clay": Surface.CLAY,
    "grass": Surface.GRASS,
    # Carpet was retired from the tour in 2009; it plays closest to indoor hard.
    "carpet": Surface.HARD,
}

REQUIRED_FIELDS = ("tournament", "date", "series", "surface", "round", "winner", "loser")
OPTIONAL_FIELDS = (
    "location", "court", "best_of", "winner_rank", "loser_rank",
    "w1", "l1", "w2", "l2", "w3", "l3", "w4", "l4", "w5", "l5",
    "winner_sets", "loser_sets", "comment", "odds_winner", "odds_loser",
)
KNOWN_FIELDS = frozenset(REQUIRED_FIELDS + OPTIONAL_FIELDS)

# A tournament whose matches spread further than this is two events sharing a name.
MAX_TOURNAMENT_SPAN = timedelta(days=30)


@dataclass(frozen=True)
class Player:
    player_id: int
    canonical_name: str


@dataclass(frozen=True)
class Tournament:
    tournament_id: int
    name: str
    year: int
    week: int
    surface: Surface
    best_of: int
    category: Category
    location: str
    indoor: bool


@dataclass(frozen=True)
class MatchRecord:
    match_id: int
    tournament_id: int
    round: Round
    date: date
    winner_id: int
    loser_id: int
    official_rank_winner: int | None
    official_rank_loser: int | None
    set_scores: tuple[tuple[int, int], ...]
    completed: bool
    odds_winner: float | None
    odds_loser: float | None


@dataclass(frozen=True)
class Layout:
    name: str
    columns: Mapping[str, str]  # canonical field -> header column
    date_format: str | None = None

    def matches(self, header: Iterable[str]) -> bool:
        present = set(header)
        return all(col in present for col in self.columns.values())


@dataclass(frozen=True)
class Aliases:
    series: Mapping[str, Category] = field(default_factory=lambda: dict(DEFAULT_SERIES_ALIASES))
    rounds: Mapping[str, Round | int] = field(default_factory=lambda: dict(DEFAULT_ROUND_ALIASES))
    surfaces: Mapping[str, Surface] = field(default_factory=lambda: dict(DEFAULT_SURFACE_ALIASES))


@dataclass(frozen=True)
class ColumnMap:
    layouts: tuple[Layout, ...]
    aliases: Aliases = field(default_factory=Aliases)

    def layout_for(self, header: list[str]) -> Layout | None:
        best = None
        for layout in self.layouts:
            if layout.matches(header) and (best is None or len(layout.columns) > len(best.columns)):
                best = layout
        return best


@dataclass(frozen=True)
class RawRow:
    source: str
    line: int
    fields: Mapping[str, str]
    date_format: str | None = None


def load_column_map(path: str | Path) -> ColumnMap:
    """Read an INI column map.

    Sections named ``layout.<name>`` hold ``field = Column Header`` pairs (plus an
    optional ``date_format``).  Optional ``[series]``, ``[rounds]`` and
    ``[surfaces]`` sections extend the built-in alias tables.
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read column map {path}: {exc}") from exc

    layouts = []
    series = dict(DEFAULT_SERIES_ALIASES)
    rounds = dict(DEFAULT_ROUND_ALIASES)
    surfaces = dict(DEFAULT_SURFACE_ALIASES)
    for section in parser.sections():
        items = dict(parser.items(section))
        if section.startswith("layout."):
            date_format = items.pop("date_format", None)
            unknown = set(items) - KNOWN_FIELDS
            if unknown:
                raise ConfigError(f"[{section}] unknown fields: {sorted(unknown)}")
            missing = [f for f in REQUIRED_FIELDS if f not in items]
            if missing:
                raise ConfigError(f"[{section}] missing required fields: {missing}")
            layouts.append(Layout(section[len("layout."):], items, date_format))
        elif section == "series":
            for label, cat in items.items():
                series[_fold(label)] = _enum_value(Category, cat, section)
        elif section == "rounds":
            for label, rnd in items.items():
                rounds[_fold(label)] = int(rnd) if rnd.strip().isdigit() else _enum_value(Round, rnd, section)
        elif section == "surfaces":
            for label, surf in items.items():
                surfaces[_fold(label)] = _enum_value(Surface, surf, section)
        else:
            raise ConfigError(f"unknown column-map section [{section}]")
    if not layouts:
        raise ConfigError(f"{path}: no [layout.*] sections")
    return ColumnMap(tuple(layouts), Aliases(series, rounds, surfaces))


def _enum_value(cls, value, section):
    try:
        return cls(value.strip())
    except ValueError:
        raise ConfigError(f"[{section}] {value!r} is not one of {[m.value for m in cls]}") from None


# ---------------------------------------------------------------------------
# Parsing


def parse_raw_files(directory: str | Path, column_map: ColumnMap) -> list[RawRow]:
    directory = Path(directory)
    if not directory.is_dir():
        raise DatasetError(f"{directory} is not a directory")
    rows: list[RawRow] = []
    files = sorted(p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in (".csv", ".txt"))
    for path in files:
        text = _read_text(path)
        lines = text.splitlines()
        if not lines:
            continue
        first = lines[0]
        delimiter = ";" if first.count(";") > first.count(",") else ","
        reader = csv.reader(lines, delimiter=delimiter)
        header = [h.strip() for h in next(reader)]
        layout = column_map.layout_for(header)
        if layout is None:
            raise UnmappedLayoutError(path, header)
        index = {name: header.index(col) for name, col in layout.columns.items()}
        for lineno, record in enumerate(reader, start=2):
            if not any(cell.strip() for cell in record):
                continue
            values = {
                name: (record[i].strip() if i < len(record) else "")
                for name, i in index.items()
            }
            rows.append(RawRow(path.name, lineno, values, layout.date_format))
    logger.info("parsed %d rows from %d files", len(rows), len(files))
    return rows


def _read_text(path: Path) -> str:
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    try:
        return data.decode("utf-8-sig")
    except UnicodeDecodeError:
        # Older season files are Windows-1252.
        return data.decode("cp1252", errors="replace")


# ---------------------------------------------------------------------------
# Entity normalization

_SEPARATORS = re.compile(r"[\s\-'’]")


def _strip_accents(text: str) -> str:
    decomposed = unicodedata.normalize("NFKD", text)
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch))


def _clean(text: str) -> str:
    return " ".join(_strip_accents(text).split())


def _fold(text: str) -> str:
    return _clean(text).casefold()


def _surname_key(tokens: list[str]) -> str:
    return _SEPARATORS.sub("", _fold(" ".join(tokens)))


def _is_initials(token: str) -> bool:
    parts = [p for p in re.split(r"[.\-]", token) if p]
    if not parts or not all(len(p) == 1 and p.isalpha() for p in parts):
        return False
    return "." in token or len(token) == 1


def _initial_letters(tokens: list[str]) -> str:
    return "".join(p[0] for t in tokens for p in re.split(r"[.\-]", t) if p).upper()


def _split_initial_form(tokens: list[str]) -> tuple[list[str], str] | None:
    """(surname tokens, initials) for "Del Potro J.M." or "J.M Del Potro"; else None."""
    n = len(tokens)
    k = n
    while k > 1 and _is_initials(tokens[k - 1]):
        k -= 1
    if k < n:
        return tokens[:k], _initial_letters(tokens[k:])
    k = 0
    while k < n - 1 and _is_initials(tokens[k]):
        k += 1
    if k > 0:
        return tokens[k:], _initial_letters(tokens[:k])
    return None


def _canonical_form(name: str) -> str:
    tokens = _clean(name).split()
    split = _split_initial_form(tokens)
    if split is None:
        return " ".join(tokens)
    surname, initials = split
    return " ".join(surname) + " " + "".join(ch + "." for ch in initials)


def _interpretations(name: str) -> set[tuple[str, str]]:
    tokens = _clean(name).split()
    split = _split_initial_form(tokens)
    if split is not None:
        return {(_surname_key(split[0]), split[1])}
    if len(tokens) == 1:
        return {(_surname_key(tokens), "")}
    # Full given names: any split point could separate given names from surname.
    return {(_surname_key(tokens[k:]), _initial_letters(tokens[:k])) for k in range(1, len(tokens))}


def _initials_compatible(a: str, b: str) -> bool:
    return bool(a) and bool(b) and (a.startswith(b) or b.startswith(a))


class _NameIndex:
    def __init__(self, known: Iterable[str]):
        self.exact: dict[str, str] = {}
        self.by_surname: dict[str, list[tuple[str, str]]] = defaultdict(list)
        for name in sorted(known):
            self.add(name)

    def add(self, name: str) -> None:
        self.exact.setdefault(_fold(name), name)
        for surname, initials in _interpretations(name):
            self.by_surname[surname].append((initials, name))

    def resolve(self, name: str) -> str:
        if not name or not name.strip():
            raise DatasetError("empty player name")
        canonical = _canonical_form(name)
        hit = self.exact.get(_fold(canonical))
        if hit is not None:
            return hit
        candidates = set()
        for surname, initials in _interpretations(canonical):
            for known_initials, known in self.by_surname.get(surname, ()):
                if _initials_compatible(initials, known_initials):
                    candidates.add(known)
        if len(candidates) > 1:
            raise AmbiguousNameError(name, candidates)
        if candidates:
            return candidates.pop()
        return canonical


def normalize_player(name: str, known: Iterable[str]) -> str:
    """Map ``name`` onto a known canonical name, or return its own canonical form.

    Matching ignores case, diacritics and whitespace; a full given name matches
    a known entry with the same surname and compatible initials.  More than one
    such entry raises :class:`AmbiguousNameError` instead of merging.
    """
    return _NameIndex(known).resolve(name)


def unify_tournament(raw_name: str, raw_series: str, year: int,
                     aliases: Aliases | None = None) -> tuple[str, Category]:
    aliases = aliases or Aliases()
    name = _clean(raw_name)
    if not name:
        raise DatasetError(f"empty tournament name ({year})")
    category = aliases.series.get(_fold(raw_series))
    if category is None:
        raise UnknownLabelError("series", raw_series)
    return name, category


# ---------------------------------------------------------------------------
# Store


@dataclass(frozen=True)
class MatchStore:
    players: tuple[Player, ...]
    tournaments: tuple[Tournament, ...]
    matches: tuple[MatchRecord, ...]

    def __post_init__(self):
        players = {p.player_id: p for p in self.players}
        tournaments = {t.tournament_id: t for t in self.tournaments}
        by_tournament: dict[int, list[MatchRecord]] = defaultdict(list)
        for m in self.matches:
            if m.winner_id not in players or m.loser_id not in players:
                raise IntegrityError(f"match {m.match_id} references an unknown player")
            if m.tournament_id not in tournaments:
                raise IntegrityError(f"match {m.match_id} references unknown tournament {m.tournament_id}")
            if m.winner_id == m.loser_id:
                raise IntegrityError(f"match {m.match_id}: winner equals loser")
            by_tournament[m.tournament_id].append(m)
        order = sorted(self.matches, key=lambda m: (m.date, m.match_id))
        starts = {tid: min(m.date for m in ms) for tid, ms in by_tournament.items()}
        by_week: dict[tuple[int, int], list[int]] = defaultdict(list)
        for t in self.tournaments:
            by_week[(t.year, t.week)].append(t.tournament_id)
        object.__setattr__(self, "matches", tuple(order))
        object.__setattr__(self, "_players", players)
        object.__setattr__(self, "_tournaments", tournaments)
        object.__setattr__(self, "_by_tournament", {k: tuple(v) for k, v in by_tournament.items()})
        object.__setattr__(self, "_starts", starts)
        object.__setattr__(self, "_dates", [m.date for m in order])
        object.__setattr__(self, "_by_week", dict(by_week))

    def player(self, player_id: int) -> Player:
        return self._players[player_id]

    def player_name(self, player_id: int) -> str:
        return self._players[player_id].canonical_name

    def tournament(self, tournament_id: int) -> Tournament:
        try:
            return self._tournaments[tournament_id]
        except KeyError:
            raise UnknownTournamentError(f"unknown tournament id {tournament_id}") from None

    def find_tournament(self, name: str, year: int) -> Tournament:
        key = _fold(name)
        for t in self.tournaments:
            if t.year == year and _fold(t.name) == key:
                return t
        raise UnknownTournamentError(f"unknown tournament {name!r} ({year})")

    def tournament_matches(self, tournament_id: int) -> tuple[MatchRecord, ...]:
        self.tournament(tournament_id)
        return self._by_tournament.get(tournament_id, ())

    def tournament_start(self, tournament_id: int) -> date:
        self.tournament(tournament_id)
        return self._starts[tournament_id]

    def tournaments_in_week(self, year: int, week: int) -> list[Tournament]:
        return [self._tournaments[tid] for tid in self._by_week.get((year, week), ())]

    def tournaments_in_years(self, years: Iterable[int]) -> list[Tournament]:
        wanted = set(years)
        chosen = [t for t in self.tournaments if t.year in wanted and t.tournament_id in self._starts]
        return sorted(chosen, key=lambda t: (self._starts[t.tournament_id], t.tournament_id))

    @property
    def years(self) -> list[int]:
        return sorted({t.year for t in self.tournaments})


def query_window(store: MatchStore, target_tournament: int, age_years: int) -> list[MatchRecord]:
    """Completed matches strictly before the target's first match and at most
    ``age_years`` * 52 weeks older than it, in (date, match_id) order."""
    if age_years < 1:
        raise ValueError("age_years must be >= 1")
    start = store.tournament_start(target_tournament)
    earliest = start - timedelta(weeks=52 * age_years)
    lo = bisect.bisect_left(store._dates, earliest)
    hi = bisect.bisect_left(store._dates, start)
    return [m for m in store.matches[lo:hi] if m.completed]


# ---------------------------------------------------------------------------
# Assembly


@dataclass
class _Parsed:
    row: RawRow
    tournament_key: str
    tournament_name: str
    category: Category
    surface: Surface
    date: date
    round_label: Round | int
    winner: str
    loser: str
    best_of: int | None
    location: str
    indoor: bool
    rank_w: int | None
    rank_l: int | None
    sets: tuple[tuple[int, int], ...]
    winner_sets: int | None
    comment: str
    odds_w: float | None
    odds_l: float | None


_DATE_FORMATS = ("%Y-%m-%d", "%d/%m/%Y", "%Y%m%d")


def _parse_date(text: str, fmt: str | None, where: str) -> date:
    formats = (fmt,) if fmt else _DATE_FORMATS
    for f in formats:
        try:
            return datetime.strptime(text.strip(), f).date()
        except ValueError:
            continue
    raise DatasetError(f"{where}: unparseable date {text!r}")


def _positive_int(text: str) -> int | None:
    try:
        value = float(text)
    except (TypeError, ValueError):
        return None
    if not math.isfinite(value) or value < 1:
        return None
    return int(value)


def _odds(text: str) -> float | None:
    try:
        value = float(text)
    except (TypeError, ValueError):
        return None
    return value if math.isfinite(value) and value >= 1.0 else None


def _games(text: str) -> int | None:
    try:
        value = float(text)
    except (TypeError, ValueError):
        return None
    return int(value) if math.isfinite(value) and value >= 0 else None


def _parse_row(row: RawRow, aliases: Aliases) -> _Parsed:
    f = row.fields
    where = f"{row.source}:{row.line}"
    when = _parse_date(f["date"], row.date_format, where)
    name, category = unify_tournament(f["tournament"], f["series"], when.year, aliases)
    surface = aliases.surfaces.get(_fold(f["surface"]))
    if surface is None:
        raise UnknownLabelError("surface", f["surface"])
    round_label = aliases.rounds.get(_fold(f["round"]))
    if round_label is None:
        raise UnknownLabelError("round", f["round"])
    winner, loser = f["winner"].strip(), f["loser"].strip()
    if not winner or not loser:
        raise DatasetError(f"{where}: missing player name")
    sets = []
    for i in range(1, 6):
        w, l = _games(f.get(f"w{i}", "")), _games(f.get(f"l{i}", ""))
        if w is not None and l is not None:
            sets.append((w, l))
    best_of = _positive_int(f.get("best_of", ""))
    return _Parsed(
        row=row,
        tournament_key=_fold(name),
        tournament_name=name,
        category=category,
        surface=surface,
        date=when,
        round_label=round_label,
        winner=winner,
        loser=loser,
        best_of=best_of if best_of in (3, 5) else None,
        location=_clean(f.get("location", "")),
        indoor=_fold(f.get("court", "")) == "indoor",
        rank_w=_positive_int(f.get("winner_rank", "")),
        rank_l=_positive_int(f.get("loser_rank", "")),
        sets=tuple(sets),
        winner_sets=_games(f.get("winner_sets", "")),
        comment=_fold(f.get("comment", "")),
        odds_w=_odds(f.get("odds_winner", "")),
        odds_l=_odds(f.get("odds_loser", "")),
    )


def _resolve_rounds(labels: list[Round | int], where: str) -> dict[int, Round]:
    """Map relative round ordinals ("1st Round" = 1) to absolute knockout rounds.

    The highest ordinal present is the round played just before the
    quarterfinals, so it is R16; each lower ordinal doubles the draw.
    """
    ordinals = sorted({x for x in labels if isinstance(x, int)})
    if not ordinals:
        return {}
    top = ordinals[-1]
    resolved = {}
    for k in ordinals:
        idx = KNOCKOUT.index(Round.R16) - (top - k)
        if idx < 0:
            raise DatasetError(f"{where}: {top} relative rounds do not fit a 128 draw")
        resolved[k] = KNOCKOUT[idx]
    return resolved


def _winner_sets(p: _Parsed) -> int:
    if p.sets:
        return sum(1 for w, l in p.sets if w > l)
    return p.winner_sets or 0


def _is_complete(p: _Parsed, best_of: int) -> bool:
    # Retirements and walkovers fail either test.
    return p.comment in ("", "completed") and _winner_sets(p) >= math.ceil(best_of / 2)


def _season_week(first: date, year: int) -> int:
    """ISO week of ``first``, clamped into the tournament's own season."""
    iso_year, week, _ = first.isocalendar()
    if iso_year < year:
        return 1
    if iso_year > year:
        return 53
    return week


def build_store(rows: Iterable[RawRow], aliases: Aliases | None = None) -> MatchStore:
    aliases = aliases or Aliases()
    parsed = [_parse_row(r, aliases) for r in rows]

    by_name: dict[str, list[_Parsed]] = defaultdict(list)
    for p in parsed:
        by_name[p.tournament_key].append(p)

    # One event per name and date cluster; the same event listed twice merges.
    events: dict[tuple[str, int], list[_Parsed]] = {}
    for key, members in by_name.items():
        members.sort(key=lambda p: (p.date, p.row.source, p.row.line))
        clusters: list[list[_Parsed]] = []
        for p in members:
            if clusters and p.date - clusters[-1][0].date <= MAX_TOURNAMENT_SPAN:
                clusters[-1].append(p)
            else:
                clusters.append([p])
        for cluster in clusters:
            # An event that opens in late December belongs to the season it ends in.
            year = cluster[-1].date.year
            if (key, year) in events:
                head = cluster[0]
                raise IntegrityError(
                    f"{head.row.source}:{head.row.line}: second {head.tournament_name!r} event in {year}"
                )
            events[(key, year)] = cluster

    ordered_events = sorted(events.items(), key=lambda kv: (kv[1][0].date, kv[0]))
    tournaments = []
    event_rows: list[tuple[Tournament, list[_Parsed]]] = []
    for tid, ((_, year), members) in enumerate(ordered_events, start=1):
        head = members[0]
        first = head.date
        for p in members:
            if (p.category, p.surface) != (head.category, head.surface):
                raise IntegrityError(
                    f"{p.row.source}:{p.row.line}: {head.tournament_name!r} changes category or surface mid-event"
                )
        best_of = head.best_of or (5 if head.category is Category.GRAND_SLAM else 3)
        t = Tournament(
            tournament_id=tid,
            name=head.tournament_name,
            year=year,
            week=_season_week(first, year),
            surface=head.surface,
            best_of=best_of,
            category=head.category,
            location=head.location,
            indoor=head.indoor,
        )
        tournaments.append(t)
        event_rows.append((t, members))

    names = _resolve_players(parsed)
    canonical_names = sorted(set(names.values()))
    player_ids = {n: i for i, n in enumerate(canonical_names, start=1)}
    players = tuple(Player(player_ids[n], n) for n in canonical_names)

    staged = []
    for t, members in event_rows:
        rounds = _resolve_rounds([p.round_label for p in members], t.name)
        seen = set()
        for p in members:
            rnd = rounds[p.round_label] if isinstance(p.round_label, int) else p.round_label
            w, l = player_ids[names[p.winner]], player_ids[names[p.loser]]
            if w == l:
                raise IntegrityError(f"{p.row.source}:{p.row.line}: winner and loser are the same player")
            key = (rnd, w, l)
            if key in seen:
                logger.warning("%s:%d: duplicate match dropped", p.row.source, p.row.line)
                continue
            seen.add(key)
            staged.append((p.date, t.tournament_id, p.row.source, p.row.line, rnd, w, l, p))

    staged.sort(key=lambda s: s[:4])
    matches = tuple(
        MatchRecord(
            match_id=i,
            tournament_id=tid,
            round=rnd,
            date=when,
            winner_id=w,
            loser_id=l,
            official_rank_winner=p.rank_w,
            official_rank_loser=p.rank_l,
            set_scores=p.sets,
            completed=_is_complete(p, tournaments[tid - 1].best_of),
            odds_winner=p.odds_w,
            odds_loser=p.odds_l,
        )
        for i, (when, tid, _, _, rnd, w, l, p) in enumerate(staged, start=1)
    )
    store = MatchStore(players, tuple(tournaments), matches)
    logger.info("store: %d players, %d tournaments, %d matches",
                len(players), len(tournaments), len(matches))
    return store


def _resolve_players(parsed: list[_Parsed]) -> dict[str, str]:
    """Raw name -> canonical name.

    Names already in ``Surname F.`` form are admitted first and only merge on
    exact (folded) equality; full-name variants are then resolved against them.
    """
    raw = sorted({n for p in parsed for n in (p.winner, p.loser)})
    index = _NameIndex(())
    resolved = {}
    for name in raw:
        if _split_initial_form(_clean(name).split()) is not None:
            canonical = _canonical_form(name)
            existing = index.exact.get(_fold(canonical))
            if existing is None:
                index.add(canonical)
                existing = canonical
            resolved[name] = existing
    for name in raw:
        if name not in resolved:
            canonical = index.resolve(name)
            if _fold(canonical) not in index.exact:
                index.add(canonical)
            resolved[name] = canonical
    return resolved


# ---------------------------------------------------------------------------
# Persistence

PLAYER_COLUMNS = ("player_id", "canonical_name")
TOURNAMENT_COLUMNS = ("tournament_id", "name", "year", "week", "surface", "best_of", "category", "location", "indoor")
MATCH_COLUMNS = (
    "match_id", "tournament_id", "round", "date", "winner_id", "loser_id",
    "official_rank_winner", "official_rank_loser", "set_scores", "completed",
    "odds_winner", "odds_loser",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, date):
        return value.isoformat()
    return str(value)


def _write_tsv(path: Path, columns, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\t".join(columns) + "\n")
        for row in rows:
            fh.write("\t".join(_fmt(v) for v in row) + "\n")


def save_store(store: MatchStore, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    _write_tsv(directory / "players.tsv", PLAYER_COLUMNS,
               ((p.player_id, p.canonical_name) for p in store.players))
    _write_tsv(directory / "tournaments.tsv", TOURNAMENT_COLUMNS,
               ((t.tournament_id, t.name, t.year, t.week, t.surface, t.best_of, t.category, t.location, t.indoor)
                for t in store.tournaments))
    _write_tsv(directory / "matches.tsv", MATCH_COLUMNS, (
        (m.match_id, m.tournament_id, m.round, m.date, m.winner_id, m.loser_id,
         m.official_rank_winner, m.official_rank_loser,
         " ".join(f"{w}-{l}" for w, l in m.set_scores), m.completed, m.odds_winner, m.odds_loser)
        for m in sorted(store.matches, key=lambda m: m.match_id)
    ))


def _read_tsv(path: Path, columns) -> list[dict[str, str]]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            lines = fh.read().split("\n")
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    header = lines[0].split("\t")
    if tuple(header) != tuple(columns):
        raise DatasetError(f"{path}: header {header} != expected {list(columns)}")
    return [dict(zip(columns, line.split("\t"))) for line in lines[1:] if line]


def _opt_int(text: str) -> int | None:
    return int(text) if text else None


def _opt_float(text: str) -> float | None:
    return float(text) if text else None


def load_store(directory: str | Path) -> MatchStore:
    directory = Path(directory)
    players = tuple(Player(int(r["player_id"]), r["canonical_name"])
                    for r in _read_tsv(directory / "players.tsv", PLAYER_COLUMNS))
    tournaments = tuple(
        Tournament(
            tournament_id=int(r["tournament_id"]),
            name=r["name"],
            year=int(r["year"]),
            week=int(r["week"]),
            surface=Surface(r["surface"]),
            best_of=int(r["best_of"]),
            category=Category(r["category"]),
            location=r["location"],
            indoor=r["indoor"] == "true",
        )
        for r in _read_tsv(directory / "tournaments.tsv", TOURNAMENT_COLUMNS)
    )
    matches = tuple(
        MatchRecord(
            match_id=int(r["match_id"]),
            tournament_id=int(r["tournament_id"]),
            round=Round(r["round"]),
            date=date.fromisoformat(r["date"]),
            winner_id=int(r["winner_id"]),
            loser_id=int(r["loser_id"]),
            official_rank_winner=_opt_int(r["official_rank_winner"]),
            official_rank_loser=_opt_int(r["official_rank_loser"]),
            set_scores=tuple(
                tuple(int(x) for x in s.split("-")) for s in r["set_scores"].split()
            ),
            completed=r["completed"] == "true",
            odds_winner=_opt_float(r["odds_winner"]),
            odds_loser=_opt_float(r["odds_loser"]),
        )
        for r in _read_tsv(directory / "matches.tsv", MATCH_COLUMNS)
    )
    return MatchStore(players, tournaments, matches)
