"""Generator fleet, demand profiles and market-participation classes."""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

HORIZON = 24

FLEET_COLUMNS = (
    "id",
    "name",
    "tech",
    "p_max_mw",
    "p_min_mw",
    "ramp_up_mw",
    "ramp_down_mw",
    "energy_cost_cop_mwh",
    "startup_cost_cop",
    "initial_on",
    "initial_power_mw",
)
OPTIONAL_COLUMNS = {"p_min_mw", "initial_on", "initial_power_mw", "name"}
DEMAND_COLUMNS = ("day_label",) + tuple(f"h{h:02d}" for h in range(HORIZON))


class FleetError(ValueError):
    """Base class for data errors raised by the loaders."""


class ParseError(FleetError):
    pass


class ValidationError(FleetError):
    pass


class Tech(str, enum.Enum):
    HYDRO = "Hydro"
    SMALL_HYDRO = "SmallHydro"
    GAS = "Gas"
    COAL = "Coal"
    WIND = "Wind"

    @classmethod
    def parse(cls, text: str) -> Tech:
        key = text.strip().replace(" ", "").replace("_", "").replace("-", "").lower()
        for tech in cls:
            if tech.value.lower() == key:
                return tech
        raise ValueError(f"unknown technology {text!r}")


class Participation(str, enum.Enum):
    MANDATORY = "Mandatory"
    OPTIONAL = "Optional"
    PRICE_TAKER = "PriceTaker"


@dataclass(frozen=True)
class Generator:
    id: str
    name: str
    tech: Tech
    p_max: float
    p_min: float
    ramp_up: float
    ramp_down: float
    energy_cost: float
    startup_cost: float
    initial_on: bool = False
    initial_power: float = 0.0

    def validate(self, allow_hydro_startup: bool = False) -> None:
        def fail(msg: str) -> None:
            raise ValidationError(f"generator {self.id}: {msg}")

        if not 0 <= self.p_min <= self.p_max:
            fail(f"requires 0 <= p_min <= p_max (got p_min={self.p_min}, p_max={self.p_max})")
        if self.ramp_up <= 0 or self.ramp_down <= 0:
            fail("ramp limits must be positive")
        if self.energy_cost < 0:
            fail("energy_cost must be non-negative")
        if self.startup_cost < 0:
            fail("startup_cost must be non-negative")
        if not self.initial_on and self.initial_power != 0:
            fail("initial_power must be 0 when initial_on is false")
        if self.initial_on and not self.p_min <= self.initial_power <= self.p_max:
            fail("initial_power must lie within [p_min, p_max] when initially on")
        if self.tech in (Tech.HYDRO, Tech.SMALL_HYDRO) and self.startup_cost != 0 and not allow_hydro_startup:
            fail(f"{self.tech.value} units must have startup_cost 0")
        if self.tech == Tech.WIND:
            fail("wind is modelled as a series, not as a dispatchable generator")


@dataclass(frozen=True)
class DemandProfile:
    day_label: str
    demand: tuple[float, ...]
    # files always carry 24 hours; shorter horizons are for small test models
    horizon: int = HORIZON

    def __post_init__(self) -> None:
        object.__setattr__(self, "demand", tuple(float(v) for v in self.demand))
        if len(self.demand) != self.horizon:
            raise ValidationError(f"day {self.day_label}: horizon must be {self.horizon} (got {len(self.demand)})")
        for h, v in enumerate(self.demand):
            if not v > 0:
                raise ValidationError(f"day {self.day_label}, hour {h}: demand must be positive (got {v})")

    @property
    def total(self) -> float:
        return sum(self.demand)


@dataclass(frozen=True)
class Fleet:
    generators: tuple[Generator, ...]
    currency_unit: str = "COP"
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "generators", tuple(self.generators))
        if not self.generators:
            raise ValidationError("fleet is empty")
        seen: set[str] = set()
        for g in self.generators:
            if g.id in seen:
                raise ValidationError(f"duplicate generator id {g.id}")
            seen.add(g.id)

    def __len__(self) -> int:
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def index(self, generator_id: str) -> int:
        for i, g in enumerate(self.generators):
            if g.id == generator_id:
                return i
        raise KeyError(f"unknown generator id {generator_id!r}")

    def get(self, generator_id: str) -> Generator:
        return self.generators[self.index(generator_id)]

    @property
    def capacity(self) -> float:
        return sum(g.p_max for g in self.generators)


def classify_participation(g: Generator) -> Participation:
    """Market role by rated capacity: above 20 MW must offer, 10-20 MW may, below 10 MW take prices."""
    if g.p_max > 20:
        return Participation.MANDATORY
    if g.p_max >= 10:
        return Participation.OPTIONAL
    return Participation.PRICE_TAKER


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "y", "t"):
        return True
    if t in ("0", "false", "no", "n", "f", ""):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_number(text: str) -> float:
    # the source table groups thousands with spaces ("2 889 885")
    return float(str(text).replace(" ", "").replace(" ", "").replace("_", ""))


def _generator_from_record(rec: dict, where: str, allow_hydro_startup: bool) -> Generator:
    def get(col: str, parse, default=None):
        raw = rec.get(col)
        if raw is None or (isinstance(raw, str) and raw.strip() == ""):
            if col in OPTIONAL_COLUMNS:
                return default
            raise ParseError(f"{where}, column {col!r}: missing value")
        try:
            return parse(raw if isinstance(raw, str) else str(raw))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{where}, column {col!r}: {exc}") from None

    gid = get("id", lambda s: str(s).strip())
    ramp_up = get("ramp_up_mw", _parse_number)
    ramp_down = rec.get("ramp_down_mw")
    g = Generator(
        id=gid,
        name=get("name", lambda s: str(s).strip(), default="") or f"gen{gid}",
        tech=get("tech", lambda s: Tech.parse(str(s))),
        p_max=get("p_max_mw", _parse_number),
        p_min=get("p_min_mw", _parse_number, default=0.0),
        ramp_up=ramp_up,
        ramp_down=ramp_up if ramp_down in (None, "") else get("ramp_down_mw", _parse_number),
        energy_cost=get("energy_cost_cop_mwh", _parse_number),
        startup_cost=get("startup_cost_cop", _parse_number),
        initial_on=get("initial_on", _parse_bool, default=False),
        initial_power=get("initial_power_mw", _parse_number, default=0.0),
    )
    g.validate(allow_hydro_startup)
    return g


def load_fleet(path: str | Path, format: str | None = None, *, allow_hydro_startup: bool = False) -> Fleet:
    """Read and validate a fleet file (CSV or its JSON mirror).

    ``ramp_down_mw`` defaults to ``ramp_up_mw`` when the column is absent,
    ``p_min_mw`` to 0 and the unit starts the day off.
    """
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).lower()
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read fleet file {path}: {exc.strerror or exc}") from None

    records: list[dict]
    meta: dict = {}
    currency = "COP"
    if fmt == "json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        if isinstance(doc, list):
            records = doc
        else:
            records = doc.get("generators", [])
            currency = doc.get("currency_unit", currency)
            meta = doc.get("metadata", {})
    elif fmt == "csv":
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        meta = {"notes": [ln.lstrip("# ").rstrip() for ln in text.splitlines() if ln.lstrip().startswith("#")]}
        if not lines:
            raise ParseError(f"{path}: no generator rows")
        reader = csv.DictReader(lines)
        missing = [c for c in FLEET_COLUMNS if c not in OPTIONAL_COLUMNS and c != "ramp_down_mw" and c not in (reader.fieldnames or [])]
        if missing:
            raise ParseError(f"{path}: missing column(s) {', '.join(missing)}")
        records = list(reader)
    else:
        raise ParseError(f"{path}: unsupported fleet format {fmt!r}")

    if not records:
        raise ParseError(f"{path}: no generator rows")
    gens = []
    for i, rec in enumerate(records, start=1):
        if None in rec:
            raise ParseError(f"{path}, row {i}: too many fields")
        gens.append(_generator_from_record(rec, f"{path}, row {i}", allow_hydro_startup))
    return Fleet(tuple(gens), currency, meta)


def _format_number(v: float) -> str:
    return repr(float(v)) if v != int(v) else str(int(v))


def write_fleet(fleet: Fleet, path: str | Path, format: str | None = None) -> None:
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).lower()
    rows = [
        {
            "id": g.id,
            "name": g.name,
            "tech": g.tech.value,
            "p_max_mw": g.p_max,
            "p_min_mw": g.p_min,
            "ramp_up_mw": g.ramp_up,
            "ramp_down_mw": g.ramp_down,
            "energy_cost_cop_mwh": g.energy_cost,
            "startup_cost_cop": g.startup_cost,
            "initial_on": g.initial_on,
            "initial_power_mw": g.initial_power,
        }
        for g in fleet.generators
    ]
    if fmt == "json":
        doc = {"currency_unit": fleet.currency_unit, "metadata": fleet.metadata, "generators": rows}
        path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FLEET_COLUMNS)
        for r in rows:
            w.writerow(
                [
                    r["id"],
                    r["name"],
                    r["tech"],
                    *(_format_number(r[c]) for c in FLEET_COLUMNS[3:9]),
                    "true" if r["initial_on"] else "false",
                    _format_number(r["initial_power_mw"]),
                ]
            )


def _read_day_table(path: Path, what: str) -> list[tuple[str, list[str]]]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {what} file {path}: {exc.strerror or exc}") from None
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ParseError(f"{path}: no {what} rows")
    rows = list(csv.reader(lines))
    header = [h.strip() for h in rows[0]]
    if header[0] != "day_label":
        raise ParseError(f"{path}: first column must be day_label")
    out = []
    for i, row in enumerate(rows[1:], start=2):
        out.append((row[0].strip(), [v.strip() for v in row[1:] if v.strip() != ""]))
    if not out:
        raise ParseError(f"{path}: no {what} rows")
    return out


def load_demand(path: str | Path) -> list[DemandProfile]:
    path = Path(path)
    profiles: list[DemandProfile] = []
    seen: set[str] = set()
    for line_no, (label, values) in enumerate(_read_day_table(path, "demand"), start=2):
        if len(values) != HORIZON:
            raise ValidationError(f"{path}, line {line_no}: horizon must be {HORIZON} (got {len(values)})")
        try:
            nums = [float(v) for v in values]
        except ValueError as exc:
            raise ParseError(f"{path}, line {line_no}: {exc}") from None
        if label in seen:
            raise ValidationError(f"{path}, line {line_no}: duplicate day label {label!r}")
        seen.add(label)
        try:
            profiles.append(DemandProfile(label, tuple(nums)))
        except ValidationError as exc:
            raise ValidationError(f"{path}, line {line_no}: {exc}") from None
    return profiles


def write_demand(profiles: list[DemandProfile], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DEMAND_COLUMNS)
        for p in profiles:
            w.writerow([p.day_label, *(f"{v:.3f}" for v in p.demand)])


def fleet_to_dict(fleet: Fleet) -> dict:
    return {"currency_unit": fleet.currency_unit, "generators": [asdict(g) | {"tech": g.tech.value} for g in fleet]}
