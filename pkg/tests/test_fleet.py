import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import gen
from windmarket.fleet import (
    DemandProfile,
    Fleet,
    ParseError,
    Participation,
    Tech,
    ValidationError,
    classify_participation,
    load_demand,
    load_fleet,
    write_demand,
    write_fleet,
)

HEADER = "id,name,tech,p_max_mw,p_min_mw,ramp_up_mw,ramp_down_mw,energy_cost_cop_mwh,startup_cost_cop,initial_on,initial_power_mw\n"


def write(tmp_path, text, name="fleet.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_bundled_reference_fleet_unit_47():
    from windmarket.cli import bundled

    fleet = load_fleet(bundled("fleet_appendix.csv"))
    assert len(fleet) == 51
    g = fleet.get("47")
    assert (g.p_max, g.ramp_up, g.energy_cost, g.startup_cost, g.tech) == (30, 6, 37000, 2889885, Tech.GAS)


def test_bundled_desk_fleet_shape():
    from windmarket.cli import bundled

    fleet = load_fleet(bundled("fleet_desk.csv"))
    assert len(fleet) == 12
    assert {g.tech for g in fleet} == {Tech.HYDRO, Tech.SMALL_HYDRO, Tech.GAS}
    assert all(g.p_min == 0 for g in fleet)
    # a free, fully flexible unit able to carry the whole peak on its own
    peak = max(max(d.demand) for d in load_demand(bundled("demand_desk.csv")))
    assert any(g.startup_cost == 0 and g.ramp_up >= g.p_max >= peak for g in fleet)


def test_empty_file_reports_no_rows(tmp_path):
    with pytest.raises(ParseError, match="no generator rows"):
        load_fleet(write(tmp_path, HEADER))
    with pytest.raises(ParseError, match="no generator rows"):
        load_fleet(write(tmp_path, ""))


def test_parse_error_names_row_and_column(tmp_path):
    text = HEADER + "1,a,Gas,10,0,5,5,100,0,false,0\n2,b,Gas,abc,0,5,5,100,0,false,0\n"
    with pytest.raises(ParseError, match=r"row 2, column 'p_max_mw'"):
        load_fleet(write(tmp_path, text))


def test_missing_column(tmp_path):
    with pytest.raises(ParseError, match="missing column"):
        load_fleet(write(tmp_path, "id,name,tech\n1,a,Gas\n"))


@pytest.mark.parametrize(
    "row, message",
    [
        ("1,a,Gas,10,20,5,5,100,0,false,0", "p_min <= p_max"),
        ("1,a,Gas,10,0,0,5,100,0,false,0", "ramp limits must be positive"),
        ("1,a,Gas,10,0,5,5,-1,0,false,0", "energy_cost must be non-negative"),
        ("1,a,Gas,10,0,5,5,1,-3,false,0", "startup_cost must be non-negative"),
        ("1,a,Gas,10,0,5,5,1,0,false,4", "initial_power must be 0"),
        ("1,a,Hydro,10,0,5,5,1,100,false,0", "startup_cost 0"),
        ("1,a,Wind,10,0,5,5,0,0,false,0", "wind"),
    ],
)
def test_invariants_rejected(tmp_path, row, message):
    with pytest.raises(ValidationError, match=message):
        load_fleet(write(tmp_path, HEADER + row + "\n"))


def test_hydro_startup_override(tmp_path):
    p = write(tmp_path, HEADER + "1,a,SmallHydro,10,0,5,5,1,100,false,0\n")
    assert load_fleet(p, allow_hydro_startup=True).get("1").startup_cost == 100


def test_duplicate_ids():
    with pytest.raises(ValidationError, match="duplicate"):
        Fleet((gen("a"), gen("a")))


def test_optional_columns_and_spaced_numbers(tmp_path):
    text = "id,tech,p_max_mw,ramp_up_mw,energy_cost_cop_mwh,startup_cost_cop\n47,Gas,30,6,37 000,2 889 885\n"
    g = load_fleet(write(tmp_path, text)).get("47")
    assert g.ramp_down == 6 and g.p_min == 0 and not g.initial_on
    assert g.startup_cost == 2889885


@pytest.mark.parametrize("text", ["Small hydro", "small_hydro", "SMALLHYDRO", "SmallHydro"])
def test_tech_spellings(text):
    assert Tech.parse(text) is Tech.SMALL_HYDRO


@pytest.mark.parametrize(
    "p_max, role",
    [(20.001, Participation.MANDATORY), (20, Participation.OPTIONAL), (10, Participation.OPTIONAL), (9.99, Participation.PRICE_TAKER)],
)
def test_participation_thresholds(p_max, role):
    assert classify_participation(gen(p_max=p_max)) is role


units = st.builds(
    lambda i, pmax, frac, ramp, cost, su, on: gen(
        f"g{i}", p_max=pmax, p_min=round(pmax * frac, 3), ramp=ramp, cost=cost, startup=su, on=on, p0=pmax if on else 0.0
    ),
    st.integers(0, 10**6),
    st.floats(1, 5000, allow_nan=False).map(lambda v: round(v, 3)),
    st.floats(0, 1),
    st.floats(0.5, 5000).map(lambda v: round(v, 3)),
    st.floats(0, 1e6).map(lambda v: round(v, 2)),
    st.floats(0, 1e8).map(lambda v: round(v, 0)),
    st.booleans(),
)


@settings(max_examples=40, deadline=None)
@given(st.lists(units, min_size=1, max_size=6, unique_by=lambda g: g.id), st.sampled_from(["csv", "json"]))
def test_round_trip(tmp_path_factory, gens, fmt):
    path = tmp_path_factory.mktemp("rt") / f"fleet.{fmt}"
    fleet = Fleet(tuple(gens))
    write_fleet(fleet, path)
    assert load_fleet(path).generators == fleet.generators


def test_json_mirror(tmp_path):
    p = tmp_path / "f.json"
    p.write_text(json.dumps({"generators": [{"id": "x", "tech": "Coal", "p_max_mw": 50, "ramp_up_mw": 10,
                                             "energy_cost_cop_mwh": 90, "startup_cost_cop": 5}]}))
    g = load_fleet(p).get("x")
    assert g.tech is Tech.COAL and g.ramp_down == 10


def test_demand_errors(tmp_path):
    head = "day_label," + ",".join(f"h{h:02d}" for h in range(24)) + "\n"
    short = write(tmp_path, head + "d1," + ",".join(["1"] * 23) + "\n", "d.csv")
    with pytest.raises(ValidationError, match="horizon must be 24"):
        load_demand(short)
    zero = write(tmp_path, head + "d1," + ",".join(["1"] * 23 + ["0"]) + "\n", "d.csv")
    with pytest.raises(ValidationError, match="demand must be positive"):
        load_demand(zero)


def test_demand_round_trip(tmp_path):
    days = [DemandProfile("a", tuple(100 + h for h in range(24))), DemandProfile("b", tuple(50.125 for _ in range(24)))]
    write_demand(days, tmp_path / "d.csv")
    assert load_demand(tmp_path / "d.csv") == days
