import pytest
from hypothesis import given
from hypothesis import strategies as st

from vrpbench.generators import Fixed, GaussianMixture, GeneratorConfig, XType, XTypeMix, generate
from vrpbench.instance import GridScale, Instance, Rounding, rescale_instance
from vrpbench.vrplib import (
    BksFormatError,
    BksRecord,
    BksValidationError,
    ResultFormatError,
    ResultRecord,
    UnsupportedFormatError,
    VrplibError,
    append_results,
    load_bks_registry,
    parse_vrplib,
    read_bks_file,
    read_results,
    read_results_file,
    store_bks_registry,
    write_bks_file,
    write_results,
    write_vrplib,
)

MINIMAL = """NAME : tiny
COMMENT : hand written
TYPE : CVRP
DIMENSION : 3
EDGE_WEIGHT_TYPE : EUC_2D
CAPACITY : 30
NODE_COORD_SECTION
1 10 10
2 20 10
3 10 25
DEMAND_SECTION
1 0
2 12
3 7
DEPOT_SECTION
1
-1
EOF
"""


def test_minimal_file_fields():
    inst = parse_vrplib(MINIMAL)
    assert inst.id == "tiny" and inst.n == 2 and inst.capacity == 30
    assert inst.coords.tolist() == [[10, 10], [20, 10], [10, 25]]
    assert inst.demands.tolist() == [0, 12, 7]
    assert inst.grid == GridScale.integer_grid(1000)
    assert inst.rounding is Rounding.NEAREST
    assert inst.tags == {"COMMENT": "hand written"}


def test_depot_demand_rejected():
    with pytest.raises(VrplibError, match="depot demand"):
        parse_vrplib(MINIMAL.replace("1 0\n2 12", "1 7\n2 12"))


def test_depot_section_reorders_nodes():
    text = MINIMAL.replace("DEPOT_SECTION\n1\n", "DEPOT_SECTION\n2\n").replace(
        "1 0\n2 12\n3 7", "1 12\n2 0\n3 7")
    inst = parse_vrplib(text)
    assert inst.coords[0].tolist() == [20, 10]
    assert inst.demands.tolist() == [0, 12, 7]


@pytest.mark.parametrize("mutate, error", [
    (lambda t: t.replace("EUC_2D", "EXPLICIT"), UnsupportedFormatError),
    (lambda t: t.replace("DIMENSION : 3", "DIMENSION : 4"), VrplibError),
    (lambda t: t.replace("CAPACITY : 30\n", ""), VrplibError),
    (lambda t: t.split("DEMAND_SECTION")[0] + "EOF\n", VrplibError),
    (lambda t: t.replace("2 20 10", "2 20 x"), VrplibError),
    (lambda t: t.replace("DEPOT_SECTION\n1\n", "DEPOT_SECTION\n1\n2\n"), UnsupportedFormatError),
])
def test_malformed_files(mutate, error):
    with pytest.raises(error):
        parse_vrplib(mutate(MINIMAL))


def test_unknown_keys_become_tags_and_round_trip():
    inst = parse_vrplib(MINIMAL.replace("TYPE : CVRP", "TYPE : CVRP\nVEHICLES : 4"))
    assert inst.tags["VEHICLES"] == "4"
    assert parse_vrplib(write_vrplib(inst)) == inst


def test_n1_instance_dimension():
    inst = Instance("one", [[0, 0], [5, 5]], [0, 1], 3, grid=GridScale.integer_grid(1000))
    assert "DIMENSION : 2" in write_vrplib(inst)


def test_unit_square_must_be_rescaled():
    with pytest.raises(VrplibError):
        write_vrplib(generate(GeneratorConfig(5)))


def test_equal_instances_write_identical_bytes():
    a = generate(GeneratorConfig(20, seed=4, coord_dist=XType()))
    b = generate(GeneratorConfig(20, seed=4, coord_dist=XType()))
    assert write_vrplib(a).encode() == write_vrplib(b).encode()


def _as_grid(inst):
    return inst if not inst.grid.is_unit_square else rescale_instance(
        inst, GridScale.integer_grid(10000))


configs = st.builds(
    GeneratorConfig,
    n=st.integers(1, 60),
    seed=st.integers(0, 2**32),
    coord_dist=st.sampled_from([GaussianMixture(), XType("central"), XType("eccentric")]),
    demand_dist=st.sampled_from([XTypeMix()]),
    capacity_rule=st.sampled_from([Fixed(100), Fixed(250)]),
) | st.builds(GeneratorConfig, n=st.integers(1, 60), seed=st.integers(0, 2**32))


@given(configs)
def test_parse_write_identity_on_generated(config):
    inst = _as_grid(generate(config))
    text = write_vrplib(inst)
    parsed = parse_vrplib(text)
    assert parsed == inst
    assert write_vrplib(parsed) == text


def test_extension_fields_round_trip():
    inst = generate(GeneratorConfig(10, seed=2, coord_dist=XType())).with_changes(
        time_limit=24.0, bks_cost=1234.5)
    back = parse_vrplib(write_vrplib(inst))
    assert back.time_limit == 24.0 and back.bks_cost == 1234.5
    assert back.depot_type == inst.depot_type and back.coords_dist == inst.coords_dist


# ----------------------------------------------------------------- BKS


def test_listing_record_round_trips():
    text = "X-n101-k25 21601.80798 HGS not_opt\n"
    reg = load_bks_registry(text)
    rec = reg["X-n101-k25"]
    assert rec.cost == 21601.80798 and rec.algorithm == "HGS" and not rec.optimal
    assert load_bks_registry(store_bks_registry(reg)) == reg


def test_empty_registry():
    assert store_bks_registry({}) == ""
    assert load_bks_registry("") == {}


def test_record_with_routes_validated():
    inst = Instance("v", [[0, 0], [3, 4], [6, 8]], [0, 1, 1], 5)
    good = f"v {float(inst.distances[0, 2]) * 2!r} me opt 1,2\n"
    reg = load_bks_registry(good, {"v": inst})
    assert reg["v"].routes == ((1, 2),) and reg["v"].optimal
    with pytest.raises(BksValidationError, match="declares"):
        load_bks_registry("v 21601.8 me not_opt 1,2\n", {"v": inst})
    with pytest.raises(BksValidationError, match="infeasible"):
        load_bks_registry("v 20 me not_opt 1\n", {"v": inst})


@pytest.mark.parametrize("line", [
    "a 10 HGS", "a ten HGS opt", "a 10 HGS maybe", "a -3 HGS opt", "a 10 HGS opt 1,x",
])
def test_malformed_registry_line_names_line(line):
    with pytest.raises(BksFormatError, match="line 2"):
        load_bks_registry("ok 1 A opt\n" + line + "\n")


def test_duplicate_registry_entry():
    with pytest.raises(BksFormatError, match="duplicate"):
        load_bks_registry("a 1 A opt\na 2 B opt\n")


def test_registry_file_atomic_round_trip(tmp_path):
    path = tmp_path / "bks.txt"
    assert read_bks_file(path) == {}
    reg = {"b": BksRecord("b", 5.5, [[1, 2], [3]], "SA"), "a": BksRecord("a", 2.0)}
    write_bks_file(path, reg)
    assert read_bks_file(path) == reg
    assert path.read_text().splitlines()[0].startswith("a ")
    assert [p.name for p in tmp_path.iterdir()] == ["bks.txt"]


# ------------------------------------------------------------- results


def _record(inst="i", run=0, costs=(3.0, 2.0), times=(0.1, 0.2)):
    return ResultRecord(inst, "s", run, costs[-1] if costs else None, 1.5, 2.25, 0.5, 3, 10.0,
                        list(costs), list(times), {"score": 2000.0}, "set", run, [[1, 2]], 1.9)


def test_result_round_trip_bit_exact():
    rec = _record(costs=(0.1 + 0.2, 0.1), times=(1 / 3, 2 / 3))
    (back,) = read_results(write_results([rec]))
    assert back == rec
    assert back.running_costs[0] == 0.1 + 0.2


def test_result_monotonicity_rejected():
    with pytest.raises(ResultFormatError):
        _record(times=(0.2, 0.1))
    with pytest.raises(ResultFormatError):
        _record(costs=(2.0, 3.0))
    with pytest.raises(ResultFormatError):
        read_results('{"instance_id": "x"}\n')


def test_results_append_preserves_order(tmp_path):
    path = tmp_path / "results.jsonl"
    recs = [_record(inst=i, run=r) for i in ("a", "b") for r in range(3)]
    append_results(path, recs[:2])
    append_results(path, recs[2:])
    back = read_results_file(path)
    assert len(back) == 6
    assert [(r.instance_id, r.run_index) for r in back] == [
        (r.instance_id, r.run_index) for r in recs]
