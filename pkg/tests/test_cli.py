"""Command-line dispatch: reports, exit codes, determinism."""
from __future__ import annotations

import json
from fractions import Fraction

import pytest

from helpers import cyclic_system

from ergolab.cli import main
from ergolab.serialize import canonical_dumps, system_to_json

F = Fraction


@pytest.fixture()
def z3_file(tmp_path):
    sys_ = cyclic_system(3, 1, 2)
    path = tmp_path / "z3.json"
    path.write_text(canonical_dumps(system_to_json(sys_)))
    return str(path)


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out.strip()
    return code, json.loads(out) if out else None


def test_recur_worked_example(z3_file, capsys):
    code, report = run(capsys, ["recur", "--system", z3_file, "--set", "[0]"])
    assert code == 0
    assert report["results"] == {"limit": "1/9", "witness_n": 3}
    assert report["command"] == "recur"


def test_vdc_constant_sequence(tmp_path, capsys):
    seq = {"entries": [["2/3", "-1/2"]] * 6}
    path = tmp_path / "seq.json"
    path.write_text(json.dumps(seq))
    code, report = run(capsys, ["vdc", "--seq", str(path), "-N", "4", "-H", "2"])
    assert code == 0
    res = report["results"]
    assert res["lhs"] == res["rhs"]
    assert res["holds"] is True


def test_dhj_maxfree(capsys):
    code, report = run(capsys, ["dhj", "maxfree", "-k", "3", "-N", "2"])
    assert code == 0
    assert report["results"]["size"] == 6
    assert report["results"]["exhaustive"] is True


def test_dhj_lines_identity(capsys):
    code, report = run(capsys, ["dhj", "lines", "-k", "2", "-N", "3"])
    assert code == 0
    assert report["results"]["count"] == report["results"]["identity"] == 19


def test_dhj_force(capsys):
    code, report = run(capsys, ["dhj", "force", "-k", "2", "-L", "1", "-N", "3"])
    assert code == 0
    assert report["results"]["holds"] is True


def test_correspond_subcommand(tmp_path, capsys):
    path = tmp_path / "set.json"
    path.write_text(json.dumps(["12", "21"]))
    code, report = run(
        capsys, ["correspond", "--set", str(path), "-k", "2", "-N", "2", "-L", "1"]
    )
    assert code == 0
    assert report["results"]["point_events"] == {"1": "1/2", "2": "1/2"}
    assert set(report["results"]["line_events"].values()) == {"0/1"}


def test_fjoin_report(z3_file, capsys):
    code, report = run(capsys, ["fjoin", "--system", z3_file])
    assert code == 0
    assert report["results"]["period"] == 3
    assert report["results"]["offdiagonal_invariant"] is True
    # Emitted couplings round-trip through validation.
    from ergolab.serialize import validate_document

    assert validate_document(report["results"]["coupling"], "coupling") == []


def test_validate_ok_and_error_codes(z3_file, tmp_path, capsys):
    code, report = run(capsys, ["validate", "--schema", "system", z3_file])
    assert code == 0 and report["results"]["ok"] is True

    bad = tmp_path / "bad.json"
    bad.write_text('{"dim": 1, "space": {"points": [0], "weights": ["2/3"]}, "generators": [[0]]}')
    code, report = run(capsys, ["validate", "--schema", "system", str(bad)])
    assert code == 3
    assert report["results"]["ok"] is False

    notjson = tmp_path / "broken.json"
    notjson.write_text("{")
    code, report = run(capsys, ["validate", "--schema", "system", str(notjson)])
    assert code == 3
    assert "malformed" in report["error"]


def test_missing_file_is_input_error(capsys):
    code, report = run(capsys, ["recur", "--system", "/nonexistent.json", "--set", "[0]"])
    assert code == 3


def test_unknown_subcommand_is_input_error(capsys):
    assert main(["frobnicate"]) == 3
    capsys.readouterr()


def test_help_exits_clean(capsys):
    assert main(["--help"]) == 0
    capsys.readouterr()


def test_reports_byte_stable(z3_file, capsys):
    code1 = main(["recur", "--system", z3_file, "--set", "[0]"])
    first = capsys.readouterr().out
    code2 = main(["recur", "--system", z3_file, "--set", "[0]"])
    second = capsys.readouterr().out
    assert code1 == code2 == 0
    assert first == second


def test_removal_search_cli(capsys):
    code, report = run(
        capsys,
        ["removal", "search", "--sizes", "2", "-d", "3", "--random", "--samples", "25", "--seed", "5"],
    )
    assert code == 2  # clean, but a sample is not an exhaustive search
    assert report["results"]["counterexample"] is None
    assert report["exhaustive"] is False


def test_removal_search_cli_exhaustive(capsys):
    code, report = run(capsys, ["removal", "search", "--sizes", "2", "-d", "3"])
    assert code == 0
    assert report["results"]["counterexample"] is None
    assert report["exhaustive"] is True


def test_stationarity_cli(tmp_path, capsys):
    from ergolab.hales_jewett import iid_law
    from ergolab.measure import ExactProbabilitySpace
    from ergolab.serialize import law_to_json

    law = iid_law(2, 2, ExactProbabilitySpace((0, 1), (F(1, 2), F(1, 2))))
    path = tmp_path / "law.json"
    path.write_text(canonical_dumps(law_to_json(law)))
    code, report = run(capsys, ["stationarity", "--law", str(path)])
    assert code == 0
    assert report["results"]["holds"] is True
    assert "line_marginal" in report["results"]


def test_avg_subcommand(z3_file, tmp_path, capsys):
    fpath = tmp_path / "fs.json"
    fpath.write_text(json.dumps([["1", "0", "0"], ["1", "0", "0"]]))
    code, report = run(capsys, ["avg", "--system", z3_file, "--functions", str(fpath), "-N", "3"])
    assert code == 0
    assert report["results"]["values"] == ["1/3", "0/1", "0/1"]
    assert report["results"]["integral"] == "1/9"


def test_joint_subcommand(tmp_path, capsys):
    from helpers import torus_system
    from ergolab.serialize import system_to_json as s2j, subgroup_to_json
    from ergolab.systems import SubgroupSpec, orbit_partition, quotient_system

    sys_ = torus_system(3, (1, 0), (0, 1))
    gs = [SubgroupSpec.basis_vector(2, 0), SubgroupSpec.basis_vector(2, 1)]
    targets, maps = [], []
    for g in gs:
        target, pi = quotient_system(sys_, orbit_partition(sys_, g, False))
        targets.append(s2j(target))
        maps.append(list(pi.point_map))
    doc = {
        "joining": s2j(sys_),
        "targets": targets,
        "maps": maps,
        "subgroups": [subgroup_to_json(g) for g in gs],
        "lambda": {"vectors": []},
    }
    path = tmp_path / "joint.json"
    path.write_text(json.dumps(doc))
    code, report = run(capsys, ["joint", "--instance", str(path)])
    assert code == 0
    assert report["results"]["holds"] is True


def test_removal_check_subcommand(tmp_path, capsys):
    from ergolab.measure import Coupling, ExactProbabilitySpace, Partition
    from ergolab.removal import RemovalInstance, UpSet
    from ergolab.serialize import removal_instance_to_json
    from ergolab.upsets import ground_masks

    sp = ExactProbabilitySpace.uniform((0, 1))
    lam = Coupling.diagonal(sp, 3)
    psi = {m: Partition.singletons(2) for m in ground_masks(3)}
    ups = UpSet.principal(3, range(3))
    inst = RemovalInstance(
        sp, lam, psi, (((ups, frozenset({0})),), ((ups, frozenset({1})),), ((ups, frozenset({0, 1})),))
    )
    path = tmp_path / "inst.json"
    path.write_text(json.dumps(removal_instance_to_json(inst)))
    code, report = run(capsys, ["removal", "check", "--instance", str(path)])
    assert code == 0
    res = report["results"]
    assert res["hypotheses"] == {"i": True, "ii": True, "iii": True}
    assert res["conclusion"] is True


def test_dhj_correspond_action(tmp_path, capsys):
    path = tmp_path / "set.json"
    path.write_text(json.dumps(["12", "21"]))
    code, report = run(
        capsys, ["dhj", "correspond", "--set", str(path), "-k", "2", "-N", "2", "-L", "1"]
    )
    assert code == 0
    assert report["results"]["point_events"] == {"1": "1/2", "2": "1/2"}


def test_json_flag_writes_file(z3_file, tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(["recur", "--system", z3_file, "--set", "[0]", "--json", str(out)])
    assert code == 0
    assert json.loads(out.read_text())["results"]["limit"] == "1/9"
