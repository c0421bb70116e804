import io
import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from causal_theories.cli import exit_code, main
from causal_theories.errors import (
    CycleDetected,
    DisjointnessViolated,
    ExpressionError,
    FileFormatError,
    InvalidFile,
    NotStochastic,
    OverlappingSubsets,
    ShapeMismatch,
    UnknownFactor,
    UnknownVertexName,
)
from causal_theories.files import data_path, dump_model, load_model, model_from_dict, model_to_dict

DATA = data_path("")


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj), encoding="utf-8")
    return p


@pytest.mark.parametrize(
    "exc, code",
    [
        (FileFormatError("x"), 2),
        (NotStochastic("x"), 3),
        (CycleDetected(["A", "B", "A"]), 3),
        (ShapeMismatch("x"), 3),
        (InvalidFile("x"), 3),
        (UnknownVertexName("x"), 4),
        (UnknownFactor("x"), 4),
        (ExpressionError("x"), 5),
        (OverlappingSubsets("x"), 5),
        (DisjointnessViolated("x"), 5),
    ],
)
def test_exit_code_table(exc, code):
    assert exit_code(exc) == code


class TestValidate:
    def test_food(self):
        code, out, _ = run("validate", DATA / "food_structure.json")
        assert code == 0
        assert out.startswith("valid; order A,B,C")
        assert "C: parents A,B" in out

    def test_with_model(self):
        code, out, _ = run("validate", DATA / "food_structure.json", "--model", DATA / "food_model.json")
        assert code == 0 and "model valid" in out

    def test_cycle(self, tmp_path):
        p = write(tmp_path, "cyc.json", {"variables": ["A", "B"], "arrows": [["A", "B"], ["B", "A"]]})
        code, _, err = run("validate", p)
        assert code == 3
        assert "cycle detected: A -> B -> A" in err

    def test_row_summing_to_point_nine(self, tmp_path):
        d = model_to_dict(load_model(DATA / "food_model.json"))
        d["mechanisms"]["C"][2] = [0.3, 0.6]
        p = write(tmp_path, "bad.json", d)
        code, _, err = run("validate", DATA / "food_structure.json", "--model", p)
        assert code == 3
        assert "'C'" in err and "A,B=(~a,b)" in err and "0.9" in err

    def test_unreadable(self, tmp_path):
        code, _, err = run("validate", tmp_path / "missing.json")
        assert code == 2
        code, _, _ = run("validate", write(tmp_path, "broken.json", "{not json"))
        assert code == 2
        code, _, _ = run("validate", write(tmp_path, "nofield.json", {"arrows": []}))
        assert code == 2

    def test_unknown_name_in_file_is_invalid(self, tmp_path):
        p = write(tmp_path, "s.json", {"variables": ["A"], "arrows": [["A", "Z"]]})
        assert run("validate", p)[0] == 3

    def test_bad_arguments(self):
        assert run("validate")[0] == 2
        assert run("no-such-command")[0] == 2


class TestDsep:
    def test_collider(self):
        s = DATA / "food_structure.json"
        code, out, _ = run("dsep", s, "-x", "A", "-y", "B")
        assert code == 0 and out.strip() == "A and B given {}: separated"
        code, out, _ = run("dsep", s, "-x", "A", "-y", "B", "-g", "C", "--path")
        assert "not separated" in out
        assert "unblocked path: A -> C <- B" in out

    def test_chain(self, tmp_path):
        p = write(tmp_path, "chain.json", {"variables": ["X", "Y", "Z"], "arrows": [["X", "Y"], ["Y", "Z"]]})
        code, out, _ = run("dsep", p, "-x", "X", "-y", "Z", "-g", "Y")
        assert code == 0 and "separated" in out and "not" not in out

    def test_unknown_name(self):
        code, _, err = run("dsep", DATA / "food_structure.json", "-x", "A", "-y", "Q")
        assert code == 4 and "Q" in err

    def test_overlap(self):
        assert run("dsep", DATA / "food_structure.json", "-x", "A", "-y", "A")[0] == 5


class TestConditional:
    def test_mediator(self):
        code, out, _ = run("conditional", DATA / "simpson_mediator.json", "-t", "R", "-g", "T")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "[R || T]"
        assert lines[2].split()[1:] == ["0.390000", "0.420000"]
        assert lines[3].split()[1:] == ["0.610000", "0.580000"]

    def test_confounder(self):
        code, out, _ = run("conditional", DATA / "simpson_confounder.json", "-t", "R", "-g", "T")
        assert code == 0 and "0.510000" in out and "0.340000" in out

    def test_food_from_joint(self):
        code, out, _ = run("conditional", DATA / "food_model.json", "-t", "C", "-g", "A,B", "--source", "joint")
        assert code == 0
        rows = [l.split() for l in out.splitlines()[2:4]]
        assert rows[0] == ["c", "1.000000", "0.500000", "0.375000", "0.000000"]
        assert rows[1] == ["~c", "0.000000", "0.500000", "0.625000", "1.000000"]
        assert out.splitlines()[1].split()[-4:] == ["a,b", "a,~b", "~a,b", "~a,~b"]

    def test_zero_mass_note(self, tmp_path):
        d = {"structure": {"variables": ["X", "Y"], "arrows": [["X", "Y"]]},
             "outcomes": {"X": ["x0", "x1"], "Y": ["y0", "y1"]},
             "mechanisms": {"X": [[1.0, 0.0]], "Y": [[0.2, 0.8], [0.6, 0.4]]}}
        m = write(tmp_path, "m.json", d)
        code, out, _ = run("conditional", m, "-t", "Y", "-g", "X", "--source", "joint")
        assert code == 0 and "columns [1] have zero mass" in out
        # the causal conditional does not depend on the prior of X
        code, out, _ = run("conditional", m, "-t", "Y", "-g", "X")
        assert "zero mass" not in out and "0.600000" in out

    def test_errors(self):
        m = DATA / "food_model.json"
        assert run("conditional", m, "-t", "Q")[0] == 4
        assert run("conditional", m, "-t", "A", "-g", "A")[0] == 5


class TestCheckCompat:
    def test_food(self):
        code, out, _ = run("check-compat", DATA / "food_structure.json", DATA / "food_joint.json")
        assert code == 0 and out.startswith("compatible")

    def test_edgeless(self):
        code, out, _ = run("check-compat", DATA / "edgeless3_structure.json", DATA / "food_joint.json")
        assert code == 0
        assert out.splitlines()[0] == "incompatible"
        assert "offending outcome (a,b,c)" in out

    def test_model_against_its_structure(self):
        code, out, _ = run("check-compat", DATA / "simpson_mediator.json", DATA / "simpson_mediator.json")
        assert code == 0 and out.startswith("compatible")

    def test_misaligned_factors(self):
        assert run("check-compat", DATA / "six_vertex_structure.json", DATA / "food_joint.json")[0] == 3


class TestCheckMorphism:
    def test_swap(self):
        code, out, _ = run("check-morphism", DATA / "swap_morphism.json")
        assert code == 0 and out.startswith("valid; isomorphism")

    def test_fair_to_biased(self):
        code, out, _ = run("check-morphism", DATA / "fair_to_biased_morphism.json")
        assert code == 0
        assert out.splitlines()[0] == "invalid"
        assert "failing at X: prior triangle does not commute" in out

    def test_terminal(self):
        code, out, _ = run("check-morphism", DATA / "terminal_morphism.json")
        assert code == 0 and out.startswith("valid; coarse graining")

    def test_partial_map(self, tmp_path):
        d = json.loads((DATA / "swap_morphism.json").read_text())
        d["source"] = str(DATA / "fair_coin.json")
        d["target"] = str(DATA / "fair_coin.json")
        del d["maps"]["Y"]["b2"]
        assert run("check-morphism", write(tmp_path, "m.json", d))[0] == 3


class TestRender:
    def test_worked_example(self):
        code, out, _ = run("render", DATA / "six_vertex_structure.json", "[D E || B]")
        assert code == 0
        nodes = [l for l in out.splitlines() if "[shape=" in l]
        assert sum("mechanism_" in l for l in nodes) == 4
        assert sum("copy_" in l for l in nodes) == 2

    def test_mediator(self):
        code, out, _ = run("render", DATA / "simpson_mediator.json", "[R || T]")
        nodes = [l for l in out.splitlines() if "[shape=" in l]
        assert sum("mechanism_" in l for l in nodes) == 2
        assert sum("copy_" in l for l in nodes) == 1

    def test_identity_is_boundary_only(self):
        code, out, _ = run("render", DATA / "food_structure.json", "id[A C]")
        assert code == 0
        assert "mechanism_" not in out and "copy_" not in out
        assert out.count(" -> ") == 2

    def test_byte_identical(self):
        a = run("render", DATA / "six_vertex_structure.json", "[D E || B]")[1]
        b = run("render", DATA / "six_vertex_structure.json", "[D E || B]")[1]
        assert a.encode() == b.encode()

    @pytest.mark.parametrize("expr", ["D E || B", "[D E | B]", "[|| B]", "[D] [E]", "id[A || B]"])
    def test_malformed(self, expr):
        assert run("render", DATA / "six_vertex_structure.json", expr)[0] == 5

    def test_unknown_name(self):
        assert run("render", DATA / "six_vertex_structure.json", "[Q || B]")[0] == 4


class TestDemo:
    @pytest.mark.parametrize("name", ["food", "simpson-mediator", "simpson-confounder"])
    def test_demos_pass(self, name):
        code, out, _ = run("demo", name)
        assert code == 0
        assert "[FAIL]" not in out and "all checks passed" in out

    def test_expectation_miss_exits_one(self, monkeypatch):
        monkeypatch.setattr("causal_theories.cli.MEDIATOR_R_GIVEN_T", [[0.5, 0.5], [0.5, 0.5]])
        code, out, _ = run("demo", "simpson-mediator")
        assert code == 1 and "[FAIL]" in out

    def test_tolerance_override(self, monkeypatch):
        monkeypatch.setenv("CTK_TOLERANCE", "1e-3")
        code, out, _ = run("demo", "food")
        assert code == 0 and "tolerance 0.001" in out
        monkeypatch.setenv("CTK_TOLERANCE", "tight")
        assert run("demo", "food")[0] == 2


@pytest.mark.parametrize("name", ["food_model.json", "simpson_mediator.json", "simpson_confounder.json",
                                  "fair_coin.json", "biased_coin.json", "point.json"])
def test_model_round_trip_is_exact(name):
    m = load_model(DATA / name)
    again = model_from_dict(json.loads(dump_model(m)))
    assert again.structure == m.structure
    assert again.spaces == m.spaces
    for a, b in zip(m.mechanisms, again.mechanisms):
        assert a.dom == b.dom and a.cod == b.cod
        assert np.array_equal(a.data, b.data)


@pytest.mark.skipif(shutil.which("ctk") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["ctk", "demo", "simpson-confounder"], capture_output=True, text=True)
    assert proc.returncode == 0
    proc = subprocess.run([sys.executable, "-m", "causal_theories.cli", "dsep",
                           str(DATA / "food_structure.json"), "-x", "A", "-y", "Q"], capture_output=True, text=True)
    assert proc.returncode == 4
