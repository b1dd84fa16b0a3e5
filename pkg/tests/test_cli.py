from __future__ import annotations

import pytest
from click.testing import CliRunner

from egf.acceptance import GOLDENS, golden_dir, render_golden
from egf.cli import main, parse_range, parse_window

FIXTURE = str(golden_dir() / "fixture.egf")

CONSTANT_TOWER = """\
egf-model v1
[complex C]
a 0
b 2
[tower T]
levels = C C C
C -> C: identity
"""

SHORT_SYSTEM = """\
egf-model v1
[complex Z]
[complex L]
k 0
[system S]
levels = Z L
Z -> L: zero
"""


@pytest.fixture
def runner():
    return CliRunner()


def run(runner, *args):
    return runner.invoke(main, list(args), catch_exceptions=False)


def write(tmp_path, text, name="m.egf"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def table(output, section):
    lines = output.split(f"## {section}\n", 1)[1].split("\n\n", 1)[0].splitlines()
    return [ln.split("\t") for ln in lines[1:]]


class TestHelpers:
    def test_parse_range(self):
        assert parse_range("0..4") == (0, 4)
        assert parse_range("-2..3") == (-2, 3)

    def test_parse_window(self):
        assert parse_window("0..1,2..3") == (0, 1, 2, 3)


class TestCohomology:
    def test_acyclic_file(self, runner):
        res = run(runner, "cohomology", FIXTURE, "--name", "A", "--range", "0..3")
        assert res.exit_code == 0
        assert [row[1] for row in table(res.output, "cohomology fixture.egf:A")] == ["0"] * 4

    def test_conic_builtin(self, runner):
        res = run(runner, "cohomology", "conic:nu=1", "--range", "0..4")
        assert res.exit_code == 0
        assert [row[1] for row in table(res.output, "cohomology conic:nu=1")] == ["1", "0", "1", "0", "1"]

    def test_square_nonzero(self, runner, tmp_path):
        path = write(tmp_path, "egf-model v1\n[complex A]\na 0\nb 1\nc 2\na -> b\nb -> c\n")
        res = run(runner, "cohomology", path)
        assert res.exit_code == 3
        assert "d(d(a))" in res.output

    def test_malformed(self, runner, tmp_path):
        res = run(runner, "cohomology", write(tmp_path, "not a model\n"))
        assert res.exit_code == 2 and "line 1" in res.output

    def test_field_override(self, runner, tmp_path):
        path = write(tmp_path, "egf-model v1\n[complex A]\na 0\nb 1\na -> 2*b\n")
        two = run(runner, "cohomology", path, "--range", "0..1", "--field", "2")
        three = run(runner, "cohomology", path, "--range", "0..1", "--field", "3")
        assert [r[1] for r in table(two.output, "cohomology m.egf")] == ["1", "1"]
        assert [r[1] for r in table(three.output, "cohomology m.egf")] == ["0", "0"]

    def test_output_file(self, runner, tmp_path):
        out = tmp_path / "report.txt"
        res = run(runner, "cohomology", "conic:nu=2", "--range", "0..4", "--output", str(out))
        assert res.exit_code == 0 and res.output == ""
        assert out.read_text().startswith("## cohomology conic:nu=2")

    def test_grassmann_and_bg(self, runner):
        res = run(runner, "cohomology", "grassmann:2,4", "--range", "0..8")
        assert [r[1] for r in table(res.output, "cohomology grassmann:2,4")] == "1 0 1 0 2 0 1 0 1".split()
        res = run(runner, "cohomology", "bg:2,1", "--range", "0..4")
        assert [r[1] for r in table(res.output, "cohomology bg:2,1")] == "1 0 2 0 1".split()


class TestSS:
    def test_one_level(self, runner, tmp_path):
        path = write(tmp_path, "egf-model v1\n[filtered F]\na 0 0\nb 1 0\nc 1 0\na -> b\n")
        res = run(runner, "ss", path)
        assert res.exit_code == 0 and "collapse_page\t1" in res.output

    def test_conic_self(self, runner):
        res = run(runner, "ss", "conic-self", "--range", "0..6")
        assert res.exit_code == 0
        assert "single-column E_1" in res.output

    def test_bifamily(self, runner):
        res = run(runner, "ss", FIXTURE, "--name", "X", "--range", "0..3")
        assert "collapse_page\t3" in res.output

    def test_window_and_pages(self, runner):
        res = run(runner, "ss", FIXTURE, "--name", "X", "--pages", "1..2", "--window", "0..0,0..1")
        assert res.exit_code == 0
        assert "## page 0" not in res.output and "## page 2" in res.output
        assert "\n2\t0\t1" not in res.output.split("## page 1", 1)[1].split("## convergence")[0]

    def test_invalid_filtration(self, runner, tmp_path):
        path = write(tmp_path, "egf-model v1\n[filtered F]\na 0 1\nb 1 0\na -> b\n")
        assert run(runner, "ss", path).exit_code == 3


class TestLimits:
    def test_constant_tower(self, runner, tmp_path):
        res = run(runner, "limits", write(tmp_path, CONSTANT_TOWER), "--mode", "tower", "--range", "0..2")
        assert res.exit_code == 0
        rows = table(res.output, "inverse")
        assert all(r[2] == "0" for r in rows)

    def test_conic_colimit(self, runner):
        res = run(runner, "limits", "conic:nu=10", "--range", "0..18")
        assert res.exit_code == 0
        rows = table(res.output, "colimit")
        assert [r[1] for r in rows] == [str(1 - n % 2) for n in range(19)]

    def test_short_cap(self, runner):
        res = run(runner, "limits", "conic:nu=10,variant=regular", "--cap", "3", "--range", "0..18")
        assert res.exit_code == 4
        assert "first unstable degree 6" in res.output

    def test_unstable_file(self, runner, tmp_path):
        res = run(runner, "limits", write(tmp_path, SHORT_SYSTEM), "--range", "0..0")
        assert res.exit_code == 4

    def test_telescope(self, runner):
        res = run(runner, "limits", "conic:nu=3,variant=regular", "--mode", "telescope", "--range", "0..6")
        assert res.exit_code == 0


class TestFlowAndTower:
    def test_flow(self, runner):
        res = run(runner, "flow", "--k", "1", "--n", "3", "--plane", "2/3;-5;1")
        assert "limit\tI={3}" in res.output and "morse_index\t4" in res.output

    def test_flow_rank_deficient(self, runner):
        res = run(runner, "flow", "--k", "2", "--n", "3", "--plane", "1,2;2,4;3,6")
        assert res.exit_code == 2

    def test_tower(self, runner):
        res = run(runner, "tower", "--k", "2", "--n-max", "3")
        assert res.exit_code == 0 and "ok\tyes" in res.output
        assert table(res.output, "stabilization") == [["0", "1"], ["2", "2"], ["4", "3"], ["6", "4"]]

    def test_torus(self, runner):
        res = run(runner, "tower", "--torus", "2", "--n-max", "3")
        assert res.exit_code == 0


class TestVerify:
    def test_single_criterion(self, runner):
        res = run(runner, "verify", "--only", "9")
        assert res.exit_code == 0 and "criterion 9\tPASS" in res.output

    def test_mutation_undoubled(self, runner):
        res = run(runner, "verify", "--only", "1,2", "--mutation", "undoubled-index")
        assert res.exit_code == 1 and "criterion 1\tFAIL" in res.output

    def test_mutation_zero_fixed_point(self, runner):
        res = run(runner, "verify", "--only", "6", "--mutation", "zero-fixed-point")
        assert res.exit_code == 1 and "criterion 6\tFAIL" in res.output


@pytest.mark.parametrize("entry", GOLDENS, ids=lambda g: g[-1])
def test_goldens_are_byte_identical(entry):
    expected = (golden_dir() / entry[-1]).read_text()
    assert render_golden(*entry[:3]) == expected


def test_deterministic(runner):
    a = run(runner, "ss", str(golden_dir() / "random.egf"), "--range", "0..6").output
    b = run(runner, "ss", str(golden_dir() / "random.egf"), "--range", "0..6").output
    assert a == b
