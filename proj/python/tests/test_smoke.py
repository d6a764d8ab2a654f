import os
from pathlib import Path

import pytest

import tpg

FIXTURES = Path(os.environ.get("TPG_FIXTURES", Path(__file__).resolve().parents[2] / "fixtures"))


def fixture(name):
    return tpg.load(FIXTURES / name)


def test_load_and_inspect():
    m = fixture("choice.game")
    assert m.name == "choice"
    assert not m.is_problem
    assert m.variables == {"x": ["v1", "v2", "v3"]}
    assert m.window() == 300000


def test_solve_verdicts():
    win = fixture("gostop.game").solve()
    assert win["verdict"] == "WIN"
    assert win["states"] == 47
    assert win["strategy"].startswith("tpg-strategy")
    lose = fixture("gostop-noD.game").solve()
    assert lose["verdict"] == "NOT_WIN"
    assert "strategy" not in lose


def test_budget_gives_unknown():
    assert fixture("choice.game").solve(budget=5)["verdict"] == "UNKNOWN"


def test_bounded_threshold():
    m = fixture("choice.game")
    assert m.bounded(10)["verdict"] == "NO_WIN_WITHIN_K"
    assert m.bounded(11)["verdict"] == "WIN_WITHIN_K"


def test_check_plan():
    m = fixture("camera.game")
    good = m.check_plan((FIXTURES / "camera-ok.plan").read_text())
    bad = m.check_plan((FIXTURES / "camera-short.plan").read_text())
    assert good["solution"] is True
    assert bad["solution"] is False
    assert any("cooldown" in v["message"] for v in bad["violations"])


def test_flexible():
    p = fixture("choice.problem")
    assert p.is_problem
    r = p.refute_flex(max_tokens=3)
    assert r["verdict"] == "none exists up to bound"
    assert r["counterexample"] is None
    v = p.flex_check((FIXTURES / "choice-v2.flex").read_text())
    assert v["condition"] == 3


def test_flex_needs_problem():
    with pytest.raises(ValueError):
        fixture("choice.game").refute_flex()


BAD = """game g {
  var x controlled { values a [1,2] controllable; }
  system rule r { t[z=a] => exists u[x=a] . true; }
}
"""


def test_diagnostics():
    assert tpg.diagnostics((FIXTURES / "choice.game").read_text()) == []
    ds = tpg.diagnostics(BAD)
    assert ds and ds[0]["severity"] == "error"
    assert "undeclared variable 'z'" in ds[0]["message"]
    with pytest.raises(ValueError, match="undeclared variable"):
        tpg.parse(BAD)


def test_format_round_trip():
    m = fixture("gostop.game")
    again = tpg.parse(m.format())
    assert again.format() == m.format()
    assert again.solve()["verdict"] == "WIN"
