"""Tests for SMV model export and the declaration reader."""
import pytest

import config
from swarmcheck import DomainParseError, UnsupportedConfiguration
from swarmcheck.alpha_model import InitialConstraint, InitKind, RobotSpec, signature, state_space_size
from swarmcheck.properties import parse_property
from swarmcheck.smv_export import emit_smv, parse_domains

from conftest import GOLDEN_DIR, params

COMBOS = [
    (abstraction, encoding, mode)
    for abstraction in ("legacy", "new")
    for encoding in ("global", "relative")
    for mode in ("strict", "nonstrict", "fair")
]

TOTALS = {
    ("legacy", "global", "fair"): 134_217_728,
    ("legacy", "global", "strict"): 402_653_184,
    ("legacy", "global", "nonstrict"): 2_818_572_288,
    ("legacy", "relative", "fair"): 1_048_576,
    ("legacy", "relative", "strict"): 3_145_728,
    ("legacy", "relative", "nonstrict"): 22_020_096,
    ("new", "relative", "fair"): 31_850_496,
    ("new", "relative", "strict"): 31_850_496,
    ("new", "relative", "nonstrict"): 222_953_472,
}


def _p(abstraction, encoding, mode, **extra):
    return params(m=8, r=3, abstraction=abstraction, encoding=encoding, mode=mode, **extra)


# ======================== Declared domains ========================

class TestDomains:
    @pytest.mark.parametrize("abstraction, encoding, mode", COMBOS)
    def test_declarations_match_signature(self, abstraction, encoding, mode):
        p = _p(abstraction, encoding, mode)
        parsed = parse_domains(emit_smv(p))
        assert parsed == signature(p)
        assert state_space_size(parsed) == state_space_size(signature(p))

    @pytest.mark.parametrize("combo, total", sorted(TOTALS.items()))
    def test_reference_totals(self, combo, total):
        assert state_space_size(parse_domains(emit_smv(_p(*combo)))) == total

    @pytest.mark.parametrize("abstraction, encoding, mode", COMBOS)
    def test_snapshot(self, abstraction, encoding, mode, golden):
        golden(f"{abstraction}_{encoding}_{mode}_m8_r3.smv", emit_smv(_p(abstraction, encoding, mode)))

    def test_missing_snapshot_fails(self, golden, monkeypatch):
        monkeypatch.delenv("SWARMCHECK_UPDATE_GOLDEN", raising=False)
        with pytest.raises(pytest.fail.Exception, match="is missing"):
            golden("no_such_model.smv", "MODULE main\n")

    def test_every_combination_has_a_committed_snapshot(self):
        for abstraction, encoding, mode in COMBOS:
            assert (GOLDEN_DIR / f"{abstraction}_{encoding}_{mode}_m8_r3.smv").is_file()


# ======================== Model text ========================

class TestEmit:
    def test_deterministic(self):
        p = _p("new", "relative", "nonstrict")
        assert emit_smv(p) == emit_smv(p)

    def test_header(self):
        lines = emit_smv(_p("legacy", "global", "strict")).splitlines()
        assert lines[0] == config.config.SMV_DIALECT_HEADER
        assert lines[1].startswith("-- params: {")
        assert lines[2] == "-- property: F all_connected"

    def test_sync_is_not_exported(self):
        with pytest.raises(UnsupportedConfiguration):
            emit_smv(_p("legacy", "global", "sync"))

    def test_property_clause(self):
        text = emit_smv(_p("legacy", "global", "strict"), parse_property("GF !pairwise(0,2)"))
        assert "LTLSPEC\n  G F !near_0_2" in text
        assert text.endswith("\n")

    def test_reference_instance(self):
        text = emit_smv(_p("legacy", "relative", "strict"))
        assert "  reference : ReferenceLegacy(active_0, k_0, random);" in text
        assert "MODULE ReferenceLegacy(active, k, random)" in text
        assert "  x_0 := 0;" in text

    def test_legacy_fair_uses_processes(self):
        text = emit_smv(_p("legacy", "global", "fair"))
        assert "  r0 : process RobotLegacy(TRUE, k_0);" in text
        assert "FAIRNESS\n  running" in text
        assert "selector" not in text

    def test_legacy_relative_fair_poses_follow_running_process(self):
        text = emit_smv(_p("legacy", "relative", "fair"))
        robot_module = text.split("MODULE RobotLegacy", 1)[1].split("MODULE ", 1)[0]
        assert "next(x) := case" not in robot_module
        assert "next(motion) := case" in robot_module
        assert "TRANS\n  next(r1.x) = case\n      reference.running & reference.rot = 0 : r1.fx;" in text
        assert "      r1.running & r1.moving & r1.heading = 1 : (r1.x + 1) mod 8;" in text
        assert "  & next(r2.direction) in case\n      reference.running : (r2.direction + 4 - reference.rot) mod 4;" in text

    def test_frame_assignments_stay_in_module_without_processes(self):
        text = emit_smv(_p("legacy", "relative", "strict"))
        assert "TRANS" not in text
        assert "      ref_active & rot = 1 : (8 - fy) mod 8;" in text

    def test_new_fair_uses_selector(self):
        text = emit_smv(_p("new", "global", "fair"))
        assert "FAIRNESS\n  selector = 0\n  selector = 1\n  selector = 2" in text

    def test_nonstrict_scheduler(self):
        text = emit_smv(_p("legacy", "global", "nonstrict"))
        assert "  init(remaining) := 7;" in text
        assert "      remaining = 7 & turn = 0 : 6;" in text
        assert "      remaining = 4 & turn = 2 : 7;" in text

    def test_explicit_initial_state(self):
        start = (RobotSpec(x=1, y=2, dir="E"), RobotSpec(x=3, y=3, dir="N"), RobotSpec(x=5, y=0, dir="W"))
        p = _p("legacy", "global", "strict", init=InitialConstraint(kind=InitKind.EXPLICIT, states=(start,)))
        text = emit_smv(p)
        assert "(x_0 = 1 & y_0 = 2 & d_0 = 1 & aux_0 = default)" in text

    def test_metric_in_range_macro(self):
        text = emit_smv(_p("legacy", "global", "strict", metric="manhattan"))
        assert "  near_0_1 := dx_0_1 + dy_0_1 <= 1;" in text


# ======================== Reader errors ========================

class TestParseErrors:
    @pytest.mark.parametrize("text, line, fragment", [
        ("", 0, "empty model text"),
        ("-- nothing but a comment\n", 0, "no module found"),
        ("VAR\n  x : 0..1;\n", 1, "outside any module"),
        ("MODULE helper\nVAR\n  x : 0..1;\n", 0, "no main module"),
        ("MODULE main\nVAR\n  x 0..1;\n", 3, "malformed declaration"),
        ("MODULE main\nVAR\n  x : 3..1;\n", 3, "empty range"),
        ("MODULE main\nVAR\n  r0 : Robot(turn);\n", 3, "undeclared module"),
        ("MODULE main\nVAR\nMODULE main\n", 3, "declared twice"),
    ])
    def test_messages(self, text, line, fragment):
        with pytest.raises(DomainParseError) as err:
            parse_domains(text)
        assert err.value.line == line
        assert fragment in str(err.value)

    def test_enumerations_and_booleans(self):
        sig = parse_domains("MODULE main\nVAR\n  flag : boolean;\n  mode : {a, b, c};  -- three\n")
        assert sig.global_vars == {"flag": 2, "mode": 3}
        assert sig.robot_count == 0
