"""Python smoke test: the bound pipeline reproduces the fixture plan."""
import json
import sys
import tempfile

import stprio


def main(fixtures):
    # token-level checksum behavior
    assert stprio.checksum("a := 1;") == stprio.checksum("a:=1; (* c *)")
    assert stprio.checksum("a := 1;") != stprio.checksum("a := 2;")
    assert stprio.normalize("x  :=   1 ;") == "x := 1 ;"

    rendered = stprio.parse_pou("PROGRAM P\nVAR x : INT; END_VAR\nx := x + 1;\nEND_PROGRAM\n")
    assert "x := " in rendered

    model = stprio.build_model(fixtures + "/depal_v1")
    kinds = {n["kind"] for n in model["nodes"]}
    assert {"Program", "FunctionBlock", "BasicBlock", "SfcStep", "GlobalVariable"} <= kinds

    with tempfile.TemporaryDirectory() as workdir:
        plan = stprio.run_pipeline(
            fixtures + "/depal_v1",
            fixtures + "/depal_v2",
            fixtures + "/suite.json",
            workdir,
            strategy="mttc",
        )
        order = [e["id"] for e in plan["order"]]
        assert order[:3] == ["12", "11", "13"], order
        assert plan["mttcs"][0]["cover_time_ms"] == 52000, plan["mttcs"]

        with tempfile.TemporaryDirectory() as w2:
            n = stprio.instrument_project(fixtures + "/depal_v1", w2 + "/instr")
            assert n == 45, n
            report = json.loads(
                stprio.run_suite(w2 + "/instr", fixtures + "/suite.json", "", w2 + "/traces")
            )
            assert report["totals"]["passed"] == 14
            changes = stprio.diff_projects(fixtures + "/depal_v1", fixtures + "/depal_v2")
            mods = json.loads(
                stprio.impact_analysis(
                    fixtures + "/depal_v2", changes, w2 + "/instr/tpdb.json"
                )
            )
            assert mods["modified_blocks"] == [
                "FB_Gripper.bb1",
                "FB_Gripper.bb7",
                "FB_Gripper.bb8",
                "FB_Gripper.bb9",
            ], mods["modified_blocks"]

    print("python smoke: OK")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1]))
