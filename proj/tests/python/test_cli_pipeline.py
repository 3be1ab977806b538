"""End-to-end CLI checks: full workflow, exit codes, byte-stable reruns."""
import filecmp
import json
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path


def run(args, expect=0):
    proc = subprocess.run(args, capture_output=True, text=True)
    if proc.returncode != expect:
        print("command:", " ".join(str(a) for a in args))
        print("stdout:", proc.stdout)
        print("stderr:", proc.stderr)
        raise AssertionError(f"exit {proc.returncode}, expected {expect}")
    return proc


def main(cli, fixtures):
    cli = Path(cli)
    fixtures = Path(fixtures)
    v1 = fixtures / "depal_v1"
    v2 = fixtures / "depal_v2"
    suite = fixtures / "suite.json"

    with tempfile.TemporaryDirectory() as tmp:
        work = Path(tmp)
        instr = work / "instr"
        traces = work / "traces"

        run([cli, "build-model", v1, "-o", work / "model.json"])
        model = json.loads((work / "model.json").read_text())
        assert any(n["qname"] == "FB_Gripper.bb7" for n in model["nodes"])

        run([cli, "instrument", v1, "-o", instr, "--db", work / "tpdb.json"])
        run([cli, "run", instr, "--suite", suite, "-o", work / "report.json",
             "--traces", traces])
        report = json.loads((work / "report.json").read_text())
        assert report["totals"]["passed"] == 14

        run([cli, "diff", v1, v2, "-o", work / "changes.json"])
        run([cli, "impact", v2, work / "changes.json", "--old-db", work / "tpdb.json",
             "-o", work / "mods.json"])

        for strategy, first in [("simple", "11"), ("intensity", "13"), ("mttc", "12")]:
            run([cli, "prioritize", "--strategy", strategy, work / "mods.json",
                 work / "report.json", "--traces", traces, "-o", work / f"plan_{strategy}.json"])
            plan = json.loads((work / f"plan_{strategy}.json").read_text())
            assert plan["order"][0]["id"] == first, (strategy, plan["order"][0])
            assert len(plan["order"]) == 14

        # diff of identical revisions is empty and exits 0
        run([cli, "diff", v1, v1, "-o", work / "same.json"])
        same = json.loads((work / "same.json").read_text())
        assert same["modified_pous"] == [] and same["added_pous"] == []

        # stage idempotence: byte-identical artifacts on rerun
        run([cli, "diff", v1, v2, "-o", work / "changes2.json"])
        assert filecmp.cmp(work / "changes.json", work / "changes2.json", shallow=False)
        run([cli, "build-model", v1, "-o", work / "model2.json"])
        assert filecmp.cmp(work / "model.json", work / "model2.json", shallow=False)
        run([cli, "run", instr, "--suite", suite, "-o", work / "report_b.json",
             "--traces", work / "traces_b"])
        assert filecmp.cmp(work / "report.json", work / "report_b.json", shallow=False)
        assert filecmp.cmp(traces / "trace_13.json", work / "traces_b" / "trace_13.json",
                           shallow=False)
        run([cli, "prioritize", "--strategy", "mttc", work / "mods.json",
             work / "report.json", "--traces", traces, "-o", work / "plan_b.json"])
        assert filecmp.cmp(work / "plan_mttc.json", work / "plan_b.json", shallow=False)

        # version mismatch: a db from the wrong revision exits 3
        instr2 = work / "instr2"
        run([cli, "instrument", v2, "-o", instr2, "--db", work / "tpdb2.json"])
        run([cli, "impact", v2, work / "changes.json", "--old-db", work / "tpdb2.json",
             "-o", work / "bad.json"], expect=3)

        # parse errors exit 2
        broken = work / "broken"
        shutil.copytree(v1, broken)
        (broken / "p_mode.st").write_text("PROGRAM P_Mode\nx — y\nEND_PROGRAM\n")
        run([cli, "build-model", broken, "-o", work / "nope.json"], expect=2)

        # usage errors exit 1
        run([cli, "prioritize"], expect=1)

        # runtime faults exit 4
        faulty = work / "faulty"
        faulty.mkdir()
        (faulty / "p.st").write_text(
            "PROGRAM P\nVAR x : INT; y : INT; END_VAR\nx := 1 / y;\nEND_PROGRAM\n")
        (faulty / "tasks.cfg").write_text("task main program P cycle_ms 10\n")
        instr3 = work / "instr3"
        run([cli, "instrument", faulty, "-o", instr3])
        suite1 = work / "one.json"
        suite1.write_text(json.dumps({"tests": [{"id": "t", "name": "t", "steps": [
            {"op": "wait_cycles", "n": 1}]}]}))
        run([cli, "run", instr3, "--suite", suite1, "-o", work / "r3.json",
             "--traces", work / "t3"], expect=4)

        # the propagation cap is accepted and keeps the fixture result intact
        run([cli, "impact", v2, work / "changes.json", "--old-db", work / "tpdb.json",
             "-o", work / "mods_depth.json", "--max-depth", "8"])
        deep = json.loads((work / "mods_depth.json").read_text())
        base = json.loads((work / "mods.json").read_text())
        assert deep["mapped_tp_ids"] == base["mapped_tp_ids"]

        # differential mode passes on the untouched fixture
        run([cli, "run", instr, "--suite", suite, "-o", work / "r2.json",
             "--traces", work / "t2", "--compare-original", v1])

    print("cli pipeline: OK")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1], sys.argv[2]))
