"""Regression-test prioritization for ST/SFC control projects.

Thin convenience layer over the native module: the heavy lifting (parsing,
simulation, diffing, prioritization) happens in C++; the wrappers here parse
the JSON artifacts into plain dicts.
"""
import json

from _stprio import (  # noqa: F401
    build_model_json,
    check_instrumentation,
    checksum,
    diff_projects,
    impact_analysis,
    instrument_project,
    normalize,
    parse_pou,
    prioritize,
    run_suite,
)

__all__ = [
    "build_model",
    "build_model_json",
    "check_instrumentation",
    "checksum",
    "diff_projects",
    "impact_analysis",
    "instrument_project",
    "normalize",
    "parse_pou",
    "prioritize",
    "prioritize_files",
    "run_pipeline",
    "run_suite",
]


def build_model(project_dir):
    """Dependency model of a project directory, as a dict."""
    return json.loads(build_model_json(project_dir))


def prioritize_files(strategy, mods_path, report_path, traces_dir):
    with open(mods_path) as f:
        mods = f.read()
    with open(report_path) as f:
        report = f.read()
    return json.loads(prioritize(strategy, mods, report, traces_dir))


def run_pipeline(old_dir, new_dir, suite_path, workdir, strategy="mttc"):
    """Full workflow: instrument the old revision, execute the suite,
    diff against the new revision, propagate the impact and order the
    tests. Returns the plan as a dict."""
    import os

    instr_dir = os.path.join(workdir, "instrumented")
    traces_dir = os.path.join(workdir, "traces")
    instrument_project(old_dir, instr_dir)
    report = run_suite(instr_dir, suite_path, "", traces_dir)
    changes = diff_projects(old_dir, new_dir)
    mods = impact_analysis(new_dir, changes, os.path.join(instr_dir, "tpdb.json"))
    return json.loads(prioritize(strategy, mods, report, traces_dir))
