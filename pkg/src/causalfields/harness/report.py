"""Deterministic report serialization, rendering, and offline re-audit."""

from __future__ import annotations

import json

from ..errors import ConfigurationError


def canonical_json(obj):
    """Stable byte representation: sorted keys, fixed separators, newline."""
    return json.dumps(obj, sort_keys=True, indent=2, separators=(",", ": ")) + "\n"


def write_report(report, path):
    data = canonical_json(report)
    with open(path, "w") as fh:
        fh.write(data)
    return path


def load_report(path):
    with open(path) as fh:
        return json.load(fh)


def render_text(report):
    """Human-readable rendering of a spinstat report."""
    lines = []
    lines.append(f"{report['tool']} v{report['version']}  backend={report['backend']}")
    lines.append(f"seed={report['seed']}")
    for stage in report["stages"]:
        tag = "PASS" if stage["passed"] else "FAIL"
        lines.append(f"stage {stage['name']}: {tag}")
        for c in stage["checks"]:
            mark = "ok  " if c["passed"] else "FAIL"
            rel = {"max": "<=", "min": ">="}[c["mode"]]
            lines.append(
                f"  [{mark}] {c['name']:<34} value={c['value']:.6e} "
                f"{rel} {c['threshold']:.6e}"
            )
            if not c["passed"] and c.get("detail"):
                lines.append(f"         {c['detail']}")
    counts = report["counts"]
    lines.append(
        f"checks: {counts['checks'] - counts['failed']}/{counts['checks']} passed"
    )
    for branch, verdict in sorted(report.get("branches", {}).items()):
        lines.append(f"branch {branch}: {verdict}")
    lines.append(f"verdict: {report['verdict']}")
    return "\n".join(lines) + "\n"


def recheck(report):
    """Recompute every pass flag from the stored values and thresholds.

    Returns (consistent, recomputed_verdict): `consistent` is False when any
    stored flag, stage flag, count, or the verdict contradicts the stored
    numbers (i.e. the report was edited or corrupted).
    """
    from .spinstat import branch_verdict, overall_verdict

    consistent = True
    failed = 0
    total = 0
    recomputed = []
    for stage in report.get("stages", []):
        flags = []
        fixed_checks = []
        for c in stage.get("checks", []):
            total += 1
            mode = c.get("mode", "max")
            if mode == "max":
                expect = c["value"] <= c["threshold"]
            elif mode == "min":
                expect = c["value"] >= c["threshold"]
            else:
                raise ConfigurationError(f"unknown check mode {mode!r} in report")
            if bool(c["passed"]) != bool(expect):
                consistent = False
            flags.append(expect)
            fixed_checks.append({**c, "passed": bool(expect)})
            if not expect:
                failed += 1
        stage_ok = all(flags)
        recomputed.append({"name": stage.get("name", ""), "checks": fixed_checks})
        if bool(stage.get("passed")) != stage_ok:
            consistent = False
    verdict = overall_verdict(recomputed)
    if report.get("verdict") != verdict:
        consistent = False
    branches = report.get("branches", {})
    for branch, stored in branches.items():
        if stored != branch_verdict(recomputed, branch):
            consistent = False
    counts = report.get("counts", {})
    if counts.get("checks") != total or counts.get("failed") != failed:
        consistent = False
    return consistent, verdict
