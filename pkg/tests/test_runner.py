import json
import time
from pathlib import Path

import pytest

from milpbench.config import Configuration, empty_store, load_store
from milpbench.runner import (
    BackendKind,
    BackendSpec,
    DatasetMismatch,
    DatasetSpec,
    ObjectiveKind,
    RunStatus,
    grace_seconds,
    load_dataset,
    read_log,
    resume_suite,
    run_job,
    run_suite,
)

from _helpers import (
    chain_instance,
    contradictory_bounds_instance,
    enumerate_binary_optimum,
    knapsack_2var,
    market_split_instance,
    parity_infeasible_instance,
    write_instance,
)

BUILTIN = BackendSpec(kind=BackendKind.BUILTIN)


def default_cfg():
    return Configuration({}, "default")


def test_named_dataset_limit_must_be_canonical():
    with pytest.raises(ValueError):
        DatasetSpec("miplib240", ("a.mps",), 1234.0)
    ds = DatasetSpec("miplib240", ("a.mps",), 7200.0)
    assert ds.objective_kind is ObjectiveKind.OPTIMIZE


def test_external_backend_requires_placeholders():
    with pytest.raises(ValueError, match="placeholders"):
        BackendSpec(kind=BackendKind.EXTERNAL, command_template="solver {instance}")


def test_run_job_builtin_knapsack(tmp_path):
    path = write_instance(tmp_path, knapsack_2var())
    want = enumerate_binary_optimum(knapsack_2var())
    record = run_job(path, BUILTIN, default_cfg(), 30.0)
    assert record.status is RunStatus.OPTIMAL
    assert record.objective == pytest.approx(want[1], abs=1e-9)
    assert record.wall_time_s >= 0.0
    assert record.nodes >= 1
    assert record.ticks >= 1


def test_run_job_builtin_infeasible(tmp_path):
    path = write_instance(tmp_path, contradictory_bounds_instance())
    record = run_job(path, BUILTIN, default_cfg(), 30.0)
    assert record.status is RunStatus.INFEASIBLE
    assert record.objective is None


def test_run_job_parse_failure_is_error_record(tmp_path):
    bad = tmp_path / "broken.mps"
    bad.write_text("ROWS\n nonsense\n")
    record = run_job(bad, BUILTIN, default_cfg(), 30.0)
    assert record.status is RunStatus.ERROR
    assert "parse" in record.diagnostics


def test_run_job_writes_solution_files(tmp_path):
    path = write_instance(tmp_path, knapsack_2var())
    backend = BackendSpec(kind=BackendKind.BUILTIN, solution_path_template="{instance}.sol")
    record = run_job(path, backend, default_cfg(), 30.0, work_dir=tmp_path)
    sol = Path(record.solution_path)
    assert sol.exists()
    text = sol.read_text()
    assert "=obj=" in text
    assert (tmp_path / "knap2.sol.status").read_text().strip() == "optimal"


FAKE_SOLVER = """\
import sys

instance, config, timelimit, solution = sys.argv[1:5]
mode = sys.argv[5] if len(sys.argv) > 5 else "ok"
if mode == "crash":
    sys.exit(3)
if mode == "garbage":
    open(solution + ".status", "w").write("no-such-status\\n")
    sys.exit(0)
with open(solution, "w") as fh:
    fh.write("x0 0.0\\nx1 1.0\\n=obj= -2.0\\n")
with open(solution + ".status", "w") as fh:
    fh.write("optimal\\n")
"""


def _external_backend(tmp_path, mode="ok"):
    script = tmp_path / "fake_solver.py"
    script.write_text(FAKE_SOLVER)
    return BackendSpec(
        kind=BackendKind.EXTERNAL,
        command_template=f"python3 {script} {{instance}} {{config}} {{timelimit}} {{solution}} {mode}",
        solution_path_template="{instance}.extsol",
    )


def test_external_backend_round_trip(tmp_path):
    path = write_instance(tmp_path, knapsack_2var())
    backend = _external_backend(tmp_path)
    record = run_job(path, backend, default_cfg(), 20.0, solver_label="ext", work_dir=tmp_path)
    assert record.status is RunStatus.OPTIMAL
    assert record.objective == pytest.approx(-2.0)
    assert record.solver_label == "ext"
    assert Path(record.solution_path).read_text().startswith("x0")


def test_external_backend_nonzero_exit_is_error(tmp_path):
    path = write_instance(tmp_path, knapsack_2var())
    backend = _external_backend(tmp_path, mode="crash")
    record = run_job(path, backend, default_cfg(), 20.0, work_dir=tmp_path)
    assert record.status is RunStatus.ERROR
    assert "exit code 3" in record.diagnostics


def test_external_backend_bad_status_is_error(tmp_path):
    path = write_instance(tmp_path, knapsack_2var())
    backend = _external_backend(tmp_path, mode="garbage")
    record = run_job(path, backend, default_cfg(), 20.0, work_dir=tmp_path)
    assert record.status is RunStatus.ERROR


def test_external_backend_killed_past_grace(tmp_path, monkeypatch):
    import milpbench.runner as runner_mod

    script = tmp_path / "sleeper.py"
    script.write_text("import time, sys\ntime.sleep(30)\n")
    backend = BackendSpec(
        kind=BackendKind.EXTERNAL,
        command_template=f"python3 {script} {{instance}} {{config}} {{timelimit}} {{solution}}",
        solution_path_template="{instance}.sol",
    )
    monkeypatch.setattr(runner_mod, "grace_seconds", lambda limit: 0.3)
    path = write_instance(tmp_path, knapsack_2var())
    t0 = time.monotonic()
    record = run_job(path, backend, default_cfg(), 0.2, work_dir=tmp_path)
    assert record.status is RunStatus.TIME_LIMIT
    assert "killed" in record.diagnostics
    assert time.monotonic() - t0 < 10.0


def _tiny_dataset(tmp_path, n=3) -> DatasetSpec:
    paths = [write_instance(tmp_path, chain_instance(6 + k, name=f"tiny{k}")) for k in range(n)]
    return DatasetSpec("custom", tuple(paths), 30.0)


def test_run_suite_default_labels(tmp_path):
    ds = _tiny_dataset(tmp_path)
    log = run_suite(ds, BUILTIN, empty_store(), adapt_enabled=False)
    assert len(log.records) == 3
    assert [r.instance_name for r in log.records] == ["tiny0", "tiny1", "tiny2"]
    assert all(r.config_label == "default" for r in log.records)
    assert all(r.status is RunStatus.OPTIMAL for r in log.records)
    assert log.solver_label == "builtin-default"


def test_run_suite_by_instance_override(tmp_path):
    ds = _tiny_dataset(tmp_path)
    store = load_store(
        json.dumps(
            {
                "configs": {"default": {}, "special": {"15": 1}},
                "default": "default",
                "by_instance": {"tiny1": "special"},
            }
        )
    )
    log = run_suite(ds, BUILTIN, store, adapt_enabled=True)
    labels = {r.instance_name: r.config_label for r in log.records}
    assert labels == {"tiny0": "default", "tiny1": "special", "tiny2": "default"}


def test_run_suite_detect_infeasible(tmp_path):
    paths = [
        write_instance(tmp_path, parity_infeasible_instance(5, name=f"inf{k}")) for k in range(3)
    ]
    ds = DatasetSpec("custom", tuple(paths), 30.0, ObjectiveKind.DETECT_INFEASIBLE)
    log = run_suite(ds, BUILTIN, empty_store(), adapt_enabled=False)
    assert all(r.status is RunStatus.INFEASIBLE for r in log.records)


def test_run_suite_unreadable_instance_continues(tmp_path):
    good = write_instance(tmp_path, knapsack_2var())
    ds = DatasetSpec("custom", (str(tmp_path / "missing.mps"), good), 30.0)
    log = run_suite(ds, BUILTIN, empty_store(), adapt_enabled=False)
    assert [r.status for r in log.records] == [RunStatus.ERROR, RunStatus.OPTIMAL]


def test_log_round_trip_and_header(tmp_path):
    ds = _tiny_dataset(tmp_path)
    out = tmp_path / "run.jsonl"
    log = run_suite(ds, BUILTIN, empty_store(), adapt_enabled=False, log_path=out)
    loaded = read_log(out)
    assert loaded.dataset == ds
    assert loaded.solver_label == log.solver_label
    assert loaded.adapt_enabled is False
    assert [r.instance_name for r in loaded.records] == [r.instance_name for r in log.records]
    assert [r.status for r in loaded.records] == [r.status for r in log.records]
    assert loaded.protocol["shift"] == 10.0
    assert loaded.protocol["gap_tolerance"] == 0.0


def test_resume_skips_done_and_runs_missing(tmp_path):
    ds = _tiny_dataset(tmp_path)
    out = tmp_path / "run.jsonl"
    full = run_suite(ds, BUILTIN, empty_store(), adapt_enabled=False, log_path=out)
    # simulate a crash: drop the last record line
    lines = out.read_text().splitlines()
    out.write_text("\n".join(lines[:-1]) + "\n")
    partial = read_log(out)
    assert len(partial.records) == 2

    resumed = resume_suite(ds, BUILTIN, empty_store(), partial, log_path=out)
    assert len(resumed.records) == 3
    assert {r.instance_name for r in resumed.records} == {"tiny0", "tiny1", "tiny2"}
    again = read_log(out)
    assert len(again.records) == 3


def test_resume_complete_log_runs_nothing(tmp_path):
    ds = _tiny_dataset(tmp_path)
    full = run_suite(ds, BUILTIN, empty_store(), adapt_enabled=False)
    ticks_before = [r.ticks for r in full.records]
    resumed = resume_suite(ds, BUILTIN, empty_store(), full)
    assert [r.ticks for r in resumed.records] == ticks_before
    assert [r.started_at for r in resumed.records] == [r.started_at for r in full.records]


def test_resume_reruns_error_records(tmp_path):
    ds = _tiny_dataset(tmp_path)
    full = run_suite(ds, BUILTIN, empty_store(), adapt_enabled=False)
    broken = full.records[1]
    broken.status = RunStatus.ERROR
    broken.diagnostics = "synthetic failure"
    resumed = resume_suite(ds, BUILTIN, empty_store(), full)
    assert len(resumed.records) == 3
    fixed = resumed.by_instance()["tiny1"]
    assert fixed.status is RunStatus.OPTIMAL


def test_resume_dataset_mismatch(tmp_path):
    ds = _tiny_dataset(tmp_path)
    other = DatasetSpec("custom", ds.instance_paths[:2], 30.0)
    full = run_suite(ds, BUILTIN, empty_store(), adapt_enabled=False)
    with pytest.raises(DatasetMismatch):
        resume_suite(other, BUILTIN, empty_store(), full)


def test_crash_truncation_mid_record_is_recoverable(tmp_path):
    ds = _tiny_dataset(tmp_path)
    out = tmp_path / "run.jsonl"
    run_suite(ds, BUILTIN, empty_store(), adapt_enabled=False, log_path=out)
    raw = out.read_text()
    out.write_text(raw[: len(raw) - 40])  # tear the final record in half
    partial = read_log(out)
    assert len(partial.records) == 2
    resumed = resume_suite(ds, BUILTIN, empty_store(), partial, log_path=out)
    assert len(resumed.records) == 3
    assert len(read_log(out).records) == 3


@pytest.mark.parametrize("keep_records", [0, 1, 2])
def test_truncation_after_any_record_is_recoverable(tmp_path, keep_records):
    ds = _tiny_dataset(tmp_path)
    out = tmp_path / "run.jsonl"
    run_suite(ds, BUILTIN, empty_store(), adapt_enabled=False, log_path=out)
    lines = out.read_text().splitlines()
    out.write_text("\n".join(lines[: 1 + keep_records]) + "\n")  # header + k records
    partial = read_log(out)
    assert len(partial.records) == keep_records
    resumed = resume_suite(ds, BUILTIN, empty_store(), partial, log_path=out)
    assert sorted(r.instance_name for r in resumed.records) == ["tiny0", "tiny1", "tiny2"]
    assert len(read_log(out).records) == 3


def test_timeout_safety_hard_instance(tmp_path):
    path = write_instance(tmp_path, market_split_instance(seed=7, n=25, m=4))
    t0 = time.monotonic()
    record = run_job(path, BUILTIN, default_cfg(), 1.0)
    elapsed = time.monotonic() - t0
    assert record.status is RunStatus.TIME_LIMIT
    assert record.wall_time_s <= 1.0 + grace_seconds(1.0)
    assert elapsed <= 1.0 + grace_seconds(1.0)
    assert record.wall_time_s < 3.0  # in practice the solver stops right at the deadline


def test_dataset_file_loader(tmp_path):
    p1 = write_instance(tmp_path, knapsack_2var())
    doc = {"name": "custom", "instances": [p1], "time_limit_s": 12.5}
    ds_path = tmp_path / "ds.json"
    ds_path.write_text(json.dumps(doc))
    ds = load_dataset(ds_path)
    assert ds.time_limit_s == 12.5
    assert ds.instance_paths == (p1,)


def test_suite_determinism_builtin(tmp_path):
    ds = _tiny_dataset(tmp_path)
    a = run_suite(ds, BUILTIN, empty_store(), adapt_enabled=False)
    b = run_suite(ds, BUILTIN, empty_store(), adapt_enabled=False)
    assert [(r.status, r.objective, r.nodes, r.ticks) for r in a.records] == [
        (r.status, r.objective, r.nodes, r.ticks) for r in b.records
    ]


def test_parallel_suite_keeps_record_order(tmp_path):
    ds = _tiny_dataset(tmp_path, n=4)
    seq = run_suite(ds, BUILTIN, empty_store(), adapt_enabled=False)
    par = run_suite(ds, BUILTIN, empty_store(), adapt_enabled=False, parallel=2)
    assert [r.instance_name for r in par.records] == [r.instance_name for r in seq.records]
    assert [(r.status, r.objective, r.nodes) for r in par.records] == [
        (r.status, r.objective, r.nodes) for r in seq.records
    ]
