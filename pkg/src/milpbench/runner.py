"""Benchmark orchestration: timed jobs, suites, crash-safe logs, resume.

Run logs are JSON lines: a header carrying the dataset and protocol, then
one record per executed job.  The file is append-only; when an instance is
re-run (error retry) the newer line supersedes the older one at load time,
so a log always yields at most one record per (instance, solver) pair.
"""

from __future__ import annotations

import json
import math
import os
import shlex
import subprocess
import tempfile
import time
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import IO, Optional, Union

from .config import ConfigStore, Configuration, adapt, configuration_to_json, map_to_reference
from .instance import Instance, extract_features
from .mps import MpsParseError, load_instance
from .solution_io import read_solution, read_status, status_path_for, write_solution, write_status
from .solver import SolveStatus, branch_and_bound

PathLike = Union[str, Path]

PROTOCOL_SHIFT = 10.0
PROTOCOL_GAP_TOLERANCE = 0.0

DATASET_LIMITS = {"miplib240": 7200.0, "pathological45": 10800.0, "infeasibility32": 3600.0}
_ALLOWED_NAMED_LIMITS = (7200.0, 3600.0, 10800.0)

_PLACEHOLDERS = ("{instance}", "{config}", "{timelimit}", "{solution}")


class DatasetMismatch(ValueError):
    """Resume was handed a log whose dataset differs from the requested one."""


class ObjectiveKind(Enum):
    OPTIMIZE = "optimize"
    DETECT_INFEASIBLE = "detect_infeasible"


class RunStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    TIME_LIMIT = "time_limit"
    ERROR = "error"


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    instance_paths: tuple[str, ...]
    time_limit_s: float
    objective_kind: ObjectiveKind = ObjectiveKind.OPTIMIZE

    def __post_init__(self):
        if self.time_limit_s <= 0:
            raise ValueError("time_limit_s must be positive")
        if self.name in DATASET_LIMITS and self.time_limit_s not in _ALLOWED_NAMED_LIMITS:
            raise ValueError(
                f"dataset {self.name!r} must use a time limit from {_ALLOWED_NAMED_LIMITS}"
            )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "instance_paths": list(self.instance_paths),
            "time_limit_s": self.time_limit_s,
            "objective_kind": self.objective_kind.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetSpec":
        return cls(
            name=d["name"],
            instance_paths=tuple(d["instance_paths"]),
            time_limit_s=float(d["time_limit_s"]),
            objective_kind=ObjectiveKind(d.get("objective_kind", "optimize")),
        )


def load_dataset(source: Union[str, IO[str], Path]) -> DatasetSpec:
    """Dataset file: JSON with name, instances, optional limit and kind."""
    if isinstance(source, str) and source.lstrip().startswith("{"):
        text = source
        base = Path(".")
    elif isinstance(source, (str, Path)):
        text = Path(source).read_text()
        base = Path(source).parent
    else:
        text = source.read()
        base = Path(".")
    doc = json.loads(text)
    name = doc.get("name", "custom")
    paths = tuple(str((base / p)) if not Path(p).is_absolute() else p for p in doc["instances"])
    limit = float(doc.get("time_limit_s", DATASET_LIMITS.get(name, 60.0)))
    kind = ObjectiveKind(doc.get("objective_kind", "optimize"))
    return DatasetSpec(name, paths, limit, kind)


class BackendKind(Enum):
    BUILTIN = "builtin"
    EXTERNAL = "external"


@dataclass(frozen=True)
class BackendSpec:
    kind: BackendKind = BackendKind.BUILTIN
    command_template: str = ""
    solution_path_template: str = ""
    env: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind is BackendKind.EXTERNAL:
            missing = [p for p in _PLACEHOLDERS if p not in self.command_template]
            if missing:
                raise ValueError(f"external command template lacks placeholders: {missing}")


@dataclass
class RunRecord:
    instance_name: str
    solver_label: str
    config_label: str
    status: RunStatus
    wall_time_s: float
    objective: Optional[float] = None
    best_bound: Optional[float] = None
    solution_path: Optional[str] = None
    started_at: str = ""
    host_descriptor: str = ""
    nodes: Optional[int] = None
    ticks: Optional[int] = None
    diagnostics: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["status"] = self.status.value
        d["kind"] = "record"
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        d = dict(d)
        d.pop("kind", None)
        d["status"] = RunStatus(d["status"])
        return cls(**d)


@dataclass
class RunLog:
    dataset: DatasetSpec
    solver_label: str
    adapt_enabled: bool
    records: list[RunRecord] = field(default_factory=list)
    protocol: dict = field(
        default_factory=lambda: {
            "gap_tolerance": PROTOCOL_GAP_TOLERANCE,
            "shift": PROTOCOL_SHIFT,
        }
    )

    def upsert(self, record: RunRecord) -> None:
        key = (record.instance_name, record.solver_label)
        for i, old in enumerate(self.records):
            if (old.instance_name, old.solver_label) == key:
                self.records[i] = record
                return
        self.records.append(record)

    def by_instance(self) -> dict[str, RunRecord]:
        return {r.instance_name: r for r in self.records}


class _LogWriter:
    """Append-only JSONL writer; one flush per record keeps crashes cheap."""

    def __init__(self, path: Optional[PathLike], log: RunLog, append: bool = False):
        self.handle = None
        if path is None:
            return
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        exists = path.exists() and path.stat().st_size > 0
        if exists and append and not path.read_bytes().endswith(b"\n"):
            with open(path, "ab") as fh:  # heal a torn tail before appending
                fh.write(b"\n")
        self.handle = open(path, "a")
        if not (append and exists):
            header = {
                "kind": "header",
                "dataset": log.dataset.to_dict(),
                "protocol": dict(log.protocol, time_limit_s=log.dataset.time_limit_s),
                "solver_label": log.solver_label,
                "adapt_enabled": log.adapt_enabled,
            }
            self.handle.write(json.dumps(header) + "\n")
            self.handle.flush()

    def write(self, record: RunRecord) -> None:
        if self.handle is None:
            return
        self.handle.write(json.dumps(record.to_dict()) + "\n")
        self.handle.flush()

    def close(self) -> None:
        if self.handle is not None:
            self.handle.close()
            self.handle = None


def read_log(path: PathLike) -> RunLog:
    """Load a run log; a torn trailing line (crash) is ignored."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError(f"empty run log: {path}")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ValueError(f"corrupt run-log header: {exc}") from None
    if header.get("kind") != "header":
        raise ValueError("run log does not start with a header line")
    log = RunLog(
        dataset=DatasetSpec.from_dict(header["dataset"]),
        solver_label=header.get("solver_label", "builtin"),
        adapt_enabled=bool(header.get("adapt_enabled", False)),
        protocol=header.get("protocol", {}),
    )
    for line in lines[1:]:
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError:
            continue  # torn line after a crash; completed records stand
        if doc.get("kind") == "record":
            log.upsert(RunRecord.from_dict(doc))
    return log


def grace_seconds(limit_s: float) -> float:
    """Teardown allowance before a forced kill: 5% of the limit or 30s."""
    return max(0.05 * limit_s, 30.0)


def _host() -> str:
    return f"{platform.node()}/{platform.machine()}"


def _expand(template: str, **subs: str) -> str:
    out = template
    for key, val in subs.items():
        out = out.replace("{" + key + "}", val)
    return out


def run_job(
    inst_path: PathLike,
    backend: BackendSpec,
    cfg: Configuration,
    limit_s: float,
    solver_label: str = "builtin",
    work_dir: Optional[PathLike] = None,
) -> RunRecord:
    """Execute one timed solve; never raises for solver-side failures.

    Wall time is measured with a monotonic clock around the solve only:
    parsing happens before the clock starts.
    """
    started = datetime.now(timezone.utc).isoformat()
    stem = Path(inst_path).name
    for suffix in (".gz", ".mps"):
        if stem.endswith(suffix):
            stem = stem[: -len(suffix)]
    try:
        inst = load_instance(inst_path)
    except (OSError, MpsParseError) as exc:
        return RunRecord(
            instance_name=stem,
            solver_label=solver_label,
            config_label=cfg.label,
            status=RunStatus.ERROR,
            wall_time_s=0.0,
            started_at=started,
            host_descriptor=_host(),
            diagnostics=f"parse failure: {exc}",
        )

    if backend.kind is BackendKind.BUILTIN:
        return _run_builtin(inst, backend, cfg, limit_s, solver_label, started, work_dir)
    return _run_external(inst, inst_path, backend, cfg, limit_s, solver_label, started, work_dir)


def _solution_path(backend: BackendSpec, inst: Instance, cfg: Configuration, work_dir) -> Optional[Path]:
    if not backend.solution_path_template:
        return None
    expanded = _expand(backend.solution_path_template, instance=inst.name, config=cfg.label or "default")
    path = Path(expanded)
    if not path.is_absolute() and work_dir is not None:
        path = Path(work_dir) / path
    return path


def _run_builtin(
    inst: Instance,
    backend: BackendSpec,
    cfg: Configuration,
    limit_s: float,
    solver_label: str,
    started: str,
    work_dir,
) -> RunRecord:
    opts = map_to_reference(cfg, time_limit_s=limit_s)
    t0 = time.perf_counter()
    outcome = branch_and_bound(inst, opts)
    wall = time.perf_counter() - t0

    status = {
        SolveStatus.OPTIMAL: RunStatus.OPTIMAL,
        SolveStatus.INFEASIBLE: RunStatus.INFEASIBLE,
        SolveStatus.TIME_LIMIT: RunStatus.TIME_LIMIT,
        SolveStatus.NODE_LIMIT: RunStatus.TIME_LIMIT,  # resource family
        SolveStatus.ERROR: RunStatus.ERROR,
    }[outcome.status]

    sol_path = None
    target = _solution_path(backend, inst, cfg, work_dir)
    if target is not None:
        if outcome.incumbent is not None:
            write_solution(target, outcome.incumbent.values, outcome.incumbent.objective)
            sol_path = str(target)
        write_status(target, status.value)

    bound = outcome.best_bound if math.isfinite(outcome.best_bound) else None
    return RunRecord(
        instance_name=inst.name,
        solver_label=solver_label,
        config_label=cfg.label,
        status=status,
        wall_time_s=wall,
        objective=outcome.incumbent.objective if outcome.incumbent else None,
        best_bound=bound,
        solution_path=sol_path,
        started_at=started,
        host_descriptor=_host(),
        nodes=outcome.nodes,
        ticks=outcome.deterministic_ticks,
    )


def _run_external(
    inst: Instance,
    inst_path: PathLike,
    backend: BackendSpec,
    cfg: Configuration,
    limit_s: float,
    solver_label: str,
    started: str,
    work_dir,
) -> RunRecord:
    base = Path(work_dir) if work_dir else Path(tempfile.mkdtemp(prefix="milpbench-job-"))
    base.mkdir(parents=True, exist_ok=True)
    cfg_path = base / f"{inst.name}.config.json"
    cfg_path.write_text(configuration_to_json(cfg))
    target = _solution_path(backend, inst, cfg, base) or (base / f"{inst.name}.sol")

    command = _expand(
        backend.command_template,
        instance=str(inst_path),
        config=str(cfg_path),
        timelimit=repr(float(limit_s)),
        solution=str(target),
    )
    env = dict(os.environ, **backend.env)
    killed = False
    t0 = time.perf_counter()
    try:
        proc = subprocess.Popen(
            shlex.split(command), env=env, stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True
        )
        try:
            _, stderr = proc.communicate(timeout=limit_s + grace_seconds(limit_s))
        except subprocess.TimeoutExpired:
            killed = True
            proc.kill()
            _, stderr = proc.communicate()
    except OSError as exc:
        return RunRecord(
            instance_name=inst.name,
            solver_label=solver_label,
            config_label=cfg.label,
            status=RunStatus.ERROR,
            wall_time_s=time.perf_counter() - t0,
            started_at=started,
            host_descriptor=_host(),
            diagnostics=f"launch failure: {exc}",
        )
    wall = time.perf_counter() - t0

    if killed:
        return RunRecord(
            instance_name=inst.name,
            solver_label=solver_label,
            config_label=cfg.label,
            status=RunStatus.TIME_LIMIT,
            wall_time_s=wall,
            started_at=started,
            host_descriptor=_host(),
            diagnostics="killed after the grace envelope",
        )
    if proc.returncode != 0:
        return RunRecord(
            instance_name=inst.name,
            solver_label=solver_label,
            config_label=cfg.label,
            status=RunStatus.ERROR,
            wall_time_s=wall,
            started_at=started,
            host_descriptor=_host(),
            diagnostics=f"exit code {proc.returncode}: {stderr.strip()[-500:]}",
        )

    try:
        status = RunStatus(read_status(target))
    except (OSError, ValueError) as exc:
        return RunRecord(
            instance_name=inst.name,
            solver_label=solver_label,
            config_label=cfg.label,
            status=RunStatus.ERROR,
            wall_time_s=wall,
            started_at=started,
            host_descriptor=_host(),
            diagnostics=f"unreadable status file: {exc}",
        )
    objective = None
    sol_path = None
    if target.exists():
        try:
            _, objective = read_solution(target)
            sol_path = str(target)
        except (OSError, ValueError) as exc:
            return RunRecord(
                instance_name=inst.name,
                solver_label=solver_label,
                config_label=cfg.label,
                status=RunStatus.ERROR,
                wall_time_s=wall,
                started_at=started,
                host_descriptor=_host(),
                diagnostics=f"unparseable solution file: {exc}",
            )
    return RunRecord(
        instance_name=inst.name,
        solver_label=solver_label,
        config_label=cfg.label,
        status=status,
        wall_time_s=wall,
        objective=objective,
        solution_path=sol_path,
        started_at=started,
        host_descriptor=_host(),
    )


def _select_config(
    inst: Instance, store: ConfigStore, adapt_enabled: bool
) -> Configuration:
    if adapt_enabled:
        return adapt(inst.name, extract_features(inst), store)
    return store.configs[store.default_label]


def _job_for_path(args) -> RunRecord:
    path, backend, store, adapt_enabled, limit, label, work_dir = args
    try:
        inst = load_instance(path)
        cfg = _select_config(inst, store, adapt_enabled)
    except (OSError, MpsParseError) as exc:
        stem = Path(path).name.removesuffix(".gz").removesuffix(".mps")
        return RunRecord(
            instance_name=stem,
            solver_label=label,
            config_label="",
            status=RunStatus.ERROR,
            wall_time_s=0.0,
            started_at=datetime.now(timezone.utc).isoformat(),
            host_descriptor=_host(),
            diagnostics=f"unreadable instance: {exc}",
        )
    return run_job(path, backend, cfg, limit, solver_label=label, work_dir=work_dir)


def run_suite(
    ds: DatasetSpec,
    backend: BackendSpec,
    store: ConfigStore,
    adapt_enabled: bool,
    solver_label: Optional[str] = None,
    log_path: Optional[PathLike] = None,
    work_dir: Optional[PathLike] = None,
    parallel: int = 1,
) -> RunLog:
    """Run every dataset instance; the log is written incrementally.

    Jobs run sequentially by default to protect wall-clock fidelity; with
    ``parallel > 1`` jobs run in separate processes and times become
    load-sensitive.
    """
    label = solver_label or f"{backend.kind.value}-{'adapted' if adapt_enabled else 'default'}"
    log = RunLog(dataset=ds, solver_label=label, adapt_enabled=adapt_enabled)
    writer = _LogWriter(log_path, log)
    jobs = [(p, backend, store, adapt_enabled, ds.time_limit_s, label, work_dir) for p in ds.instance_paths]
    try:
        if parallel > 1:
            with ProcessPoolExecutor(max_workers=parallel) as pool:
                for record in pool.map(_job_for_path, jobs):
                    log.upsert(record)
                    writer.write(record)
        else:
            for job in jobs:
                record = _job_for_path(job)
                log.upsert(record)
                writer.write(record)
    finally:
        writer.close()
    return log


def resume_suite(
    ds: DatasetSpec,
    backend: BackendSpec,
    store: ConfigStore,
    partial: RunLog,
    log_path: Optional[PathLike] = None,
    work_dir: Optional[PathLike] = None,
) -> RunLog:
    """Finish a suite: completed records are kept, error records re-run."""
    if (
        partial.dataset.name != ds.name
        or partial.dataset.instance_paths != ds.instance_paths
        or partial.dataset.time_limit_s != ds.time_limit_s
    ):
        raise DatasetMismatch(f"log dataset {partial.dataset.name!r} does not match {ds.name!r}")

    done = {r.instance_name: r for r in partial.records if r.status is not RunStatus.ERROR}
    log = RunLog(
        dataset=ds,
        solver_label=partial.solver_label,
        adapt_enabled=partial.adapt_enabled,
        records=list(partial.records),
        protocol=dict(partial.protocol),
    )
    writer = _LogWriter(log_path, log, append=True)
    try:
        for path in ds.instance_paths:
            try:
                inst = load_instance(path)
                name = inst.name
            except (OSError, MpsParseError):
                name = Path(path).name.removesuffix(".gz").removesuffix(".mps")
            if name in done:
                continue
            record = _job_for_path(
                (path, backend, store, log.adapt_enabled, ds.time_limit_s, log.solver_label, work_dir)
            )
            log.upsert(record)
            writer.write(record)
    finally:
        writer.close()
    return log
