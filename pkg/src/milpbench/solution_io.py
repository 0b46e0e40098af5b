"""Solution and status files shared by the built-in solver and external
backends.

A solution file holds one ``name value`` pair per line and a trailing
``=obj= <value>`` line.  The status file (same path plus ``.status``)
carries a single status word.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

PathLike = Union[str, Path]

OBJ_MARKER = "=obj="


def status_path_for(solution_path: PathLike) -> Path:
    return Path(str(solution_path) + ".status")


def write_solution(path: PathLike, values: dict[str, float], objective: float) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for name, value in values.items():
            fh.write(f"{name} {value!r}\n")
        fh.write(f"{OBJ_MARKER} {objective!r}\n")
    return path


def read_solution(path: PathLike) -> tuple[dict[str, float], Optional[float]]:
    values: dict[str, float] = {}
    objective: Optional[float] = None
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == OBJ_MARKER:
                objective = float(parts[1])
            elif len(parts) >= 2:
                values[parts[0]] = float(parts[1])
    return values, objective


def write_status(solution_path: PathLike, status: str) -> Path:
    spath = status_path_for(solution_path)
    spath.parent.mkdir(parents=True, exist_ok=True)
    spath.write_text(status.strip() + "\n")
    return spath


def read_status(solution_path: PathLike) -> str:
    return status_path_for(solution_path).read_text().strip()
