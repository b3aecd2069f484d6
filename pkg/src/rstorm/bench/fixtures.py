"""Locating the committed cluster, topology and workload fixture files.

The fixture root defaults to the copy shipped inside the package and can be
overridden with the ``RSTORM_FIXTURES`` environment variable.
"""

from __future__ import annotations

import os
from pathlib import Path

from ..cluster import Cluster, load_cluster
from ..errors import MissingInput
from ..simulator import WorkloadModel, load_workload
from ..topology import Topology, load_topology

ENV_VAR = "RSTORM_FIXTURES"
PACKAGE_FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def fixture_root() -> Path:
    override = os.environ.get(ENV_VAR)
    return Path(override) if override else PACKAGE_FIXTURES


def resolve(ref: str | Path, kind: str) -> Path:
    """Turn a path or a fixture name into an existing file path.

    ``ref`` is tried as given, then with ``.json`` appended, then relative
    to the fixture root, then inside the ``kind`` subdirectory.
    """
    ref = str(ref)
    root = fixture_root()
    candidates = []
    for base in (Path(ref), root / ref, root / kind / ref):
        candidates += [base, base.with_name(base.name + ".json")]
    for c in candidates:
        if c.is_file():
            return c
    raise MissingInput(f"no {kind[:-1]} file for {ref!r} (looked under {root})")


def load_fixture_cluster(ref: str | Path) -> Cluster:
    return load_cluster(resolve(ref, "clusters"))


def load_fixture_topology(ref: str | Path) -> Topology:
    return load_topology(resolve(ref, "topologies"))


def load_fixture_workload(ref: str | Path) -> WorkloadModel:
    return load_workload(resolve(ref, "workloads"))
