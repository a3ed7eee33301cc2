"""SNAP datasets used in the experiments, with their published statistics."""

from __future__ import annotations

import gzip
import logging
import os
import shutil
import urllib.request
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

from ..graph import load_edge_list
from ..oracle import peel_coreness

log = logging.getLogger(__name__)

SNAP = "https://snap.stanford.edu/data/"


@dataclass(frozen=True)
class Dataset:
    name: str
    url: str
    nodes: int
    edges: int
    k_max: int
    k_avg: float
    d_avg: float


# |V|, |E|, k_max, k_avg, d_avg as published. For the originally directed
# graphs |E| counts directed arcs, so it will not match the undirected count.
MANIFEST: dict[str, Dataset] = {
    d.name: d
    for d in (
        Dataset("roadNet-PA", SNAP + "roadNet-PA.txt.gz", 1_088_092, 1_541_898, 3, 1.80, 2.83),
        Dataset("roadNet-TX", SNAP + "roadNet-TX.txt.gz", 1_379_917, 1_921_660, 3, 1.79, 2.76),
        Dataset("roadNet-CA", SNAP + "roadNet-CA.txt.gz", 1_965_206, 2_766_607, 3, 1.81, 2.81),
        Dataset("web-NotreDame", SNAP + "web-NotreDame.txt.gz", 325_729, 1_497_134, 155, 4.32, 6.69),
        Dataset("web-Stanford", SNAP + "web-Stanford.txt.gz", 281_903, 2_312_497, 71, 7.91, 14.14),
        Dataset("web-Google", SNAP + "web-Google.txt.gz", 875_713, 5_105_039, 44, 5.94, 9.43),
        Dataset("wiki-Talk", SNAP + "wiki-Talk.txt.gz", 2_394_385, 5_021_410, 131, 1.96, 3.89),
        Dataset("web-BerkStan", SNAP + "web-BerkStan.txt.gz", 685_230, 7_600_595, 201, 11.11, 19.41),
        Dataset("soc-Pokec", SNAP + "soc-pokec-relationships.txt.gz", 1_632_803, 30_622_564, 47, 13.93, 27.32),
        Dataset("soc-LiveJournal", SNAP + "soc-LiveJournal1.txt.gz", 4_847_571, 68_993_773, 372, 9.38, 17.68),
    )
}

CI_SUBSET = ("web-NotreDame", "web-Stanford", "web-BerkStan")


def data_dir() -> Path:
    return Path(os.environ.get("KCORE_DATA", "data"))


def dataset_path(name: str, root: str | os.PathLike | None = None) -> Path:
    return Path(root if root is not None else data_dir()) / f"{name}.txt"


@dataclass
class FetchResult:
    name: str
    path: Path | None
    error: str | None = None
    warnings: list[str] | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def check_counts(ds: Dataset, path: Path) -> list[str]:
    """Compare a downloaded graph against the manifest; returns warning messages."""
    g = load_edge_list(path)
    problems = []
    if g.node_count != ds.nodes:
        problems.append(f"{ds.name}: |V| = {g.node_count}, manifest says {ds.nodes}")
    if g.edge_count != ds.edges:
        problems.append(f"{ds.name}: |E| = {g.edge_count}, manifest says {ds.edges}")
    k_max = peel_coreness(g).k_max
    if k_max != ds.k_max:
        problems.append(f"{ds.name}: k_max = {k_max}, manifest says {ds.k_max}")
    return problems


def fetch_datasets(
    names: Iterable[str],
    dest: str | os.PathLike | None = None,
    *,
    verify_counts: bool = True,
    opener: Callable = urllib.request.urlopen,
    timeout: float = 60.0,
) -> list[FetchResult]:
    """Download and decompress the named datasets into ``dest``.

    A failed download is reported in its result and does not stop the others.
    Count mismatches against the manifest are logged as warnings.
    """
    root = Path(dest) if dest is not None else data_dir()
    results = []
    for name in names:
        ds = MANIFEST.get(name)
        if ds is None:
            results.append(FetchResult(name, None, f"unknown dataset {name!r}"))
            continue
        target = dataset_path(name, root)
        try:
            if not target.exists():
                tmp = target.with_suffix(".part")
                with opener(ds.url, timeout=timeout) as resp:
                    root.mkdir(parents=True, exist_ok=True)
                    with open(tmp, "wb") as out, gzip.GzipFile(fileobj=resp) as gz:
                        shutil.copyfileobj(gz, out)
                tmp.replace(target)
        except Exception as exc:  # noqa: BLE001 - reported per file
            target.with_suffix(".part").unlink(missing_ok=True)
            log.error("fetching %s failed: %s", name, exc)
            results.append(FetchResult(name, None, str(exc)))
            continue
        warnings = check_counts(ds, target) if verify_counts else []
        for w in warnings:
            log.warning(w)
        results.append(FetchResult(name, target, None, warnings))
    return results
