"""Whole-set generation over the dependency DAG."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Callable, Optional

from .generate import generate
from .sig import MaterialSig, dependencies, generation_order
from .store import StoreError, Tablebase, load, save, table_path

log = logging.getLogger(__name__)


def build_all(
    max_pieces: int,
    out_dir,
    with_dtm: bool = True,
    progress: Optional[Callable[[MaterialSig, dict], None]] = None,
    force: bool = False,
) -> list[MaterialSig]:
    """Generate every signature up to ``max_pieces`` into ``out_dir``.

    Existing valid files are reused unless ``force``. Dependencies are
    reloaded from disk per signature so peak memory stays bounded by one
    generation plus its direct dependencies.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    done: list[MaterialSig] = []
    for sig in generation_order(max_pieces):
        path = table_path(out_dir, sig)
        if not force and path.exists():
            try:
                load(path, with_dtm=False)
                done.append(sig)
                continue
            except StoreError:
                log.warning("rebuilding invalid table file %s", path)
        deps: dict[str, Tablebase] = {}
        for dep in dependencies(sig):
            deps[dep.name] = load(table_path(out_dir, dep), with_dtm=True)
        tb = generate(sig, deps, with_dtm=with_dtm)
        save(tb, path)
        if progress:
            progress(sig, tb.stats)
        done.append(sig)
        del tb, deps
    return done
