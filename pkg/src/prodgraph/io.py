"""Readers and writers for the on-disk formats.

* point clouds: headerless CSV, one row ``frame,marker,x,y,z`` per (frame, marker),
  1-based indices, any row order;
* ratings: MovieLens ``u.data`` layout, ``user<TAB>item<TAB>rating<TAB>timestamp``;
* features: headerless delimited table, one row per entity, columns encoded
  according to a schema (``numeric``, ``minmax``, ``onehot``, ``skip``);
* edge lists: ``i j [w]`` whitespace separated, 1-based;
* matrices: headerless CSV;
* designs: sorted 1-based vertex indices, one per line, one file per factor.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError, ParseError
from .graph_core import Graph
from .sampler import SamplingDesign

log = logging.getLogger(__name__)

MOVIELENS_USER_SCHEMA = ["skip", "minmax", "onehot", "onehot", "skip"]
MOVIELENS_ITEM_SCHEMA = ["skip"] * 5 + ["numeric"] * 19


def _float(cell: str, path, line: int) -> float:
    cell = cell.strip()
    if not cell:
        raise ParseError("missing value", path, line)
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"non-numeric cell {cell!r}", path, line) from None


def _int(cell: str, path, line: int) -> int:
    v = _float(cell, path, line)
    if v != int(v):
        raise ParseError(f"expected an integer, got {cell!r}", path, line)
    return int(v)


def load_point_cloud(path) -> list[np.ndarray]:
    """Read a long-format point cloud into three ``N2 x N1`` matrices (x, y, z).

    Rows are markers (factor 2), columns are frames (factor 1).
    """
    frames, markers, vals = [], [], []
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            cells = raw.rstrip("\n").split(",")
            if len(cells) != 5:
                raise ParseError(f"expected 5 columns, found {len(cells)}", path, ln)
            frames.append(_int(cells[0], path, ln))
            markers.append(_int(cells[1], path, ln))
            vals.append([_float(c, path, ln) for c in cells[2:]])
    if not vals:
        raise ParseError("empty point cloud file", path)
    f = np.asarray(frames) - 1
    m = np.asarray(markers) - 1
    if f.min() < 0 or m.min() < 0:
        raise ParseError("frame and marker indices are 1-based", path)
    n1, n2 = int(f.max()) + 1, int(m.max()) + 1
    if len(vals) != n1 * n2:
        raise ParseError(f"{len(vals)} rows for {n1} frames x {n2} markers", path)
    seen = np.zeros((n2, n1), dtype=bool)
    seen[m, f] = True
    if not seen.all():
        raise ParseError("duplicate or missing (frame, marker) rows", path)
    V = np.asarray(vals)
    out = []
    for c in range(3):
        X = np.empty((n2, n1))
        X[m, f] = V[:, c]
        out.append(X)
    log.info("point cloud %s: N1=%d frames, N2=%d markers", path, n1, n2)
    return out


class Rating(NamedTuple):
    user: int
    item: int
    rating: float
    timestamp: int


@dataclass
class RatingsData:
    """Ratings with raw ids plus the 0-based contiguous index of every id seen."""

    ratings: list[Rating]
    user_index: dict[int, int] = field(default_factory=dict)
    item_index: dict[int, int] = field(default_factory=dict)

    @property
    def n_users(self) -> int:
        return len(self.user_index)

    @property
    def n_items(self) -> int:
        return len(self.item_index)


def load_ratings(path) -> RatingsData:
    """Parse a MovieLens-style ratings file.

    Duplicate (user, item) pairs keep the last occurrence and log a warning.
    """
    by_pair: dict[tuple[int, int], Rating] = {}
    dupes = 0
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            cells = raw.rstrip("\n").split("\t")
            if len(cells) != 4:
                raise ParseError(f"expected 4 tab-separated fields, found {len(cells)}", path, ln)
            r = Rating(_int(cells[0], path, ln), _int(cells[1], path, ln),
                       _float(cells[2], path, ln), _int(cells[3], path, ln))
            key = (r.user, r.item)
            if key in by_pair:
                dupes += 1
                del by_pair[key]
            by_pair[key] = r
    if dupes:
        log.warning("%s: %d duplicate (user, item) pairs, kept the last occurrence", path, dupes)
    ratings = list(by_pair.values())
    if not ratings:
        log.warning("%s: no ratings found", path)
    users = sorted({r.user for r in ratings})
    items = sorted({r.item for r in ratings})
    data = RatingsData(ratings, {u: k for k, u in enumerate(users)},
                       {i: k for k, i in enumerate(items)})
    log.info("ratings %s: %d tuples, %d users, %d items", path, len(ratings), data.n_users, data.n_items)
    return data


def load_features(path, schema=None, delimiter: str = ",", encoding: str = "utf-8") -> np.ndarray:
    """Feature matrix with one row per entity.

    ``schema`` lists one encoding per column: ``numeric`` (as is), ``minmax``
    (scaled to [0, 1]), ``onehot`` (one indicator per distinct value, sorted)
    or ``skip``. Without a schema every column is numeric.
    """
    rows = []
    with open(path, encoding=encoding) as fh:
        for ln, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            cells = raw.rstrip("\r\n").split(delimiter)
            if rows and len(cells) != len(rows[0][1]):
                raise ParseError(
                    f"expected {len(rows[0][1])} columns, found {len(cells)}", path, ln)
            rows.append((ln, cells))
    if not rows:
        raise ParseError("empty features file", path)
    ncol = len(rows[0][1])
    if schema is None:
        schema = ["numeric"] * ncol
    if len(schema) != ncol:
        raise ParseError(f"schema has {len(schema)} entries for {ncol} columns", path)
    blocks = []
    for c, kind in enumerate(schema):
        if kind == "skip":
            continue
        if kind == "onehot":
            col = [cells[c].strip() for _, cells in rows]
            levels = sorted(set(col))
            pos = {v: k for k, v in enumerate(levels)}
            B = np.zeros((len(rows), len(levels)))
            B[np.arange(len(rows)), [pos[v] for v in col]] = 1.0
            blocks.append(B)
        elif kind in ("numeric", "minmax"):
            col = np.array([_float(cells[c], path, ln) for ln, cells in rows])
            if kind == "minmax":
                span = col.max() - col.min()
                col = (col - col.min()) / span if span > 0 else np.zeros_like(col)
            blocks.append(col[:, None])
        else:
            raise InvalidInputError(f"unknown column encoding {kind!r}")
    if not blocks:
        raise InvalidInputError("schema skips every column")
    return np.hstack(blocks)


def load_edge_list(path, n: int | None = None) -> Graph:
    """Graph from ``i j [w]`` lines (1-based). ``n`` defaults to the largest index."""
    edges = []
    top = 0
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            cells = raw.split()
            if not cells or cells[0].startswith("#"):
                continue
            if len(cells) not in (2, 3):
                raise ParseError(f"expected 'i j [w]', found {len(cells)} fields", path, ln)
            i, j = _int(cells[0], path, ln), _int(cells[1], path, ln)
            w = _float(cells[2], path, ln) if len(cells) == 3 else 1.0
            if i < 1 or j < 1:
                raise ParseError("vertex indices are 1-based", path, ln)
            top = max(top, i, j)
            edges.append((i - 1, j - 1, w))
    return Graph(n if n is not None else top, tuple(edges))


def write_edge_list(path, g: Graph) -> None:
    with open(path, "w") as fh:
        for i, j, w in g.edges:
            fh.write(f"{i + 1} {j + 1} {w!r}\n")


def load_matrix(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            cells = raw.rstrip("\n").split(",")
            if rows and len(cells) != len(rows[0]):
                raise ParseError(f"expected {len(rows[0])} columns, found {len(cells)}", path, ln)
            rows.append([_float(c, path, ln) for c in cells])
    if not rows:
        raise ParseError("empty matrix file", path)
    return np.array(rows)


def write_matrix(path, X) -> None:
    np.savetxt(path, np.asarray(X), delimiter=",", fmt="%.17g")


def write_design(out_dir, design: SamplingDesign) -> tuple[str, str]:
    """Write ``set1.txt`` and ``set2.txt`` (sorted, 1-based)."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name, s in (("set1.txt", design.set1), ("set2.txt", design.set2)):
        p = os.path.join(out_dir, name)
        with open(p, "w") as fh:
            fh.writelines(f"{v + 1}\n" for v in s)
        paths.append(p)
    return tuple(paths)


def read_index_list(path) -> list[int]:
    """0-based indices from a 1-based one-per-line file."""
    out = []
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            if raw.strip():
                out.append(_int(raw, path, ln) - 1)
    return out
