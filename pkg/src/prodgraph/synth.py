"""Synthetic stand-ins for the experiment datasets.

``dancer_point_cloud`` produces a marker cloud with the shape of the dancer
recording (573 frames x 1502 markers x 3 coordinates); the motion is periodic
in the frame index so a cycle graph fits the time axis. ``movielens_like``
writes files in the MovieLens 100k layout.
"""

from __future__ import annotations

import os

import numpy as np

from .graph_core import Graph, build_knn_graph
from .product import ProductModel, synthesize

# (parent, rest offset of the segment end relative to its start, radius, marker share)
_SEGMENTS = {
    "pelvis": (None, (0.0, 0.0, 0.0), 0.0, 0.0),
    "torso": ("pelvis", (0.0, 0.0, 0.55), 0.16, 0.22),
    "head": ("torso", (0.0, 0.0, 0.25), 0.11, 0.09),
    "l_upper_arm": ("torso", (0.0, 0.2, -0.3), 0.05, 0.06),
    "l_forearm": ("l_upper_arm", (0.0, 0.0, -0.28), 0.04, 0.05),
    "l_hand": ("l_forearm", (0.0, 0.0, -0.1), 0.04, 0.03),
    "r_upper_arm": ("torso", (0.0, -0.2, -0.3), 0.05, 0.06),
    "r_forearm": ("r_upper_arm", (0.0, 0.0, -0.28), 0.04, 0.05),
    "r_hand": ("r_forearm", (0.0, 0.0, -0.1), 0.04, 0.03),
    "l_thigh": ("pelvis", (0.0, 0.1, -0.45), 0.08, 0.09),
    "l_shin": ("l_thigh", (0.0, 0.0, -0.43), 0.06, 0.07),
    "l_foot": ("l_shin", (0.15, 0.0, -0.05), 0.04, 0.03),
    "r_thigh": ("pelvis", (0.0, -0.1, -0.45), 0.08, 0.09),
    "r_shin": ("r_thigh", (0.0, 0.0, -0.43), 0.06, 0.07),
    "r_foot": ("r_shin", (0.15, 0.0, -0.05), 0.04, 0.03),
}
# shoulders and hips start a bit off the parent's end point
_ANCHOR = {
    "l_upper_arm": (0.0, 0.2, 0.0), "r_upper_arm": (0.0, -0.2, 0.0),
    "l_thigh": (0.0, 0.1, 0.0), "r_thigh": (0.0, -0.1, 0.0),
}


def _rot(axis: int, angle: np.ndarray) -> np.ndarray:
    """Stack of rotation matrices about a coordinate axis, shape (T, 3, 3)."""
    c, s = np.cos(angle), np.sin(angle)
    R = np.zeros(angle.shape + (3, 3))
    a, b = [(1, 2), (2, 0), (0, 1)][axis]
    R[..., axis, axis] = 1.0
    R[..., a, a] = c
    R[..., b, b] = c
    R[..., a, b] = -s
    R[..., b, a] = s
    return R


def dancer_point_cloud(n_frames: int = 573, n_markers: int = 1502, seed=0,
                       n_harmonics: int = 3) -> np.ndarray:
    """Smooth periodic marker trajectories, shape ``(3, n_markers, n_frames)``."""
    rng = np.random.default_rng(seed)
    names = [n for n in _SEGMENTS if _SEGMENTS[n][3] > 0]
    share = np.array([_SEGMENTS[n][3] for n in names])
    counts = np.floor(share / share.sum() * n_markers).astype(int)
    counts[np.argsort(-share)[: n_markers - counts.sum()]] += 1

    t = 2 * np.pi * np.arange(n_frames) / n_frames
    angles = {}
    for name in _SEGMENTS:
        ang = np.zeros((3, n_frames))
        for axis in range(3):
            for h in range(1, n_harmonics + 1):
                amp = rng.normal(0, 0.35 / h)
                ang[axis] += amp * np.sin(h * t + rng.uniform(0, 2 * np.pi))
        angles[name] = ang

    # forward kinematics: world rotation and start point of every segment per frame
    rot = {}
    start = {}
    end = {}
    root_path = np.stack([0.15 * np.sin(t), 0.1 * np.sin(2 * t), 1.0 + 0.05 * np.sin(3 * t)], axis=1)
    for name, (parent, offset, _, _) in _SEGMENTS.items():
        a = angles[name]
        local = _rot(0, a[0]) @ _rot(1, a[1]) @ _rot(2, a[2])
        if parent is None:
            rot[name] = _rot(2, 0.4 * np.sin(t)) @ local
            start[name] = root_path
        else:
            rot[name] = rot[parent] @ local
            anchor = np.asarray(_ANCHOR.get(name, (0.0, 0.0, 0.0)))
            start[name] = end[parent] + np.einsum("tij,j->ti", rot[parent], anchor)
        end[name] = start[name] + np.einsum("tij,j->ti", rot[name], np.asarray(offset))

    markers = []
    for name, cnt in zip(names, counts):
        _, offset, radius, _ = _SEGMENTS[name]
        offset = np.asarray(offset)
        # rest-pose positions on a capsule around the segment, in segment coordinates
        u = rng.uniform(0, 1, cnt)
        phi = rng.uniform(0, 2 * np.pi, cnt)
        length = np.linalg.norm(offset)
        axis = offset / length
        ref = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        e1 = np.cross(axis, ref)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(axis, e1)
        local = (u[:, None] * offset + radius * (np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2))
        world = start[name][:, None, :] + np.einsum("tij,mj->tmi", rot[name], local)
        markers.append(world)
    P = np.concatenate(markers, axis=1)  # (T, M, 3)
    return np.transpose(P, (2, 1, 0)).copy()


def write_point_cloud_csv(path, channels) -> None:
    """Long format: ``frame,marker,x,y,z`` with 1-based indices, no header."""
    C = np.asarray(channels)
    n_ch, n2, n1 = C.shape
    frame = np.repeat(np.arange(1, n1 + 1), n2)
    marker = np.tile(np.arange(1, n2 + 1), n1)
    vals = C.transpose(0, 2, 1).reshape(n_ch, -1).T
    with open(path, "w") as fh:
        for f, m, row in zip(frame, marker, vals):
            fh.write(f"{f},{m}," + ",".join(repr(float(v)) for v in row) + "\n")


def random_geometric_graph(n: int, k: int, rng) -> Graph:
    pts = rng.uniform(size=(n, 2))
    return build_knn_graph(pts, k)


def random_bandlimited_signal(model: ProductModel, rng) -> np.ndarray:
    return synthesize(model, rng.standard_normal((model.k2, model.k1)))


_OCCUPATIONS = [
    "administrator", "artist", "doctor", "educator", "engineer", "entertainment",
    "executive", "healthcare", "homemaker", "lawyer", "librarian", "marketing",
    "none", "other", "programmer", "retired", "salesman", "scientist", "student",
    "technician", "writer",
]


def movielens_like(out_dir, n_users: int = 943, n_items: int = 1682, n_ratings: int = 100_000,
                   seed=0, rank: int = 6) -> dict:
    """Write ``u.data``, ``u.user``, ``u.item``, ``u1.base`` and ``u1.test`` into ``out_dir``.

    Ratings come from a low-rank preference model driven by the same user and
    item features that the files record, plus noise, rounded to 1..5.
    """
    rng = np.random.default_rng(seed)
    os.makedirs(out_dir, exist_ok=True)
    age = rng.integers(7, 74, n_users)
    gender = rng.choice(["M", "F"], n_users)
    occ = rng.choice(len(_OCCUPATIONS), n_users)
    genres = (rng.uniform(size=(n_items, 19)) < 0.12).astype(int)
    genres[genres.sum(axis=1) == 0, 0] = 1

    occ_emb = rng.standard_normal((len(_OCCUPATIONS), rank))
    genre_emb = rng.standard_normal((19, rank))
    u_lat = 0.6 * occ_emb[occ] + 0.02 * (age[:, None] - 35) * rng.standard_normal(rank) \
        + 0.3 * (gender == "F")[:, None] * rng.standard_normal(rank) \
        + 0.3 * rng.standard_normal((n_users, rank))
    i_lat = genres @ genre_emb / np.sqrt(genres.sum(axis=1, keepdims=True)) \
        + 0.3 * rng.standard_normal((n_items, rank))
    u_bias = 0.4 * rng.standard_normal(n_users)
    i_bias = 0.5 * rng.standard_normal(n_items)
    pairs = rng.choice(n_users * n_items, size=n_ratings, replace=False)
    u, i = np.divmod(pairs, n_items)
    score = 3.5 + u_bias[u] + i_bias[i] + 0.25 * np.sum(u_lat[u] * i_lat[i], axis=1) \
        + 0.6 * rng.standard_normal(n_ratings)
    r = np.clip(np.rint(score), 1, 5).astype(int)
    ts = 874_724_710 + rng.integers(0, 10**7, n_ratings)

    lines = [f"{a + 1}\t{b + 1}\t{c}\t{d}\n" for a, b, c, d in zip(u, i, r, ts)]
    with open(os.path.join(out_dir, "u.data"), "w") as fh:
        fh.writelines(lines)
    test = rng.uniform(size=n_ratings) < 0.2
    with open(os.path.join(out_dir, "u1.base"), "w") as fh:
        fh.writelines(l for l, t in zip(lines, test) if not t)
    with open(os.path.join(out_dir, "u1.test"), "w") as fh:
        fh.writelines(l for l, t in zip(lines, test) if t)
    with open(os.path.join(out_dir, "u.user"), "w") as fh:
        for k in range(n_users):
            fh.write(f"{k + 1}|{age[k]}|{gender[k]}|{_OCCUPATIONS[occ[k]]}|{10000 + k}\n")
    with open(os.path.join(out_dir, "u.item"), "w", encoding="latin-1") as fh:
        for k in range(n_items):
            flags = "|".join(str(g) for g in genres[k])
            fh.write(f"{k + 1}|Movie {k + 1} (1995)|01-Jan-1995||http://example.invalid/{k + 1}|{flags}\n")
    return {"n_users": n_users, "n_items": n_items, "n_ratings": n_ratings,
            "n_test": int(test.sum())}
