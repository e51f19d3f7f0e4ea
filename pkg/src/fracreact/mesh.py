"""Mixed-dimensional meshes.

A mesh holds an n-dimensional bulk grid (n = 1 or 2), a set of
(n-1)-dimensional fracture grids whose cells coincide geometrically with
interior bulk faces (conforming coupling), and 0-dimensional
intersection objects where fracture arms meet. Fracture sides are
realised by duplicating the coupled bulk face: the face's two adjacent
bulk cells each exchange with the fracture cell through their own copy,
and the direct cell-to-cell connection across the fracture is removed.

Meshes are immutable after construction and safe to share across
threads; construction and file I/O are single-threaded.

Mesh exchange format (UTF-8 text, one entity per line, 0-based indices)::

    mdmesh 1
    dim <n>
    points <N>            followed by N lines "x [y]"
    cells <n> <N>         followed by N lines of vertex ids (ccw in 2D)
    faces <n> <N>         followed by N lines "v0 [v1] c0 c1" (-1 = none)
    boundary <tag> <N>    followed by N lines "face_id"
    fracture <id> <N>     followed by N lines "v0 v1", ordered along the
                          curve; each pair must match a bulk face
    intersection <id> <N> followed by one line "x y" and N lines
                          "fracture_id end" (end 0 = first cell, 1 = last)

Writers emit fields in the order read back.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, MeshConformityError

SNAP_REL_TOL = 1e-9
GEOM_REL_TOL = 1e-12

_TIP_BOUNDARY = "boundary"
_TIP_IMMERSED = "immersed"
_TIP_INTERSECTION = "intersection"


@dataclass(frozen=True)
class Tip:
    """One end of a fracture arm."""

    cell: int
    point: np.ndarray
    kind: str                      # boundary | immersed | intersection
    tag: str | None = None         # boundary segment name, if boundary
    intersection: int | None = None


@dataclass(frozen=True)
class Fracture:
    """A single fracture arm, discretised into bulk-face-shaped cells."""

    cell_faces: np.ndarray         # bulk face id per fracture cell
    centroids: np.ndarray          # (nc, dim)
    measures: np.ndarray           # (nc,)
    normals: np.ndarray            # (nc, dim) unique normal n_gamma
    internal: np.ndarray           # (ni, 2) adjacent fracture-cell pairs
    tips: tuple[Tip, ...]

    @property
    def num_cells(self) -> int:
        return len(self.cell_faces)


@dataclass(frozen=True)
class Intersection:
    """A 0-dimensional meeting point of two or more fracture arms."""

    point: np.ndarray
    incident: tuple[tuple[int, int], ...]   # (fracture id, end 0|1)


@dataclass(frozen=True)
class MixedDimMesh:
    dim: int
    points: np.ndarray                 # (npnt, dim)
    cell_vertices: tuple[tuple[int, ...], ...]
    cell_centroids: np.ndarray         # (nc, dim)
    cell_volumes: np.ndarray           # (nc,)
    face_vertices: tuple[tuple[int, ...], ...]
    face_cells: np.ndarray             # (nf, 2), -1 where absent
    face_areas: np.ndarray
    face_normals: np.ndarray           # oriented cells[0] -> cells[1]/outward
    face_centroids: np.ndarray
    boundary_tags: dict[int, str]      # boundary face id -> segment name
    fractures: tuple[Fracture, ...] = ()
    intersections: tuple[Intersection, ...] = ()
    frac_faces: dict[int, tuple[int, int]] = field(default_factory=dict)

    @property
    def num_cells(self) -> int:
        return len(self.cell_volumes)

    @property
    def num_faces(self) -> int:
        return len(self.face_areas)

    @property
    def diameter(self) -> float:
        lo = self.points.min(axis=0)
        hi = self.points.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    @property
    def domain_measure(self) -> float:
        return float(self.cell_volumes.sum())


# ---------------------------------------------------------------------------
# builders


def build_interval_mesh(length: float, num_cells: int) -> MixedDimMesh:
    """Uniform 1D bulk mesh on (0, length) with no fractures.

    The two endpoint faces are tagged ``left`` and ``right``.
    """
    if not length > 0:
        raise ConfigurationError(f"interval length must be positive, got {length}")
    if num_cells < 1:
        raise ConfigurationError(f"num_cells must be >= 1, got {num_cells}")
    n = int(num_cells)
    points = np.linspace(0.0, length, n + 1).reshape(-1, 1)
    h = length / n
    cell_vertices = tuple((i, i + 1) for i in range(n))
    centroids = (points[:-1] + points[1:]) / 2.0
    volumes = np.full(n, h)
    face_vertices = tuple((i,) for i in range(n + 1))
    face_cells = np.column_stack([np.arange(-1, n), np.arange(0, n + 1)])
    face_cells[-1] = (n - 1, -1)
    face_cells[0] = (0, -1)
    normals = np.ones((n + 1, 1))
    normals[0, 0] = -1.0   # outward at the left boundary
    areas = np.ones(n + 1)
    tags = {0: "left", n: "right"}
    return MixedDimMesh(
        dim=1, points=points, cell_vertices=cell_vertices,
        cell_centroids=centroids, cell_volumes=volumes,
        face_vertices=face_vertices, face_cells=face_cells,
        face_areas=areas, face_normals=normals, face_centroids=points.copy(),
        boundary_tags=tags)


def build_structured_2d(nx: int, ny: int,
                        domain=(0.0, 1.0, 0.0, 1.0),
                        fractures=()) -> MixedDimMesh:
    """Cartesian bulk grid with axis-aligned fracture polylines.

    ``domain`` is (xmin, xmax, ymin, ymax). Every polyline segment must
    run along a grid line after snapping its endpoints to the nearest
    grid node (tolerance SNAP_REL_TOL times the domain diameter).
    Polylines are split into arms at shared nodes, which become
    0-dimensional intersection objects.
    """
    if nx < 1 or ny < 1:
        raise ConfigurationError(f"grid must have at least one cell per axis, got {nx}x{ny}")
    xmin, xmax, ymin, ymax = map(float, domain)
    if not (xmax > xmin and ymax > ymin):
        raise ConfigurationError(f"degenerate domain {domain}")
    xs = np.linspace(xmin, xmax, nx + 1)
    ys = np.linspace(ymin, ymax, ny + 1)

    def node(ix, iy):
        return iy * (nx + 1) + ix

    xx, yy = np.meshgrid(xs, ys)
    points = np.column_stack([xx.ravel(), yy.ravel()])

    def cell(ix, iy):
        return iy * nx + ix

    cell_vertices = []
    for iy in range(ny):
        for ix in range(nx):
            cell_vertices.append((node(ix, iy), node(ix + 1, iy),
                                  node(ix + 1, iy + 1), node(ix, iy + 1)))
    centroids = np.column_stack([
        np.tile((xs[:-1] + xs[1:]) / 2.0, ny),
        np.repeat((ys[:-1] + ys[1:]) / 2.0, nx)])
    hx = (xmax - xmin) / nx
    hy = (ymax - ymin) / ny
    volumes = np.full(nx * ny, hx * hy)

    face_vertices = []
    face_cells = []
    face_normals = []
    face_areas = []
    tags: dict[int, str] = {}
    vface: dict[tuple[int, int], int] = {}
    hface: dict[tuple[int, int], int] = {}
    # x-normal faces (vertical edges)
    for iy in range(ny):
        for ix in range(nx + 1):
            fid = len(face_vertices)
            vface[(ix, iy)] = fid
            face_vertices.append((node(ix, iy), node(ix, iy + 1)))
            left = cell(ix - 1, iy) if ix > 0 else -1
            right = cell(ix, iy) if ix < nx else -1
            if left < 0:
                face_cells.append((right, -1))
                face_normals.append((-1.0, 0.0))
                tags[fid] = "left"
            elif right < 0:
                face_cells.append((left, -1))
                face_normals.append((1.0, 0.0))
                tags[fid] = "right"
            else:
                face_cells.append((left, right))
                face_normals.append((1.0, 0.0))
            face_areas.append(hy)
    # y-normal faces (horizontal edges)
    for iy in range(ny + 1):
        for ix in range(nx):
            fid = len(face_vertices)
            hface[(ix, iy)] = fid
            face_vertices.append((node(ix, iy), node(ix + 1, iy)))
            below = cell(ix, iy - 1) if iy > 0 else -1
            above = cell(ix, iy) if iy < ny else -1
            if below < 0:
                face_cells.append((above, -1))
                face_normals.append((0.0, -1.0))
                tags[fid] = "bottom"
            elif above < 0:
                face_cells.append((below, -1))
                face_normals.append((0.0, 1.0))
                tags[fid] = "top"
            else:
                face_cells.append((below, above))
                face_normals.append((0.0, 1.0))
            face_areas.append(hx)
    face_vertices = tuple(face_vertices)
    face_cells = np.asarray(face_cells)
    face_normals = np.asarray(face_normals)
    face_areas = np.asarray(face_areas)
    face_centroids = np.array([points[list(v)].mean(axis=0) for v in face_vertices])

    mesh = MixedDimMesh(
        dim=2, points=points, cell_vertices=tuple(cell_vertices),
        cell_centroids=centroids, cell_volumes=volumes,
        face_vertices=face_vertices, face_cells=face_cells,
        face_areas=face_areas, face_normals=face_normals,
        face_centroids=face_centroids, boundary_tags=tags)
    if not fractures:
        return mesh

    snap_tol = SNAP_REL_TOL * mesh.diameter

    def snap(pt, seg_desc):
        x, y = float(pt[0]), float(pt[1])
        ix = int(round((x - xmin) / hx))
        iy = int(round((y - ymin) / hy))
        ix = min(max(ix, 0), nx)
        iy = min(max(iy, 0), ny)
        if abs(xs[ix] - x) > snap_tol or abs(ys[iy] - y) > snap_tol:
            raise ConfigurationError(
                f"fracture segment {seg_desc} does not lie on grid lines "
                f"within snap tolerance {snap_tol:g}")
        return ix, iy

    # Walk every polyline, collecting the grid edges (bulk faces) covered
    # and the ordered node path of each polyline.
    paths = []  # per polyline: (node list [(ix,iy)...], edge list [face id ...])
    for pid, poly in enumerate(fractures):
        poly = np.asarray(poly, dtype=float)
        if poly.ndim != 2 or poly.shape[0] < 2 or poly.shape[1] != 2:
            raise ConfigurationError(f"fracture {pid} must be a polyline of 2D points")
        nodes_path = []
        edges_path = []
        prev = snap(poly[0], f"{pid}[0]")
        nodes_path.append(prev)
        for k in range(1, len(poly)):
            cur = snap(poly[k], f"{pid}[{k - 1}->{k}]")
            seg_desc = f"fracture {pid}, segment {k - 1}->{k} " \
                       f"({tuple(poly[k - 1])} -> {tuple(poly[k])})"
            if cur == prev:
                raise ConfigurationError(f"{seg_desc}: zero-length segment")
            if cur[0] == prev[0]:       # vertical: covers x-normal faces
                ix = cur[0]
                step = 1 if cur[1] > prev[1] else -1
                for iy in range(prev[1], cur[1], step):
                    j = iy if step > 0 else iy - 1
                    edges_path.append(vface[(ix, j)])
                    nodes_path.append((ix, j + 1) if step > 0 else (ix, j))
            elif cur[1] == prev[1]:     # horizontal: covers y-normal faces
                iy = cur[1]
                step = 1 if cur[0] > prev[0] else -1
                for ix in range(prev[0], cur[0], step):
                    j = ix if step > 0 else ix - 1
                    edges_path.append(hface[(ix if step > 0 else ix - 1, iy)])
                    nodes_path.append((j + 1, iy) if step > 0 else (j, iy))
            else:
                raise ConfigurationError(
                    f"{seg_desc}: not aligned with any grid line")
            prev = cur
        paths.append((nodes_path, edges_path))

    # Nodes shared by two or more polylines become intersections.
    visits: dict[tuple[int, int], set[int]] = {}
    for pid, (nodes_path, _) in enumerate(paths):
        for nd in nodes_path:
            visits.setdefault(nd, set()).add(pid)
    crossing_nodes = {nd for nd, who in visits.items() if len(who) >= 2}

    # Split polylines into arms at crossing nodes.
    claimed: dict[int, int] = {}
    arms = []  # (node list, edge list)
    for pid, (nodes_path, edges_path) in enumerate(paths):
        start = 0
        for k in range(1, len(nodes_path)):
            if nodes_path[k] in crossing_nodes or k == len(nodes_path) - 1:
                arm_nodes = nodes_path[start:k + 1]
                arm_edges = edges_path[start:k]
                for e in arm_edges:
                    if e in claimed:
                        raise ConfigurationError(
                            f"fractures {claimed[e]} and {pid} overlap on a grid edge")
                    claimed[e] = pid
                arms.append((arm_nodes, arm_edges))
                start = k

    def on_boundary_tag(nd):
        ix, iy = nd
        if iy == 0:
            return "bottom"
        if iy == ny:
            return "top"
        if ix == 0:
            return "left"
        if ix == nx:
            return "right"
        return None

    inter_nodes = sorted(crossing_nodes)
    inter_index = {nd: i for i, nd in enumerate(inter_nodes)}
    inter_incident: list[list[tuple[int, int]]] = [[] for _ in inter_nodes]

    frac_objs = []
    frac_faces: dict[int, tuple[int, int]] = {}
    for arm_nodes, arm_edges in arms:
        fid = len(frac_objs)
        ncf = len(arm_edges)
        cfaces = np.asarray(arm_edges)
        for local, e in enumerate(arm_edges):
            if face_cells[e, 1] < 0:
                raise ConfigurationError(
                    "fracture lies on the domain boundary; fracture cells "
                    "must coincide with interior faces")
            frac_faces[e] = (fid, local)
        cents = face_centroids[cfaces].copy()
        meas = face_areas[cfaces].copy()
        norms = np.empty((ncf, 2))
        for local in range(ncf):
            a = points[node(*arm_nodes[local])]
            b = points[node(*arm_nodes[local + 1])]
            t = (b - a) / np.linalg.norm(b - a)
            norms[local] = (-t[1], t[0])   # 90 deg ccw rotation
        internal = np.column_stack([np.arange(ncf - 1), np.arange(1, ncf)]) \
            if ncf > 1 else np.empty((0, 2), dtype=int)
        tips = []
        for end, (nd, cell_id) in enumerate(((arm_nodes[0], 0),
                                             (arm_nodes[-1], ncf - 1))):
            pt = points[node(*nd)]
            if nd in inter_index:
                tips.append(Tip(cell=cell_id, point=pt, kind=_TIP_INTERSECTION,
                                intersection=inter_index[nd]))
                inter_incident[inter_index[nd]].append((fid, end))
            else:
                tag = on_boundary_tag(nd)
                if tag is not None:
                    tips.append(Tip(cell=cell_id, point=pt,
                                    kind=_TIP_BOUNDARY, tag=tag))
                else:
                    tips.append(Tip(cell=cell_id, point=pt, kind=_TIP_IMMERSED))
        frac_objs.append(Fracture(cell_faces=cfaces, centroids=cents,
                                  measures=meas, normals=norms,
                                  internal=internal, tips=tuple(tips)))

    intersections = tuple(
        Intersection(point=points[node(*nd)], incident=tuple(inter_incident[i]))
        for i, nd in enumerate(inter_nodes))
    return MixedDimMesh(
        dim=2, points=points, cell_vertices=tuple(cell_vertices),
        cell_centroids=centroids, cell_volumes=volumes,
        face_vertices=face_vertices, face_cells=face_cells,
        face_areas=face_areas, face_normals=face_normals,
        face_centroids=face_centroids, boundary_tags=tags,
        fractures=tuple(frac_objs), intersections=intersections,
        frac_faces=frac_faces)


# ---------------------------------------------------------------------------
# validation


def validate_conformity(mesh: MixedDimMesh) -> list[str]:
    """Check every structural invariant; returns a list of violation
    messages, empty iff the mesh is valid."""
    report: list[str] = []
    tol = GEOM_REL_TOL * max(mesh.diameter, 1.0)

    if np.any(mesh.cell_volumes <= 0):
        bad = np.nonzero(mesh.cell_volumes <= 0)[0]
        report.append(f"non-positive cell volumes at bulk cells {bad.tolist()}")
    if np.any(mesh.face_areas <= 0):
        bad = np.nonzero(mesh.face_areas <= 0)[0]
        report.append(f"non-positive face areas at faces {bad.tolist()}")

    for f in range(mesh.num_faces):
        c0, c1 = mesh.face_cells[f]
        if c0 < 0:
            report.append(f"face {f} has no primary adjacent cell")
        if c1 < 0 and f not in mesh.boundary_tags:
            report.append(f"boundary face {f} carries no boundary tag")
        if c1 >= 0 and f in mesh.boundary_tags:
            report.append(f"interior face {f} carries boundary tag "
                          f"{mesh.boundary_tags[f]!r}")

    seen_faces: dict[int, tuple[int, int]] = {}
    for fid, frac in enumerate(mesh.fractures):
        for local, bface in enumerate(frac.cell_faces):
            bface = int(bface)
            if bface < 0 or bface >= mesh.num_faces:
                report.append(f"fracture {fid} cell {local} references "
                              f"unknown face {bface}")
                continue
            if bface in seen_faces:
                report.append(f"face {bface} coupled to two fracture cells "
                              f"{seen_faces[bface]} and {(fid, local)}")
            seen_faces[bface] = (fid, local)
            if mesh.face_cells[bface, 1] < 0:
                report.append(f"fracture {fid} cell {local} sits on boundary "
                              f"face {bface}")
            dc = np.linalg.norm(frac.centroids[local] - mesh.face_centroids[bface])
            dm = abs(frac.measures[local] - mesh.face_areas[bface])
            if dc > tol or dm > tol:
                report.append(
                    f"fracture {fid} cell {local} is not geometrically "
                    f"identical to bulk face {bface} "
                    f"(centroid offset {dc:.3e}, measure offset {dm:.3e})")
        if len(frac.tips) != 2:
            report.append(f"fracture {fid} must have exactly 2 tips")
        for tip in frac.tips:
            if tip.kind == _TIP_INTERSECTION:
                if tip.intersection is None or \
                        tip.intersection >= len(mesh.intersections):
                    report.append(f"fracture {fid} tip references missing "
                                  f"intersection {tip.intersection}")
    for e, (fid, local) in mesh.frac_faces.items():
        if seen_faces.get(e) != (fid, local):
            report.append(f"frac_faces entry {e} -> {(fid, local)} does not "
                          f"match the fracture definition")

    for iid, inter in enumerate(mesh.intersections):
        if len(inter.incident) == 0:
            report.append(f"intersection {iid} has no incident fracture tips")
        for fid, end in inter.incident:
            if fid >= len(mesh.fractures):
                report.append(f"intersection {iid} references unknown "
                              f"fracture {fid}")
                continue
            tip = mesh.fractures[fid].tips[end]
            if tip.kind != _TIP_INTERSECTION or tip.intersection != iid:
                report.append(f"intersection {iid} and fracture {fid} tip "
                              f"{end} disagree")
            elif np.linalg.norm(tip.point - inter.point) > tol:
                report.append(f"intersection {iid} location does not match "
                              f"fracture {fid} tip {end}")
    return report


# ---------------------------------------------------------------------------
# file I/O


def save_mesh(mesh: MixedDimMesh, path) -> None:
    """Write the mesh exchange format described in the module docstring."""
    lines = ["mdmesh 1", f"dim {mesh.dim}"]
    lines.append(f"points {len(mesh.points)}")
    for p in mesh.points:
        lines.append(" ".join(repr(float(x)) for x in p))
    lines.append(f"cells {mesh.dim} {mesh.num_cells}")
    for v in mesh.cell_vertices:
        lines.append(" ".join(str(i) for i in v))
    lines.append(f"faces {mesh.dim} {mesh.num_faces}")
    for f in range(mesh.num_faces):
        verts = " ".join(str(i) for i in mesh.face_vertices[f])
        c0, c1 = mesh.face_cells[f]
        lines.append(f"{verts} {c0} {c1}")
    by_tag: dict[str, list[int]] = {}
    for f, tag in mesh.boundary_tags.items():
        by_tag.setdefault(tag, []).append(f)
    for tag in sorted(by_tag):
        faces = sorted(by_tag[tag])
        lines.append(f"boundary {tag} {len(faces)}")
        lines.extend(str(f) for f in faces)
    for fid, frac in enumerate(mesh.fractures):
        lines.append(f"fracture {fid} {frac.num_cells}")
        for bface in frac.cell_faces:
            v = mesh.face_vertices[int(bface)]
            lines.append(f"{v[0]} {v[1]}")
    for iid, inter in enumerate(mesh.intersections):
        lines.append(f"intersection {iid} {len(inter.incident)}")
        lines.append(" ".join(repr(float(x)) for x in inter.point))
        for fid, end in inter.incident:
            lines.append(f"{fid} {end}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


class _Reader:
    def __init__(self, path):
        with open(path, encoding="utf-8") as fh:
            self.lines = fh.read().splitlines()
        self.pos = 0
        self.path = path

    def next(self):
        while self.pos < len(self.lines):
            line = self.lines[self.pos].strip()
            self.pos += 1
            if line:
                return line
        return None

    def error(self, msg):
        raise ConfigurationError(f"{self.path}:{self.pos}: {msg}")


def load_mesh(path) -> MixedDimMesh:
    """Parse and validate a mesh exchange file.

    Raises ConfigurationError on parse problems (with line number) and
    MeshConformityError when the assembled mesh violates an invariant.
    """
    rd = _Reader(path)
    header = rd.next()
    if header != "mdmesh 1":
        rd.error(f"expected header 'mdmesh 1', got {header!r}")
    line = rd.next()
    if line is None or not line.startswith("dim "):
        rd.error("expected 'dim <n>'")
    dim = int(line.split()[1])
    if dim not in (1, 2):
        rd.error(f"unsupported dimension {dim}")

    points = None
    cell_vertices = None
    face_vertices = None
    face_cells = None
    boundary_tags: dict[int, str] = {}
    frac_sections: dict[int, list[tuple[int, ...]]] = {}
    inter_sections: dict[int, tuple[np.ndarray, list[tuple[int, int]]]] = {}

    line = rd.next()
    while line is not None:
        fields = line.split()
        try:
            if fields[0] == "points":
                n = int(fields[1])
                points = np.array([[float(x) for x in rd.next().split()]
                                   for _ in range(n)])
            elif fields[0] == "cells":
                n = int(fields[2])
                cell_vertices = tuple(tuple(int(x) for x in rd.next().split())
                                      for _ in range(n))
            elif fields[0] == "faces":
                n = int(fields[2])
                nv = 2 if dim == 2 else 1
                face_vertices = []
                face_cells = []
                for _ in range(n):
                    parts = [int(x) for x in rd.next().split()]
                    face_vertices.append(tuple(parts[:nv]))
                    face_cells.append(tuple(parts[nv:nv + 2]))
                face_vertices = tuple(face_vertices)
                face_cells = np.asarray(face_cells)
            elif fields[0] == "boundary":
                tag, n = fields[1], int(fields[2])
                for _ in range(n):
                    boundary_tags[int(rd.next())] = tag
            elif fields[0] == "fracture":
                fid, n = int(fields[1]), int(fields[2])
                frac_sections[fid] = [tuple(int(x) for x in rd.next().split())
                                      for _ in range(n)]
            elif fields[0] == "intersection":
                iid, n = int(fields[1]), int(fields[2])
                pt = np.array([float(x) for x in rd.next().split()])
                incident = []
                for _ in range(n):
                    a, b = rd.next().split()
                    incident.append((int(a), int(b)))
                inter_sections[iid] = (pt, incident)
            else:
                rd.error(f"unknown section {fields[0]!r}")
        except (TypeError, ValueError, IndexError, AttributeError) as exc:
            rd.error(f"malformed entity: {exc}")
        line = rd.next()

    if points is None or cell_vertices is None or face_vertices is None:
        raise ConfigurationError(f"{path}: missing points/cells/faces section")

    cell_centroids, cell_volumes = _cell_geometry(points, cell_vertices, dim)
    face_centroids = np.array([points[list(v)].mean(axis=0)
                               for v in face_vertices])
    face_areas, face_normals = _face_geometry(points, face_vertices, face_cells,
                                              cell_centroids, dim)

    edge_to_face = {frozenset(v): f for f, v in enumerate(face_vertices)}
    fractures = []
    conformity_pre: list[str] = []
    for fid in sorted(frac_sections):
        pairs = frac_sections[fid]
        cfaces = []
        for local, pair in enumerate(pairs):
            f = edge_to_face.get(frozenset(pair))
            if f is None:
                conformity_pre.append(
                    f"fracture {fid} cell {local} with vertices {pair} does "
                    f"not match any bulk face")
                continue
            cfaces.append(f)
        if conformity_pre:
            continue
        cfaces = np.asarray(cfaces, dtype=int)
        ncf = len(cfaces)
        cents = face_centroids[cfaces].copy()
        meas = face_areas[cfaces].copy()
        norms = np.empty((ncf, points.shape[1]))
        for local in range(ncf):
            v = face_vertices[cfaces[local]]
            t = points[v[1]] - points[v[0]]
            t = t / np.linalg.norm(t)
            norms[local] = (-t[1], t[0])
        internal = np.column_stack([np.arange(ncf - 1), np.arange(1, ncf)]) \
            if ncf > 1 else np.empty((0, 2), dtype=int)
        fractures.append((fid, cfaces, cents, meas, norms, internal, pairs))
    if conformity_pre:
        raise MeshConformityError("; ".join(conformity_pre))

    # tips: classify each arm end against intersections and boundary
    boundary_vertices = {v for f in boundary_tags for v in face_vertices[f]}
    vertex_tag = {}
    for f, tag in boundary_tags.items():
        for v in face_vertices[f]:
            vertex_tag.setdefault(v, tag)
    tip_of: dict[tuple[int, int], Tip] = {}
    for iid in sorted(inter_sections):
        pt, incident = inter_sections[iid]
        for fid, end in incident:
            tip_of[(fid, end)] = (iid, pt)

    frac_objs = []
    frac_faces: dict[int, tuple[int, int]] = {}
    for fid, cfaces, cents, meas, norms, internal, pairs in fractures:
        ncf = len(cfaces)
        end_vertices = []
        if ncf == 1:
            end_vertices = [pairs[0][0], pairs[0][1]]
        else:
            first, second = set(pairs[0]), set(pairs[1])
            end_vertices.append((first - second).pop())
            last, prev = set(pairs[-1]), set(pairs[-2])
            end_vertices.append((last - prev).pop())
        tips = []
        for end, v in enumerate(end_vertices):
            cell_id = 0 if end == 0 else ncf - 1
            key = (fid, end)
            if key in tip_of:
                iid, pt = tip_of[key]
                tips.append(Tip(cell=cell_id, point=points[v],
                                kind=_TIP_INTERSECTION, intersection=iid))
            elif v in boundary_vertices:
                tips.append(Tip(cell=cell_id, point=points[v],
                                kind=_TIP_BOUNDARY, tag=vertex_tag[v]))
            else:
                tips.append(Tip(cell=cell_id, point=points[v],
                                kind=_TIP_IMMERSED))
        for local, f in enumerate(cfaces):
            frac_faces[int(f)] = (fid, local)
        frac_objs.append(Fracture(cell_faces=cfaces, centroids=cents,
                                  measures=meas, normals=norms,
                                  internal=internal, tips=tuple(tips)))

    intersections = tuple(
        Intersection(point=inter_sections[iid][0],
                     incident=tuple(inter_sections[iid][1]))
        for iid in sorted(inter_sections))

    mesh = MixedDimMesh(
        dim=dim, points=points, cell_vertices=cell_vertices,
        cell_centroids=cell_centroids, cell_volumes=cell_volumes,
        face_vertices=face_vertices, face_cells=face_cells,
        face_areas=face_areas, face_normals=face_normals,
        face_centroids=face_centroids, boundary_tags=boundary_tags,
        fractures=tuple(frac_objs), intersections=intersections,
        frac_faces=frac_faces)
    report = validate_conformity(mesh)
    if report:
        raise MeshConformityError("; ".join(report))
    return mesh


def _cell_geometry(points, cell_vertices, dim):
    nc = len(cell_vertices)
    centroids = np.empty((nc, points.shape[1]))
    volumes = np.empty(nc)
    for c, verts in enumerate(cell_vertices):
        pts = points[list(verts)]
        if dim == 1:
            volumes[c] = abs(pts[1, 0] - pts[0, 0])
            centroids[c] = pts.mean(axis=0)
        else:
            x, y = pts[:, 0], pts[:, 1]
            xs, ys = np.roll(x, -1), np.roll(y, -1)
            cross = x * ys - xs * y
            area = cross.sum() / 2.0
            volumes[c] = abs(area)
            if area == 0:
                centroids[c] = pts.mean(axis=0)
            else:
                centroids[c] = (
                    ((x + xs) * cross).sum() / (6.0 * area),
                    ((y + ys) * cross).sum() / (6.0 * area))
    return centroids, volumes


def _face_geometry(points, face_vertices, face_cells, cell_centroids, dim):
    nf = len(face_vertices)
    areas = np.empty(nf)
    normals = np.empty((nf, points.shape[1]))
    for f, verts in enumerate(face_vertices):
        if dim == 1:
            areas[f] = 1.0
            n = np.array([1.0])
        else:
            a, b = points[verts[0]], points[verts[1]]
            t = b - a
            areas[f] = np.linalg.norm(t)
            n = np.array([t[1], -t[0]]) / areas[f]
        c0 = face_cells[f, 0]
        fc = points[list(verts)].mean(axis=0)
        # orient from cells[0] towards the face (outward for boundary)
        if np.dot(n, fc - cell_centroids[c0]) < 0:
            n = -n
        normals[f] = n
    return areas, normals
