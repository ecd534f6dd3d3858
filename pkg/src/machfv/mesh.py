"""Periodic uniform Cartesian meshes and the discrete operators living on them.

Cells are indexed row-major, ``cell = i + nx * j``.  Interior faces come in
two contiguous blocks: the ``nx * ny`` x-normal faces first, then the
``nx * ny`` y-normal faces.  Face ``i + nx * j`` of the x-block joins cell
(i, j) to its right neighbour ((i + 1) % nx, j); the y-block face joins
(i, j) to (i, (j + 1) % ny).  The stored unit normal always points from the
first cell (K) to the second (L), i.e. along +x or +y, and every per-face
quantity below is reported with that K-side orientation.  The jump
convention is ``jump(q) = q_L - q_K``.

On a periodic uniform mesh every face is interior, every cell touches
exactly four faces, the dual volume attached to a face equals the cell
volume (|face| times the distance between the two adjacent centres), and
the cell boundary measure is 2 * (hx + hy).
"""

from dataclasses import dataclass

import numpy as np

# Tensorised 3-point Gauss rule on [-1/2, 1/2], weights normalised to sum 1.
_GAUSS3_NODES = np.array([-0.5 * np.sqrt(3.0 / 5.0), 0.0, 0.5 * np.sqrt(3.0 / 5.0)])
_GAUSS3_WEIGHTS = np.array([5.0, 8.0, 5.0]) / 18.0


@dataclass(frozen=True)
class StructuredMesh:
    """Periodic uniform Cartesian mesh on [0, lx) x [0, ly)."""

    nx: int
    ny: int
    lx: float
    ly: float
    hx: float
    hy: float
    cell_volume: float
    dual_volume: float
    boundary_measure: float
    face_cell_k: np.ndarray
    face_cell_l: np.ndarray
    face_axis: np.ndarray
    face_measure: np.ndarray

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def n_faces(self) -> int:
        return self.face_cell_k.size

    def cell_centers(self):
        """Flat (row-major) arrays of the cell centre coordinates."""
        xc = (np.arange(self.nx) + 0.5) * self.hx
        yc = (np.arange(self.ny) + 0.5) * self.hy
        xg, yg = np.meshgrid(xc, yc)
        return xg.ravel(), yg.ravel()


def build_mesh(nx: int, ny: int, lx: float = 1.0, ly: float = 1.0) -> StructuredMesh:
    """Build a periodic uniform mesh with nx x ny cells.

    Both directions need at least 3 cells so that the two faces of a cell in
    one direction are distinct faces of distinct neighbours.
    """
    if nx < 3 or ny < 3:
        raise ValueError(f"mesh needs nx >= 3 and ny >= 3, got {nx} x {ny}")
    if lx <= 0.0 or ly <= 0.0:
        raise ValueError(f"domain lengths must be positive, got lx={lx}, ly={ly}")
    hx = lx / nx
    hy = ly / ny

    i, j = np.meshgrid(np.arange(nx), np.arange(ny))
    i = i.ravel()
    j = j.ravel()
    cell = i + nx * j

    # x-block: K = (i, j), L = (i+1 mod nx, j); y-block: L = (i, j+1 mod ny).
    k_x = cell
    l_x = (i + 1) % nx + nx * j
    k_y = cell
    l_y = i + nx * ((j + 1) % ny)

    face_cell_k = np.concatenate([k_x, k_y])
    face_cell_l = np.concatenate([l_x, l_y])
    face_axis = np.concatenate([np.zeros(nx * ny, dtype=np.int64),
                                np.ones(nx * ny, dtype=np.int64)])
    face_measure = np.where(face_axis == 0, hy, hx)

    return StructuredMesh(
        nx=nx, ny=ny, lx=lx, ly=ly, hx=hx, hy=hy,
        cell_volume=hx * hy,
        dual_volume=hx * hy,
        boundary_measure=2.0 * (hx + hy),
        face_cell_k=face_cell_k,
        face_cell_l=face_cell_l,
        face_axis=face_axis,
        face_measure=face_measure,
    )


def project(mesh: StructuredMesh, f, rule: str = "midpoint") -> np.ndarray:
    """Project a function f(x, y) onto piecewise constants.

    ``rule="midpoint"`` evaluates at cell centres; ``rule="gauss3"`` uses the
    tensorised 3-point Gauss rule (exact for polynomials up to degree 5).
    ``f`` must accept numpy arrays.
    """
    xg, yg = mesh.cell_centers()
    if rule == "midpoint":
        return np.asarray(f(xg, yg), dtype=float)
    if rule == "gauss3":
        out = np.zeros(mesh.n_cells)
        for a, wa in zip(_GAUSS3_NODES, _GAUSS3_WEIGHTS):
            for b, wb in zip(_GAUSS3_NODES, _GAUSS3_WEIGHTS):
                out += wa * wb * np.asarray(f(xg + a * mesh.hx, yg + b * mesh.hy), dtype=float)
        return out
    raise ValueError(f"unknown quadrature rule {rule!r}")


def face_average(mesh: StructuredMesh, q: np.ndarray) -> np.ndarray:
    """Arithmetic face average {{q}} = (q_K + q_L) / 2; works per component."""
    return 0.5 * (q[mesh.face_cell_k] + q[mesh.face_cell_l])


def face_jump(mesh: StructuredMesh, q: np.ndarray) -> np.ndarray:
    """Face jump [[q]] = q_L - q_K in the stored (K, L) orientation."""
    return q[mesh.face_cell_l] - q[mesh.face_cell_k]


def face_average_normal(mesh: StructuredMesh, u: np.ndarray) -> np.ndarray:
    """Normal component of the face average of a cell vector field u (n, 2)."""
    comp = u[:, 0][mesh.face_cell_k] + u[:, 0][mesh.face_cell_l]
    comp_y = u[:, 1][mesh.face_cell_k] + u[:, 1][mesh.face_cell_l]
    return 0.5 * np.where(mesh.face_axis == 0, comp, comp_y)


def sum_over_cell_faces(mesh: StructuredMesh, value_k_side: np.ndarray) -> np.ndarray:
    """Per-cell sum over the cell's faces of an antisymmetric face quantity.

    ``value_k_side`` holds the K-side value for every face; the L-side value
    is its negation.  Accepts shape (n_faces,) or (n_faces, m).  Uses
    sequential scatter-adds, so the reduction order is deterministic and the
    input dtype is preserved.
    """
    out = np.zeros(value_k_side.shape[:0] + (mesh.n_cells,) + value_k_side.shape[1:],
                   dtype=value_k_side.dtype)
    np.add.at(out, mesh.face_cell_k, value_k_side)
    np.subtract.at(out, mesh.face_cell_l, value_k_side)
    return out


def cell_gradient(mesh: StructuredMesh, q: np.ndarray) -> np.ndarray:
    """Cell-centred gradient from face averages, shape (n_cells, 2).

    (grad q)_K = sum over faces of K of (|face| / |K|) {{q}} n_K.  On a
    uniform mesh this reduces to the central difference of the two
    neighbours in each direction.
    """
    avg = face_average(mesh, q)
    coef = mesh.face_measure / mesh.cell_volume
    grad = np.zeros((mesh.n_cells, 2), dtype=avg.dtype)
    for axis in (0, 1):
        sel = mesh.face_axis == axis
        contrib = (coef * avg)[sel]
        np.add.at(grad[:, axis], mesh.face_cell_k[sel], contrib)
        np.subtract.at(grad[:, axis], mesh.face_cell_l[sel], contrib)
    return grad


def face_gradient_normal(mesh: StructuredMesh, q: np.ndarray) -> np.ndarray:
    """Normal component of the face (dual-cell) gradient: (|face|/|D|) [[q]]."""
    return (mesh.face_measure / mesh.dual_volume) * face_jump(mesh, q)


def face_gradient(mesh: StructuredMesh, q: np.ndarray) -> np.ndarray:
    """Face gradient as a per-face vector in the stored orientation."""
    normal = face_gradient_normal(mesh, q)
    out = np.zeros((mesh.n_faces, 2), dtype=normal.dtype)
    out[np.arange(mesh.n_faces), mesh.face_axis] = normal
    return out


def cell_divergence(mesh: StructuredMesh, phi: np.ndarray) -> np.ndarray:
    """Discrete divergence of a cell vector field phi (n_cells, 2).

    (div phi)_K = sum over faces of K of (|face| / |K|) {{phi}} . n_K.
    Dual to -cell_gradient under the cell-volume inner product.
    """
    avg_n = face_average_normal(mesh, phi)
    return sum_over_cell_faces(mesh, (mesh.face_measure / mesh.cell_volume) * avg_n)
