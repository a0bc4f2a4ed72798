"""Linear subspaces of R^n and the projectors attached to splittings.

Subspaces are stored by an orthonormal basis; projectors are formed on
demand.  All routines are pure functions of their arguments.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import ConditioningError, TransversalityError

RANK_THRESHOLD = 1e-9
ANGLE_THRESHOLD = 1e-8
INJECTIVITY_THRESHOLD = 1e-10
IDENTITY_TOLERANCE = 1e-8


@dataclass(frozen=True, eq=False)
class Subspace:
    """Subspace of R^n given by an n x k matrix with orthonormal columns."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2:
            raise ValueError("basis must be a 2-d array")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @classmethod
    def span(cls, vectors, ambient_dim=None, threshold=RANK_THRESHOLD):
        """Orthonormal basis for the column span of ``vectors``."""
        v = np.asarray(vectors, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        n = v.shape[0] if ambient_dim is None else ambient_dim
        if v.size == 0:
            return cls.zero(n)
        u, s, _ = np.linalg.svd(v, full_matrices=False)
        scale = max(1.0, s[0]) if s.size else 1.0
        rank = int(np.sum(s > threshold * scale))
        return cls(_canonical_signs(u[:, :rank]))

    @classmethod
    def zero(cls, n):
        return cls(np.zeros((n, 0)))

    @classmethod
    def full(cls, n):
        return cls(np.eye(n))

    @classmethod
    def coordinate(cls, n, indices):
        return cls(np.eye(n)[:, list(indices)])

    @property
    def ambient_dim(self):
        return self.basis.shape[0]

    @property
    def dim(self):
        return self.basis.shape[1]

    def projector(self):
        return orthogonal_projector(self)

    def complement(self):
        """Orthogonal complement."""
        n = self.ambient_dim
        if self.dim == 0:
            return Subspace.full(n)
        if self.dim == n:
            return Subspace.zero(n)
        q, _ = np.linalg.qr(self.basis, mode="complete")
        return Subspace(_canonical_signs(q[:, self.dim:]))

    def contains(self, v, tol=1e-10):
        v = np.asarray(v, dtype=float)
        r = v - self.basis @ (self.basis.T @ v)
        return np.linalg.norm(r) <= tol * max(1.0, np.linalg.norm(v))

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


@dataclass(frozen=True, eq=False)
class ObliqueProjector:
    matrix: np.ndarray
    range: Subspace
    kernel_space: Subspace
    identity_error: float

    @property
    def norm(self):
        return float(np.linalg.norm(self.matrix, 2))


def _canonical_signs(q):
    # make the largest-magnitude entry of each column positive so bases are
    # reproducible across LAPACK paths
    q = np.array(q, dtype=float)
    if q.size:
        idx = np.argmax(np.abs(q), axis=0)
        signs = np.sign(q[idx, np.arange(q.shape[1])])
        signs[signs == 0] = 1.0
        q *= signs
    return q


def orthonormalize(vectors):
    """QR-based orthonormalization keeping the column count."""
    q, _ = np.linalg.qr(np.asarray(vectors, dtype=float))
    return q


def orthogonal_projector(S: Subspace) -> np.ndarray:
    B = S.basis
    return B @ B.T


def subspace_gap(A: Subspace, B: Subspace) -> float:
    """Operator-norm distance between the orthogonal projectors of A and B."""
    if A.dim != B.dim:
        return 1.0
    if A.dim == 0:
        return 0.0
    return float(np.linalg.norm(orthogonal_projector(A) - orthogonal_projector(B), 2))


def direct_sum_check(S: Subspace, U: Subspace):
    """Return ``(is_direct_sum, gap)`` where gap is the sine of the smallest
    principal angle between S and U (1.0 if either is the zero subspace)."""
    n = S.ambient_dim
    if S.dim == 0 or U.dim == 0:
        gap = 1.0
        angle = np.pi / 2
    else:
        angles = sla.subspace_angles(S.basis, U.basis)
        angle = float(np.min(angles))
        gap = float(np.sin(angle))
    ok = (S.dim + U.dim == n) and angle > ANGLE_THRESHOLD
    return ok, gap


def _require_direct_sum(S, U):
    ok, gap = direct_sum_check(S, U)
    if not ok:
        if S.dim + U.dim != S.ambient_dim:
            raise TransversalityError(
                f"dimensions {S.dim}+{U.dim} do not fill R^{S.ambient_dim}", gap)
        raise TransversalityError("subspaces are not transversal", gap)
    return gap


def oblique_matrix(S: Subspace, U: Subspace) -> np.ndarray:
    """Projection onto S along U, without validation."""
    n = S.ambient_dim
    frame = np.hstack([S.basis, U.basis])
    sel = np.zeros((n, n))
    sel[:, :S.dim] = S.basis
    # P [S U] = [S 0]  =>  P = [S 0] [S U]^{-1}
    return np.linalg.solve(frame.T, sel.T).T


def composition_identity(S: Subspace, U: Subspace) -> np.ndarray:
    """Oblique projector built only from orthogonal projectors:
    (I - P_S P_U)^{-1} P_S (I - P_S P_U)."""
    n = S.ambient_dim
    PS = orthogonal_projector(S)
    PU = orthogonal_projector(U)
    G = np.eye(n) - PS @ PU
    return np.linalg.solve(G, PS @ G)


def oblique_projector(S: Subspace, U: Subspace) -> ObliqueProjector:
    """Projector onto S along U.

    The result is cross-checked against the orthogonal-projector identity
    and against ``P_SU + P_US = I``.
    """
    _require_direct_sum(S, U)
    n = S.ambient_dim
    P = oblique_matrix(S, U)
    Q = oblique_matrix(U, S)
    alt = composition_identity(S, U)
    scale = max(1.0, float(np.linalg.norm(P, 2)))
    identity_error = float(np.linalg.norm(P - alt, 2)) / scale
    complement_error = float(np.linalg.norm(P + Q - np.eye(n), 2)) / scale
    if identity_error > IDENTITY_TOLERANCE or complement_error > IDENTITY_TOLERANCE:
        _, gap = direct_sum_check(S, U)
        raise TransversalityError(
            f"projector identities fail (identity error {identity_error:.2e}, "
            f"complement error {complement_error:.2e})", gap)
    return ObliqueProjector(P, S, U, identity_error)


def projector_composition_norm(S: Subspace, U: Subspace) -> float:
    """Operator norm of P_S P_U for the orthogonal projectors of a splitting.

    Always below one for a transversal pair, and bounded by
    sqrt(1 - 1/||P_US||^2).
    """
    _require_direct_sum(S, U)
    if S.dim == 0 or U.dim == 0:
        raise TransversalityError("composition norm needs nonzero subspaces", 1.0)
    value = float(np.linalg.norm(S.basis.T @ U.basis, 2))
    pus = float(np.linalg.norm(oblique_matrix(U, S), 2))
    ceiling = np.sqrt(max(0.0, 1.0 - 1.0 / pus**2))
    if not value < 1.0 or value > ceiling + 1e-12:
        raise AssertionError(
            f"composition norm {value!r} violates bound {ceiling!r}")
    return value


def inclination(V: Subspace, S: Subspace, U: Subspace) -> float:
    """sup over unit v in V of |P_SU v| / |P_US v|; +inf when V meets S."""
    _require_direct_sum(S, U)
    if V.dim == 0:
        return 0.0
    Pst = oblique_matrix(S, U) @ V.basis
    Pun = oblique_matrix(U, S) @ V.basis
    sig_u = np.linalg.svd(Pun, compute_uv=False)
    smin = float(sig_u[-1]) if sig_u.size == V.dim else 0.0
    if smin <= RANK_THRESHOLD:
        return float("inf")
    # generalized eigenproblem  Pst^T Pst c = a^2 Pun^T Pun c
    w = sla.eigh(Pst.T @ Pst, Pun.T @ Pun, eigvals_only=True)
    value = float(np.sqrt(max(0.0, w[-1])))
    if value > 1.0 / smin + 1.0 + 1e-9:
        raise AssertionError("inclination exceeds 1/inf|P_US v| + 1")
    return value


def map_subspace(T, S: Subspace, direction="image") -> Subspace:
    """Image ``T(S)`` or preimage ``T^{-1}(S)`` as an orthonormal basis."""
    T = np.asarray(T, dtype=float)
    n = T.shape[1]
    if direction == "image":
        if S.dim == 0:
            return Subspace.zero(T.shape[0])
        W = T @ S.basis
        sig = np.linalg.svd(W, compute_uv=False)
        if sig[-1] < INJECTIVITY_THRESHOLD:
            raise ConditioningError("map is not injective on the subspace", float(sig[-1]))
        q, _ = np.linalg.qr(W)
        return Subspace(_canonical_signs(q))
    if direction == "preimage":
        R = (np.eye(T.shape[0]) - orthogonal_projector(S)) @ T
        return _nullspace(R, n)
    raise ValueError(f"unknown direction {direction!r}")


def _nullspace(A, n, threshold=RANK_THRESHOLD):
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    scale = max(1.0, s[0]) if s.size else 1.0
    rank = int(np.sum(s > threshold * scale))
    return Subspace(_canonical_signs(vt[rank:].T.reshape(n, n - rank)))


def subspace_intersection(E: Subspace, F: Subspace) -> Subspace:
    """E ∩ F as the common kernel of the complementary projectors."""
    n = E.ambient_dim
    I = np.eye(n)
    stacked = np.vstack([I - orthogonal_projector(E), I - orthogonal_projector(F)])
    return _nullspace(stacked, n)


def projection_norm_bound(M_incl: float) -> float:
    """A priori bound 2(M+1)^2 on |P_SU| given inclination at most M."""
    if M_incl < 0:
        raise ValueError("inclination bound must be non-negative")
    return 2.0 * (M_incl + 1.0) ** 2


def random_subspace(rng, n, k):
    if k == 0:
        return Subspace.zero(n)
    q, _ = np.linalg.qr(rng.standard_normal((n, k)))
    return Subspace(q)


def splitting_inclination(S: Subspace, U: Subspace) -> float:
    """Inclination of S relative to the orthogonal splitting U ⊕ U^perp.

    This is the quantity whose bound M gives |P_SU| <= 2(M+1)^2.
    """
    return inclination(S, U, U.complement())
