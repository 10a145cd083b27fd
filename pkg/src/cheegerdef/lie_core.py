"""Catalogued compact groups, their algebras and bi-invariant forms.

Groups are carried as explicit real matrix models: the circle as SO(2),
the 2-torus as a block pair of rotations, and the special unitary group
of rank one as the 4x4 real matrices of left quaternion multiplication.
Algebra bases are chosen orthonormal for the catalogued bi-invariant
form, which is the identity matrix in every case.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

__all__ = [
    "AlgebraClosureError",
    "BiInvariantForm",
    "GroupElement",
    "LieAlgebraBasis",
    "LieGroupModel",
    "ad_invariance_residual",
    "antisymmetry_residual",
    "bracket",
    "exp_map",
    "get_group",
    "jacobi_residual",
    "list_groups",
    "structure_constants_from_basis",
]


class AlgebraClosureError(ValueError):
    """A commutator failed to project back onto the algebra basis."""


def _project_to_basis(basis: tuple[np.ndarray, ...], M: np.ndarray,
                      tol: float = 1e-10) -> np.ndarray:
    """Coefficients of M in the given matrix basis, least squares.

    Raises AlgebraClosureError when the residual exceeds tol, i.e. M is
    not actually in the span.
    """
    cols = np.stack([b.ravel() for b in basis], axis=1)
    coeffs, *_ = np.linalg.lstsq(cols, M.ravel(), rcond=None)
    resid = np.linalg.norm(cols @ coeffs - M.ravel())
    if resid > tol:
        raise AlgebraClosureError(
            f"matrix is not in the algebra span (residual {resid:.3e})")
    return coeffs


def structure_constants_from_basis(basis: tuple[np.ndarray, ...]) -> np.ndarray:
    """c[i, j, m] with [k_i, k_j] = sum_m c[i, j, m] k_m."""
    n = len(basis)
    c = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            comm = basis[i] @ basis[j] - basis[j] @ basis[i]
            c[i, j] = _project_to_basis(basis, comm)
    return c


def antisymmetry_residual(c: np.ndarray) -> float:
    return float(np.max(np.abs(c + np.swapaxes(c, 0, 1))))


def jacobi_residual(c: np.ndarray) -> float:
    """Max violation of the Jacobi identity in coefficient form."""
    term = np.einsum("ijm,mkn->ijkn", c, c)
    total = term + np.einsum("jkm,min->ijkn", c, c) + np.einsum("kim,mjn->ijkn", c, c)
    return float(np.max(np.abs(total)))


def ad_invariance_residual(c: np.ndarray, B: np.ndarray) -> float:
    """Max violation of B([a,x], y) + B(x, [a,y]) = 0 on basis triples."""
    t1 = np.einsum("aim,mj->aij", c, B)
    t2 = np.einsum("ajm,im->aij", c, B)
    return float(np.max(np.abs(t1 + t2)))


@dataclass(frozen=True)
class LieAlgebraBasis:
    """Ordered matrix basis of the algebra with its structure constants."""

    matrices: tuple[np.ndarray, ...]
    structure_constants: np.ndarray = field(repr=False)

    @classmethod
    def from_matrices(cls, matrices: tuple[np.ndarray, ...]) -> "LieAlgebraBasis":
        mats = tuple(np.asarray(m, dtype=float) for m in matrices)
        gram = np.array([[np.sum(a * b) for b in mats] for a in mats])
        if np.linalg.matrix_rank(gram, tol=1e-10) < len(mats):
            raise ValueError("algebra basis matrices are linearly dependent")
        c = structure_constants_from_basis(mats)
        if antisymmetry_residual(c) > 1e-12:
            raise ValueError("structure constants violate antisymmetry")
        if jacobi_residual(c) > 1e-12:
            raise ValueError("structure constants violate the Jacobi identity")
        return cls(matrices=mats, structure_constants=c)

    @property
    def dim(self) -> int:
        return len(self.matrices)

    def element(self, coeffs: np.ndarray) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=float)
        out = np.zeros_like(self.matrices[0])
        for a, m in zip(coeffs, self.matrices):
            out = out + a * m
        return out


@dataclass(frozen=True)
class BiInvariantForm:
    """Symmetric positive form on the algebra in basis coefficients."""

    matrix: np.ndarray

    def validate(self, algebra: LieAlgebraBasis) -> None:
        B = self.matrix
        if not np.allclose(B, B.T, atol=1e-14):
            raise ValueError("bi-invariant form must be symmetric")
        if np.min(np.linalg.eigvalsh(B)) <= 0:
            raise ValueError("bi-invariant form must be positive definite")
        resid = ad_invariance_residual(algebra.structure_constants, B)
        if resid > 1e-10:
            raise ValueError(f"form is not ad-invariant (residual {resid:.3e})")

    def pair(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(np.asarray(a) @ self.matrix @ np.asarray(b))


@dataclass(frozen=True)
class GroupElement:
    """Group element as a matrix in the model representation."""

    group_id: str
    matrix: np.ndarray


@dataclass(frozen=True)
class LieGroupModel:
    group_id: str
    algebra: LieAlgebraBasis
    form: BiInvariantForm

    def identity(self) -> GroupElement:
        n = self.algebra.matrices[0].shape[0]
        return GroupElement(self.group_id, np.eye(n))

    def exp(self, coeffs: np.ndarray, t: float = 1.0) -> GroupElement:
        M = scipy.linalg.expm(t * self.algebra.element(coeffs))
        return GroupElement(self.group_id, M)

    def compose(self, g: GroupElement, h: GroupElement) -> GroupElement:
        return GroupElement(self.group_id, g.matrix @ h.matrix)

    def inverse(self, g: GroupElement) -> GroupElement:
        return GroupElement(self.group_id, g.matrix.T.copy())

    def bracket(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Coefficients of [a, b] for coefficient vectors a, b."""
        A = self.algebra.element(a)
        B = self.algebra.element(b)
        return _project_to_basis(self.algebra.matrices, A @ B - B @ A)

    def membership_residual(self, M: np.ndarray) -> float:
        """Distance of M from the model group, 0 for genuine elements.

        Orthogonality plus the structural constraints of the model: block
        shape for torus factors, the left-multiplication shape for the
        quaternion model, and orientation for the rotation models.
        """
        M = np.asarray(M, dtype=float)
        n = M.shape[0]
        resid = float(np.max(np.abs(M.T @ M - np.eye(n))))
        if self.group_id == "u1":
            resid = max(resid, abs(float(np.linalg.det(M)) - 1.0))
        elif self.group_id == "t2":
            resid = max(resid, float(np.max(np.abs(M[:2, 2:]))),
                        float(np.max(np.abs(M[2:, :2]))),
                        abs(float(np.linalg.det(M[:2, :2])) - 1.0),
                        abs(float(np.linalg.det(M[2:, 2:])) - 1.0))
        elif self.group_id == "su2":
            # first column is the quaternion; rebuild left multiplication
            rebuilt = _quat_left_mult(M[:, 0])
            resid = max(resid, float(np.max(np.abs(M - rebuilt))))
        return resid

    def element(self, M: np.ndarray, tol: float = 1e-10) -> GroupElement:
        resid = self.membership_residual(M)
        if resid > tol:
            raise ValueError(
                f"matrix is not an element of {self.group_id} (residual {resid:.3e})")
        return GroupElement(self.group_id, np.asarray(M, dtype=float))

    def random_algebra_vector(self, rng: np.random.Generator,
                              angle_scale: float | None = None) -> np.ndarray:
        """Coefficient vector of a random element of the algebra.

        For circle factors the angle is uniform over a full turn; when
        angle_scale is given the vector norm is capped by it (used to keep
        transformed sample points inside a chart).
        """
        n = self.algebra.dim
        if angle_scale is None:
            return rng.uniform(-np.pi, np.pi, size=n)
        direction = rng.normal(size=n)
        direction /= np.linalg.norm(direction)
        return direction * rng.uniform(0.0, angle_scale)

    def random_element(self, rng: np.random.Generator,
                       angle_scale: float | None = None) -> GroupElement:
        return self.exp(self.random_algebra_vector(rng, angle_scale))


def exp_map(group: LieGroupModel, coeffs: np.ndarray, t: float = 1.0) -> GroupElement:
    return group.exp(coeffs, t)


def bracket(group: LieGroupModel, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return group.bracket(a, b)


_J2 = np.array([[0.0, -1.0], [1.0, 0.0]])


def _quat_left_mult(q: np.ndarray) -> np.ndarray:
    """Left multiplication by the quaternion with coefficients (w,x,y,z)."""
    w, x, y, z = q
    return np.array([
        [w, -x, -y, -z],
        [x, w, -z, y],
        [y, z, w, -x],
        [z, -y, x, w],
    ])


def _make_u1() -> LieGroupModel:
    algebra = LieAlgebraBasis.from_matrices((_J2.copy(),))
    form = BiInvariantForm(np.eye(1))
    model = LieGroupModel("u1", algebra, form)
    form.validate(algebra)
    return model


def _make_t2() -> LieGroupModel:
    k1 = np.zeros((4, 4))
    k1[:2, :2] = _J2
    k2 = np.zeros((4, 4))
    k2[2:, 2:] = _J2
    algebra = LieAlgebraBasis.from_matrices((k1, k2))
    form = BiInvariantForm(np.eye(2))
    model = LieGroupModel("t2", algebra, form)
    form.validate(algebra)
    return model


def _make_su2() -> LieGroupModel:
    # halved left multiplications by i, j, k: [e1, e2] = e3 cyclically
    li = _quat_left_mult(np.array([0.0, 1.0, 0.0, 0.0]))
    lj = _quat_left_mult(np.array([0.0, 0.0, 1.0, 0.0]))
    lk = _quat_left_mult(np.array([0.0, 0.0, 0.0, 1.0]))
    algebra = LieAlgebraBasis.from_matrices((0.5 * li, 0.5 * lj, 0.5 * lk))
    form = BiInvariantForm(np.eye(3))
    model = LieGroupModel("su2", algebra, form)
    form.validate(algebra)
    return model


_GROUPS: dict[str, LieGroupModel] = {}


def get_group(group_id: str) -> LieGroupModel:
    if group_id not in _GROUPS:
        if group_id == "u1":
            _GROUPS[group_id] = _make_u1()
        elif group_id == "t2":
            _GROUPS[group_id] = _make_t2()
        elif group_id == "su2":
            _GROUPS[group_id] = _make_su2()
        else:
            raise KeyError(f"unknown group '{group_id}'")
    return _GROUPS[group_id]


def list_groups() -> tuple[str, ...]:
    return ("u1", "t2", "su2")
