"""Covariance-matrix algebra for multimode Gaussian states.

Conventions: quadratures x = a + a†, vacuum variance 1, quadrature ordering
(x_1..x_N, p_1..p_N), symplectic form J = [[0, I], [-I, 0]].  A lossy
multimode squeezed state has covariance

    Gamma = (1 - p) O K^2 O^T + p I,

with O the 2Nx2N orthogonal embedding of an NxN unitary mode mixer,
K = diag(e^{r_1}, ..., e^{r_N}, e^{-r_1}, ..., e^{-r_N}) a diagonal squeezer,
and p a mode-independent photon loss probability.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, ParameterError, ValidationError
from .seeding import rng_from
from .serialize import dumps_17g

__all__ = [
    "CovarianceMatrix",
    "BlochMessiah",
    "OrthogonalSymplectic",
    "symplectic_form",
    "embed_orthogonal",
    "make_covariance",
    "random_bmd",
    "bmd_oracle",
    "hs_fidelity",
    "conjugate",
]

SYMMETRY_ATOL = 1e-12
PSD_MIN_EIG = -1e-10
UNITARITY_ATOL = 1e-10


def symplectic_form(n_modes: int) -> np.ndarray:
    """J = [[0, I], [-I, 0]] in (x_1..x_N, p_1..p_N) ordering."""
    eye = np.eye(n_modes)
    zero = np.zeros((n_modes, n_modes))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True)
class CovarianceMatrix:
    """2Nx2N real symmetric PSD quadrature covariance matrix."""

    n_modes: int
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = self.n_modes
        if n < 1:
            raise ValidationError("n_modes must be positive")
        mat = np.array(self.data, dtype=float)
        if mat.shape != (2 * n, 2 * n):
            raise ValidationError(f"covariance must be {2*n}x{2*n}, got {mat.shape}")
        asym = np.max(np.abs(mat - mat.T))
        if asym > SYMMETRY_ATOL:
            raise ValidationError(f"covariance asymmetry {asym:.3e} exceeds {SYMMETRY_ATOL}")
        min_eig = float(np.linalg.eigvalsh(mat).min())
        if min_eig < PSD_MIN_EIG:
            raise ValidationError(f"covariance not PSD: min eigenvalue {min_eig:.3e}")
        mat.setflags(write=False)
        object.__setattr__(self, "data", mat)

    def to_json(self) -> str:
        return dumps_17g({"n_modes": self.n_modes, "matrix": self.data})

    @classmethod
    def from_json(cls, text: str) -> "CovarianceMatrix":
        doc = json.loads(text)
        return cls(n_modes=int(doc["n_modes"]), data=np.array(doc["matrix"], dtype=float))


@dataclass(frozen=True)
class BlochMessiah:
    """Ground-truth model: unitary mode mixer, sorted squeeze parameters, loss."""

    unitary: np.ndarray = field(repr=False)
    squeeze_params: np.ndarray
    loss_p: float = 0.0

    def __post_init__(self):
        u = np.array(self.unitary, dtype=complex)
        r = np.array(self.squeeze_params, dtype=float)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValidationError("unitary must be square")
        n = u.shape[0]
        if r.shape != (n,):
            raise ValidationError(f"squeeze_params must have length {n}")
        defect = float(np.linalg.norm(u.conj().T @ u - np.eye(n), 2))
        if defect > UNITARITY_ATOL:
            raise ValidationError(f"U†U deviates from identity by {defect:.3e}")
        if np.any(np.diff(r) > 0):
            raise ValidationError("squeeze_params must be sorted non-increasing")
        if np.any(r < 0):
            raise ValidationError("squeeze_params must be non-negative")
        if not (0.0 <= self.loss_p < 1.0):
            raise ValidationError("loss_p must lie in [0, 1)")
        u.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "unitary", u)
        object.__setattr__(self, "squeeze_params", r)

    @property
    def n_modes(self) -> int:
        return self.unitary.shape[0]

    def to_json(self) -> str:
        return dumps_17g(
            {
                "n_modes": self.n_modes,
                "unitary_re": self.unitary.real,
                "unitary_im": self.unitary.imag,
                "squeeze_params": self.squeeze_params,
                "loss_p": float(self.loss_p),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "BlochMessiah":
        doc = json.loads(text)
        u = np.array(doc["unitary_re"], dtype=float) + 1j * np.array(doc["unitary_im"], dtype=float)
        return cls(unitary=u, squeeze_params=np.array(doc["squeeze_params"], dtype=float), loss_p=float(doc["loss_p"]))


@dataclass(frozen=True)
class OrthogonalSymplectic:
    """2Nx2N real matrix that is both orthogonal and symplectic."""

    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        mat = np.array(self.data, dtype=float)
        d = mat.shape[0]
        if mat.ndim != 2 or mat.shape[1] != d or d % 2:
            raise ValidationError("orthogonal-symplectic matrix must be 2Nx2N")
        n = d // 2
        orth = float(np.linalg.norm(mat @ mat.T - np.eye(d), 2))
        if orth > UNITARITY_ATOL:
            raise ValidationError(f"O O^T deviates from identity by {orth:.3e}")
        j = symplectic_form(n)
        symp = float(np.linalg.norm(mat @ j @ mat.T - j, 2))
        if symp > UNITARITY_ATOL:
            raise ValidationError(f"O J O^T deviates from J by {symp:.3e}")
        mat.setflags(write=False)
        object.__setattr__(self, "data", mat)

    @property
    def n_modes(self) -> int:
        return self.data.shape[0] // 2


def embed_orthogonal(u: np.ndarray) -> OrthogonalSymplectic:
    """Embed an NxN unitary as [[Re u, -Im u], [Im u, Re u]].

    The map is a group homomorphism from U(N) into the orthogonal-symplectic
    matrices acting on (x, p) quadratures.
    """
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValidationError("input must be a square matrix")
    defect = float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0]), 2))
    if defect > UNITARITY_ATOL:
        raise ValidationError(f"input not unitary: ‖U†U - I‖ = {defect:.3e}")
    o = np.block([[u.real, -u.imag], [u.imag, u.real]])
    return OrthogonalSymplectic(data=o)


def make_covariance(bm: BlochMessiah) -> CovarianceMatrix:
    """Covariance of a lossy squeezed state: (1-p) O K^2 O^T + p I."""
    n = bm.n_modes
    o = embed_orthogonal(bm.unitary).data
    k2 = np.concatenate([np.exp(2 * bm.squeeze_params), np.exp(-2 * bm.squeeze_params)])
    gamma = (1.0 - bm.loss_p) * (o * k2) @ o.T + bm.loss_p * np.eye(2 * n)
    gamma = 0.5 * (gamma + gamma.T)  # scrub roundoff asymmetry
    return CovarianceMatrix(n_modes=n, data=gamma)


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase-fixed R diagonal."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_bmd(
    n_modes: int,
    r_min: float,
    r_max: float,
    min_gap: float,
    loss_p: float = 0.0,
    seed: int = 0,
) -> BlochMessiah:
    """Random ground truth with Haar unitary and gap-separated squeeze params.

    Squeeze parameters are resampled until all consecutive gaps are at least
    ``min_gap``; exact degeneracy makes supermode identification ill-posed.
    """
    if not (0.0 <= r_min < r_max):
        raise ParameterError("need 0 <= r_min < r_max")
    if min_gap <= 0:
        raise ParameterError("min_gap must be positive")
    if n_modes * min_gap > r_max - r_min:
        raise ParameterError(
            f"gap constraint infeasible: {n_modes} modes with min_gap {min_gap} "
            f"cannot fit in [{r_min}, {r_max}]"
        )
    rng = rng_from(seed)
    u = haar_unitary(n_modes, rng)
    # spacing construction: uniform order statistics conditioned on all
    # consecutive gaps >= min_gap, without rejection
    slack = (r_max - r_min) - (n_modes - 1) * min_gap
    base = np.sort(rng.uniform(0.0, slack, size=n_modes))
    r = (r_min + base + min_gap * np.arange(n_modes))[::-1].copy()
    return BlochMessiah(unitary=u, squeeze_params=r, loss_p=loss_p)


def _canonical_signs(vecs: np.ndarray) -> np.ndarray:
    """Flip eigenvector columns so the first component above roundoff is positive."""
    out = vecs.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size and col[nz[0]] < 0:
            out[:, j] = -col
    return out


def bmd_oracle(gamma: CovarianceMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric eigendecomposition of the covariance, eigenvalues descending.

    Returns (eigvals, eigvecs) with eigvecs[:, k] the unit eigenvector of
    eigvals[k].  For a covariance built from a Bloch-Messiah model the first N
    eigenvalues are the anti-squeezed variances (1-p)e^{2 r_i} + p in order,
    and columns recover the supermodes up to sign.
    """
    try:
        vals, vecs = np.linalg.eigh(gamma.data)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigendecomposition failed: {exc}") from exc
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = _canonical_signs(vecs[:, order])
    recon = float(np.linalg.norm(gamma.data - (vecs * vals) @ vecs.T, 2))
    if recon > 1e-8:
        raise NumericError(f"eigendecomposition reconstruction error {recon:.3e}")
    return vals, vecs


def hs_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Hilbert-Schmidt overlap F = Tr|A^T B| / d with element-wise absolute value.

    Equals 1 when B = A D for any diagonal D of +-1, absorbing the per-mode
    sign ambiguity of learned supermode rows.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParameterError(f"matrices must be square with equal shape, got {a.shape} and {b.shape}")
    return float(np.sum(np.abs(np.einsum("ki,ki->i", a, b))) / a.shape[0])


def conjugate(gamma: CovarianceMatrix, o: OrthogonalSymplectic | np.ndarray) -> CovarianceMatrix:
    """Return O Gamma O^T; preserves symmetry, PSD, and the eigenvalue multiset."""
    mat = o.data if isinstance(o, OrthogonalSymplectic) else np.asarray(o, dtype=float)
    if mat.shape != gamma.data.shape:
        raise ParameterError(f"dimension mismatch: {mat.shape} vs {gamma.data.shape}")
    out = mat @ gamma.data @ mat.T
    out = 0.5 * (out + out.T)
    return CovarianceMatrix(n_modes=gamma.n_modes, data=out)
