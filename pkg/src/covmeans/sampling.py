"""Population covariance models and Wishart sampling.

Everything here is deterministic given (spec, seed): seeds are fed to
``numpy.random.default_rng`` and the draw order inside each operation is part
of the reproducibility contract, documented per function.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import NonInvertibleSplitError, ValidationError
from .linalg import as_array, check_hermitian, hermitize, spd_sqrt

REAL = "real"
COMPLEX = "complex"
FIELDS = (REAL, COMPLEX)

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator]


def _rng(seed: SeedLike) -> np.random.Generator:
    if seed is None:
        raise ValidationError("a seed is required for reproducible sampling")
    return np.random.default_rng(seed)


def _check_field(field_tag: str) -> str:
    if field_tag not in FIELDS:
        raise ValidationError(f"field must be one of {FIELDS}, got {field_tag!r}")
    return field_tag


@dataclass(frozen=True, eq=False)
class SpdMatrix:
    """A Hermitian positive semidefinite p x p matrix.

    Construction validates Hermitian symmetry within 1e-10 relative and then
    stores the exactly-Hermitized entries. Strict positive definiteness is
    verified wherever an inverse or square root is taken, not here.
    """

    entries: np.ndarray

    def __post_init__(self):
        m = check_hermitian(np.asarray(self.entries))
        m = hermitize(m)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def p(self) -> int:
        return self.entries.shape[0]

    @property
    def field(self) -> str:
        return COMPLEX if np.iscomplexobj(self.entries) else REAL


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """p x n sample of centered Gaussian columns over the declared field."""

    entries: np.ndarray
    field: str

    def __post_init__(self):
        m = np.asarray(self.entries)
        if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
            raise ValidationError(f"data must be a nonempty 2-d array, got shape {m.shape}")
        _check_field(self.field)
        if self.field == REAL and np.iscomplexobj(m):
            raise ValidationError("real-field data has complex entries")
        if self.field == COMPLEX and not np.iscomplexobj(m):
            raise ValidationError("complex-field data has real entries")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def p(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class Identity:
    """Sigma = I."""

    p: int

    def __post_init__(self):
        if int(self.p) < 1:
            raise ValidationError(f"dimension p must be >= 1, got {self.p}")


@dataclass(frozen=True, eq=False)
class Spiked:
    """Sigma = I + theta v v*, a rank-one perturbation of the identity.

    ``v`` is either the string "canonical", realized as the first basis
    vector, or a unit vector (Euclidean norm 1 within 1e-12).
    """

    p: int
    theta: float
    v: object = "canonical"

    def __post_init__(self):
        if int(self.p) < 1:
            raise ValidationError(f"dimension p must be >= 1, got {self.p}")
        if not float(self.theta) > 0:
            raise ValidationError(f"spike strength theta must be > 0, got {self.theta}")
        if isinstance(self.v, str):
            if self.v != "canonical":
                raise ValidationError(f"unknown spike vector tag {self.v!r}")
        else:
            v = np.asarray(self.v)
            if v.shape != (self.p,):
                raise ValidationError(f"spike vector has shape {v.shape}, expected ({self.p},)")
            nrm = float(np.linalg.norm(v))
            if abs(nrm - 1.0) > 1e-12:
                raise ValidationError(f"spike vector must be unit norm, got {nrm!r}")
            v = v.copy()
            v.setflags(write=False)
            object.__setattr__(self, "v", v)

    def unit_vector(self) -> np.ndarray:
        if isinstance(self.v, str):
            e1 = np.zeros(self.p)
            e1[0] = 1.0
            return e1
        return np.asarray(self.v)


@dataclass(frozen=True)
class HaarDiagonal:
    """Sigma = U D U^T with U Haar orthogonal, D i.i.d. uniform on [1, b]."""

    p: int
    b: float
    seed: object = None

    def __post_init__(self):
        if int(self.p) < 1:
            raise ValidationError(f"dimension p must be >= 1, got {self.p}")
        if not float(self.b) >= 1.0:
            raise ValidationError(f"condition parameter b must be >= 1, got {self.b}")


CovarianceSpec = Union[Identity, Spiked, HaarDiagonal]


def haar_orthogonal(p: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a Haar-distributed p x p orthogonal matrix.

    QR of a standard Gaussian matrix, with Q's columns multiplied by the signs
    of R's diagonal; the sign correction is what makes Q Haar rather than
    merely orthogonal.
    """
    z = rng.standard_normal((p, p))
    q, r = np.linalg.qr(z)
    d = np.sign(np.diagonal(r))
    d = np.where(d == 0, 1.0, d)
    return q * d


def build_covariance(spec: CovarianceSpec, seed: SeedLike = None) -> SpdMatrix:
    """Realize a population covariance from its declarative description.

    HaarDiagonal draw order: the diagonal entries are drawn first, then the
    orthogonal frame. ``seed`` overrides a seed stored on ``spec``.
    """
    if isinstance(spec, Identity):
        return SpdMatrix(np.eye(spec.p))
    if isinstance(spec, Spiked):
        v = spec.unit_vector()
        sigma = np.eye(spec.p, dtype=v.dtype) + spec.theta * np.outer(v, v.conj())
        return SpdMatrix(sigma)
    if isinstance(spec, HaarDiagonal):
        rng = _rng(seed if seed is not None else spec.seed)
        d = rng.uniform(1.0, spec.b, spec.p)
        u = haar_orthogonal(spec.p, rng)
        return SpdMatrix((u * d) @ u.T)
    raise ValidationError(f"unknown covariance spec {type(spec).__name__}")


def _looks_identity(sigma: np.ndarray) -> bool:
    return sigma.shape[0] == sigma.shape[1] and np.array_equal(
        sigma, np.eye(sigma.shape[0], dtype=sigma.dtype)
    )


def sample_data(
    sigma,
    n: int,
    field_tag: str,
    seed: SeedLike,
    *,
    sigma_sqrt: np.ndarray = None,
) -> DataMatrix:
    """Draw X = sqrt(Sigma) Z with n i.i.d. standard Gaussian columns.

    Real field: Z has i.i.d. N(0,1) entries. Complex field: entries are
    (Z1 + i Z2)/sqrt(2) with the real and imaginary parts drawn as one
    stacked standard-normal array of shape (2, p, n), in that order.

    ``sigma_sqrt`` lets callers reuse a precomputed symmetric square root;
    when omitted it is derived from ``sigma`` (the identity is recognized and
    skipped entirely).
    """
    _check_field(field_tag)
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValidationError(f"sample count n must be a positive integer, got {n!r}")
    sig = as_array(sigma)
    if field_tag == REAL and np.iscomplexobj(sig):
        raise ValidationError("real-field sampling requires a real covariance")
    p = sig.shape[0]
    rng = _rng(seed)
    if field_tag == REAL:
        z = rng.standard_normal((p, n))
    else:
        parts = rng.standard_normal((2, p, n))
        z = (parts[0] + 1j * parts[1]) / np.sqrt(2.0)
    if sigma_sqrt is None and not _looks_identity(sig):
        sigma_sqrt = spd_sqrt(sig, what="covariance")
    x = z if sigma_sqrt is None else sigma_sqrt @ z
    return DataMatrix(x, field_tag)


@dataclass(frozen=True)
class Partition:
    """Disjoint, equal-size, contiguous column blocks covering 0..total."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple((int(a), int(b)) for a, b in self.blocks)
        if not blocks:
            raise ValidationError("partition needs at least one block")
        sizes = {b - a for a, b in blocks}
        if any(b <= a for a, b in blocks):
            raise ValidationError("partition blocks must be nonempty ranges")
        if len(sizes) != 1:
            raise ValidationError(f"partition blocks must have equal sizes, got {sorted(sizes)}")
        cursor = 0
        for a, b in blocks:
            if a != cursor:
                raise ValidationError("partition blocks must be disjoint and cover all columns")
            cursor = b
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def equal(cls, total: int, n_splits: int) -> "Partition":
        if n_splits < 1:
            raise ValidationError(f"number of splits must be >= 1, got {n_splits}")
        if total < 1 or total % n_splits != 0:
            raise ValidationError(
                f"total sample count {total} is not divisible into {n_splits} equal blocks"
            )
        size = total // n_splits
        return cls(tuple((i * size, (i + 1) * size) for i in range(n_splits)))

    @property
    def n_splits(self) -> int:
        return len(self.blocks)

    @property
    def block_size(self) -> int:
        a, b = self.blocks[0]
        return b - a

    @property
    def total(self) -> int:
        return self.blocks[-1][1]


def wishart(data: DataMatrix) -> SpdMatrix:
    """Sample covariance X X*/n of the full data matrix (mean known zero)."""
    x = data.entries
    return SpdMatrix(x @ x.conj().T / data.n)


def split_wisharts(data: DataMatrix, partition: Partition) -> list:
    """One Wishart per block, each normalized by its own block size.

    Raises NonInvertibleSplitError when blocks have fewer samples than
    dimensions, since every downstream use of a split requires invertible
    summands.
    """
    if partition.total != data.n:
        raise ValidationError(
            f"partition covers {partition.total} columns but data has {data.n}"
        )
    m = partition.block_size
    if m < data.p:
        raise NonInvertibleSplitError(
            f"non-invertible split: block size {m} < dimension {data.p}"
        )
    out = []
    for a, b in partition.blocks:
        xb = data.entries[:, a:b]
        out.append(SpdMatrix(xb @ xb.conj().T / m))
    return out
