"""Coefficient-space representation of real sine-series fields on the 2D torus.

A scalar field is stored as a truncated sine series

    w(x, y) = sum_k c_k sin(k1 x + k2 y),

with real amplitudes c_k over the half lattice {k1 > 0} u {k1 = 0, k2 > 0},
|k1|, |k2| <= N (max norm).  The equivalent complex-exponential coefficients
are a_k = -(i/2) c_k and a_{-k} = (i/2) c_k, so the reality condition and the
purely-imaginary condition hold identically by construction, and the zero mode
is absent.

Internally each field keeps the full odd array s of shape (2N+1, 2N+1) with
s[-k] = -s[k] exact; the half lattice is the canonical content.  All norms are
taken over the full exponential index set (both +-k): a sine amplitude c at
mode k contributes |c| to l^1, (|k1|+|k2|)|c| to l^1_1, and |c|/2 per
exponential entry to l^infty.

The advective nonlinearity u1 dx w + u2 dy w is evaluated as the truncated
Galerkin convolution: in signed amplitudes

    out_q = 1/2 * sum_{ka+kw=q} (kw1 * s_u1[ka] + kw2 * s_u2[ka]) * s_w[kw],

with both factors and the output restricted to the lattice.  The direct pair
summation (scipy.signal.convolve2d, method="direct") is the correctness
baseline; no fast-transform path is used.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.signal import convolve2d

SPLIT = "split"
EUCLIDEAN = "euclidean"

PART_R = "R"
PART_D = "D"

SYM_S = "S"
SYM_SPRIME = "SPRIME"


@dataclass(frozen=True)
class GridParams:
    """Truncation radius N, regularization order m, forcing amplitude lam."""

    N: int
    m: float
    lam: float
    variant: str = SPLIT

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if self.variant not in (SPLIT, EUCLIDEAN):
            raise ValueError(f"unknown laplacian variant {self.variant!r}")

    def with_lambda(self, lam: float) -> "GridParams":
        return GridParams(self.N, self.m, lam, self.variant)


@lru_cache(maxsize=None)
def _wavenumbers(N: int):
    k = np.arange(-N, N + 1)
    K1, K2 = np.meshgrid(k, k, indexing="ij")
    return K1, K2


@lru_cache(maxsize=None)
def _half_mask(N: int) -> np.ndarray:
    K1, K2 = _wavenumbers(N)
    return (K1 > 0) | ((K1 == 0) & (K2 > 0))


@lru_cache(maxsize=None)
def half_modes(N: int) -> tuple:
    """Canonical enumeration of the half lattice: k1=0 row first, then k1=1..N."""
    modes = [(0, k2) for k2 in range(1, N + 1)]
    for k1 in range(1, N + 1):
        modes.extend((k1, k2) for k2 in range(-N, N + 1))
    return tuple(modes)


def laplacian_symbol(params: GridParams) -> np.ndarray:
    """Eigenvalues of (-Delta)^m on the full lattice."""
    K1, K2 = _wavenumbers(params.N)
    if params.variant == SPLIT:
        ev = np.abs(K1, dtype=float) ** (2 * params.m) + np.abs(K2, dtype=float) ** (2 * params.m)
    else:
        ev = (K1.astype(float) ** 2 + K2.astype(float) ** 2) ** params.m
    return ev


class SineField:
    """Real sine-amplitude array over the full lattice with exact odd symmetry."""

    __slots__ = ("N", "s")

    def __init__(self, N: int, s: np.ndarray | None = None):
        self.N = int(N)
        size = 2 * self.N + 1
        if s is None:
            s = np.zeros((size, size))
        s = np.asarray(s, dtype=float)
        if s.shape != (size, size):
            raise ValueError(f"expected shape {(size, size)}, got {s.shape}")
        if not np.array_equal(s, -s[::-1, ::-1]):
            raise ValueError("coefficient array violates the odd symmetry s[-k] = -s[k]")
        self.s = s

    @classmethod
    def fold(cls, N: int, raw: np.ndarray) -> "SineField":
        """Canonicalize an arbitrary full array: keep the half lattice, mirror the rest."""
        mask = _half_mask(N)
        s = np.zeros_like(raw, dtype=float)
        s[mask] = raw[mask]
        s -= s[::-1, ::-1].copy()
        return cls(N, s)

    @classmethod
    def from_modes(cls, N: int, modes: dict) -> "SineField":
        f = cls(N)
        for (k1, k2), c in modes.items():
            f.set_coeff(k1, k2, c)
        return f

    def coeff(self, k1: int, k2: int) -> float:
        return self.s[k1 + self.N, k2 + self.N]

    def set_coeff(self, k1: int, k2: int, c: float) -> None:
        if max(abs(k1), abs(k2)) > self.N:
            raise ValueError(f"mode {(k1, k2)} outside lattice N={self.N}")
        if k1 == 0 and k2 == 0:
            raise ValueError("the zero mode is absent (zero mass)")
        self.s[k1 + self.N, k2 + self.N] = c
        self.s[-k1 + self.N, -k2 + self.N] = -c

    def copy(self) -> "SineField":
        return SineField(self.N, self.s.copy())

    def __add__(self, other: "SineField") -> "SineField":
        return SineField(self.N, self.s + other.s)

    def __sub__(self, other: "SineField") -> "SineField":
        return SineField(self.N, self.s - other.s)

    def __mul__(self, a: float) -> "SineField":
        return SineField(self.N, self.s * a)

    __rmul__ = __mul__

    def __neg__(self) -> "SineField":
        return SineField(self.N, -self.s)

    def exp_coeffs(self) -> np.ndarray:
        """Complex exponential coefficients a_k = -(i/2) s_k on the full lattice."""
        return -0.5j * self.s

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.s)))


@dataclass(frozen=True)
class VectorField:
    u1: SineField
    u2: SineField
    params: GridParams

    def __post_init__(self):
        if self.u1.N != self.params.N or self.u2.N != self.params.N:
            raise ValueError("components must share the lattice bound N of params")

    def copy(self) -> "VectorField":
        return VectorField(self.u1.copy(), self.u2.copy(), self.params)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.u1 + other.u1, self.u2 + other.u2, self.params)

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.u1 - other.u1, self.u2 - other.u2, self.params)

    def __mul__(self, a: float) -> "VectorField":
        return VectorField(self.u1 * a, self.u2 * a, self.params)

    __rmul__ = __mul__

    def with_params(self, params: GridParams) -> "VectorField":
        return VectorField(self.u1, self.u2, params)


def zero_field(params: GridParams) -> VectorField:
    return VectorField(SineField(params.N), SineField(params.N), params)


def make_force(params: GridParams) -> VectorField:
    """The forcing F = (sin y, sin x): unit sine amplitude at (0,1) and (1,0)."""
    u1 = SineField.from_modes(params.N, {(0, 1): 1.0})
    u2 = SineField.from_modes(params.N, {(1, 0): 1.0})
    return VectorField(u1, u2, params)


def dominant_part(params: GridParams) -> VectorField:
    """The dominant mode lam * (sin y, 0) around which solutions are built."""
    u1 = SineField.from_modes(params.N, {(0, 1): params.lam})
    return VectorField(u1, SineField(params.N), params)


# ---------------------------------------------------------------------------
# Galerkin nonlinearity


def _conv_lattice(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Full convolution sum_{k1+k2=q} f[k1] g[k2], projected back to |q| <= N."""
    n = (f.shape[0] - 1) // 2
    out = convolve2d(f, g, mode="full", boundary="fill", fillvalue=0.0)
    return out[n : 3 * n + 1, n : 3 * n + 1]


def advect(u: VectorField, w: SineField) -> SineField:
    """u1 dx w + u2 dy w, truncated to the lattice (direct pair summation)."""
    N = w.N
    K1, K2 = _wavenumbers(N)
    raw = 0.5 * (_conv_lattice(u.u1.s, K1 * w.s) + _conv_lattice(u.u2.s, K2 * w.s))
    return SineField.fold(N, raw)


def nonlinear_term(u: VectorField) -> VectorField:
    """The truncated Galerkin convolution (u . grad) u."""
    return VectorField(advect(u, u.u1), advect(u, u.u2), u.params)


def advect_raw(u: VectorField, w: SineField) -> np.ndarray:
    """Unfolded convolution output; exposes the round-off odd-symmetry defect."""
    N = w.N
    K1, K2 = _wavenumbers(N)
    return 0.5 * (_conv_lattice(u.u1.s, K1 * w.s) + _conv_lattice(u.u2.s, K2 * w.s))


# ---------------------------------------------------------------------------
# Symmetries


def apply_symmetry(u: VectorField, which: str) -> VectorField:
    """Apply S (swap components and x<->y) or S' (k1 -> -k1 with parity signs).

    The derivative-pair symmetry constraining (u1_x, u2_y) is not a coefficient
    map; it is exposed as the predicate sp_defect / sp_symmetric instead.
    """
    if which == SYM_S:
        return VectorField(
            SineField(u.params.N, u.u2.s.T.copy()),
            SineField(u.params.N, u.u1.s.T.copy()),
            u.params,
        )
    if which == SYM_SPRIME:
        K1, K2 = _wavenumbers(u.params.N)
        # -1 where k1, k2 share parity, +1 where parity is mixed
        sgn = np.where((K1 + K2) % 2 == 0, -1.0, 1.0)
        s1 = sgn * u.u1.s[::-1, :]
        s2 = -sgn * u.u2.s[::-1, :]
        return VectorField(SineField(u.params.N, s1), SineField(u.params.N, s2), u.params)
    raise ValueError(f"unknown symmetry {which!r}; use SYM_S or SYM_SPRIME")


def sp_defect(u: VectorField) -> float:
    """Max-abs violation of the derivative-pair relation u1_x = u2_y."""
    K1, K2 = _wavenumbers(u.params.N)
    return float(np.max(np.abs(K1 * u.u1.s - K2 * u.u2.s)))


def sp_symmetric(u: VectorField, tol: float = 1e-10) -> bool:
    scale = max(1.0, u.u1.max_abs(), u.u2.max_abs())
    return sp_defect(u) <= tol * scale


# ---------------------------------------------------------------------------
# Projections


def project_field(w: SineField, part: str) -> SineField:
    K1, _ = _wavenumbers(w.N)
    if part == PART_D:
        return SineField(w.N, np.where(K1 == 0, w.s, 0.0))
    if part == PART_R:
        return SineField(w.N, np.where(K1 != 0, w.s, 0.0))
    raise ValueError(f"unknown projection part {part!r}; use 'R' or 'D'")


def project(u: VectorField, part: str) -> VectorField:
    return VectorField(project_field(u.u1, part), project_field(u.u2, part), u.params)


# ---------------------------------------------------------------------------
# Norms (full exponential index set; |a_k| = |c_k| / 2 per entry)


def norm_l1(w: SineField) -> float:
    return 0.5 * float(np.sum(np.abs(w.s)))


def norm_l1_1(w: SineField) -> float:
    K1, K2 = _wavenumbers(w.N)
    return 0.5 * float(np.sum((np.abs(K1) + np.abs(K2)) * np.abs(w.s)))


def norm_linf(w: SineField) -> float:
    return 0.5 * float(np.max(np.abs(w.s)))


def norm_linf_p(w: SineField, p: float) -> float:
    K1, K2 = _wavenumbers(w.N)
    deg = (np.abs(K1) + np.abs(K2)).astype(float)
    # the zero mode is absent; keep its weight finite for negative p
    weight = np.where(deg > 0, deg, 1.0) ** float(p)
    return 0.5 * float(np.max(weight * np.abs(w.s)))


def norm_linf_2m(w: SineField, m: float) -> float:
    """sup over k of k^{2m} |a_{(0,k)}|; defined only for x-independent fields."""
    if norm_l1(project_field(w, PART_R)) != 0.0:
        raise ValueError("l^infty_2m norm applies only to x-independent fields (k1 = 0)")
    K1, K2 = _wavenumbers(w.N)
    return 0.5 * float(np.max(np.abs(K2, dtype=float) ** (2 * m) * np.abs(w.s)))


def norm(w: SineField, kind: str, p: float | None = None, m: float | None = None) -> float:
    kind = kind.lower()
    if kind == "l1":
        return norm_l1(w)
    if kind == "l1_1":
        return norm_l1_1(w)
    if kind == "linf":
        return norm_linf(w)
    if kind == "linf_p":
        if p is None:
            raise ValueError("linf_p requires p")
        return norm_linf_p(w, p)
    if kind == "linf_2m":
        if m is None:
            raise ValueError("linf_2m requires m")
        return norm_linf_2m(w, m)
    raise ValueError(f"unknown norm kind {kind!r}")


def vector_norm_l1(u: VectorField) -> float:
    return norm_l1(u.u1) + norm_l1(u.u2)


def vector_norm_l1_1(u: VectorField) -> float:
    return norm_l1_1(u.u1) + norm_l1_1(u.u2)


def vector_norm_linf(u: VectorField) -> float:
    return max(norm_linf(u.u1), norm_linf(u.u2))


# ---------------------------------------------------------------------------
# H^l block bookkeeping


def block_split(w: SineField) -> list:
    """Per-l coefficient vectors of sin(lx + jy) amplitudes.

    Block 0 is (c_{(0,1)}, ..., c_{(0,N)}).  Block l >= 1 carries the full
    content of the invariant subspace: first the amplitudes for j = 0..N, then
    j = -1..-N, so that split/assemble is a bijection on sine fields.
    """
    N = w.N
    blocks = [w.s[N, N + 1 :].copy()]
    for l in range(1, N + 1):
        row = w.s[N + l]
        blocks.append(np.concatenate([row[N:], row[N - 1 :: -1]]))
    return blocks


def block_assemble(blocks: list, N: int) -> SineField:
    if len(blocks) != N + 1:
        raise ValueError(f"expected {N + 1} blocks, got {len(blocks)}")
    out = SineField(N)
    s = out.s
    b0 = np.asarray(blocks[0], dtype=float)
    if b0.shape != (N,):
        raise ValueError(f"block 0 must have length {N}")
    s[N, N + 1 :] = b0
    s[N, :N] = -b0[::-1]
    for l in range(1, N + 1):
        bl = np.asarray(blocks[l], dtype=float)
        if bl.shape != (2 * N + 1,):
            raise ValueError(f"block {l} must have length {2 * N + 1}")
        s[N + l, N:] = bl[: N + 1]
        s[N + l, N - 1 :: -1] = bl[N + 1 :]
        s[N - l, :] = -s[N + l, ::-1]
    return SineField(N, s)


# ---------------------------------------------------------------------------
# Serialization


def vectorfield_to_dict(u: VectorField) -> dict:
    p = u.params
    modes = []
    for k1, k2 in half_modes(p.N):
        c1 = u.u1.coeff(k1, k2)
        c2 = u.u2.coeff(k1, k2)
        if c1 != 0.0 or c2 != 0.0:
            modes.append({"k1": k1, "k2": k2, "c1": c1, "c2": c2})
    return {
        "header": {"N": p.N, "m": p.m, "lambda": p.lam, "variant": p.variant},
        "modes": modes,
    }


def vectorfield_from_dict(d: dict) -> VectorField:
    h = d["header"]
    params = GridParams(h["N"], h["m"], h["lambda"], h.get("variant", SPLIT))
    u1 = SineField(params.N)
    u2 = SineField(params.N)
    for rec in d["modes"]:
        u1.set_coeff(rec["k1"], rec["k2"], rec["c1"])
        u2.set_coeff(rec["k1"], rec["k2"], rec["c2"])
    return VectorField(u1, u2, params)


def save_vectorfield(u: VectorField, path, metadata: dict | None = None) -> None:
    d = vectorfield_to_dict(u)
    if metadata:
        d["metadata"] = metadata
    with open(path, "w") as fh:
        json.dump(d, fh, sort_keys=True)


def load_vectorfield(path) -> VectorField:
    with open(path) as fh:
        return vectorfield_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# Test / verification helpers


def random_field(N: int, rng: np.random.Generator, scale: float = 1.0) -> SineField:
    size = 2 * N + 1
    return SineField.fold(N, rng.standard_normal((size, size)) * scale)


def random_vector_field(params: GridParams, rng: np.random.Generator, scale: float = 1.0) -> VectorField:
    return VectorField(
        random_field(params.N, rng, scale), random_field(params.N, rng, scale), params
    )
