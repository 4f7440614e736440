"""Binary-symplectic Pauli algebra, observables and density states.

Pauli operators on n qubits are labelled by a pair of n-bit integers (z, x),
bit i of each referring to qubit i.  Per qubit the bit pair (z_i, x_i) means

    (0,0) -> I,  (0,1) -> X,  (1,1) -> Y,  (1,0) -> Z,

and the Hermitian operator attached to a label is

    sigma(z, x) = i^{|z & x|} X(x) Z(z),

with X(x) = prod_i X_i^{x_i} and Z(z) = prod_i Z_i^{z_i}.  Qubit 0 is the
leftmost tensor factor; the flat basis index of a label is the base-4 number
with digits 2*z_i + x_i, qubit 0 most significant, so index order matches
``np.kron`` over per-qubit blocks.

Observables are stored as real coefficients against the *unnormalized*
sigma_a; normalized operators sigma_a/sqrt(d) only appear inside inner
products, via :meth:`PauliObservable.pauli_vec`.
"""

from __future__ import annotations

import cmath
import json
from dataclasses import dataclass, field

import numpy as np

# Dense reconstruction is a desk-scale verification tool, not a simulator.
DENSE_MAX_QUBITS = 10

_PAULI_1Q = {
    (0, 0): np.eye(2, dtype=complex),
    (0, 1): np.array([[0, 1], [1, 0]], dtype=complex),
    (1, 1): np.array([[0, -1j], [1j, 0]], dtype=complex),
    (1, 0): np.array([[1, 0], [0, -1]], dtype=complex),
}

_CHAR_FOR_BITS = {(0, 0): "I", (0, 1): "X", (1, 1): "Y", (1, 0): "Z"}
_BITS_FOR_CHAR = {"I": (0, 0), "X": (0, 1), "Y": (1, 1), "Z": (1, 0), "1": (0, 0), "\U0001d7d9": (0, 0)}


@dataclass(frozen=True)
class PauliLabel:
    """A point of F_2^{2n} indexing a Pauli string."""

    z: int
    x: int
    n: int

    def __post_init__(self):
        mask = (1 << self.n) - 1
        if self.z & ~mask or self.x & ~mask:
            raise ValueError("label bits exceed qubit count")

    def __xor__(self, other: "PauliLabel") -> "PauliLabel":
        _check_same_n(self, other)
        return PauliLabel(self.z ^ other.z, self.x ^ other.x, self.n)

    @property
    def is_identity(self) -> bool:
        return self.z == 0 and self.x == 0

    @property
    def is_diagonal(self) -> bool:
        """True for Z-type strings, the ones with computational-basis support."""
        return self.x == 0

    def support(self):
        return tuple(i for i in range(self.n) if (self.z >> i | self.x >> i) & 1)

    @property
    def weight(self) -> int:
        return (self.z | self.x).bit_count()

    @property
    def index(self) -> int:
        idx = 0
        for i in range(self.n):
            idx = 4 * idx + 2 * ((self.z >> i) & 1) + ((self.x >> i) & 1)
        return idx

    @classmethod
    def from_index(cls, idx: int, n: int) -> "PauliLabel":
        z = x = 0
        for i in reversed(range(n)):
            digit = idx % 4
            idx //= 4
            z |= (digit >> 1) << i
            x |= (digit & 1) << i
        return cls(z, x, n)

    @classmethod
    def from_string(cls, s: str) -> "PauliLabel":
        z = x = 0
        for i, ch in enumerate(s):
            try:
                zb, xb = _BITS_FOR_CHAR[ch.upper()]
            except KeyError:
                raise ValueError(f"unknown Pauli character {ch!r}") from None
            z |= zb << i
            x |= xb << i
        return cls(z, x, len(s))

    def to_string(self) -> str:
        return "".join(_CHAR_FOR_BITS[((self.z >> i) & 1, (self.x >> i) & 1)] for i in range(self.n))

    def __str__(self):
        return self.to_string()


def _check_same_n(a: PauliLabel, b: PauliLabel):
    if a.n != b.n:
        raise ValueError(f"qubit count mismatch: {a.n} vs {b.n}")


def identity_label(n: int) -> PauliLabel:
    return PauliLabel(0, 0, n)


def all_labels(n: int):
    """All 4^n labels in basis-index order."""
    return [PauliLabel.from_index(i, n) for i in range(4**n)]


def commutes(a: PauliLabel, b: PauliLabel) -> int:
    """Symplectic form [a,b]: 0 iff sigma_a and sigma_b commute."""
    _check_same_n(a, b)
    return ((a.z & b.x).bit_count() + (a.x & b.z).bit_count()) & 1


def label_product(a: PauliLabel, b: PauliLabel):
    """sigma_a sigma_b = i^e sigma_{a^b}; returns (a^b, e mod 4)."""
    _check_same_n(a, b)
    z, x = a.z ^ b.z, a.x ^ b.x
    e = (
        (a.z & a.x).bit_count()
        + (b.z & b.x).bit_count()
        + 2 * (a.z & b.x).bit_count()
        - (z & x).bit_count()
    )
    return PauliLabel(z, x, a.n), e % 4


def pauli_product_sign(a: PauliLabel, b: PauliLabel) -> int:
    """beta(a,b) with sigma_a sigma_b = (-1)^beta sigma_{a^b}; requires [a,b]=0."""
    if commutes(a, b):
        raise ValueError("product sign is only defined for commuting Paulis")
    _, e = label_product(a, b)
    return e // 2


def dense_pauli(a: PauliLabel) -> np.ndarray:
    if a.n > DENSE_MAX_QUBITS:
        raise ValueError(f"dense Pauli limited to {DENSE_MAX_QUBITS} qubits")
    out = np.array([[1.0 + 0j]])
    for i in range(a.n):
        out = np.kron(out, _PAULI_1Q[((a.z >> i) & 1, (a.x >> i) & 1)])
    return out


def pauli_trace(mat: np.ndarray, a: PauliLabel) -> complex:
    """Tr(sigma_a @ mat) without materializing sigma_a.

    sigma(z,x)|c> = i^{|z&x|} (-1)^{z.c} |c^x>, so the trace touches one
    entry of ``mat`` per column.
    """
    d = 1 << a.n
    cols = np.arange(d)
    # bit i of the label addresses qubit i = tensor position i from the left,
    # i.e. basis-state bit (n-1-i); remap once.
    zr = _reverse_bits(a.z, a.n)
    xr = _reverse_bits(a.x, a.n)
    signs = 1 - 2 * (_parity_lookup(cols & zr))
    return (1j ** (a.z & a.x).bit_count()) * np.sum(signs * mat[cols, cols ^ xr])


def _reverse_bits(v: int, n: int) -> int:
    out = 0
    for i in range(n):
        out |= ((v >> i) & 1) << (n - 1 - i)
    return out


def _parity_lookup(arr: np.ndarray) -> np.ndarray:
    v = arr.copy()
    out = np.zeros_like(v)
    while v.any():
        out ^= v & 1
        v >>= 1
    return out


@dataclass
class PauliObservable:
    """Hermitian operator O = sum_a c_a sigma_a with real sparse coefficients."""

    n: int
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {}
        for label, c in self.coeffs.items():
            if label.n != self.n:
                raise ValueError("coefficient label has wrong qubit count")
            if c != 0.0:
                cleaned[label] = float(c)
        self.coeffs = cleaned

    @classmethod
    def from_terms(cls, n: int, terms) -> "PauliObservable":
        coeffs = {}
        for label, c in terms:
            if isinstance(label, str):
                label = PauliLabel.from_string(label)
            coeffs[label] = coeffs.get(label, 0.0) + c
        return cls(n, coeffs)

    @classmethod
    def single(cls, label: PauliLabel, coeff: float = 1.0) -> "PauliObservable":
        return cls(label.n, {label: coeff})

    @classmethod
    def from_dense(cls, mat: np.ndarray, tol: float = 1e-12) -> "PauliObservable":
        d = mat.shape[0]
        n = d.bit_length() - 1
        if 1 << n != d or mat.shape != (d, d):
            raise ValueError("matrix must be 2^n x 2^n")
        if np.max(np.abs(mat - mat.conj().T)) > 1e-10:
            raise ValueError("observable must be Hermitian")
        coeffs = {}
        for a in all_labels(n):
            c = pauli_trace(mat, a) / d
            if abs(c.imag) > 1e-10:
                raise ValueError("non-real Pauli coefficient")
            if abs(c.real) > tol:
                coeffs[a] = c.real
        return cls(n, coeffs)

    def to_dense(self) -> np.ndarray:
        if self.n > DENSE_MAX_QUBITS:
            raise ValueError(f"dense reconstruction limited to {DENSE_MAX_QUBITS} qubits")
        d = 1 << self.n
        out = np.zeros((d, d), dtype=complex)
        for label, c in self.coeffs.items():
            out += c * dense_pauli(label)
        return out

    def coeff(self, label: PauliLabel) -> float:
        return self.coeffs.get(label, 0.0)

    @property
    def trace(self) -> float:
        return (1 << self.n) * self.coeff(identity_label(self.n))

    def traceless_part(self) -> "PauliObservable":
        coeffs = {a: c for a, c in self.coeffs.items() if not a.is_identity}
        return PauliObservable(self.n, coeffs)

    def stabilizer_norm(self) -> float:
        """D(O) = (1/d) sum_a |(sigma_a|O)| = sum_a |c_a|."""
        return float(sum(abs(c) for c in self.coeffs.values()))

    def hs_norm(self) -> float:
        """||O||_2 = sqrt(d sum_a c_a^2)."""
        d = 1 << self.n
        return float(np.sqrt(d * sum(c * c for c in self.coeffs.values())))

    def spectral_norm(self) -> float:
        if self.n > DENSE_MAX_QUBITS:
            raise ValueError(f"spectral norm needs a dense eigensolve; limited to {DENSE_MAX_QUBITS} qubits")
        if not self.coeffs:
            return 0.0
        return float(np.max(np.abs(np.linalg.eigvalsh(self.to_dense()))))

    def pauli_vec(self) -> np.ndarray:
        """Vector of (sigma_hat_a | O) = sqrt(d) c_a over the 4^n basis indices."""
        sd = np.sqrt(1 << self.n)
        v = np.zeros(4**self.n)
        for label, c in self.coeffs.items():
            v[label.index] = sd * c
        return v

    def expectation(self, state: "DensityState") -> float:
        if state.n != self.n:
            raise ValueError("qubit count mismatch")
        r = state.pauli_vec()
        sd = np.sqrt(1 << self.n)
        return float(sum(c * sd * r[label.index] for label, c in self.coeffs.items()))

    def tensor(self, other: "PauliObservable") -> "PauliObservable":
        coeffs = {}
        for la, ca in self.coeffs.items():
            for lb, cb in other.coeffs.items():
                lab = PauliLabel(la.z | (lb.z << self.n), la.x | (lb.x << self.n), self.n + other.n)
                coeffs[lab] = ca * cb
        return PauliObservable(self.n + other.n, coeffs)

    def scaled(self, factor: float) -> "PauliObservable":
        return PauliObservable(self.n, {a: factor * c for a, c in self.coeffs.items()})

    def __add__(self, other: "PauliObservable") -> "PauliObservable":
        if other.n != self.n:
            raise ValueError("qubit count mismatch")
        coeffs = dict(self.coeffs)
        for a, c in other.coeffs.items():
            coeffs[a] = coeffs.get(a, 0.0) + c
        return PauliObservable(self.n, coeffs)

    def to_json(self) -> str:
        entries = [{"label": a.to_string(), "value": c} for a, c in sorted(self.coeffs.items(), key=lambda kv: kv[0].index)]
        return json.dumps({"n": self.n, "coeffs": entries})

    @classmethod
    def from_json(cls, text: str) -> "PauliObservable":
        data = json.loads(text)
        terms = [(e["label"], float(e["value"])) for e in data["coeffs"]]
        return cls.from_terms(int(data["n"]), terms)


class ProductObservable:
    """Tensor product of single-qubit observables, usable at large n."""

    def __init__(self, factors):
        self.factors = [f if isinstance(f, PauliObservable) else PauliObservable.from_dense(f) for f in factors]
        if any(f.n != 1 for f in self.factors):
            raise ValueError("factors must be single-qubit observables")
        self.n = len(self.factors)

    def to_observable(self) -> PauliObservable:
        out = self.factors[0]
        for f in self.factors[1:]:
            out = out.tensor(f)
        return out

    def stabilizer_norm(self) -> float:
        out = 1.0
        for f in self.factors:
            out *= f.stabilizer_norm()
        return out

    def expectation(self, state: "DensityState") -> float:
        if state.factors is None:
            return self.to_observable().expectation(state)
        out = 1.0
        for f, rho in zip(self.factors, state.factors):
            out *= f.expectation(DensityState.from_dense(rho))
        return out


class DensityState:
    """Density operator, dense for n <= 10 with optional per-qubit factorization."""

    def __init__(self, matrix=None, factors=None, validate=True):
        if matrix is None and factors is None:
            raise ValueError("need a dense matrix or product factors")
        self.factors = [np.asarray(f, dtype=complex) for f in factors] if factors is not None else None
        if matrix is None and self.factors is not None and len(self.factors) <= DENSE_MAX_QUBITS:
            matrix = self.factors[0]
            for f in self.factors[1:]:
                matrix = np.kron(matrix, f)
        self.matrix = np.asarray(matrix, dtype=complex) if matrix is not None else None
        if self.matrix is not None:
            d = self.matrix.shape[0]
            self.n = d.bit_length() - 1
        else:
            self.n = len(self.factors)
        if validate:
            self._validate()

    def _validate(self):
        mats = self.factors if self.factors is not None else [self.matrix]
        for m in mats:
            if abs(np.trace(m) - 1.0) > 1e-12:
                raise ValueError("state trace must be 1")
            if np.max(np.abs(m - m.conj().T)) > 1e-10:
                raise ValueError("state must be Hermitian")
            if np.min(np.linalg.eigvalsh(m)) < -1e-10:
                raise ValueError("state must be positive semidefinite")

    @classmethod
    def from_dense(cls, matrix, validate=True) -> "DensityState":
        return cls(matrix=matrix, validate=validate)

    @classmethod
    def from_ket(cls, ket) -> "DensityState":
        v = np.asarray(ket, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(matrix=np.outer(v, v.conj()))

    @classmethod
    def from_factors(cls, factors, validate=True) -> "DensityState":
        return cls(factors=factors, validate=validate)

    @classmethod
    def computational_zero(cls, n: int) -> "DensityState":
        f = np.array([[1, 0], [0, 0]], dtype=complex)
        return cls(factors=[f] * n)

    def pauli_vec(self) -> np.ndarray:
        """Vector r_a = (sigma_hat_a | rho)."""
        if self.factors is not None:
            out = np.array([1.0])
            for f in self.factors:
                out = np.kron(out, _pauli_vec_dense(f, 1))
            return out
        return _pauli_vec_dense(self.matrix, self.n)

    def expectation_of(self, obs: PauliObservable) -> float:
        return obs.expectation(self)

    def to_json(self) -> str:
        m = self.matrix
        if m is None:
            raise ValueError("dense matrix unavailable at this size")
        flat = [[float(v.real), float(v.imag)] for v in m.reshape(-1)]
        return json.dumps({"n": self.n, "matrix": flat})

    @classmethod
    def from_json(cls, text: str) -> "DensityState":
        data = json.loads(text)
        n = int(data["n"])
        d = 1 << n
        flat = np.array([complex(re, im) for re, im in data["matrix"]])
        return cls(matrix=flat.reshape(d, d))


def _pauli_vec_dense(mat: np.ndarray, n: int) -> np.ndarray:
    d = 1 << n
    sd = np.sqrt(d)
    v = np.zeros(4**n)
    for a in all_labels(n):
        c = pauli_trace(mat, a)
        v[a.index] = c.real / sd
    return v


def _validate_sign_tables():
    """Exhaustive single-qubit check of the product-phase bookkeeping."""
    labels = all_labels(1)
    for a in labels:
        for b in labels:
            res, e = label_product(a, b)
            lhs = dense_pauli(a) @ dense_pauli(b)
            rhs = (1j**e) * dense_pauli(res)
            if np.max(np.abs(lhs - rhs)) > 1e-12:
                raise AssertionError(f"Pauli product phase table broken at {a}, {b}")


_validate_sign_tables()
