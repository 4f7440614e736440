"""Quantum channels in the real Pauli transfer representation, plus the
noise models exercised by the frame analysis.

A channel Phi is stored as the d^2 x d^2 real matrix with entries
(sigma_hat_a | Phi | sigma_hat_b) over normalized Paulis, rows and columns in
label-index order.  Clifford conjugations are signed permutations in this
basis and are applied by index gather, never by dense matmul against a
tableau.

Diamond distances follow the convention without the 1/2 factor, so that the
distance between two Pauli channels is the plain l1 distance of their error
probability vectors.
"""

from __future__ import annotations

import functools
import warnings

import numpy as np

from .errors import ModelError
from .paulis import PauliLabel, all_labels, commutes, dense_pauli, pauli_trace
from .cliffords import CliffordElement, pauli_basis_tableaus, rotation_unitary, tableau_from_unitary

PTM_DENSE_MAX = 6  # d^2 x d^2 matrices; 4^6 = 4096 rows is already generous


@functools.lru_cache(maxsize=None)
def _label_cache(n):
    return tuple(all_labels(n))


def dense_to_pauli_vec(mat: np.ndarray, n: int) -> np.ndarray:
    d = 1 << n
    sd = np.sqrt(d)
    out = np.empty(4**n)
    for a in _label_cache(n):
        c = pauli_trace(mat, a)
        out[a.index] = c.real / sd
    return out


def pauli_vec_to_dense(vec: np.ndarray, n: int) -> np.ndarray:
    d = 1 << n
    sd = np.sqrt(d)
    out = np.zeros((d, d), dtype=complex)
    for a in _label_cache(n):
        c = vec[a.index]
        if c != 0.0:
            out += (c / sd) * dense_pauli(a)
    return out


@functools.lru_cache(maxsize=None)
def symplectic_sign_matrix(n):
    """W[a,b] = (-1)^{[a,b]}, the transform between Pauli probs and eigenvalues."""
    labels = _label_cache(n)
    w = np.empty((4**n, 4**n))
    for a in labels:
        for b in labels:
            w[a.index, b.index] = -1.0 if commutes(a, b) else 1.0
    return w


class TransferChannel:
    """A channel (or difference of channels) as a PTM over normalized Paulis."""

    def __init__(self, n: int, matrix: np.ndarray, kraus=None):
        self.n = n
        self.matrix = np.asarray(matrix, dtype=float)
        if self.matrix.shape != (4**n, 4**n):
            raise ValueError("PTM has wrong shape")
        self.kraus = None if kraus is None else tuple(np.asarray(k, dtype=complex) for k in kraus)

    @classmethod
    def identity(cls, n: int) -> "TransferChannel":
        return cls(n, np.eye(4**n), kraus=(np.eye(1 << n),))

    @classmethod
    def from_kraus(cls, kraus, n=None) -> "TransferChannel":
        kraus = [np.asarray(k, dtype=complex) for k in kraus]
        d = kraus[0].shape[0]
        n = d.bit_length() - 1 if n is None else n
        if n > PTM_DENSE_MAX:
            raise ValueError("dense PTM construction capped at small n")
        labels = _label_cache(n)
        mat = np.empty((4**n, 4**n))
        for b in labels:
            sig = dense_pauli(b) / np.sqrt(d)
            out = np.zeros((d, d), dtype=complex)
            for k in kraus:
                out += k @ sig @ k.conj().T
            mat[:, b.index] = dense_to_pauli_vec(out, n)
        return cls(n, mat, kraus=kraus)

    @classmethod
    def from_unitary(cls, u: np.ndarray) -> "TransferChannel":
        u = np.asarray(u, dtype=complex)
        d = u.shape[0]
        if np.max(np.abs(u.conj().T @ u - np.eye(d))) > 1e-10:
            raise ModelError("matrix is not unitary")
        return cls.from_kraus([u])

    @classmethod
    def from_clifford(cls, g: CliffordElement) -> "TransferChannel":
        """omega(g) as a signed permutation PTM."""
        n = g.n
        mat = np.zeros((4**n, 4**n))
        for b in _label_cache(n):
            img, phi = g.act(b)
            mat[img.index, b.index] = -1.0 if phi else 1.0
        return cls(n, mat)

    def compose(self, other: "TransferChannel") -> "TransferChannel":
        """self after other."""
        if self.n != other.n:
            raise ValueError("qubit count mismatch")
        return TransferChannel(self.n, self.matrix @ other.matrix)

    def __matmul__(self, other):
        return self.compose(other)

    def apply_vec(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec

    def apply_dense(self, rho: np.ndarray) -> np.ndarray:
        return pauli_vec_to_dense(self.matrix @ dense_to_pauli_vec(rho, self.n), self.n)

    def tensor(self, other: "TransferChannel") -> "TransferChannel":
        return TransferChannel(self.n + other.n, np.kron(self.matrix, other.matrix))

    def is_trace_preserving(self, tol=1e-10) -> bool:
        row = np.zeros(4**self.n)
        row[0] = 1.0
        return bool(np.max(np.abs(self.matrix[0] - row)) <= tol)

    def is_unital(self, tol=1e-10) -> bool:
        col = np.zeros(4**self.n)
        col[0] = 1.0
        return bool(np.max(np.abs(self.matrix[:, 0] - col)) <= tol)

    def is_pauli_diagonal(self, tol=1e-10) -> bool:
        return bool(np.max(np.abs(self.matrix - np.diag(np.diag(self.matrix)))) <= tol)

    def is_orthogonal(self, tol=1e-8) -> bool:
        return bool(np.max(np.abs(self.matrix.T @ self.matrix - np.eye(4**self.n))) <= tol)

    def to_json_dict(self):
        return {"n": self.n, "ptm": [float(v) for v in self.matrix.reshape(-1)]}

    @classmethod
    def from_json_dict(cls, data) -> "TransferChannel":
        if "pauli_probs" in data:
            return PauliChannel.from_probs(np.asarray(data["pauli_probs"], dtype=float)).to_transfer()
        n = int(data["n"])
        mat = np.asarray(data["ptm"], dtype=float).reshape(4**n, 4**n)
        return cls(n, mat)


class PauliChannel:
    """Channel rho -> sum_b p_b sigma_b rho sigma_b, diagonal in the Pauli basis."""

    def __init__(self, probs: np.ndarray, eigenvalues: np.ndarray):
        self.probs = np.asarray(probs, dtype=float)
        self.eigenvalues = np.asarray(eigenvalues, dtype=float)
        self.n = (self.probs.size.bit_length() - 1) // 2

    @classmethod
    def from_probs(cls, probs) -> "PauliChannel":
        probs = np.asarray(probs, dtype=float)
        if np.any(probs < -1e-12) or abs(probs.sum() - 1.0) > 1e-10:
            raise ModelError("Pauli error probabilities must be a distribution")
        n = (probs.size.bit_length() - 1) // 2
        return cls(probs, symplectic_sign_matrix(n) @ probs)

    @classmethod
    def from_eigenvalues(cls, lams, require_cp=True, clip_cp=False) -> "PauliChannel":
        lams = np.asarray(lams, dtype=float)
        n = (lams.size.bit_length() - 1) // 2
        if abs(lams[0] - 1.0) > 1e-10:
            raise ModelError("lambda_0 must be 1 for a trace-preserving Pauli channel")
        probs = symplectic_sign_matrix(n) @ lams / lams.size
        if np.min(probs) < -1e-10:
            if clip_cp:
                warnings.warn("clipping negative Pauli probabilities to restore CP", stacklevel=2)
                probs = np.clip(probs, 0.0, None)
                probs = probs / probs.sum()
                lams = symplectic_sign_matrix(n) @ probs
            elif require_cp:
                raise ModelError("eigenvalues define a non-CP map")
        return cls(probs, lams)

    def to_transfer(self) -> "TransferChannel":
        return TransferChannel(self.n, np.diag(self.eigenvalues))

    def tensor(self, other: "PauliChannel") -> "PauliChannel":
        # index order: qubit 0 most significant, matching label indices
        return PauliChannel(np.kron(self.probs, other.probs), np.kron(self.eigenvalues, other.eigenvalues))


def pauli_eigenvalues(probs) -> np.ndarray:
    """lambda_a = sum_b (-1)^{[a,b]} p_b."""
    return PauliChannel.from_probs(probs).eigenvalues


def pauli_probs(lams, require_cp=True, clip_cp=False) -> np.ndarray:
    """Inverse transform; flags non-CP inputs unless clipping is requested."""
    return PauliChannel.from_eigenvalues(lams, require_cp=require_cp, clip_cp=clip_cp).probs


def pauli_twirl(channel: TransferChannel) -> PauliChannel:
    """Average over Pauli conjugations; keeps exactly the PTM diagonal."""
    if not channel.is_trace_preserving(1e-8):
        raise ModelError("twirl expects a trace-preserving channel")
    lams = np.diag(channel.matrix).copy()
    lams[0] = 1.0
    probs = symplectic_sign_matrix(channel.n) @ lams / lams.size
    if np.min(probs) < -1e-9:
        raise ModelError("twirl of a non-CP map")
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    return PauliChannel(probs, lams)


# -- distances ---------------------------------------------------------------

def pauli_diamond_distance(a: PauliChannel, b: PauliChannel) -> float:
    """Diamond distance of Pauli channels: sum_b |p_b - p'_b|."""
    return float(np.sum(np.abs(a.probs - b.probs)))


def unitary_diamond_distance_to_identity(u: np.ndarray) -> float:
    """Exact diamond distance between a unitary channel and the identity.

    Equals 2 sin(Theta/2) where Theta is the angular spread of the
    eigenphases of u (capped at 2 when the spread exceeds pi).
    """
    phases = np.sort(np.angle(np.linalg.eigvals(u)))
    return _spread_distance(phases)


def _spread_distance(phases: np.ndarray) -> float:
    phases = np.sort(np.mod(phases, 2 * np.pi))
    gaps = np.diff(np.concatenate([phases, [phases[0] + 2 * np.pi]]))
    spread = 2 * np.pi - np.max(gaps)
    if spread >= np.pi:
        return 2.0
    return float(2 * np.sin(spread / 2))


def surrogate_row_distance(a: TransferChannel, b: TransferChannel = None) -> float:
    """max_a || (sigma_hat_a| (Phi - Phi') ||_1, a documented bias-bound surrogate.

    Not the diamond distance itself, but every Theorem-style bias bound that
    consumes a diamond distance remains valid with this row norm in its
    place.
    """
    diff = a.matrix - (b.matrix if b is not None else np.eye(a.matrix.shape[0]))
    return float(np.max(np.sum(np.abs(diff), axis=1)))


def distance_to_identity(channel: TransferChannel):
    """(distance, kind); analytic for Pauli and unitary channels, else surrogate."""
    if channel.is_pauli_diagonal():
        lams = np.diag(channel.matrix)
        probs = pauli_probs(lams, require_cp=False)
        ident = np.zeros_like(probs)
        ident[0] = 1.0
        return float(np.sum(np.abs(probs - ident))), "pauli-exact"
    if channel.kraus is not None and len(channel.kraus) == 1:
        return unitary_diamond_distance_to_identity(channel.kraus[0]), "unitary-exact"
    if channel.is_orthogonal():
        # eigenphases of the PTM are the pairwise differences of the unitary's
        # eigenphases; their spread equals the unitary spread when < pi
        phases = np.angle(np.linalg.eigvals(channel.matrix))
        spread = float(np.max(np.abs(phases)))
        if spread < np.pi - 1e-9:
            return float(2 * np.sin(spread / 2)), "unitary-exact"
    return surrogate_row_distance(channel), "surrogate"


# -- random channels ---------------------------------------------------------

def random_cptp_channel(n: int, rng, env_dim=None) -> TransferChannel:
    """Haar-random CPTP channel via a random Stinespring isometry."""
    d = 1 << n
    k = env_dim or d
    gauss = rng.normal(size=(d * k, d)) + 1j * rng.normal(size=(d * k, d))
    q, r = np.linalg.qr(gauss)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    kraus = [q[i * d:(i + 1) * d, :] for i in range(k)]
    return TransferChannel.from_kraus(kraus, n=n)


def random_pauli_channel(n: int, rng, strength=0.2) -> PauliChannel:
    raw = rng.random(4**n)
    raw = strength * raw / raw.sum()
    raw[0] += 1.0 - raw.sum()
    return PauliChannel.from_probs(raw)


# -- noise models ------------------------------------------------------------

class NoiseModel:
    """Assignment of a right-noise channel Lambda(g) to each gate."""

    locality = "global"

    def __init__(self, n: int):
        self.n = n

    def channel(self, gate: CliffordElement) -> TransferChannel:
        raise NotImplementedError

    def describe(self) -> str:
        return type(self).__name__


class NoiselessModel(NoiseModel):
    def __init__(self, n):
        super().__init__(n)
        self._id = TransferChannel.identity(n)

    def channel(self, gate):
        return self._id


class GateIndependentRightModel(NoiseModel):
    """Lambda(g) = Lambda for all g."""

    def __init__(self, channel: TransferChannel, name="gate-independent-right"):
        super().__init__(channel.n)
        self._channel = channel
        self._name = name

    def channel(self, gate):
        return self._channel

    def describe(self):
        return self._name


class GateIndependentLeftModel(NoiseModel):
    """Left noise Lambda omega(g) rewritten as right noise omega(g)^dagger Lambda omega(g)."""

    def __init__(self, channel: TransferChannel):
        super().__init__(channel.n)
        self._lambda = channel

    def channel(self, gate):
        perm, signs = _clifford_index_action(gate)
        # R(g)^T L R(g) by gather: element (p,q) -> s_p s_q L[perm_p, perm_q]
        mat = self._lambda.matrix[np.ix_(perm, perm)] * np.outer(signs, signs)
        return TransferChannel(self.n, mat)


@functools.lru_cache(maxsize=32768)
def _clifford_index_action_cached(key_hex):
    g = CliffordElement.from_key_hex(key_hex)
    perm = np.empty(4**g.n, dtype=np.int64)
    signs = np.empty(4**g.n)
    for b in _label_cache(g.n):
        img, phi = g.act(b)
        perm[b.index] = img.index
        signs[b.index] = -1.0 if phi else 1.0
    return perm, signs


def _clifford_index_action(g: CliffordElement):
    """Index permutation and signs of PTM(omega(g)): row Xi(b) of column b."""
    return _clifford_index_action_cached(g.key_hex())


def apply_clifford_to_vec(g: CliffordElement, vec: np.ndarray) -> np.ndarray:
    """PTM(omega(g)) @ vec without building the matrix."""
    perm, signs = _clifford_index_action(g)
    out = np.zeros_like(vec)
    out[perm] = signs * vec
    return out


class GateTableModel(NoiseModel):
    """Explicit per-gate channel table for enumerated ensembles."""

    def __init__(self, n, table, name="table"):
        super().__init__(n)
        self._table = dict(table)
        self._name = name

    def channel(self, gate):
        try:
            return self._table[gate]
        except KeyError:
            raise ModelError("no channel assigned to this gate") from None

    def describe(self):
        return self._name


class RuleModel(NoiseModel):
    def __init__(self, n, fn, name="rule"):
        super().__init__(n)
        self._fn = fn
        self._name = name

    def channel(self, gate):
        return self._fn(gate)

    def describe(self):
        return self._name


class MixedModel(NoiseModel):
    """phi_eps(g) = (1-eps) omega(g) + eps omega(g) Lambda(g), as right noise."""

    def __init__(self, base: NoiseModel, eps: float):
        if not 0.0 <= eps <= 1.0:
            raise ModelError("mixing parameter must lie in [0, 1]")
        super().__init__(base.n)
        self.base = base
        self.eps = eps
        self.locality = base.locality

    def channel(self, gate):
        inner = self.base.channel(gate)
        mat = (1.0 - self.eps) * np.eye(inner.matrix.shape[0]) + self.eps * inner.matrix
        return TransferChannel(self.n, mat)

    def describe(self):
        return f"mixed(eps={self.eps}, base={self.base.describe()})"


class ProductNoiseModel(NoiseModel):
    """Per-qubit noise for product gates: Lambda(g) = tensor_i Lambda_i(g_i)."""

    locality = "product"

    def __init__(self, factors):
        super().__init__(len(factors))
        self.factors = list(factors)
        if any(f.n != 1 for f in self.factors):
            raise ModelError("product noise factors must be single-qubit models")

    def factor_channel(self, i, gate_1q):
        return self.factors[i].channel(gate_1q)

    def channel(self, gate):
        """Dense kron channel for a product gate (tuple of 1q elements)."""
        if isinstance(gate, CliffordElement):
            raise ModelError("product noise expects per-qubit gate tuples")
        out = self.factors[0].channel(gate[0])
        for i, g1 in enumerate(gate[1:], start=1):
            out = out.tensor(self.factors[i].channel(g1))
        return out

    def describe(self):
        return f"product[{self.factors[0].describe()} x{self.n}]"


# -- concrete models from the fidelity-spoofing and worst-case constructions --

def _sigma(axis):
    return {
        "x": np.array([[0, 1], [1, 0]], dtype=complex),
        "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "z": np.array([[1, 0], [0, -1]], dtype=complex),
    }[axis]


def overrotation_3gate_model(delta: float) -> GateTableModel:
    """Overrotation by delta on the X readout gate, underrotation on Y.

    Lambda(1) = id, Lambda(g_X) = e^{i delta X/2} . e^{-i delta X/2},
    Lambda(g_Y) = e^{-i delta Y/2} . e^{i delta Y/2}.
    """
    if not -np.pi <= delta <= np.pi:
        raise ModelError("delta must lie in [-pi, pi]")
    gates = pauli_basis_tableaus()
    table = {
        gates[0]: TransferChannel.identity(1),
        gates[1]: TransferChannel.from_unitary(rotation_unitary("x", delta)),
        gates[2]: TransferChannel.from_unitary(rotation_unitary("y", -delta)),
    }
    return GateTableModel(1, table, name=f"overrotation(delta={delta})")


def worst_case_undo_model() -> GateTableModel:
    """Single-qubit coherent model undoing the basis change of each gate.

    Lambda(g) = omega(g)^dagger omega(X) when the Z image of g carries a sign,
    else omega(g)^dagger; under this model every round measures in the plain
    Z basis while post-processing still applies the inverse rotation.
    """
    from .cliffords import enumerate_cl1

    z = PauliLabel(1, 0, 1)
    rx = TransferChannel.from_clifford(tableau_from_unitary(_sigma("x")))
    table = {}
    for g in enumerate_cl1():
        _, phi_z = g.act(z)
        back = TransferChannel.from_clifford(g.inverse())
        table[g] = back @ rx if phi_z else back
    return GateTableModel(1, table, name="worst-case-undo")


def bit_flip_channel(eps: float) -> PauliChannel:
    if not 0.0 <= eps <= 1.0:
        raise ModelError("bit-flip probability must lie in [0, 1]")
    x_idx = PauliLabel(0, 1, 1).index
    p = np.zeros(4)
    p[0] = 1.0 - eps
    p[x_idx] = eps
    return PauliChannel.from_probs(p)


def bit_flip_right_model(eps: float, n: int) -> GateIndependentRightModel:
    ch = bit_flip_channel(eps)
    full = ch
    for _ in range(n - 1):
        full = full.tensor(ch)
    return GateIndependentRightModel(full.to_transfer(), name=f"bit-flip-right(eps={eps})")


def depolarizing_channel(q: float, n: int = 1) -> PauliChannel:
    if not 0.0 <= q <= 1.0 + 1.0 / (4**n - 1):
        raise ModelError("depolarizing strength out of range")
    lams = np.full(4**n, 1.0 - q)
    lams[0] = 1.0
    return PauliChannel.from_eigenvalues(lams)


def pauli_eigen_right_model(lams, require_cp=True, clip_cp=False) -> GateIndependentRightModel:
    """Gate-independent right Pauli noise given directly in eigenvalue space."""
    ch = PauliChannel.from_eigenvalues(lams, require_cp=require_cp, clip_cp=clip_cp)
    return GateIndependentRightModel(ch.to_transfer(), name="pauli-eigen-right")


def random_channel_table_model(gates, rng, pool_size=8, n=None) -> GateTableModel:
    """Random TP noise: each gate draws from a pool of Haar-random CPTP channels."""
    n = gates[0].n if n is None else n
    pool = [random_cptp_channel(n, rng) for _ in range(pool_size)]
    picks = rng.integers(0, pool_size, size=len(gates))
    table = {g: pool[picks[i]] for i, g in enumerate(gates)}
    return GateTableModel(n, table, name=f"random-cptp-pool({pool_size})")


def random_pauli_table_model(gates, rng, strength=0.2, n=None) -> GateTableModel:
    n = gates[0].n if n is None else n
    table = {g: random_pauli_channel(n, rng, strength).to_transfer() for g in gates}
    return GateTableModel(n, table, name="random-pauli-per-gate")


def compiled_pulse_noise_model(generators, noisy_generators, name="compiled") -> GateTableModel:
    """Right-noise table for single-qubit Cliffords compiled from a pulse set.

    ``generators`` maps pulse ids to ideal 2x2 unitaries; ``noisy_generators``
    to their miscalibrated versions.  Each Clifford g gets the shortest word
    over the ideal pulses and Lambda(g) = omega(g)^dagger phi(g) with phi(g)
    the product of noisy pulses.
    """
    from .cliffords import enumerate_cl1

    gens = {pid: tableau_from_unitary(u) for pid, u in generators.items()}
    words = {CliffordElement.identity(1): ()}
    frontier = [((), CliffordElement.identity(1))]
    while frontier:
        nxt = []
        for word, g in frontier:
            for pid, tab in gens.items():
                gp = tab @ g
                if gp not in words:
                    w = (pid,) + word
                    words[gp] = w
                    nxt.append((w, gp))
        frontier = nxt
    if len(words) != 24:
        raise ModelError("pulse generators do not generate the single-qubit Clifford group")
    table = {}
    for g in enumerate_cl1():
        word = words[g]
        u = np.eye(2, dtype=complex)
        for pid in word:
            u = u @ noisy_generators[pid]
        phi = TransferChannel.from_unitary(u)
        table[g] = TransferChannel.from_clifford(g.inverse()) @ phi
    return GateTableModel(1, table, name=name)


def bloch_rotation_noise_model(delta: float) -> GateTableModel:
    """Local-Clifford spoofing model: Cliffords compiled from 90-degree Bloch
    rotations about Z (noiseless), X (overrotated by delta) and Y
    (underrotated by delta)."""
    if not -np.pi <= delta <= np.pi:
        raise ModelError("delta must lie in [-pi, pi]")
    ideal = {
        "z90": rotation_unitary("z", np.pi / 2),
        "x90": rotation_unitary("x", np.pi / 2),
        "y90": rotation_unitary("y", np.pi / 2),
    }
    noisy = {
        "z90": ideal["z90"],
        "x90": rotation_unitary("x", np.pi / 2 + delta),
        "y90": rotation_unitary("y", np.pi / 2 - delta),
    }
    return compiled_pulse_noise_model(ideal, noisy, name=f"bloch-compiled(delta={delta})")
