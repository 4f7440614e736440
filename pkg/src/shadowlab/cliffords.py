"""Clifford group elements as symplectic tableaux with sign data.

An element g is stored modulo global phase through the images of the 2n
generators Z_0..Z_{n-1}, X_0..X_{n-1}:

    g P_j g^dagger = (-1)^{s_j} sigma(img_j),

which fixes the action on every Pauli label.  Generator order throughout is
Z-block then X-block; the 2n x 2n symplectic matrix has column j equal to the
image label of generator j, rows laid out as (z_0..z_{n-1}, x_0..x_{n-1}).
"""

from __future__ import annotations

import functools
import itertools

import numpy as np

from .paulis import PauliLabel, all_labels, commutes, dense_pauli, pauli_trace


class CliffordElement:
    __slots__ = ("n", "imgz", "imgx", "signs", "_key", "_inv")

    def __init__(self, n, imgz, imgx, signs):
        self.n = n
        self.imgz = tuple(imgz)
        self.imgx = tuple(imgx)
        self.signs = tuple(signs)
        if len(self.imgz) != 2 * n or len(self.imgx) != 2 * n or len(self.signs) != 2 * n:
            raise ValueError("tableau needs 2n generator images")
        self._key = (n, self.imgz, self.imgx, self.signs)
        self._inv = None

    def __eq__(self, other):
        return isinstance(other, CliffordElement) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"CliffordElement(n={self.n}, key={self.key_hex()})"

    def key_hex(self) -> str:
        nn = 2 * self.n
        nbytes = (self.n + 7) // 8
        parts = [self.n.to_bytes(2, "big")]
        parts += [v.to_bytes(nbytes, "big") for v in self.imgz]
        parts += [v.to_bytes(nbytes, "big") for v in self.imgx]
        parts.append(sum(s << j for j, s in enumerate(self.signs)).to_bytes((nn + 7) // 8, "big"))
        return b"".join(parts).hex()

    @classmethod
    def from_key_hex(cls, text: str) -> "CliffordElement":
        raw = bytes.fromhex(text)
        n = int.from_bytes(raw[:2], "big")
        nn = 2 * n
        nbytes = (n + 7) // 8
        pos = 2
        vals = []
        for _ in range(2 * nn):
            vals.append(int.from_bytes(raw[pos:pos + nbytes], "big"))
            pos += nbytes
        sbits = int.from_bytes(raw[pos:pos + (nn + 7) // 8], "big")
        signs = [(sbits >> j) & 1 for j in range(nn)]
        return cls(n, vals[:nn], vals[nn:], signs)

    @classmethod
    def identity(cls, n: int) -> "CliffordElement":
        imgz = [1 << i for i in range(n)] + [0] * n
        imgx = [0] * n + [1 << i for i in range(n)]
        return cls(n, imgz, imgx, [0] * 2 * n)

    def act(self, a: PauliLabel):
        """omega(g)(sigma_a) = (-1)^phi sigma_Xi; returns (Xi label, phi)."""
        if a.n != self.n:
            raise ValueError("label and tableau qubit counts differ")
        n = self.n
        e = (a.z & a.x).bit_count()
        az = ax = 0
        # sigma_a = i^{z.x} X(x) Z(z): X-generator images first, then Z images.
        x = a.x
        while x:
            i = (x & -x).bit_length() - 1
            x &= x - 1
            j = n + i
            gz, gx = self.imgz[j], self.imgx[j]
            e += 2 * self.signs[j] + (gz & gx).bit_count() + 2 * (az & gx).bit_count()
            ax ^= gx
            az ^= gz
        z = a.z
        while z:
            i = (z & -z).bit_length() - 1
            z &= z - 1
            gz, gx = self.imgz[i], self.imgx[i]
            e += 2 * self.signs[i] + (gz & gx).bit_count() + 2 * (az & gx).bit_count()
            ax ^= gx
            az ^= gz
        e = (e - (az & ax).bit_count()) % 4
        if e & 1:
            raise AssertionError("Clifford action produced a non-Hermitian phase")
        return PauliLabel(az, ax, n), e >> 1

    def __matmul__(self, other: "CliffordElement") -> "CliffordElement":
        """Unitary product: omega(a @ b) = omega(a) omega(b)."""
        if self.n != other.n:
            raise ValueError("qubit count mismatch")
        imgz, imgx, signs = [], [], []
        for j in range(2 * self.n):
            lab = PauliLabel(other.imgz[j], other.imgx[j], self.n)
            res, phi = self.act(lab)
            imgz.append(res.z)
            imgx.append(res.x)
            signs.append((phi + other.signs[j]) & 1)
        return CliffordElement(self.n, imgz, imgx, signs)

    def symplectic(self) -> np.ndarray:
        """2n x 2n matrix over F_2, column j = image label of generator j."""
        n = self.n
        m = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        for j in range(2 * n):
            for i in range(n):
                m[i, j] = (self.imgz[j] >> i) & 1
                m[n + i, j] = (self.imgx[j] >> i) & 1
        return m

    def inverse(self) -> "CliffordElement":
        if self._inv is not None:
            return self._inv
        n = self.n
        finv = gf2_inv(self.symplectic())
        imgz, imgx, signs = [], [], []
        for j in range(2 * n):
            col = finv[:, j]
            z = sum(int(col[i]) << i for i in range(n))
            x = sum(int(col[n + i]) << i for i in range(n))
            lab = PauliLabel(z, x, n)
            _, phi = self.act(lab)
            imgz.append(z)
            imgx.append(x)
            signs.append(phi)
        inv = CliffordElement(n, imgz, imgx, signs)
        inv._inv = self
        self._inv = inv
        return inv

    def adjoint_act(self, a: PauliLabel):
        """omega(g)^dagger(sigma_a) = g^dagger sigma_a g as (label, sign)."""
        return self.inverse().act(a)

    def preserves_symplectic(self) -> bool:
        n = self.n
        labels = [PauliLabel(1 << i, 0, n) for i in range(n)] + [PauliLabel(0, 1 << i, n) for i in range(n)]
        for a, b in itertools.combinations(labels, 2):
            ia, _ = self.act(a)
            ib, _ = self.act(b)
            if commutes(ia, ib) != commutes(a, b):
                return False
        return True


# -- named gates -------------------------------------------------------------

def _embed_images(n, images):
    """Build an element from a {generator label: (label, sign)} override map."""
    g = CliffordElement.identity(n)
    imgz, imgx, signs = list(g.imgz), list(g.imgx), list(g.signs)
    for j, (lab, s) in images.items():
        imgz[j], imgx[j], signs[j] = lab.z, lab.x, s
    return CliffordElement(n, imgz, imgx, signs)


def hadamard(q: int, n: int) -> CliffordElement:
    # H: Z -> X, X -> Z
    return _embed_images(n, {
        q: (PauliLabel(0, 1 << q, n), 0),
        n + q: (PauliLabel(1 << q, 0, n), 0),
    })


def phase_gate(q: int, n: int) -> CliffordElement:
    # S: X -> Y, Z -> Z
    return _embed_images(n, {n + q: (PauliLabel(1 << q, 1 << q, n), 0)})


def cnot(control: int, target: int, n: int) -> CliffordElement:
    # X_c -> X_c X_t, Z_t -> Z_c Z_t
    return _embed_images(n, {
        n + control: (PauliLabel(0, (1 << control) | (1 << target), n), 0),
        target: (PauliLabel((1 << control) | (1 << target), 0, n), 0),
    })


def swap(q1: int, q2: int, n: int) -> CliffordElement:
    return cnot(q1, q2, n) @ cnot(q2, q1, n) @ cnot(q1, q2, n)


def pauli_gate(label: PauliLabel) -> CliffordElement:
    """Conjugation by sigma_label: identity tableau with flipped signs."""
    n = label.n
    g = CliffordElement.identity(n)
    signs = []
    for j in range(2 * n):
        gen = PauliLabel(g.imgz[j], g.imgx[j], n)
        signs.append(commutes(label, gen))
    return CliffordElement(n, g.imgz, g.imgx, signs)


def product_clifford(factors) -> CliffordElement:
    """Tensor product of single-qubit elements (qubit i = factor i)."""
    n = len(factors)
    imgz, imgx, signs = [0] * 2 * n, [0] * 2 * n, [0] * 2 * n
    for i, f in enumerate(factors):
        if f.n != 1:
            raise ValueError("factors must be single-qubit elements")
        for block, j in ((0, 0), (1, 1)):
            imgz[block * n + i] = f.imgz[j] << i
            imgx[block * n + i] = f.imgx[j] << i
            signs[block * n + i] = f.signs[j]
    return CliffordElement(n, imgz, imgx, signs)


# -- enumeration and sampling ------------------------------------------------

def _closure(n, generators):
    seen = {CliffordElement.identity(n): None}
    frontier = [CliffordElement.identity(n)]
    while frontier:
        nxt = []
        for g in frontier:
            for h in generators:
                e = h @ g
                if e not in seen:
                    seen[e] = None
                    nxt.append(e)
        frontier = nxt
    return tuple(seen)


@functools.lru_cache(maxsize=None)
def enumerate_cl1():
    """The 24 single-qubit Cliffords modulo phase."""
    return _closure(1, [hadamard(0, 1), phase_gate(0, 1)])


@functools.lru_cache(maxsize=None)
def enumerate_cl2():
    """The 11520 two-qubit Cliffords modulo phase."""
    gens = [hadamard(0, 2), hadamard(1, 2), phase_gate(0, 2), phase_gate(1, 2), cnot(0, 1, 2)]
    return _closure(2, gens)


def _gf2_rref(mat):
    m = mat.copy() % 2
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        hit = None
        for rr in range(r, rows):
            if m[rr, c]:
                hit = rr
                break
        if hit is None:
            continue
        m[[r, hit]] = m[[hit, r]]
        for rr in range(rows):
            if rr != r and m[rr, c]:
                m[rr] ^= m[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m[:r], pivots


def gf2_inv(mat):
    nn = mat.shape[0]
    aug = np.concatenate([mat % 2, np.eye(nn, dtype=np.uint8)], axis=1)
    red, pivots = _gf2_rref(aug)
    if pivots[:nn] != list(range(nn)):
        raise ValueError("matrix is singular over F_2")
    return red[:, nn:]


def gf2_nullspace(mat):
    """Rows spanning the right nullspace of ``mat`` over F_2."""
    red, pivots = _gf2_rref(mat)
    cols = mat.shape[1]
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(cols, dtype=np.uint8)
        v[f] = 1
        for r, p in enumerate(pivots):
            if r < red.shape[0] and red[r, f]:
                v[p] = 1
        basis.append(v)
    return np.array(basis, dtype=np.uint8) if basis else np.zeros((0, cols), dtype=np.uint8)


def _symp_pair(u, v, n):
    return int(np.dot(u[:n], v[n:]) + np.dot(u[n:], v[:n])) & 1


def sample_uniform(n: int, rng) -> CliffordElement:
    """Uniform element of Cl_n mod phase: random symplectic basis + signs.

    Builds image pairs (v_k, w_k) for (Z_k, X_k) by drawing v_k uniformly from
    the running symplectic complement and w_k uniformly from the solutions of
    [v_k, w] = 1, which gives the uniform measure on Sp(2n, F_2); the 2n sign
    bits are uniform independently.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    basis = np.eye(2 * n, dtype=np.uint8)
    vs, ws = [], []
    for _ in range(n):
        k = basis.shape[0]
        while True:
            bits = rng.integers(0, 2, size=k)
            if bits.any():
                break
        v = bits @ basis % 2
        t = np.array([_symp_pair(v, row, n) for row in basis], dtype=np.uint8)
        jstar = int(np.flatnonzero(t)[0])
        e = rng.integers(0, 2, size=k).astype(np.uint8)
        if int(e @ t) % 2 == 0:
            e[jstar] ^= 1
        w = e @ basis % 2
        vs.append(v)
        ws.append(w)
        cons = np.array([[_symp_pair(v, row, n) for row in basis],
                         [_symp_pair(w, row, n) for row in basis]], dtype=np.uint8)
        null = gf2_nullspace(cons)
        basis = null @ basis % 2 if null.size else np.zeros((0, 2 * n), dtype=np.uint8)
    imgz, imgx, signs = [0] * 2 * n, [0] * 2 * n, [0] * 2 * n
    sbits = rng.integers(0, 2, size=2 * n)
    for i in range(n):
        for j, vec in ((i, vs[i]), (n + i, ws[i])):
            imgz[j] = sum(int(vec[q]) << q for q in range(n))
            imgx[j] = sum(int(vec[n + q]) << q for q in range(n))
            signs[j] = int(sbits[j])
    return CliffordElement(n, imgz, imgx, signs)


# -- structural sets ---------------------------------------------------------

@functools.lru_cache(maxsize=None)
def chain_set(n: int):
    """CNOT/SWAP chains whose adjoint orbit of Z_1 covers all nonzero Z_z.

    |chain_set(n)| = 2^n - 1 including the identity; chains are the products
    U_{2,1} U_{3,2} ... U_{i+1,i} with each U either CNOT or SWAP.
    """
    elems = [CliffordElement.identity(n)]
    layer = [CliffordElement.identity(n)]
    for i in range(n - 1):
        layer = [prefix @ mk(i + 1, i, n) for prefix in layer for mk in (cnot, swap)]
        elems.extend(layer)
    return tuple(elems)


def stabilizer_coset_partition(n: int):
    """Partition of Cl_n by the label a with g^dagger Z_1 g = +/- sigma_a.

    Enumeration-backed; limited to n <= 2.
    """
    if n > 2:
        raise ValueError("coset partition is enumeration-backed, n <= 2 only")
    group = enumerate_cl1() if n == 1 else enumerate_cl2()
    z1 = PauliLabel(1, 0, n)
    cosets = {}
    for g in group:
        lab, _ = g.adjoint_act(z1)
        cosets.setdefault(lab, []).append(g)
    return {lab: tuple(members) for lab, members in cosets.items()}


# -- dense bridge and pulse compilation --------------------------------------

def tableau_from_unitary(u: np.ndarray) -> CliffordElement:
    """Recover the tableau of a Clifford unitary (n <= 3) from conjugation."""
    d = u.shape[0]
    n = d.bit_length() - 1
    imgz, imgx, signs = [0] * 2 * n, [0] * 2 * n, [0] * 2 * n
    gens = [PauliLabel(1 << i, 0, n) for i in range(n)] + [PauliLabel(0, 1 << i, n) for i in range(n)]
    for j, gen in enumerate(gens):
        conj = u @ dense_pauli(gen) @ u.conj().T
        found = False
        for b in all_labels(n):
            c = pauli_trace(conj, b) / d
            if abs(abs(c) - 1.0) < 1e-8:
                if abs(c.imag) > 1e-8:
                    raise ValueError("conjugate is not a signed Hermitian Pauli")
                imgz[j], imgx[j], signs[j] = b.z, b.x, int(c.real < 0)
                found = True
                break
        if not found:
            raise ValueError("matrix is not Clifford")
    return CliffordElement(n, imgz, imgx, signs)


PULSE_IDS = ("x+90", "x-90", "y+90", "y-90")

_SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
_SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_PULSE_AXES = {"x+90": (_SIGMA_X, np.pi / 2), "x-90": (_SIGMA_X, -np.pi / 2),
               "y+90": (_SIGMA_Y, np.pi / 2), "y-90": (_SIGMA_Y, -np.pi / 2)}


def rotation_unitary(axis: str, angle: float) -> np.ndarray:
    """exp(i * angle/2 * sigma_axis)."""
    sigma = {"x": _SIGMA_X, "y": _SIGMA_Y, "z": _SIGMA_Z}[axis]
    return np.cos(angle / 2) * np.eye(2) + 1j * np.sin(angle / 2) * sigma


@functools.lru_cache(maxsize=None)
def pauli_basis_tableaus():
    """Tableaux of the readout gate set {1, e^{i pi X/4}, e^{i pi Y/4}}."""
    us = [np.eye(2, dtype=complex), rotation_unitary("x", np.pi / 2), rotation_unitary("y", np.pi / 2)]
    return tuple(tableau_from_unitary(u) for u in us)


def pulse_unitary(pulse_id: str, delta: float = 0.0) -> np.ndarray:
    """Ideal or miscalibrated pi/2 pulse about X or Y.

    A nonzero delta lengthens X rotations and shortens Y rotations by delta
    (magnitude-wise), the over-/underrotation pattern of the readout-gate
    noise model.
    """
    sigma, theta = _PULSE_AXES[pulse_id]
    if delta:
        sign = 1.0 if theta > 0 else -1.0
        theta = theta + sign * delta if pulse_id.startswith("x") else theta - sign * delta
    return np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * sigma


@functools.lru_cache(maxsize=None)
def _pulse_table():
    table = {}
    frontier = [((), CliffordElement.identity(1))]
    table[CliffordElement.identity(1)] = ()
    for _ in range(4):
        nxt = []
        for word, g in frontier:
            for pid in PULSE_IDS:
                gp = tableau_from_unitary(pulse_unitary(pid)) @ g
                w = (pid,) + word
                if gp not in table:
                    table[gp] = w
                    nxt.append((w, gp))
        frontier = nxt
    if len(table) != 24:
        raise AssertionError(f"pulse closure reached {len(table)} of 24 Cliffords")
    for g, word in table.items():
        u = np.eye(2, dtype=complex)
        for pid in word:
            u = u @ pulse_unitary(pid)
        if tableau_from_unitary(u) != g:
            raise AssertionError("pulse table self-check failed")
    return table


def compile_cl1_to_pulses(g: CliffordElement):
    """Shortest X/Y pi/2-pulse word realizing g mod phase.

    23 of the 24 elements need at most 3 pulses; the pi rotation about Z is
    the lone exception at 4 (no product of three +/-90 X/Y rotations has a
    large enough Z-axis quaternion component).
    """
    if g.n != 1:
        raise ValueError("pulse compilation is single-qubit only")
    return _pulse_table()[g]
