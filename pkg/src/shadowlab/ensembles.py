"""Gate ensembles: the distribution (G, p) a shadow protocol draws from.

Enumerated ensembles carry per-gate tables of the labels and signs of
g^dagger Z_z g over all diagonal z, which is the only gate data the frame
machinery ever touches.  Product ensembles hold independent per-qubit
factors; the uniform-global kind is a sampler with the closed-form frame
spectrum.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ConfigError
from .paulis import PauliLabel
from .cliffords import CliffordElement, enumerate_cl1, enumerate_cl2, pauli_basis_tableaus, product_clifford, sample_uniform


class EnumeratedEnsemble:
    """Explicit finite gate list with probabilities."""

    kind = "enumerated-global"

    def __init__(self, gates, probs=None, name="enumerated"):
        self.gates = tuple(gates)
        if not self.gates:
            raise ConfigError("ensemble needs at least one gate")
        self.n = self.gates[0].n
        if any(g.n != self.n for g in self.gates):
            raise ConfigError("mixed qubit counts in ensemble")
        if probs is None:
            probs = np.full(len(self.gates), 1.0 / len(self.gates))
        self.probs = np.asarray(probs, dtype=float)
        if self.probs.shape != (len(self.gates),) or abs(self.probs.sum() - 1.0) > 1e-12 or np.any(self.probs < 0):
            raise ConfigError("gate probabilities must form a distribution")
        self.name = name
        self._diag_images = None
        self._s = None

    def diag_images(self):
        """(labels[g, z], signs[g, z]) of g^dagger Z_z g over diagonal z indices."""
        if self._diag_images is None:
            d = 1 << self.n
            labels = np.empty((len(self.gates), d), dtype=np.int64)
            signs = np.empty((len(self.gates), d), dtype=np.int8)
            zmask_labels = [PauliLabel(z, 0, self.n) for z in range(d)]
            for gi, g in enumerate(self.gates):
                inv = g.inverse()
                for zi, lab in enumerate(zmask_labels):
                    img, phi = inv.act(lab)
                    labels[gi, zi] = img.index
                    signs[gi, zi] = -1 if phi else 1
            self._diag_images = (labels, signs)
        return self._diag_images

    def s_vector(self) -> np.ndarray:
        """Eigenvalues s_a of the ideal frame operator."""
        if self._s is None:
            labels, _ = self.diag_images()
            s = np.zeros(4**self.n)
            for gi in range(len(self.gates)):
                np.add.at(s, labels[gi], self.probs[gi])
            self._s = s
        return self._s

    def informationally_complete(self) -> bool:
        return bool(np.all(self.s_vector() > 1e-14))

    def null_labels(self):
        s = self.s_vector()
        return [int(i) for i in np.flatnonzero(s <= 1e-14)]

    def draw(self, rng):
        idx = rng.choice(len(self.gates), p=self.probs)
        return self.gates[idx]

    def to_json(self) -> str:
        return json.dumps({
            "kind": self.kind,
            "n": self.n,
            "gates": [g.key_hex() for g in self.gates],
            "probs": [float(p) for p in self.probs],
        })

    @classmethod
    def from_json(cls, text: str) -> "EnumeratedEnsemble":
        data = json.loads(text)
        gates = [CliffordElement.from_key_hex(h) for h in data["gates"]]
        return cls(gates, np.asarray(data["probs"], dtype=float))


def uniform_cl1() -> EnumeratedEnsemble:
    return EnumeratedEnsemble(enumerate_cl1(), name="uniform-cl1")


def uniform_cl2() -> EnumeratedEnsemble:
    return EnumeratedEnsemble(enumerate_cl2(), name="uniform-cl2")


def pauli_basis_3gate() -> EnumeratedEnsemble:
    """The readout set {1, e^{i pi X/4}, e^{i pi Y/4}}, one qubit."""
    return EnumeratedEnsemble(pauli_basis_tableaus(), name="pauli-basis-3gate")


class ProductEnsemble:
    """Independent per-qubit single-qubit ensembles."""

    kind = "enumerated-local-product"

    def __init__(self, factors, name="local-product"):
        self.factors = tuple(factors)
        if any(f.n != 1 for f in self.factors):
            raise ConfigError("product ensemble factors must be single-qubit")
        self.n = len(self.factors)
        self.name = name

    def s_vector(self) -> np.ndarray:
        out = np.array([1.0])
        for f in self.factors:
            out = np.kron(out, f.s_vector())
        return out

    def informationally_complete(self) -> bool:
        return all(f.informationally_complete() for f in self.factors)

    def draw(self, rng):
        return tuple(f.draw(rng) for f in self.factors)

    def expand(self) -> EnumeratedEnsemble:
        """Materialize the product group; guarded to tiny sizes."""
        total = 1
        for f in self.factors:
            total *= len(f.gates)
        if total > 20000:
            raise ConfigError("product ensemble too large to expand")
        gates = [()]
        probs = [1.0]
        for f in self.factors:
            gates = [g + (h,) for g in gates for h in f.gates]
            probs = [p * q for p in probs for q in f.probs]
        elems = [product_clifford(list(tup)) for tup in gates]
        return EnumeratedEnsemble(elems, np.asarray(probs), name=self.name + "-expanded")

    def to_json(self) -> str:
        return json.dumps({
            "kind": self.kind,
            "n": self.n,
            "factors": [json.loads(f.to_json()) for f in self.factors],
        })


def uniform_local_clifford(n: int) -> ProductEnsemble:
    base = uniform_cl1()
    return ProductEnsemble([base] * n, name="uniform-local-clifford")


def pauli_basis_product(n: int) -> ProductEnsemble:
    base = pauli_basis_3gate()
    return ProductEnsemble([base] * n, name="pauli-basis-product")


class SampledCliffordEnsemble:
    """Uniform n-qubit Clifford group accessed through a sampler."""

    kind = "sampled-global"

    def __init__(self, n: int):
        self.n = n
        self.name = "sampled-global-clifford"

    def s_vector(self) -> np.ndarray:
        d = 1 << self.n
        s = np.full(4**self.n, 1.0 / (d + 1))
        s[0] = 1.0
        return s

    def informationally_complete(self) -> bool:
        return True

    def draw(self, rng):
        return sample_uniform(self.n, rng)

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind, "n": self.n})


def ensemble_from_json(text: str):
    data = json.loads(text)
    kind = data.get("kind")
    if kind == "enumerated-global":
        return EnumeratedEnsemble.from_json(text)
    if kind == "enumerated-local-product":
        factors = [EnumeratedEnsemble.from_json(json.dumps(f)) for f in data["factors"]]
        return ProductEnsemble(factors)
    if kind == "sampled-global":
        return SampledCliffordEnsemble(int(data["n"]))
    raise ConfigError(f"unknown ensemble kind {kind!r}")
