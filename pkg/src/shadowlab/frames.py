"""Exact frame operators under gate-dependent noise.

For an enumerated ensemble the noisy frame operator regroups as

    S_tilde = sum_a s_a |sigma_hat_a)(sigma_hat_a| Lambda_bar_a,

where s_a collects the probability of drawing a gate with g^dagger Z_z g
proportional to sigma_a and Lambda_bar_a is the matching convex mixture of
the per-gate noise channels.  Only row a of each Lambda_bar_a enters
expectation values, so reports store the row-structured effective map
S^{-1} S_tilde (one row per label) and keep full averaged channels only on
request.

The second-moment machinery accumulates, per commuting label pair (a, a'),
the weight r_{a,a'} and the contraction of row a^a' of the averaged pair
channel with the state, which is all the noisy second moment needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ModelError
from .paulis import DensityState, PauliLabel, PauliObservable, ProductObservable, all_labels, pauli_product_sign, commutes
from .channels import TransferChannel, NoiseModel, ProductNoiseModel, _clifford_index_action
from .ensembles import EnumeratedEnsemble, ProductEnsemble


@dataclass
class FrameReport:
    """Exact frame data for one (ensemble, noise) pair."""

    n: int
    s: np.ndarray
    rows: np.ndarray                      # rows[a] = a-th row of Lambda_bar_a = row a of S^-1 S_tilde
    lam_bar: np.ndarray | None = None     # averaged Pauli eigenvalues, Pauli-noise models only
    channels: dict | None = None          # a -> full Lambda_bar_a PTM, kept on request
    pauli_noise: bool = False
    ensemble_name: str = ""
    noise_name: str = ""

    @property
    def d(self):
        return 1 << self.n

    def effective(self) -> np.ndarray:
        """S^{-1} S_tilde as a dense PTM."""
        return self.rows.copy()

    def s_tilde(self) -> np.ndarray:
        return self.s[:, None] * self.rows

    def to_json_dict(self):
        out = {
            "n": self.n,
            "ensemble": self.ensemble_name,
            "noise": self.noise_name,
            "s": [float(v) for v in self.s],
            "effective_rows": [[float(v) for v in row] for row in self.rows],
            "pauli_noise": self.pauli_noise,
        }
        if self.lam_bar is not None:
            out["lam_bar"] = [float(v) for v in self.lam_bar]
        return out


@dataclass
class ProductFrameReport:
    """Factorized frame data: one single-qubit report per qubit."""

    factors: list

    @property
    def n(self):
        return len(self.factors)

    def s_vector(self) -> np.ndarray:
        out = np.array([1.0])
        for f in self.factors:
            out = np.kron(out, f.s)
        return out

    def dense_report(self) -> FrameReport:
        """Assemble the full report; guarded to small n."""
        if self.n > 6:
            raise ModelError("dense assembly of a factorized frame is capped at n <= 6")
        rows = self.factors[0].rows
        s = self.factors[0].s
        lam = self.factors[0].lam_bar
        pauli = all(f.pauli_noise for f in self.factors)
        for f in self.factors[1:]:
            rows = np.kron(rows, f.rows)
            s = np.kron(s, f.s)
            lam = np.kron(lam, f.lam_bar) if pauli and lam is not None and f.lam_bar is not None else None
        # kron of row-structured effective maps keeps the row structure
        return FrameReport(self.n, s, rows, lam_bar=lam, pauli_noise=pauli,
                           ensemble_name="product", noise_name="product")


def ideal_frame(ensemble) -> np.ndarray:
    """Spectrum of the noise-free frame operator; raises on null directions."""
    s = ensemble.s_vector()
    if hasattr(ensemble, "null_labels"):
        null = ensemble.null_labels()
        if null:
            raise ModelError(f"frame operator is singular on labels {null}")
    elif np.any(s <= 1e-14):
        raise ModelError("frame operator is singular")
    return s


def noisy_frame(ensemble: EnumeratedEnsemble, noise: NoiseModel, keep_channels: bool = False) -> FrameReport:
    """Exact Lemma-style frame report for an enumerated ensemble."""
    if not isinstance(ensemble, EnumeratedEnsemble):
        raise TypeError("noisy_frame needs an enumerated ensemble; use monte_carlo_frame or local_factorized_frame")
    n = ensemble.n
    dim = 4**n
    labels, _ = ensemble.diag_images()
    s = ensemble.s_vector()
    if np.any(s <= 1e-14):
        raise ModelError(f"frame operator is singular on labels {ensemble.null_labels()}")
    rows = np.zeros((dim, dim))
    chans = {a: np.zeros((dim, dim)) for a in range(dim)} if keep_channels else None
    diag_only = True
    lam = np.zeros(dim)
    for gi, g in enumerate(ensemble.gates):
        ch = noise.channel(g)
        mat = ch.matrix
        if not ch.is_trace_preserving(1e-9):
            raise ModelError("noise model produced a non-trace-preserving channel")
        if diag_only and not ch.is_pauli_diagonal():
            diag_only = False
        p = ensemble.probs[gi]
        for a in labels[gi]:
            rows[a] += p * mat[a]
            if keep_channels:
                chans[a] += p * mat
    rows /= s[:, None]
    if keep_channels:
        for a in range(dim):
            chans[a] /= s[a]
    if diag_only:
        lam = rows[np.arange(dim), np.arange(dim)].copy()
    report = FrameReport(
        n, s, rows,
        lam_bar=lam if diag_only else None,
        channels={a: TransferChannel(n, m) for a, m in chans.items()} if keep_channels else None,
        pauli_noise=diag_only,
        ensemble_name=ensemble.name,
        noise_name=noise.describe(),
    )
    return report


def brute_force_s_tilde(ensemble: EnumeratedEnsemble, noise: NoiseModel) -> np.ndarray:
    """S_tilde by direct PTM products, the reconstruction oracle for Lemma checks."""
    n = ensemble.n
    dim = 4**n
    m_diag = np.zeros(dim)
    for lab in all_labels(n):
        m_diag[lab.index] = 1.0 if lab.is_diagonal else 0.0
    total = np.zeros((dim, dim))
    for gi, g in enumerate(ensemble.gates):
        perm, signs = _clifford_index_action(g)
        r = np.zeros((dim, dim))
        r[perm, np.arange(dim)] = signs
        total += ensemble.probs[gi] * (r.T @ np.diag(m_diag) @ r @ noise.channel(g).matrix)
    return total


def local_factorized_frame(ensemble: ProductEnsemble, noise, keep_channels: bool = False) -> ProductFrameReport:
    """Per-qubit frame reports for product ensembles under product noise."""
    if not isinstance(ensemble, ProductEnsemble):
        raise TypeError("local_factorized_frame needs a product ensemble")
    if not isinstance(noise, ProductNoiseModel):
        raise ModelError("factorized frame requires product-local noise")
    if noise.n != ensemble.n:
        raise ModelError("noise and ensemble qubit counts differ")
    factors = [noisy_frame(fe, fm, keep_channels=keep_channels)
               for fe, fm in zip(ensemble.factors, noise.factors)]
    return ProductFrameReport(factors)


# -- expectation values and bias ----------------------------------------------

def expectation(report, obs, state) -> float:
    """E[o_hat] = (O| S^{-1} S_tilde |rho), exact."""
    if isinstance(report, ProductFrameReport):
        facs = _product_factors(obs, state, report.n)
        if facs is not None:
            out = 1.0
            for (o_vec, r_vec), f in zip(facs, report.factors):
                out *= float(o_vec @ (f.rows @ r_vec))
            return out
        report = report.dense_report()
    o_vec = obs.to_observable().pauli_vec() if isinstance(obs, ProductObservable) else obs.pauli_vec()
    r = state.pauli_vec()
    return float(o_vec @ (report.rows @ r))


def exact_bias(report, obs, state) -> float:
    """|E[o_hat] - Tr(O rho)|."""
    truth = obs.expectation(state)
    return abs(expectation(report, obs, state) - truth)


def robust_expectation(report, obs, state, f_m: float) -> float:
    """Mitigated expectation with the traceless block rescaled by (d+1)/f_m."""
    if abs(f_m) < 1e-6:
        raise ModelError("mitigation parameter too close to zero")
    if isinstance(report, ProductFrameReport):
        report = report.dense_report()
    d = report.d
    o_vec = obs.to_observable().pauli_vec() if isinstance(obs, ProductObservable) else obs.pauli_vec()
    r = state.pauli_vec()
    contrib = report.s * (report.rows @ r)
    total = obs_trace(obs) / d + (d + 1) / f_m * float(o_vec[1:] @ contrib[1:])
    return total


def obs_trace(obs) -> float:
    if isinstance(obs, ProductObservable):
        out = 1.0
        for f in obs.factors:
            out *= f.trace
        return out
    return obs.trace


def calibration_mean(report) -> float:
    """E[f_hat] = (d (E_0| S_tilde |E_0) - 1)/(d - 1), exact."""
    if isinstance(report, ProductFrameReport):
        report = report.dense_report()
    n, d = report.n, report.d
    e0 = DensityState.computational_zero(n).pauli_vec()
    overlap = float(e0 @ (report.s * (report.rows @ e0)))
    return (d * overlap - 1.0) / (d - 1.0)


def _product_factors(obs, state, n):
    """Per-qubit (o_vec, r_vec) pairs when both sides factorize, else None."""
    if not isinstance(obs, ProductObservable) or state.factors is None:
        return None
    if obs.n != n or len(state.factors) != n:
        return None
    out = []
    for o1, m1 in zip(obs.factors, state.factors):
        out.append((o1.pauli_vec(), DensityState.from_dense(m1, validate=False).pauli_vec()))
    return out


# -- second moments ------------------------------------------------------------

@dataclass
class SecondMomentReport:
    n: int
    s: np.ndarray
    r_coeff: np.ndarray          # r_{a,a'}: weight of the pair projector
    t_contract: np.ndarray       # sum_g p(g) * (row_{a^a'} of Lambda(g)) @ r_rho
    beta: np.ndarray             # product sign matrix over commuting pairs
    commuting: np.ndarray        # bool mask of [a,a'] = 0
    second_moment: float = np.nan
    variance: float = np.nan
    channels2: dict | None = None

    def s_coeff(self) -> np.ndarray:
        """s_{a,a'} = (-1)^beta r_{a,a'}."""
        return np.where(self.beta, -self.r_coeff, self.r_coeff)

    def ratio(self) -> np.ndarray:
        """s_{a,a'} / (s_a s_{a'})."""
        return self.s_coeff() / np.outer(self.s, self.s)

    def observed_c(self) -> float:
        """max |s_{a,a'}|/(s_a s_{a'}) over off-diagonal contributing pairs."""
        m = np.abs(self.ratio())
        np.fill_diagonal(m, 0.0)
        m[0, :] = 0.0
        m[:, 0] = 0.0
        return float(m.max())


def _pair_tables(n):
    labs = all_labels(n)
    by_index = sorted(labs, key=lambda a: a.index)
    dim = 4**n
    comm = np.zeros((dim, dim), dtype=bool)
    beta = np.zeros((dim, dim), dtype=np.int8)
    for a in by_index:
        for b in by_index:
            if commutes(a, b) == 0:
                comm[a.index, b.index] = True
                beta[a.index, b.index] = pauli_product_sign(a, b)
    return comm, beta


_PAIR_CACHE = {}


def pair_tables(n):
    if n not in _PAIR_CACHE:
        _PAIR_CACHE[n] = _pair_tables(n)
    return _PAIR_CACHE[n]


def second_moment(ensemble, noise, obs, state, keep_channels: bool = False) -> SecondMomentReport:
    """Exact E[o_hat^2] with the estimator built from the ideal S^{-1}."""
    if isinstance(ensemble, ProductEnsemble):
        return _second_moment_product(ensemble, noise, obs, state)
    if not isinstance(ensemble, EnumeratedEnsemble):
        raise ModelError("exact second moment needs an enumerated or factorized ensemble")
    n = ensemble.n
    dim = 4**n
    s = ensemble.s_vector()
    labels, _ = ensemble.diag_images()
    r = state.pauli_vec()
    o_vec = obs.to_observable().pauli_vec() if isinstance(obs, ProductObservable) else obs.pauli_vec()
    r_coeff = np.zeros((dim, dim))
    t_contract = np.zeros((dim, dim))
    chans = {} if keep_channels else None
    for gi, g in enumerate(ensemble.gates):
        mat = noise.channel(g).matrix
        w = mat @ r
        p = ensemble.probs[gi]
        labs = labels[gi]
        ii = np.repeat(labs, labs.size)
        jj = np.tile(labs, labs.size)
        np.add.at(r_coeff, (ii, jj), p)
        np.add.at(t_contract, (ii, jj), p * w[np.bitwise_xor(ii, jj)])
        if keep_channels:
            for a, b in zip(ii, jj):
                key = (int(a), int(b))
                chans[key] = chans.get(key, 0.0) + p * mat
    comm, beta = pair_tables(n)
    if np.any(r_coeff[~comm] != 0.0):
        raise AssertionError("anticommuting pair acquired weight")
    sign = np.where(beta == 1, -1.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        contrib = sign * np.outer(o_vec, o_vec) * t_contract / np.outer(s, s)
    e2 = float(np.nansum(contrib) / np.sqrt(1 << n))
    rep = SecondMomentReport(n, s, r_coeff, t_contract, beta, comm)
    rep.second_moment = e2
    if keep_channels:
        rep.channels2 = {k: TransferChannel(n, m / r_coeff[k]) for k, m in chans.items()}
    mean = expectation(noisy_frame(ensemble, noise), obs, state)
    rep.variance = e2 - mean * mean
    return rep


def _second_moment_product(ensemble: ProductEnsemble, noise, obs, state):
    if not isinstance(noise, ProductNoiseModel):
        raise ModelError("factorized second moment requires product noise")
    facs = _product_factors(obs, state, ensemble.n)
    if facs is None:
        raise ModelError("factorized second moment requires product observable and state")
    e2 = 1.0
    mean = 1.0
    per_qubit = []
    for (o_vec, r_vec), fe, fm in zip(facs, ensemble.factors, noise.factors):
        o1 = PauliObservable(1, {lab: o_vec[lab.index] / np.sqrt(2) for lab in all_labels(1)})
        rho1 = DensityState.from_dense(_vec_to_dense_1q(r_vec), validate=False)
        sub = second_moment(fe, fm, o1, rho1)
        per_qubit.append(sub)
        e2 *= sub.second_moment
        mean *= float(o_vec @ (noisy_frame(fe, fm).rows @ r_vec))
    rep = per_qubit[0]
    joint = SecondMomentReport(ensemble.n, ensemble.s_vector(), rep.r_coeff, rep.t_contract, rep.beta, rep.commuting)
    joint.second_moment = e2
    joint.variance = e2 - mean * mean
    return joint


def _vec_to_dense_1q(vec):
    from .channels import pauli_vec_to_dense

    return pauli_vec_to_dense(vec, 1)


# -- closed-form variance bounds ------------------------------------------------

def variance_bounds(obs) -> dict:
    """Worst-case variance bounds for uniform global / local Clifford sampling."""
    if isinstance(obs, ProductObservable):
        obs = obs.to_observable()
    n = obs.n
    d = 1 << n
    o0 = obs.traceless_part()
    out = {
        "global": 2 * (d + 1) / (d + 2) * o0.stabilizer_norm() ** 2 + (d + 1) / d * o0.hs_norm() ** 2,
        "local_kbody": None,
        "local_pauli": None,
    }
    supp = set()
    for lab in obs.coeffs:
        supp.update(lab.support())
    k = len(supp)
    if k <= 10:
        loc = _restrict(obs, sorted(supp)) if k else obs
        out["local_kbody"] = 4**k * (loc.spectral_norm() ** 2 if k else obs.coeff(PauliLabel(0, 0, n)) ** 2 * 0.0)
    if len(o0.coeffs) == 1:
        (lab, c), = o0.coeffs.items()
        out["local_pauli"] = c * c * 3 ** lab.weight
    return out


def _restrict(obs, qubits):
    k = len(qubits)
    pos = {q: i for i, q in enumerate(qubits)}
    coeffs = {}
    for lab, c in obs.coeffs.items():
        z = x = 0
        for q in lab.support():
            z |= ((lab.z >> q) & 1) << pos[q]
            x |= ((lab.x >> q) & 1) << pos[q]
        coeffs[PauliLabel(z, x, k)] = coeffs.get(PauliLabel(z, x, k), 0.0) + c
    return PauliObservable(k, coeffs)
