"""Quantum Fisher information four ways: spectral SLD formula, channel minimax
over equivalent Kraus representations, closed forms, and matrix-element
shortcuts, with cross-validation hooks.
"""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .channels import GeneratorH, PhaseChannelFamily, amplitude_damping
from .linalg import herm_from_params

SUPPORT_CUTOFF = 1e-10


class QfiError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    """Simplex descent failed to settle within its evaluation budget."""


@dataclass(frozen=True)
class QfiResult:
    value: float
    method: str
    optimal_input: np.ndarray = None
    optimal_h: GeneratorH = None


@dataclass(frozen=True)
class SldOperator:
    mat: np.ndarray
    support_cutoff: float
    residual: float


def output_state(fam, rho_in, phi, extended=False):
    ks = fam.kraus_at(phi)
    if extended:
        eye = np.eye(2)
        ks = [np.kron(k, eye) for k in ks]
    rho_in = np.asarray(rho_in, dtype=complex)
    d = ks[0].shape[0]
    if rho_in.shape != (d, d):
        raise QfiError(f"state dimension {rho_in.shape} does not match flag extended={extended}")
    return sum(k @ rho_in @ k.conj().T for k in ks)


def state_derivative(fam, rho_in, phi, extended=False):
    """Analytic d rho_out / d phi for the phase family."""
    ks = fam.kraus_at(phi)
    dks = fam.dkraus_at(phi)
    if extended:
        eye = np.eye(2)
        ks = [np.kron(k, eye) for k in ks]
        dks = [np.kron(k, eye) for k in dks]
    rho_in = np.asarray(rho_in, dtype=complex)
    d = ks[0].shape[0]
    if rho_in.shape != (d, d):
        raise QfiError(f"state dimension {rho_in.shape} does not match flag extended={extended}")
    out = np.zeros((d, d), dtype=complex)
    for k, dk in zip(ks, dks):
        out += dk @ rho_in @ k.conj().T + k @ rho_in @ dk.conj().T
    return out


def sld_qfi(rho, drho, cutoff=SUPPORT_CUTOFF):
    """QFI and logarithmic-derivative operator from (rho, drho).

    Works in the eigenbasis of rho; eigenvalue pairs with li + lj <= cutoff
    are outside the support and dropped.
    """
    rho = np.asarray(rho, dtype=complex)
    drho = np.asarray(drho, dtype=complex)
    if np.abs(rho - rho.conj().T).max() > 1e-9 or np.abs(drho - drho.conj().T).max() > 1e-9:
        raise QfiError("rho and drho must be Hermitian")
    w, v = np.linalg.eigh(rho)
    m = v.conj().T @ drho @ v
    denom = w[:, None] + w[None, :]
    mask = denom > cutoff
    value = (2 * np.abs(m) ** 2 / np.where(mask, denom, 1.0))[mask].sum()
    lam = np.where(mask, 2 * m / np.where(mask, denom, 1.0), 0.0)
    sld = v @ lam @ v.conj().T
    # defining relation checked on the support only
    proj = v[:, w > cutoff] @ v[:, w > cutoff].conj().T
    resid = proj @ (drho - (sld @ rho + rho @ sld) / 2) @ proj
    return (QfiResult(value=float(value.real), method="sld"),
            SldOperator(mat=sld, support_cutoff=cutoff, residual=float(np.abs(resid).max())))


def closed_form_qfi(kind, param, assisted):
    """The four single-probe closed forms."""
    if not 0 <= param <= 1:
        raise QfiError(f"parameter must lie in [0, 1], got {param}")
    if kind == "ad":
        return 2 * (1 - param) / (2 - param) if assisted else 1 - param
    if kind == "depol":
        return 2 * (1 - param) ** 2 / (2 - param) if assisted else (1 - param) ** 2
    raise QfiError(f"unknown channel kind {kind!r}")


def two_probe_collective_ad_qfi(eta, phi):
    """Published two-probe collective closed form, evaluated exactly as printed."""
    if not 0 <= eta <= 1:
        raise QfiError(f"eta must lie in [0, 1], got {eta}")
    a = (eta - 1) ** 2
    b = (eta - 2) * eta
    num = 8 * a * (2 * a * np.cos(8 * phi) + b * (b + 2) + 2)
    return num / (b + 2) ** 3


def _embed(op, pos, n):
    out = np.array([[1.0 + 0j]])
    for q in range(n):
        out = np.kron(out, op if q == pos else np.eye(2))
    return out


def two_probe_sld_oracle(eta, phi):
    """Independent check of the two-probe curve: SLD QFI of the four-qubit
    probe-ancilla state with phase plus decay on both probes."""
    fam = PhaseChannelFamily(amplitude_damping(eta))
    ks = fam.kraus_at(phi)
    dks = fam.dkraus_at(phi)
    psi = np.zeros(16, dtype=complex)
    psi[0] = psi[15] = 1 / np.sqrt(2)
    rho0 = np.outer(psi, psi.conj())
    # probes sit at qubit positions 0 and 2
    ops, dops = [], []
    for i, (k1, dk1) in enumerate(zip(ks, dks)):
        a1, da1 = _embed(k1, 0, 4), _embed(dk1, 0, 4)
        for j, (k2, dk2) in enumerate(zip(ks, dks)):
            a2, da2 = _embed(k2, 2, 4), _embed(dk2, 2, 4)
            ops.append(a1 @ a2)
            dops.append(da1 @ a2 + a1 @ da2)
    rho = sum(a @ rho0 @ a.conj().T for a in ops)
    drho = sum(da @ rho0 @ a.conj().T + a @ rho0 @ da.conj().T
               for a, da in zip(ops, dops))
    result, _ = sld_qfi(rho, drho)
    return result.value


def _rotation_lstsq(ks, dks, s):
    """Exact minimization over Hermitian h of sum_i ||(dK_i - i h_ij K_j) S||_F^2.

    The objective is a convex quadratic in h's real parameters, so the optimum
    is a linear least-squares problem. Returns (4 * minimum, optimal params).
    """
    m = len(ks)
    blocks_d = [(dk @ s).ravel() for dk in dks]
    blocks_k = [(k @ s).ravel() for k in ks]
    nb = blocks_d[0].size
    b = np.concatenate(blocks_d)
    cols = []
    for i in range(m):
        col = np.zeros(m * nb, dtype=complex)
        col[i * nb:(i + 1) * nb] = 1j * blocks_k[i]
        cols.append(col)
    for a in range(m):
        for c in range(a + 1, m):
            col = np.zeros(m * nb, dtype=complex)
            col[a * nb:(a + 1) * nb] = 1j * blocks_k[c]
            col[c * nb:(c + 1) * nb] = 1j * blocks_k[a]
            cols.append(col)
            col = np.zeros(m * nb, dtype=complex)
            col[a * nb:(a + 1) * nb] = -blocks_k[c]
            col[c * nb:(c + 1) * nb] = blocks_k[a]
            cols.append(col)
    amat = np.stack(cols, axis=1)
    areal = np.vstack([amat.real, amat.imag])
    breal = np.concatenate([b.real, b.imag])
    x, res, _, _ = np.linalg.lstsq(areal, breal, rcond=None)
    r = breal - areal @ x
    return 4 * float(r @ r), x


def _bloch_ket(theta, beta):
    return np.array([np.cos(theta / 2), np.exp(1j * beta) * np.sin(theta / 2)])


def _bloch_vector(theta, beta):
    return np.array([np.sin(theta) * np.cos(beta),
                     np.sin(theta) * np.sin(beta),
                     np.cos(theta)])


def channel_qfi_minimax(fam, extended=True, phi0=0.0, grid=64):
    """Channel QFI by minimizing over equivalent Kraus representations.

    extended=True: the ancilla-assisted value, evaluated at the balanced
    maximally entangled probe, where the representation optimum is an exact
    least-squares solve. extended=False: maximum over pure single-probe
    inputs of the inner representation minimum (coarse Bloch grid, then
    simplex refinement).
    """
    ks = fam.kraus_at(phi0)
    dks = fam.dkraus_at(phi0)
    m = len(ks)
    if extended:
        s = np.eye(2) / np.sqrt(2)
        value, x = _rotation_lstsq(ks, dks, s)
        return QfiResult(value=value, method="minimax",
                         optimal_h=GeneratorH(herm_from_params(x, m)))

    def inner(theta, beta):
        return _rotation_lstsq(ks, dks, _bloch_ket(theta, beta)[:, None])

    thetas = np.linspace(0, np.pi, grid)
    betas = np.linspace(0, 2 * np.pi, grid, endpoint=False)
    best = (-1.0, 0.0, 0.0)
    for t in thetas:
        for bt in betas:
            val, _ = inner(t, bt)
            if val > best[0] + 1e-12:
                best = (val, t, bt)
            elif abs(val - best[0]) <= 1e-12:
                # degenerate maxima: keep the lexicographically smallest Bloch vector
                if tuple(np.round(_bloch_vector(t, bt), 9)) < tuple(
                        np.round(_bloch_vector(best[1], best[2]), 9)):
                    best = (best[0], t, bt)
    ref = minimize(lambda ang: -inner(ang[0], ang[1])[0], x0=[best[1], best[2]],
                   method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-12, "maxfev": 400})
    theta, beta = (ref.x if -ref.fun >= best[0] else (best[1], best[2]))
    value, x = inner(theta, beta)
    ket = _bloch_ket(theta, beta)
    return QfiResult(value=value, method="minimax",
                     optimal_input=np.outer(ket, ket.conj()),
                     optimal_h=GeneratorH(herm_from_params(x, m)))


def channel_qfi_supremum(fam, phi0=0.0, seed=0, budget=20000):
    """Worst-representation spectral bound: min over Hermitian h of
    4 * lambda_max(sum_i dtK_i^dag dtK_i), by multi-start simplex descent.

    This is the channel QFI maximized over all (arbitrarily entangled)
    inputs; for some channels it exceeds the balanced-probe value that
    channel_qfi_minimax returns.
    """
    ks = [np.asarray(k) for k in fam.kraus_at(phi0)]
    dks = [np.asarray(k) for k in fam.dkraus_at(phi0)]
    m = len(ks)
    n = m * m
    karr = np.stack(ks)
    dkarr = np.stack(dks)
    evals = 0
    trace = []

    def f(x):
        nonlocal evals
        evals += 1
        h = herm_from_params(x, m)
        rot = dkarr - 1j * np.einsum('ij,jkl->ikl', h, karr)
        c = np.einsum('ilk,ilm->km', rot.conj(), rot)
        val = 4 * np.linalg.eigvalsh(c)[-1]
        trace.append(min(val, trace[-1]) if trace else val)
        return val

    def descend(x0, scale, maxfev):
        simplex = np.vstack([x0, x0 + scale * np.eye(n)])
        res = minimize(f, x0, method="Nelder-Mead",
                       options={"initial_simplex": simplex, "adaptive": n > 4,
                                "maxfev": maxfev, "xatol": 1e-12, "fatol": 1e-14})
        return res.x, res.fun

    rng = np.random.default_rng(seed)
    starts = [np.zeros(n)] + [rng.standard_normal(n) * 0.5 for _ in range(8)]
    best_x, best_val = None, np.inf
    share = budget // (2 * len(starts))
    for x0 in starts:
        x, val = descend(x0, 0.5, share)
        if val < best_val:
            best_x, best_val = x, val
    scale = 0.1
    while evals < budget:
        x, val = descend(best_x, scale, min(2000, budget - evals))
        if val < best_val:
            best_x, best_val = x, val
        scale = max(scale * 0.3, 1e-7)
        if len(trace) > 50 and trace[-51] - trace[-1] < 1e-10:
            break
    if len(trace) > 50 and trace[-51] - trace[-1] > 1e-8:
        raise ConvergenceError(
            f"objective still moving by {trace[-51] - trace[-1]:.2e} after {evals} evaluations")
    return QfiResult(value=float(best_val), method="minimax",
                     optimal_h=GeneratorH(herm_from_params(best_x, m)))


_MATRIX_ELEMENT_TERMS = {
    "ad_single": (2, [(0, 1)]),
    "depol_single": (2, [(0, 1)]),
    "ad_assisted": (4, [(0, 3)]),
    "depol_assisted": (4, [(0, 3), (1, 2)]),
}


def qfi_from_matrix_elements(rho, kind):
    """Coherence-over-population shortcut formulas for the optimized QFI."""
    try:
        dim, terms = _MATRIX_ELEMENT_TERMS[kind]
    except KeyError:
        raise QfiError(f"unknown kind {kind!r}") from None
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (dim, dim):
        raise QfiError(f"kind {kind!r} expects a {dim}x{dim} state, got {rho.shape}")
    total = 0.0
    for i, j in terms:
        pop = rho[i, i].real + rho[j, j].real
        if pop > 1e-14:
            total += (2 * abs(rho[i, j])) ** 2 / pop
    return total


def cramer_rao(j, nu):
    """Phase-deviation lower bound 1/sqrt(nu * J)."""
    if j <= 0:
        raise QfiError(f"information must be positive, got {j}")
    if nu < 1:
        raise QfiError("repetition count must be at least 1")
    return 1 / np.sqrt(nu * j)
