"""Jones-calculus simulation of beam-displacer interferometer networks on a
polarization x lateral-mode space (with an optional longitudinal spectator),
plus the two published channel constructions and their angle solver.

Basis layout: index = (pol * n_lateral + lateral) * n_longitudinal + s with
pol 0 = H, pol 1 = V. Beam displacers shift the H component cyclically through
the lateral modes and transmit V unchanged.
"""
from dataclasses import dataclass

import numpy as np

from .channels import KrausChannel, kraus_from_choi

POL_SECTORS = "polarization"


class OpticsError(ValueError):
    pass


def jones_hwp(theta):
    """Half-wave plate at angle theta."""
    c, s = np.cos(2 * theta), np.sin(2 * theta)
    return np.array([[c, s], [s, -c]], dtype=complex)


def jones_qwp(theta):
    """Quarter-wave plate at angle theta.

    Convention fixed so that QWP(0) followed by HWP(pi/8) maps the two
    circular states (|H> -+ i|V>)/sqrt2 onto |H> and |V> up to phase.
    """
    c, s = np.cos(theta), np.sin(theta)
    rot = np.array([[c, -s], [s, c]], dtype=complex)
    return rot @ np.diag([1.0, 1j]) @ rot.conj().T


@dataclass(frozen=True)
class ModeSpace:
    n_lateral: int
    n_longitudinal: int = 1
    n_pol: int = 2

    def __post_init__(self):
        if self.n_pol != 2:
            raise OpticsError("polarization dimension is fixed at 2")
        if not 1 <= self.n_lateral <= 4:
            raise OpticsError(f"n_lateral must lie in 1..4, got {self.n_lateral}")
        if self.n_longitudinal not in (1, 2):
            raise OpticsError(f"n_longitudinal must be 1 or 2, got {self.n_longitudinal}")
        if self.dim > 16:
            raise OpticsError("mode-space dimension exceeds 16")

    @property
    def dim(self):
        return self.n_pol * self.n_lateral * self.n_longitudinal

    def index(self, pol, lateral, s=0):
        return (pol * self.n_lateral + lateral) * self.n_longitudinal + s


@dataclass(frozen=True)
class OpticalElement:
    kind: str                 # hwp | qwp | bd | nbs | dephase | phase | postselect
    angle: float = None       # hwp, qwp, phase
    modes: tuple = None       # lateral targets for plates and phase
    direction: int = None     # bd
    pair: tuple = None        # nbs
    partition: object = None  # dephase: tuple of lateral tuples, or "polarization"
    keep: tuple = None        # postselect

    def to_json(self):
        out = {"kind": self.kind}
        for name in ("angle", "modes", "direction", "pair", "partition", "keep"):
            val = getattr(self, name)
            if val is not None:
                out[name] = list(val) if isinstance(val, tuple) else val
        return out


def hwp(angle, modes=None):
    return OpticalElement("hwp", angle=float(angle),
                          modes=None if modes is None else tuple(modes))


def qwp(angle, modes=None):
    return OpticalElement("qwp", angle=float(angle),
                          modes=None if modes is None else tuple(modes))


def bd(direction=1):
    if direction not in (1, -1):
        raise OpticsError("beam displacer direction must be +1 or -1")
    return OpticalElement("bd", direction=direction)


def nbs(a, b):
    return OpticalElement("nbs", pair=(int(a), int(b)))


def dephase(partition=None):
    """Erase coherences between blocks.

    partition: iterable of disjoint lateral-mode groups covering every lateral
    mode, the string "polarization" for the two polarization sectors, or None
    for one block per lateral mode.
    """
    if partition is None or partition == POL_SECTORS:
        return OpticalElement("dephase", partition=partition)
    return OpticalElement("dephase",
                          partition=tuple(tuple(int(l) for l in part) for part in partition))


def phase(angle, modes=None):
    return OpticalElement("phase", angle=float(angle),
                          modes=None if modes is None else tuple(modes))


def postselect(keep):
    return OpticalElement("postselect", keep=tuple(keep))


@dataclass(frozen=True)
class OpticalNetwork:
    space: ModeSpace
    elements: tuple

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))

    def to_json(self):
        return {"n_lateral": self.space.n_lateral,
                "n_longitudinal": self.space.n_longitudinal,
                "elements": [e.to_json() for e in self.elements]}


def _plate_unitary(space, jones, modes):
    laterals = range(space.n_lateral) if modes is None else modes
    u = np.eye(space.dim, dtype=complex)
    for lat in laterals:
        for s in range(space.n_longitudinal):
            a, b = space.index(0, lat, s), space.index(1, lat, s)
            u[a, a], u[a, b] = jones[0, 0], jones[0, 1]
            u[b, a], u[b, b] = jones[1, 0], jones[1, 1]
    return u


def element_unitary(space, elem):
    """Unitary matrix of a non-decohering element on the full mode space."""
    if elem.kind == "hwp":
        return _plate_unitary(space, jones_hwp(elem.angle), elem.modes)
    if elem.kind == "qwp":
        return _plate_unitary(space, jones_qwp(elem.angle), elem.modes)
    if elem.kind == "phase":
        laterals = range(space.n_lateral) if elem.modes is None else elem.modes
        u = np.eye(space.dim, dtype=complex)
        for lat in laterals:
            for pol in (0, 1):
                for s in range(space.n_longitudinal):
                    i = space.index(pol, lat, s)
                    u[i, i] = np.exp(1j * elem.angle)
        return u
    if elem.kind == "bd":
        u = np.zeros((space.dim, space.dim), dtype=complex)
        n = space.n_lateral
        for lat in range(n):
            for s in range(space.n_longitudinal):
                u[space.index(0, (lat + elem.direction) % n, s), space.index(0, lat, s)] = 1
                u[space.index(1, lat, s), space.index(1, lat, s)] = 1
        return u
    if elem.kind == "nbs":
        a, b = elem.pair
        u = np.eye(space.dim, dtype=complex)
        r = 1 / np.sqrt(2)
        for pol in (0, 1):
            for s in range(space.n_longitudinal):
                ia, ib = space.index(pol, a, s), space.index(pol, b, s)
                u[ia, ia], u[ia, ib] = r, r
                u[ib, ia], u[ib, ib] = r, -r
        return u
    raise OpticsError(f"element {elem.kind} has no unitary form")


def _dephase_sectors(space, elem):
    if elem.partition == POL_SECTORS:
        return [[space.index(pol, lat, s) for lat in range(space.n_lateral)
                 for s in range(space.n_longitudinal)] for pol in (0, 1)]
    parts = elem.partition
    if parts is None:
        parts = [[lat] for lat in range(space.n_lateral)]
    flat = sorted(l for part in parts for l in part)
    if flat != list(range(space.n_lateral)):
        raise OpticsError("dephase partition must cover each lateral mode exactly once")
    return [[space.index(pol, lat, s) for pol in (0, 1) for lat in part
             for s in range(space.n_longitudinal)] for part in parts]


def _run_raw(net, full):
    """Trace-nonincreasing linear map of the network on a full-space matrix."""
    space = net.space
    for elem in net.elements:
        if elem.kind == "dephase":
            out = np.zeros_like(full)
            for sector in _dephase_sectors(space, elem):
                ix = np.ix_(sector, sector)
                out[ix] += full[ix]
            full = out
        elif elem.kind == "postselect":
            keep = [space.index(pol, lat, s) for pol in (0, 1) for lat in elem.keep
                    for s in range(space.n_longitudinal)]
            proj = np.zeros((space.dim, space.dim))
            proj[keep, keep] = 1
            full = proj @ full @ proj
        else:
            u = element_unitary(space, elem)
            full = u @ full @ u.conj().T
    return full


def _embed(net, small):
    space = net.space
    nl = space.n_longitudinal
    full = np.zeros((space.dim, space.dim), dtype=complex)
    for p in (0, 1):
        for q in (0, 1):
            for s in range(nl):
                for t in range(nl):
                    full[space.index(p, 0, s), space.index(q, 0, t)] = small[p * nl + s, q * nl + t]
    return full


def _reduce(net, full):
    space = net.space
    nl = space.n_longitudinal
    small = np.zeros((2 * nl, 2 * nl), dtype=complex)
    for p in (0, 1):
        for q in (0, 1):
            for s in range(nl):
                for t in range(nl):
                    small[p * nl + s, q * nl + t] = sum(
                        full[space.index(p, lat, s), space.index(q, lat, t)]
                        for lat in range(space.n_lateral))
    return small


def apply_network(net, rho_in):
    """Send a polarization (x longitudinal) state through the network.

    Returns (rho_out, success_probability); the output is renormalized and the
    postselection losses are reported in the probability, never hidden.
    """
    rho_in = np.asarray(rho_in, dtype=complex)
    d = 2 * net.space.n_longitudinal
    if rho_in.shape != (d, d):
        raise OpticsError(f"input must be {d}x{d} for this network")
    out = _run_raw(net, _embed(net, rho_in))
    success = np.trace(out).real
    if success < 1e-15:
        raise OpticsError("postselection removed the entire state")
    return _reduce(net, out) / success, float(success)


def network_unitary(net, skip_dephase=False):
    """Product of the element unitaries, in order.

    Raises on postselection always, and on dephasing unless skip_dephase.
    """
    u = np.eye(net.space.dim, dtype=complex)
    for elem in net.elements:
        if elem.kind == "postselect":
            raise OpticsError("network contains a postselection")
        if elem.kind == "dephase":
            if skip_dephase:
                continue
            raise OpticsError("network contains a dephasing element")
        u = element_unitary(net.space, elem) @ u
    return u


def extract_channel(net, tol=1e-12):
    """Recover the polarization channel a network realizes.

    Runs the four basis operators through the unnormalized map, assembles the
    Choi matrix, divides out the success probability, and eigendecomposes to
    Kraus form. The returned channel satisfies completeness; failures signal a
    network construction bug.
    """
    if net.space.n_longitudinal != 1:
        raise OpticsError("channel extraction needs a pure polarization network")
    # Choi layout C[(i, k), (j, l)] = map(|i><j|)[k, l]
    c = np.zeros((4, 4), dtype=complex)
    for i in (0, 1):
        for j in (0, 1):
            e = np.zeros((2, 2), dtype=complex)
            e[i, j] = 1
            c[i * 2:i * 2 + 2, j * 2:j * 2 + 2] = _reduce(net, _run_raw(net, _embed(net, e)))
    success = np.trace(c).real / 2
    if success <= 0:
        raise OpticsError("network blocks every input")
    ops = kraus_from_choi(c / success, tol=tol)
    return KrausChannel(tuple(ops), label="extracted"), float(success)


def build_ad_network(eta):
    """Dual-interferometer decay channel on three lateral modes.

    Splits the polarizations, rotates the transmitted arm by theta_A with
    cos(2 theta_A) = -sqrt(1 - eta), recombines, erases the inter-branch
    coherence, and closes with a balanced recombination stage postselected on
    its bright port (probability 1/2).
    """
    if not 0 <= eta <= 1:
        raise OpticsError(f"eta must lie in [0, 1], got {eta}")
    theta_a = 0.5 * np.arccos(-np.sqrt(1 - eta))
    elements = (
        bd(+1),
        hwp(np.pi / 4, [1]),
        hwp(theta_a, [0]),
        bd(+1),
        dephase(POL_SECTORS),
        hwp(3 * np.pi / 8, [0, 1]),
        bd(+1),
        hwp(np.pi / 4, [1]),
        postselect([1]),
    )
    return OpticalNetwork(ModeSpace(n_lateral=3), elements)


def solve_pauli_angles(p):
    """Closed-form wave-plate angles for the four-branch Pauli mixer.

    Successive inversion of the eight signed amplitude equations; negative
    probabilities from roundoff are clamped to zero first. theta_6 can leave
    the principal quarter-wave range, which is the sign-resolving branch.
    """
    p0, p1, p2, p3 = (max(float(x), 0.0) for x in p)
    r = np.sqrt
    return (0.5 * np.arctan2(r(p1), r(1 - p1)),
            0.5 * np.arctan2(r(p2), r(1 - p2)),
            0.5 * np.arctan2(r(p0), r(p2 + p3)),
            0.5 * np.arctan2(-r(p3), r(p0 + p1)),
            0.5 * np.arctan2(r(p3), r(p2)),
            0.5 * np.arctan2(r(p0), -r(p1)))


def pauli_angle_residuals(p, angles):
    """The eight signed equations the six angles must satisfy."""
    p0, p1, p2, p3 = p
    c = [np.cos(2 * t) for t in angles]
    s = [np.sin(2 * t) for t in angles]
    r = np.sqrt
    return np.array([
        c[0] * s[2] - r(p0), c[1] * c[3] * s[5] - r(p0),
        s[0] - r(p1), -c[1] * c[3] * c[5] - r(p1),
        c[0] * c[2] * c[4] - r(p2), s[1] - r(p2),
        c[0] * c[2] * s[4] - r(p3), -c[1] * s[3] - r(p3),
    ])


def build_pauli_network(p):
    """Space-multiplexed Pauli mixer: five beam displacers route the four
    branch amplitudes onto separate lateral modes, per-branch plates implement
    the Pauli conjugations, and two balanced couplers recombine after the
    branches are made incoherent. Postselected with probability 1/2.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (4,) or p.min() < -1e-12 or abs(p.sum() - 1) > 1e-9:
        raise OpticsError(f"invalid probability vector {p}")
    th1, th2, th3, th4, th5, th6 = solve_pauli_angles(p)
    elements = (
        bd(+1),
        hwp(th1, [1]), hwp(th2, [0]),
        bd(+1),
        hwp(th3, [2]), hwp(th4, [0]),
        bd(+1),
        hwp(th5, [3]), hwp(th6, [0]),
        bd(+1),
        hwp(np.pi / 4, [0]),
        bd(+1),
        hwp(0.0, [0]),                        # branch carrying the Y flip
        hwp(np.pi / 4, [2]),                  # identity branch correction
        hwp(np.pi / 4, [3]), hwp(0.0, [3]),   # Z branch correction
        dephase([[0], [1], [2], [3]]),
        nbs(0, 1),
        nbs(2, 3),
        postselect([0, 2]),
    )
    return OpticalNetwork(ModeSpace(n_lateral=4), elements)
