"""
Linear optics, loss channels, atom-photon conversion and threshold detection.

Passive elements act on creation operators, a_k^dag -> sum_j U[j, k] b_j^dag,
and are expanded term by term over the sparse state.
"""

import cmath
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

import config
from .common import ConfigError, FockError, ModeError, TruncationError
from .fock import (
    FockState, MixedState, ModeId, ModeKind, ModeRef, Occupation, Polarization,
    as_mixed, mode_label,
)

StateLike = Union[FockState, MixedState]


def _check_probability(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"{name}: must lie in [0, 1], got {value}")


def _expand(occ: Sequence[int], matrix: np.ndarray) -> Dict[Occupation, complex]:
    """Output occupations and coefficients for one input Fock term."""
    k = len(occ)
    poly: Dict[Occupation, complex] = {tuple([0] * k): 1.0 + 0j}
    for src, count in enumerate(occ):
        for _ in range(count):
            grown: Dict[Occupation, complex] = {}
            for out, coeff in poly.items():
                for dst in range(k):
                    u = matrix[dst, src]
                    if u == 0:
                        continue
                    bumped = out[:dst] + (out[dst] + 1,) + out[dst + 1:]
                    grown[bumped] = grown.get(bumped, 0j) + coeff * u
            poly = grown
    norm_in = math.prod(math.factorial(n) for n in occ)
    return {
        out: coeff * math.sqrt(math.prod(math.factorial(m) for m in out) / norm_in)
        for out, coeff in poly.items()
    }


def apply_linear_optics(state: FockState, modes: Sequence[ModeRef], matrix) -> FockState:
    """Apply a k-mode passive unitary to the listed modes of a pure state."""
    matrix = np.asarray(matrix, dtype=complex)
    k = len(modes)
    if matrix.shape != (k, k):
        raise FockError(f"matrix shape {matrix.shape} does not match {k} modes")
    if not np.allclose(matrix.conj().T @ matrix, np.eye(k), atol=config.NORM_TOLERANCE):
        raise FockError("linear optics matrix is not unitary")
    idx = [state.index(m) for m in modes]
    if len(set(idx)) != k:
        raise ModeError(f"modes must be distinct: {[mode_label(m) for m in modes]}")

    out: Dict[Occupation, complex] = {}
    cache: Dict[Occupation, Dict[Occupation, complex]] = {}
    for occ, amp in state.amplitudes.items():
        local = tuple(occ[i] for i in idx)
        if local not in cache:
            cache[local] = _expand(local, matrix)
        for new_local, coeff in cache[local].items():
            new = list(occ)
            for i, n in zip(idx, new_local):
                new[i] = n
            key = tuple(new)
            out[key] = out.get(key, 0j) + amp * coeff

    # interference may cancel terms that would otherwise overflow
    for occ, amp in out.items():
        if abs(amp) >= config.AMPLITUDE_TOLERANCE and max(occ, default=0) > state.n_max:
            raise TruncationError(
                f"occupation {occ} over {list(state.labels)} exceeds N_max={state.n_max}")
    return FockState(state.modes, {o: a for o, a in out.items() if abs(a) >= config.AMPLITUDE_TOLERANCE},
                     state.n_max)


def beamsplitter_matrix(phase: float = 0.0) -> np.ndarray:
    e = cmath.exp(1j * phase)
    return np.array([[1.0, e], [1.0, -e]], dtype=complex) / math.sqrt(2.0)


def apply_beamsplitter(state: StateLike, a: ModeRef, b: ModeRef, phase: float = 0.0) -> StateLike:
    """50/50 beam splitter: a -> (a + e^{i phase} b)/sqrt(2), b -> (a - e^{i phase} b)/sqrt(2)."""
    matrix = beamsplitter_matrix(phase)
    if isinstance(state, MixedState):
        return state.map(lambda s: apply_linear_optics(s, [a, b], matrix))
    return apply_linear_optics(state, [a, b], matrix)


def apply_phase(state: StateLike, mode: ModeRef, phase: float) -> StateLike:
    """Phase shifter: each photon in `mode` picks up e^{i phase}."""
    if isinstance(state, MixedState):
        return state.map(lambda s: apply_phase(s, mode, phase))
    i = state.index(mode)
    return state.map_terms(lambda occ, amp: amp * cmath.exp(1j * phase * occ[i]))


def _port(state: FockState, port: Tuple[ModeRef, ModeRef]) -> Tuple[ModeId, ModeId]:
    h, v = state.mode(port[0]), state.mode(port[1])
    if h.polarization != Polarization.H or v.polarization != Polarization.V:
        raise ModeError(f"port ({h.label}, {v.label}) must be a photonic (H, V) pair")
    return h, v


def apply_polarization_flip(state: StateLike, port: Tuple[ModeRef, ModeRef]) -> StateLike:
    """Half-wave plate at 45 degrees: swaps H and V of one spatial port."""
    if isinstance(state, MixedState):
        return state.map(lambda s: apply_polarization_flip(s, port))
    h, v = _port(state, port)
    return apply_linear_optics(state, [h, v], [[0, 1], [1, 0]])


def apply_pbs(state: StateLike, in_a: Tuple[ModeRef, ModeRef], in_b: Tuple[ModeRef, ModeRef],
              basis: str = "HV") -> StateLike:
    """
    Polarizing beam splitter between spatial ports a and b.

    HV basis transmits H and swaps the V modes between ports. The diag basis
    does the same for |+>/|->, implemented as a rotation into the diagonal basis,
    the HV routing and the inverse rotation (the rotation is its own inverse).
    Output port modes keep the labels of the input port modes.
    """
    if isinstance(state, MixedState):
        return state.map(lambda s: apply_pbs(s, in_a, in_b, basis))
    if basis not in ("HV", "diag"):
        raise ConfigError(f"basis: expected 'HV' or 'diag', got {basis!r}")
    a_h, a_v = _port(state, in_a)
    b_h, b_v = _port(state, in_b)
    if basis == "diag":
        state = apply_beamsplitter(apply_beamsplitter(state, a_h, a_v), b_h, b_v)
    state = apply_linear_optics(state, [a_v, b_v], [[0, 1], [1, 0]])
    if basis == "diag":
        state = apply_beamsplitter(apply_beamsplitter(state, a_h, a_v), b_h, b_v)
    return state


def loss_matrix(eta: float) -> np.ndarray:
    t, r = math.sqrt(eta), math.sqrt(1.0 - eta)
    return np.array([[t, -r], [r, t]])


def apply_loss(state: StateLike, mode: ModeRef, eta: float) -> MixedState:
    """
    Transmissivity-eta loss: couple `mode` to a fresh ancilla on a beam splitter
    and trace the ancilla out.
    """
    _check_probability("eta", eta)
    if isinstance(state, MixedState):
        return state.flat_map(lambda s: apply_loss(s, mode, eta))
    if eta == 1.0:
        return MixedState.pure(state)

    target = state.mode(mode)
    ancilla = target.renamed(f"{target.label}.loss")
    if state.has_mode(ancilla):
        raise ModeError(f"loss ancilla {ancilla.label} already registered")
    coupled = apply_linear_optics(state.add_modes([ancilla]), [target, ancilla], loss_matrix(eta))
    _, mixed = MixedState.from_unnormalized(
        (1.0, piece) for piece in coupled.partition([ancilla]).values())
    return mixed


def convert_excitation(state: StateLike, ensemble: str, eta: float,
                       photon_mode: Optional[ModeId] = None) -> MixedState:
    """
    T -> S conversion with emission of one photon per converted excitation.

    Each T excitation converts with probability eta. Failures leave the
    excitation in T; the failure count is recorded on an ancilla and traced
    out, so failed and converted components are incoherent.
    """
    _check_probability("eta_e1", eta)
    if isinstance(state, MixedState):
        return state.flat_map(lambda s: convert_excitation(s, ensemble, eta, photon_mode))

    t_mode = state.mode(ModeId.atomic_t(ensemble))
    s_mode = ModeId.atomic_s(ensemble)
    photon = photon_mode or ModeId.photon(f"{ensemble}.photon")
    record = ModeId(f"{ensemble}.failed", ModeKind.ATOMIC_T)

    extra = [m for m in (s_mode, photon) if not state.has_mode(m)]
    state = state.add_modes(extra + [record])
    it, i_s, ip, ir = (state.index(m) for m in (t_mode, s_mode, photon, record))

    out: Dict[Occupation, complex] = {}
    for occ, amp in state.amplitudes.items():
        if occ[i_s] or occ[ip]:
            raise FockError(f"{s_mode.label} and {photon.label} must be empty before conversion")
        n = occ[it]
        for k in range(n + 1):
            p = math.comb(n, k) * eta ** k * (1.0 - eta) ** (n - k)
            if p == 0.0:
                continue
            new = list(occ)
            new[it], new[i_s], new[ip], new[ir] = n - k, k, k, n - k
            key = tuple(new)
            out[key] = out.get(key, 0j) + amp * math.sqrt(p)
    emitted = FockState(state.modes, out, state.n_max)
    _, mixed = MixedState.from_unnormalized(
        (1.0, piece) for piece in emitted.partition([record]).values())
    return mixed


def retrieve(state: StateLike, ensemble: str, photon_mode: ModeId, eta: float) -> MixedState:
    """Map the S excitation of `ensemble` onto a photonic mode with efficiency eta."""
    if photon_mode.kind != ModeKind.PHOTONIC:
        raise ModeError(f"{photon_mode.label}: retrieval target must be photonic")
    s_label = ModeId.atomic_s(ensemble).label
    mixed = as_mixed(state).map(lambda s: s.relabel({s_label: photon_mode}))
    return apply_loss(mixed, photon_mode, eta)


@dataclass(frozen=True)
class DetectorModel:
    """Threshold detector: reports click / no click, never the photon number."""
    efficiency: float = 1.0
    dark_count_prob: float = 0.0
    number_resolving: bool = field(default=False, init=False)

    def __post_init__(self):
        _check_probability("detector.efficiency", self.efficiency)
        _check_probability("detector.dark_count_prob", self.dark_count_prob)

    def no_click_probability(self, n: int) -> float:
        return (1.0 - self.dark_count_prob) * (1.0 - self.efficiency) ** n

    def click_probability(self, n: int) -> float:
        return 1.0 - self.no_click_probability(n)


@dataclass(frozen=True)
class ClickOutcome:
    pattern: int                  # bit i set when detector i clicked
    probability: float
    state: Optional[MixedState]   # conditional state of the unmeasured modes

    def clicked(self, i: int) -> bool:
        return bool(self.pattern >> i & 1)


def measure_clicks(state: StateLike,
                   detectors: Sequence[Tuple[ModeRef, DetectorModel]]) -> List[ClickOutcome]:
    """
    Enumerate every click pattern of a set of threshold detectors.

    Returns one ClickOutcome per bitmask 0 .. 2^k - 1. Measured modes are
    removed from the conditional states.
    """
    mixed = as_mixed(state)
    labels = [mode_label(m) for m, _ in detectors]
    if len(set(labels)) != len(labels):
        raise ModeError(f"each mode can be measured once, got {labels}")
    for label in labels:
        if label not in mixed.labels:
            raise ModeError(f"detector mode {label} is not registered")
    models = [d for _, d in detectors]
    k = len(detectors)

    contributions: List[List[Tuple[float, FockState]]] = [[] for _ in range(2 ** k)]
    for weight, branch in mixed.branches:
        for occ, piece in branch.partition(labels).items():
            q = piece.norm() ** 2
            no_click = [d.no_click_probability(n) for d, n in zip(models, occ)]
            for pattern in range(2 ** k):
                p = 1.0
                for i in range(k):
                    p *= (1.0 - no_click[i]) if pattern >> i & 1 else no_click[i]
                if p > 0.0:
                    contributions[pattern].append((weight * p, piece))

    outcomes = []
    for pattern, pieces in enumerate(contributions):
        prob, post = MixedState.from_unnormalized(pieces)
        outcomes.append(ClickOutcome(pattern, prob, post.merged() if post else None))
    return outcomes
