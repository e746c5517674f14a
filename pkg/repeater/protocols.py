"""
Heralded protocol stages built on the Fock engine.

A "polarization" maximally entangled (PME) state lives on four ensembles laid
out as PmeLayout(x1, x2, y1, y2):

    PME(+/-) = (S_x1 S_y2 +/- S_x2 S_y1)|vac> / sqrt(2)

Every stage here ends in a click pattern. The SIGNS tables below map each
accepted pattern (detector names, in detector order) to the relative sign the
pattern imprints; a negative sign is undone by a pi phase on one mode.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import config
from .common import ConfigError, ModeError, NotPMEError, log
from .fock import FockState, MixedState, ModeId, ModeKind, Polarization, as_mixed
from .optics import (
    DetectorModel, apply_beamsplitter, apply_loss, apply_pbs, apply_phase,
    apply_polarization_flip, convert_excitation, measure_clicks, retrieve,
)

StateLike = Union[FockState, MixedState]
Pattern = Tuple[str, str]

# Local PME generation: D_L+/D_L- behind the L beam splitter, D_R+/D_R- behind R.
LOCAL_PME_DETECTORS = ("D_L+", "D_L-", "D_R+", "D_R-")
LOCAL_PME_SIGNS: Dict[Pattern, int] = {
    ("D_L+", "D_R+"): +1,
    ("D_L+", "D_R-"): -1,
    ("D_L-", "D_R+"): -1,
    ("D_L-", "D_R-"): +1,
}

# Two-photon BSM of the basic link: D1/D2 analyze port a, D3/D4 port b in the +/- basis.
BASIC_LINK_DETECTORS = ("D1", "D2", "D3", "D4")
BASIC_LINK_SIGNS: Dict[Pattern, int] = {
    ("D1", "D3"): +1,
    ("D1", "D4"): -1,
    ("D2", "D3"): -1,
    ("D2", "D4"): +1,
}

# Swapping: D1/D2 behind the first beam splitter, D3/D4 behind the second.
SWAP_DETECTORS = ("D1", "D2", "D3", "D4")
SWAP_SIGNS: Dict[Pattern, int] = dict(BASIC_LINK_SIGNS)

# Teleportation: sign of the R1 amplitude relative to R2, times the PME sign.
TELEPORT_DETECTORS = ("D_I1", "D_L1", "D_I2", "D_L2")
TELEPORT_SIGNS: Dict[Pattern, int] = {
    ("D_I1", "D_I2"): +1,
    ("D_I1", "D_L2"): -1,
    ("D_L1", "D_I2"): -1,
    ("D_L1", "D_L2"): +1,
}


@dataclass(frozen=True)
class PmeLayout:
    """Ensemble names of a PME state. Registry order is (x1, y1, x2, y2)."""
    x1: str
    x2: str
    y1: str
    y2: str

    @property
    def ensembles(self) -> Tuple[str, str, str, str]:
        return (self.x1, self.y1, self.x2, self.y2)

    @property
    def modes(self) -> List[ModeId]:
        return [ModeId.atomic_s(e) for e in self.ensembles]

    @property
    def labels(self) -> List[str]:
        return [m.label for m in self.modes]

    @classmethod
    def from_labels(cls, labels: Sequence[str]) -> "PmeLayout":
        x1, y1, x2, y2 = (label[:-len(".S")] for label in labels)
        return cls(x1=x1, x2=x2, y1=y1, y2=y2)

    @classmethod
    def from_state(cls, state: StateLike) -> "PmeLayout":
        modes = state.modes
        if len(modes) != 4 or any(m.kind != ModeKind.ATOMIC_S for m in modes):
            raise NotPMEError(f"expected four S modes, got {[m.label for m in modes]}")
        return cls.from_labels([m.label for m in modes])


def pme_state(layout: PmeLayout, sign: int = +1, n_max: int = config.DEFAULT_N_MAX) -> FockState:
    s = 1.0 / math.sqrt(2.0)
    return FockState(layout.modes, {(1, 0, 0, 1): s, (0, 1, 1, 0): sign * s}, n_max)


def pme_sign(state: StateLike, layout: Optional[PmeLayout] = None) -> int:
    """Return +1 or -1 for a PME state, raise NotPMEError otherwise."""
    layout = layout or PmeLayout.from_state(state)
    mixed = as_mixed(state)
    for sign in (+1, -1):
        target = pme_state(layout, sign, mixed.n_max)
        if mixed.fidelity(target) >= 1.0 - config.PME_FIDELITY_TOLERANCE:
            return sign
    raise NotPMEError(f"state over {list(mixed.labels)} is not a PME state")


@dataclass(frozen=True)
class HeraldedPattern:
    clicks: Pattern
    probability: float
    sign: int
    state: Optional[MixedState]       # conditional state before correction
    corrected: Optional[MixedState]

    @property
    def correction(self) -> str:
        return "none" if self.sign > 0 else "pi-phase"


@dataclass(frozen=True)
class HeraldResult:
    success_prob: float
    patterns: Tuple[HeraldedPattern, ...]
    correction_mode: str
    output_labels: Tuple[str, ...]

    @property
    def state(self) -> Optional[MixedState]:
        """Accepted output after correction, averaged over accepted patterns."""
        branches = [
            (p.probability / self.success_prob * v, b)
            for p in self.patterns if p.corrected is not None
            for v, b in p.corrected.branches
        ]
        if not branches:
            return None
        return MixedState(branches).merged()

    def pattern(self, clicks: Pattern) -> HeraldedPattern:
        for p in self.patterns:
            if p.clicks == clicks:
                return p
        raise KeyError(clicks)


def _herald(state: MixedState, detectors: Sequence[Tuple[str, str]], model: DetectorModel,
            signs: Dict[Pattern, int], keep: Sequence[str], correction_mode: str,
            base_sign: int = +1) -> HeraldResult:
    names = [name for name, _ in detectors]
    outcomes = measure_clicks(state, [(label, model) for _, label in detectors])
    accepted = []
    for outcome in outcomes:
        clicks = tuple(names[i] for i in range(len(names)) if outcome.clicked(i))
        if clicks not in signs:
            continue
        sign = base_sign * signs[clicks]
        raw = corrected = None
        if outcome.state is not None:
            raw = outcome.state.reduce(keep)
            corrected = raw if sign > 0 else apply_phase(raw, correction_mode, math.pi)
        accepted.append(HeraldedPattern(clicks, outcome.probability, sign, raw, corrected))
    total = sum(p.probability for p in accepted)
    return HeraldResult(total, tuple(accepted), correction_mode, tuple(keep))


def _eme_ensembles(eme: MixedState) -> Tuple[str, str]:
    modes = eme.modes
    if len(modes) != 2 or any(m.kind != ModeKind.ATOMIC_T for m in modes):
        raise ModeError(f"an EME state needs two T modes, got {list(eme.labels)}")
    return tuple(m.label[:-len(".T")] for m in modes)


def store_input_photon(state: FockState, left: str = "L", right: str = "R", eta: float = 1.0,
                       left_mode: str = "L_in", right_mode: str = "R_in") -> MixedState:
    """
    Store a split single photon in two ensembles with efficiency eta (eta_p * eta_s).
    Each optical mode maps onto the T mode of its ensemble through a
    transmissivity-eta channel; the result is an EME state with c0 = (1-eta)/eta.
    """
    mapped = state.relabel({left_mode: ModeId.atomic_t(left), right_mode: ModeId.atomic_t(right)})
    stored = apply_loss(mapped, ModeId.atomic_t(left), eta)
    return apply_loss(stored, ModeId.atomic_t(right), eta)


def local_pme_generation(eme1: StateLike, eme2: StateLike, eta_e1: float, eta_d: float,
                         phi_L: float = 0.0, phi_R: float = 0.0, p_d: float = 0.0) -> HeraldResult:
    """
    Project two EME states onto a PME state.

    eme1 spans (L1, R1), eme2 spans (L2, R2). All four ensembles convert T -> S
    emitting a photon; the L photons meet on one beam splitter, the R photons on
    another, and one click on each side heralds PME(+/-) over
    PmeLayout(x1=L1, x2=L2, y1=R1, y2=R2). Corrected states are PME(+).
    """
    if not math.isclose(phi_L, phi_R, abs_tol=1e-12):
        raise ConfigError(f"phi_L and phi_R must be equal, got {phi_L} and {phi_R}")
    eme1, eme2 = as_mixed(eme1), as_mixed(eme2)
    l1, r1 = _eme_ensembles(eme1)
    l2, r2 = _eme_ensembles(eme2)
    layout = PmeLayout(x1=l1, x2=l2, y1=r1, y2=r2)

    state = eme1.tensor(eme2)
    for ensemble in (l1, r1, l2, r2):
        state = convert_excitation(state, ensemble, eta_e1)
    photon = {e: f"{e}.photon" for e in (l1, r1, l2, r2)}
    state = apply_beamsplitter(state, photon[l1], photon[l2], phi_L)
    state = apply_beamsplitter(state, photon[r1], photon[r2], phi_R)

    detectors = list(zip(LOCAL_PME_DETECTORS, (photon[l1], photon[l2], photon[r1], photon[r2])))
    result = _herald(state, detectors, DetectorModel(eta_d, p_d), LOCAL_PME_SIGNS,
                     layout.labels, ModeId.atomic_s(layout.x2).label)
    log(f"Local PME over {layout.ensembles}: success probability {result.success_prob:.6g}", "DEBUG")
    return result


def _checked_layout(state: StateLike, name: str) -> Tuple[PmeLayout, int]:
    layout = PmeLayout.from_state(state)
    try:
        return layout, pme_sign(state, layout)
    except NotPMEError as e:
        raise NotPMEError(f"{name}: {e}") from e


def basic_link_generation(pme_a: StateLike, pme_b: StateLike, eta_e2: float, eta_t: float,
                          eta_d: float, channel_phase_A: float = 0.0, channel_phase_B: float = 0.0,
                          p_d: float = 0.0) -> HeraldResult:
    """
    Entangle the facing ensemble pairs of two nodes with a two-photon BSM.

    Node A sends y1 as H and y2 as V into port a, node B sends x1 as H and x2 as
    V into port b. Port b passes a half-wave plate before the PBS, so a
    coincidence behind the PBS selects the opposite-polarization pairs and the
    heralded state is PME over PmeLayout(A.x1, A.x2, B.y1, B.y2).
    """
    layout_a, sign_a = _checked_layout(pme_a, "pme_a")
    layout_b, sign_b = _checked_layout(pme_b, "pme_b")
    a_h, a_v = ModeId.photon("bsm.a.H", Polarization.H), ModeId.photon("bsm.a.V", Polarization.V)
    b_h, b_v = ModeId.photon("bsm.b.H", Polarization.H), ModeId.photon("bsm.b.V", Polarization.V)
    eta = eta_e2 * eta_t

    state = as_mixed(pme_a).tensor(as_mixed(pme_b))
    for ensemble, photon in ((layout_a.y1, a_h), (layout_a.y2, a_v),
                             (layout_b.x1, b_h), (layout_b.x2, b_v)):
        state = retrieve(state, ensemble, photon, eta)
    for photon, phase in ((a_h, channel_phase_A), (a_v, channel_phase_A),
                          (b_h, channel_phase_B), (b_v, channel_phase_B)):
        state = apply_phase(state, photon, phase)
    state = apply_polarization_flip(state, (b_h, b_v))
    state = apply_pbs(state, (a_h, a_v), (b_h, b_v), "HV")
    state = apply_beamsplitter(state, a_h, a_v)
    state = apply_beamsplitter(state, b_h, b_v)

    out = PmeLayout(x1=layout_a.x1, x2=layout_a.x2, y1=layout_b.y1, y2=layout_b.y2)
    detectors = list(zip(BASIC_LINK_DETECTORS, (a_h.label, a_v.label, b_h.label, b_v.label)))
    return _herald(state, detectors, DetectorModel(eta_d, p_d), BASIC_LINK_SIGNS, out.labels,
                   ModeId.atomic_s(out.x2).label, base_sign=sign_a * sign_b)


def entanglement_swap(pme_ab: StateLike, pme_bc: StateLike, eta_e2: float, eta_d: float,
                      phase: float = 0.0, p_d: float = 0.0) -> HeraldResult:
    """
    Join PME(A, B_L) and PME(B_R, C) into PME(A, C).

    The y pair of the first link and the x pair of the second are retrieved at
    the middle node; y1 meets x1 on one beam splitter (D1, D2) and y2 meets x2
    on another (D3, D4).
    """
    ab, sign_ab = _checked_layout(pme_ab, "pme_ab")
    bc, sign_bc = _checked_layout(pme_bc, "pme_bc")
    ports = {
        ab.y1: ModeId.photon("swap.1a"), bc.x1: ModeId.photon("swap.1b"),
        ab.y2: ModeId.photon("swap.2a"), bc.x2: ModeId.photon("swap.2b"),
    }
    state = as_mixed(pme_ab).tensor(as_mixed(pme_bc))
    for ensemble, photon in ports.items():
        state = retrieve(state, ensemble, photon, eta_e2)
    state = apply_beamsplitter(state, ports[ab.y1], ports[bc.x1], phase)
    state = apply_beamsplitter(state, ports[ab.y2], ports[bc.x2], phase)

    out = PmeLayout(x1=ab.x1, x2=ab.x2, y1=bc.y1, y2=bc.y2)
    labels = (ports[ab.y1].label, ports[bc.x1].label, ports[ab.y2].label, ports[bc.x2].label)
    result = _herald(state, list(zip(SWAP_DETECTORS, labels)), DetectorModel(eta_d, p_d),
                     SWAP_SIGNS, out.labels, ModeId.atomic_s(out.x2).label,
                     base_sign=sign_ab * sign_bc)
    log(f"Swap {ab.x1}..{bc.y2}: success probability {result.success_prob:.6g}", "DEBUG")
    return result


def unknown_state(alpha: complex, beta: complex, names: Tuple[str, str] = ("I1", "I2"),
                  n_max: int = config.DEFAULT_N_MAX) -> FockState:
    """Single excitation alpha S_I1 + beta S_I2 over two ensembles."""
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm - 1.0) > config.NORM_TOLERANCE:
        raise ConfigError(f"unknown: |alpha|^2 + |beta|^2 = {norm}, expected 1")
    modes = [ModeId.atomic_s(names[0]), ModeId.atomic_s(names[1])]
    return FockState(modes, {(1, 0): alpha, (0, 1): beta}, n_max)


def teleport(unknown: Tuple[complex, complex], pme: StateLike, eta_e2: float, eta_d: float,
             p_d: float = 0.0, names: Tuple[str, str] = ("I1", "I2")) -> HeraldResult:
    """
    Teleport alpha S_I1 + beta S_I2 onto the y pair of a PME state.

    I1 interferes with x1 (D_I1, D_L1) and I2 with x2 (D_I2, D_L2). One click
    in each pair heralds alpha S_y1 + beta S_y2 up to a pi phase on y1.
    """
    alpha, beta = unknown
    source = unknown_state(alpha, beta, names, as_mixed(pme).n_max)
    layout, sign = _checked_layout(pme, "pme")
    i1, i2 = names
    ports = {
        i1: ModeId.photon("tele.I1"), layout.x1: ModeId.photon("tele.L1"),
        i2: ModeId.photon("tele.I2"), layout.x2: ModeId.photon("tele.L2"),
    }
    state = MixedState.pure(source).tensor(as_mixed(pme))
    for ensemble, photon in ports.items():
        state = retrieve(state, ensemble, photon, eta_e2)
    state = apply_beamsplitter(state, ports[i1], ports[layout.x1])
    state = apply_beamsplitter(state, ports[i2], ports[layout.x2])

    keep = [ModeId.atomic_s(layout.y1).label, ModeId.atomic_s(layout.y2).label]
    labels = (ports[i1].label, ports[layout.x1].label, ports[i2].label, ports[layout.x2].label)
    return _herald(state, list(zip(TELEPORT_DETECTORS, labels)), DetectorModel(eta_d, p_d),
                   TELEPORT_SIGNS, keep, keep[0], base_sign=sign)


def teleport_target(alpha: complex, beta: complex, layout: PmeLayout,
                    n_max: int = config.DEFAULT_N_MAX) -> FockState:
    modes = [ModeId.atomic_s(layout.y1), ModeId.atomic_s(layout.y2)]
    return FockState(modes, {(1, 0): alpha, (0, 1): beta}, n_max)
