"""
Verification battery for the quantum stages.

State-fidelity checks run with ideal detectors and no loss so they are exact;
probability checks use the configured efficiencies and compare the enumerated
success probability against the closed form.
"""

import cmath
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, List

import numpy as np

import config
from .analytics import ProtocolParams, eme_vacuum_coefficient, success_probs
from .common import log
from .dark_state import DarkStateSystem, dark_state_check
from .fock import FockState, ModeId, build_eme
from .optics import DetectorModel, apply_beamsplitter, apply_pbs, measure_clicks
from .protocols import (
    HeraldResult, PmeLayout, basic_link_generation, entanglement_swap, local_pme_generation,
    pme_state, teleport, teleport_target,
)


@dataclass(frozen=True)
class CheckRow:
    check: str
    value: float
    expected: float
    tolerance: float
    passed: bool

    def as_record(self) -> Dict[str, Any]:
        return asdict(self)


CHECK_COLUMNS = ("check", "value", "expected", "tolerance", "passed")


def _fidelity_row(name: str, fidelity: float) -> CheckRow:
    tol = config.VERIFY_FIDELITY_TOLERANCE
    return CheckRow(name, fidelity, 1.0, tol, fidelity >= 1.0 - tol)


def _zero_row(name: str, value: float, tol: float) -> CheckRow:
    return CheckRow(name, value, 0.0, tol, abs(value) <= tol)


def _probability_row(name: str, value: float, expected: float) -> CheckRow:
    tol = config.VERIFY_PROBABILITY_TOLERANCE
    return CheckRow(name, value, expected, tol, abs(value - expected) <= tol)


def _pme_fidelity(result: HeraldResult) -> float:
    """Worst fidelity of any accepted pattern against the PME its sign predicts."""
    layout = PmeLayout.from_labels(result.output_labels)
    worst = 1.0
    for pattern in result.patterns:
        if pattern.state is None:
            return 0.0
        worst = min(worst, pattern.state.fidelity(pme_state(layout, pattern.sign)),
                    pattern.corrected.fidelity(pme_state(layout, +1)))
    return worst


def check_hom() -> CheckRow:
    modes = [ModeId.photon("a"), ModeId.photon("b")]
    out = apply_beamsplitter(FockState.basis(modes, (1, 1)), "a", "b")
    return _zero_row("hom", abs(out.amplitudes.get((1, 1), 0.0)), config.VERIFY_FIDELITY_TOLERANCE)


def check_detector_povm(rng: np.random.Generator) -> CheckRow:
    """Largest deviation of the enumerated click probability from 1-(1-p_d)(1-eta)^n."""
    mode = ModeId.photon("d")
    worst = 0.0
    for _ in range(config.DARK_STATE_SAMPLES):
        detector = DetectorModel(float(rng.uniform()), float(rng.uniform(0.0, 1e-3)))
        for n in range(config.DEFAULT_N_MAX + 1):
            outcomes = measure_clicks(FockState.basis([mode], (n,)), [(mode, detector)])
            worst = max(worst, abs(outcomes[1].probability - detector.click_probability(n)))
    return _zero_row("detector_povm", worst, config.VERIFY_PROBABILITY_TOLERANCE)


def check_unitarity(rng: np.random.Generator) -> CheckRow:
    """Norm drift of random two-photon states through beam splitters and PBSs."""
    modes = [ModeId.photon("a.H", "H"), ModeId.photon("a.V", "V"),
             ModeId.photon("b.H", "H"), ModeId.photon("b.V", "V")]
    basis = [occ for occ in np.ndindex(*(3,) * 4) if sum(occ) <= 2]
    worst = 0.0
    for _ in range(config.DARK_STATE_SAMPLES):
        amps = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
        state = FockState(modes, dict(zip(basis, amps))).normalize()
        state = apply_beamsplitter(state, "a.H", "b.V", float(rng.uniform(0, 2 * math.pi)))
        state = apply_pbs(state, ("a.H", "a.V"), ("b.H", "b.V"), "diag" if rng.uniform() < 0.5 else "HV")
        worst = max(worst, abs(state.norm() - 1.0))
    return _zero_row("unitarity", worst, config.NORM_TOLERANCE)


def check_dark_state(rng: np.random.Generator) -> CheckRow:
    worst = 0.0
    for _ in range(config.DARK_STATE_SAMPLES):
        g, omega = rng.uniform(0.0, 1e8, size=2)
        residual, _ = dark_state_check(DarkStateSystem(float(g), float(omega)))
        worst = max(worst, residual)
    return _zero_row("dark_state", worst, config.DARK_STATE_TOLERANCE)


def _node_pme(node: str, sign: int = +1) -> FockState:
    layout = PmeLayout(x1=f"{node}.L1", x2=f"{node}.L2", y1=f"{node}.R1", y2=f"{node}.R2")
    return pme_state(layout, sign)


def phase_grid(size: int) -> List[float]:
    return [2.0 * math.pi * k / size for k in range(size)]


def check_local_pme(grid: int) -> List[CheckRow]:
    rows = []
    reference = local_pme_generation(build_eme(0.0, 0.0, "L1", "R1"), build_eme(0.0, 0.0, "L2", "R2"),
                                     1.0, 1.0).state
    for k, phi in enumerate(phase_grid(grid)):
        result = local_pme_generation(build_eme(0.0, phi, "L1", "R1"), build_eme(0.0, phi, "L2", "R2"),
                                      1.0, 1.0, phi, phi)
        fidelity = min(_pme_fidelity(result), result.state.overlap(reference))
        rows.append(_fidelity_row(f"local_pme.phase[{k}]", fidelity))
    return rows


def check_basic_link(grid: int) -> List[CheckRow]:
    rows = []
    phases = phase_grid(grid)
    for i, theta_a in enumerate(phases):
        for j, theta_b in enumerate(phases):
            sign_b = -1 if (i + j) % 2 else +1
            result = basic_link_generation(_node_pme("A"), _node_pme("B", sign_b), 1.0, 1.0, 1.0,
                                           theta_a, theta_b)
            rows.append(_fidelity_row(f"basic_link.phase[{i},{j}]", _pme_fidelity(result)))
    return rows


def check_swap(grid: int) -> List[CheckRow]:
    rows = []
    for k, phi in enumerate(phase_grid(grid)):
        ab = pme_state(PmeLayout(x1="A.1", x2="A.2", y1="B.L1", y2="B.L2"))
        bc = pme_state(PmeLayout(x1="B.R1", x2="B.R2", y1="C.1", y2="C.2"), -1 if k % 2 else +1)
        result = entanglement_swap(ab, bc, 1.0, 1.0, phi)
        rows.append(_fidelity_row(f"swap.phase[{k}]", _pme_fidelity(result)))
    return rows


def check_teleport(grid: int) -> List[CheckRow]:
    rows = []
    pme = _node_pme("N")
    layout = PmeLayout.from_state(pme)
    for k, phi in enumerate(phase_grid(grid)):
        alpha, beta = math.cos(0.3 + k), math.sin(0.3 + k) * cmath.exp(1j * phi)
        result = teleport((alpha, beta), pme, 1.0, 1.0)
        target = teleport_target(alpha, beta, layout)
        fidelity = min((p.corrected.fidelity(target) if p.corrected else 0.0) for p in result.patterns)
        rows.append(_fidelity_row(f"teleport.phase[{k}]", fidelity))
    return rows


def check_probabilities(params: ProtocolParams) -> List[CheckRow]:
    probs = success_probs(params)
    c0 = eme_vacuum_coefficient(params)
    local = local_pme_generation(build_eme(c0, 0.0, "L1", "R1"), build_eme(c0, 0.0, "L2", "R2"),
                                 params.eta_e1, params.eta_d)
    link = basic_link_generation(_node_pme("A"), _node_pme("B"), params.eta_e2, probs.eta_t, params.eta_d)
    swap = entanglement_swap(
        pme_state(PmeLayout(x1="A.1", x2="A.2", y1="B.L1", y2="B.L2")),
        pme_state(PmeLayout(x1="B.R1", x2="B.R2", y1="C.1", y2="C.2")),
        params.eta_e2, params.eta_d)
    tele = teleport((1 / math.sqrt(2), 1 / math.sqrt(2)), _node_pme("N"), params.eta_e2, params.eta_d)
    return [
        _probability_row("probability.local_pme", local.success_prob, probs.p_r_eme),
        _probability_row("probability.basic_link", link.success_prob, probs.p_b),
        _probability_row("probability.swap", swap.success_prob, probs.p_i),
        _probability_row("probability.teleport", tele.success_prob, probs.p_i),
    ]


def run_verification(params: ProtocolParams, grid: int = config.VERIFY_PHASE_GRID,
                     seed: int = config.VERIFY_SEED) -> List[CheckRow]:
    rng = np.random.default_rng(seed)
    rows = [check_hom(), check_detector_povm(rng), check_unitarity(rng), check_dark_state(rng)]
    rows += check_local_pme(grid)
    rows += check_basic_link(grid)
    rows += check_swap(grid)
    rows += check_teleport(grid)
    rows += check_probabilities(params)
    failed = [row.check for row in rows if not row.passed]
    if failed:
        log(f"Verification failed: {', '.join(failed)}", "ERROR")
    else:
        log(f"All {len(rows)} verification checks passed")
    return rows
