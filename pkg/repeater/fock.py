"""
Sparse Fock-space states over labeled bosonic modes.

Atomic collective modes (T, S) and photonic polarization modes are handled
the same way: a FockState is a map from occupation vectors to complex
amplitudes, a MixedState is a weighted ensemble of FockStates.
"""

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import config
from .common import ConfigError, FockError, ModeError, TruncationError

Occupation = Tuple[int, ...]


class ModeKind(str, Enum):
    ATOMIC_T = "atomic-T"
    ATOMIC_S = "atomic-S"
    PHOTONIC = "photonic"


class Polarization(str, Enum):
    H = "H"
    V = "V"


@dataclass(frozen=True)
class ModeId:
    """A bosonic mode. Photonic modes carry a polarization, atomic modes never do."""
    label: str
    kind: ModeKind
    polarization: Optional[Polarization] = None

    def __post_init__(self):
        if (self.kind == ModeKind.PHOTONIC) != (self.polarization is not None):
            raise ModeError(f"{self.label}: polarization must be set iff the mode is photonic")

    @classmethod
    def atomic_t(cls, ensemble: str) -> "ModeId":
        return cls(f"{ensemble}.T", ModeKind.ATOMIC_T)

    @classmethod
    def atomic_s(cls, ensemble: str) -> "ModeId":
        return cls(f"{ensemble}.S", ModeKind.ATOMIC_S)

    @classmethod
    def photon(cls, label: str, polarization: Polarization = Polarization.H) -> "ModeId":
        return cls(label, ModeKind.PHOTONIC, Polarization(polarization))

    def renamed(self, label: str) -> "ModeId":
        return ModeId(label, self.kind, self.polarization)


ModeRef = Union[ModeId, str]


def mode_label(mode: ModeRef) -> str:
    return mode.label if isinstance(mode, ModeId) else mode


class FockState:
    """
    Pure state over an ordered mode registry.

    Amplitudes below config.AMPLITUDE_TOLERANCE are dropped on construction so
    the sparse map stays canonical. Instances are never mutated.
    """

    def __init__(self, modes: Sequence[ModeId], amplitudes: Mapping[Occupation, complex],
                 n_max: int = config.DEFAULT_N_MAX):
        self.modes: Tuple[ModeId, ...] = tuple(modes)
        self.n_max = int(n_max)
        if self.n_max < 1:
            raise ConfigError(f"n_max: must be at least 1, got {n_max}")

        labels = [m.label for m in self.modes]
        if len(set(labels)) != len(labels):
            raise ModeError(f"duplicate mode labels in registry: {labels}")
        self._index = {label: i for i, label in enumerate(labels)}

        cleaned: Dict[Occupation, complex] = {}
        for occ, amp in amplitudes.items():
            occ = tuple(int(k) for k in occ)
            if len(occ) != len(self.modes):
                raise ModeError(f"occupation {occ} does not match {len(self.modes)} modes")
            amp = complex(amp)
            if abs(amp) < config.AMPLITUDE_TOLERANCE:
                continue
            if any(k < 0 for k in occ):
                raise FockError(f"negative occupation {occ}")
            if any(k > self.n_max for k in occ):
                raise TruncationError(f"occupation {occ} exceeds N_max={self.n_max}")
            cleaned[occ] = amp
        self.amplitudes: Dict[Occupation, complex] = cleaned

    # construction -------------------------------------------------------

    @classmethod
    def vacuum(cls, modes: Sequence[ModeId], n_max: int = config.DEFAULT_N_MAX) -> "FockState":
        return cls(modes, {tuple(0 for _ in modes): 1.0}, n_max)

    @classmethod
    def basis(cls, modes: Sequence[ModeId], occupation: Sequence[int],
              n_max: int = config.DEFAULT_N_MAX) -> "FockState":
        return cls(modes, {tuple(occupation): 1.0}, n_max)

    # registry -----------------------------------------------------------

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(m.label for m in self.modes)

    def index(self, mode: ModeRef) -> int:
        label = mode_label(mode)
        if label not in self._index:
            raise ModeError(f"mode {label} is not registered")
        return self._index[label]

    def mode(self, mode: ModeRef) -> ModeId:
        return self.modes[self.index(mode)]

    def has_mode(self, mode: ModeRef) -> bool:
        return mode_label(mode) in self._index

    def _derive(self, modes: Sequence[ModeId], amplitudes: Mapping[Occupation, complex]) -> "FockState":
        return FockState(modes, amplitudes, self.n_max)

    # linear algebra -----------------------------------------------------

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def normalize(self) -> "FockState":
        norm = self.norm()
        if norm < config.AMPLITUDE_TOLERANCE:
            raise FockError("cannot normalize a zero state")
        return self.scaled(1.0 / norm)

    def is_normalized(self) -> bool:
        return abs(self.norm() - 1.0) <= config.NORM_TOLERANCE

    def scaled(self, factor: complex) -> "FockState":
        return self._derive(self.modes, {occ: amp * factor for occ, amp in self.amplitudes.items()})

    def map_terms(self, fn: Callable[[Occupation, complex], complex]) -> "FockState":
        """Rescale each amplitude by a function of its occupation vector."""
        return self._derive(self.modes, {occ: fn(occ, amp) for occ, amp in self.amplitudes.items()})

    def reorder(self, labels: Sequence[ModeRef]) -> "FockState":
        labels = [mode_label(m) for m in labels]
        if sorted(labels) != sorted(self.labels):
            raise ModeError(f"reorder needs exactly the registered modes {self.labels}, got {labels}")
        perm = [self.index(label) for label in labels]
        return self._derive(
            [self.modes[i] for i in perm],
            {tuple(occ[i] for i in perm): amp for occ, amp in self.amplitudes.items()},
        )

    def inner(self, other: "FockState") -> complex:
        """<self|other>, aligning registries by label."""
        if self.labels != other.labels:
            other = other.reorder(self.labels)
        return sum((a.conjugate() * other.amplitudes.get(occ, 0.0)
                    for occ, a in self.amplitudes.items()), 0j)

    def fidelity(self, other: "FockState") -> float:
        return abs(self.inner(other)) ** 2

    def tensor(self, other: "FockState") -> "FockState":
        overlap = set(self.labels) & set(other.labels)
        if overlap:
            raise ModeError(f"modes {sorted(overlap)} appear on both sides of a tensor product")
        amplitudes = {
            occ_a + occ_b: amp_a * amp_b
            for occ_a, amp_a in self.amplitudes.items()
            for occ_b, amp_b in other.amplitudes.items()
        }
        return FockState(self.modes + other.modes, amplitudes, max(self.n_max, other.n_max))

    def add_modes(self, modes: Iterable[ModeId]) -> "FockState":
        """Append vacuum modes to the registry."""
        modes = tuple(modes)
        return self.tensor(FockState.vacuum(modes, self.n_max))

    def relabel(self, mapping: Mapping[str, ModeId]) -> "FockState":
        """Replace registered modes by new ModeIds, keeping their occupations."""
        for label in mapping:
            self.index(label)
        modes = [mapping.get(m.label, m) for m in self.modes]
        return self._derive(modes, self.amplitudes)

    def partition(self, labels: Sequence[ModeRef]) -> Dict[Occupation, "FockState"]:
        """
        Split on the occupations of `labels`.
        Returns {occupation of labels: unnormalized state over the remaining modes}.
        """
        picked = [self.index(m) for m in labels]
        if len(set(picked)) != len(picked):
            raise ModeError(f"duplicate modes in {list(labels)}")
        rest = [i for i in range(len(self.modes)) if i not in picked]
        pieces: Dict[Occupation, Dict[Occupation, complex]] = {}
        for occ, amp in self.amplitudes.items():
            key = tuple(occ[i] for i in picked)
            pieces.setdefault(key, {})[tuple(occ[i] for i in rest)] = amp
        rest_modes = [self.modes[i] for i in rest]
        return {key: self._derive(rest_modes, amps) for key, amps in sorted(pieces.items())}

    def occupation_distribution(self, mode: ModeRef) -> Dict[int, float]:
        i = self.index(mode)
        dist: Dict[int, float] = {}
        total = self.norm() ** 2
        for occ, amp in self.amplitudes.items():
            dist[occ[i]] = dist.get(occ[i], 0.0) + abs(amp) ** 2 / total
        return dict(sorted(dist.items()))

    def __repr__(self) -> str:
        terms = ", ".join(f"{''.join(map(str, occ))}: {amp:.6g}"
                          for occ, amp in sorted(self.amplitudes.items()))
        return f"FockState({list(self.labels)}, {{{terms}}})"


Branch = Tuple[float, FockState]


class MixedState:
    """
    Weighted ensemble of normalized FockStates sharing one registry.

    Weights are non-negative and sum to one; branch states are reordered to
    the registry of the first branch.
    """

    def __init__(self, branches: Sequence[Branch]):
        if not branches:
            raise FockError("a mixed state needs at least one branch")
        first = branches[0][1]
        cleaned: List[Branch] = []
        for weight, state in branches:
            if weight < -config.NORM_TOLERANCE:
                raise FockError(f"negative branch weight {weight}")
            if not state.is_normalized():
                raise FockError(f"branch state has norm {state.norm()}")
            if state.labels != first.labels:
                state = state.reorder(first.labels)
            if weight > 0:
                cleaned.append((float(weight), state))
        total = sum(w for w, _ in cleaned)
        if abs(total - 1.0) > config.NORM_TOLERANCE:
            raise FockError(f"branch weights sum to {total}, expected 1")
        self.branches: Tuple[Branch, ...] = tuple(cleaned)
        self.modes = first.modes
        self.n_max = first.n_max

    @classmethod
    def pure(cls, state: FockState) -> "MixedState":
        return cls([(1.0, state.normalize())])

    @classmethod
    def from_unnormalized(cls, branches: Iterable[Branch]) -> Tuple[float, Optional["MixedState"]]:
        """
        Build a MixedState from (weight, unnormalized state) pairs.
        Each branch contributes weight * |state|^2; returns (total probability, state),
        with state None when nothing survives.
        """
        weighted: List[Branch] = []
        for weight, state in branches:
            p = weight * state.norm() ** 2
            if p > config.AMPLITUDE_TOLERANCE ** 2 and state.amplitudes:
                weighted.append((p, state.normalize()))
        total = sum(p for p, _ in weighted)
        if total <= 0.0:
            return 0.0, None
        return total, cls([(p / total, s) for p, s in weighted])

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(m.label for m in self.modes)

    def map(self, fn: Callable[[FockState], FockState]) -> "MixedState":
        """Apply a norm-preserving map to every branch."""
        return MixedState([(w, fn(s)) for w, s in self.branches])

    def flat_map(self, fn: Callable[[FockState], "MixedState"]) -> "MixedState":
        """Apply a channel that turns each branch into a mixture."""
        return MixedState([(w * v, s) for w, state in self.branches for v, s in fn(state).branches])

    def tensor(self, other: "MixedState") -> "MixedState":
        return MixedState([(w * v, s.tensor(t)) for w, s in self.branches for v, t in other.branches])

    def reorder(self, labels: Sequence[ModeRef]) -> "MixedState":
        return self.map(lambda s: s.reorder(labels))

    def reduce(self, keep: Sequence[ModeRef]) -> "MixedState":
        """Partial trace onto `keep`, in that order."""
        keep_labels = [mode_label(m) for m in keep]
        traced = [label for label in self.labels if label not in keep_labels]
        pieces = []
        for weight, state in self.branches:
            for piece in state.partition(traced).values():
                pieces.append((weight, piece.reorder(keep_labels)))
        _, reduced = MixedState.from_unnormalized(pieces)
        return reduced

    def merged(self) -> "MixedState":
        """Combine branches that are equal up to a global phase."""
        groups: List[List] = []
        for weight, state in self.branches:
            for group in groups:
                if group[1].fidelity(state) >= 1.0 - config.NORM_TOLERANCE:
                    group[0] += weight
                    break
            else:
                groups.append([weight, state])
        return MixedState([(w, s) for w, s in groups])

    def as_pure(self) -> FockState:
        merged = self.merged()
        if len(merged.branches) != 1:
            raise FockError(f"state has {len(merged.branches)} distinct branches, not pure")
        return merged.branches[0][1]

    def fidelity(self, target: FockState) -> float:
        """<target|rho|target> for a normalized pure target."""
        return sum(w * target.fidelity(s) for w, s in self.branches)

    def overlap(self, other: "MixedState") -> float:
        """Tr(rho sigma)."""
        return sum(w * v * s.fidelity(t) for w, s in self.branches for v, t in other.branches)

    def purity(self) -> float:
        return self.overlap(self)

    def occupation_distribution(self, mode: ModeRef) -> Dict[int, float]:
        dist: Dict[int, float] = {}
        for weight, state in self.branches:
            for k, p in state.occupation_distribution(mode).items():
                dist[k] = dist.get(k, 0.0) + weight * p
        return dict(sorted(dist.items()))

    def total_weight(self) -> float:
        return sum(w for w, _ in self.branches)

    def __repr__(self) -> str:
        return f"MixedState({len(self.branches)} branches over {list(self.labels)})"


def as_mixed(state: Union[FockState, MixedState]) -> MixedState:
    return state if isinstance(state, MixedState) else MixedState.pure(state)


def build_input_photon_state(phi: float, left: str = "L_in", right: str = "R_in",
                             n_max: int = config.DEFAULT_N_MAX) -> FockState:
    """Single photon split over two optical modes: (|0,1> + e^{i phi}|1,0>)/sqrt(2)."""
    modes = [ModeId.photon(left), ModeId.photon(right)]
    s = 1.0 / math.sqrt(2.0)
    return FockState(modes, {(0, 1): s, (1, 0): cmath.exp(1j * phi) * s}, n_max)


def build_eme(c0: float, phi: float, left: str = "L", right: str = "R",
              n_max: int = config.DEFAULT_N_MAX) -> MixedState:
    """
    Effective maximally entangled state of two ensembles.

    Vacuum with weight c0/(c0+1), otherwise one T excitation shared as
    (T_left + e^{i phi} T_right)|0>/sqrt(2).
    """
    if c0 < 0 or math.isnan(c0):
        raise ConfigError(f"c0: must be non-negative, got {c0}")
    modes = [ModeId.atomic_t(left), ModeId.atomic_t(right)]
    s = 1.0 / math.sqrt(2.0)
    excited = FockState(modes, {(1, 0): s, (0, 1): cmath.exp(1j * phi) * s}, n_max)
    if math.isinf(c0):
        return MixedState.pure(FockState.vacuum(modes, n_max))
    branches = [(1.0 / (c0 + 1.0), excited)]
    if c0 > 0:
        branches.append((c0 / (c0 + 1.0), FockState.vacuum(modes, n_max)))
    return MixedState(branches)
