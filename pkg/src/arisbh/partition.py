"""Sub-array partitioning and phase alignment.

Decides between full-array operation and an L-way split of the surface,
assigns UAVs to contiguous element blocks, picks each block's phase-alignment
point, and assembles the complete per-element phase vector. A grouping is
acceptable when every member's sin-angle deviation from its block's alignment
point stays within half the block's half-power beamwidth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PartitionError
from .geometry import RisGeometry, as_vec2, as_vec3, ris_position_3d, sin_aod, sin_arrival_from_source
from .riscore import hpbw, phase_shifts


@dataclass(frozen=True)
class Partition:
    """An L-way split of the surface with per-group alignment points.

    ``groups[i]`` lists UAV indices served by block i, whose elements occupy
    ``element_ranges[i]`` (half-open, 0-based) and are phase-aligned to the
    virtual point ``align_points[i]``. ``delta_phi`` holds each UAV's
    sin-angle deviation from its own block's alignment point; ``group_of``
    maps UAV index -> block index. Elements beyond ``l * n_bar`` idle.
    """

    l: int
    n_bar: int
    groups: tuple
    element_ranges: tuple
    align_points: tuple
    align_sins: tuple
    delta_phi: np.ndarray
    group_of: np.ndarray
    sin_uav: np.ndarray
    sin_arrival: float

    @property
    def full_array(self) -> bool:
        return self.l == 1


def delta_phi(q, ris: RisGeometry, align_point, uav_position) -> float:
    """Sin-angle deviation of a UAV from an alignment point, seen from the surface."""
    return sin_aod(q, ris.altitude, uav_position) - sin_aod(q, ris.altitude, align_point)


def _virtual_point_for_sin(q, altitude: float, sin_target: float, distance: float):
    """A 3D point at the given range whose departure sine equals ``sin_target``."""
    q = as_vec2(q)
    lateral = np.sqrt(max(0.0, 1.0 - sin_target**2))
    return np.array(
        [q[0] + distance * sin_target, q[1] + distance * lateral, altitude]
    )


def align_point_for_group(q, ris: RisGeometry, group_positions) -> np.ndarray:
    """Alignment point whose sine is the midpoint of the group's sine range.

    The block gain depends on the UAVs only through their departure sines, so
    alignment lives in 1D sine space; the midpoint maximizes the group's
    minimum gain over the (symmetric, monotone) main lobe.
    """
    positions = [as_vec3(p) for p in group_positions]
    if not positions:
        raise ValueError("group must be non-empty")
    ref = ris_position_3d(q, ris.altitude)
    sins = [sin_aod(q, ris.altitude, p) for p in positions]
    dists = [float(np.linalg.norm(ref - p)) for p in positions]
    s_mid = 0.5 * (min(sins) + max(sins))
    return _virtual_point_for_sin(q, ris.altitude, s_mid, float(np.mean(dists)))


def _greedy_group_count(sorted_sins: np.ndarray, width: float) -> int:
    """Minimum number of contiguous groups with sine spread <= width each."""
    count = 1
    anchor = sorted_sins[0]
    for s in sorted_sins[1:]:
        if s - anchor > width:
            count += 1
            anchor = s
    return count


def _split_into_l_groups(order: np.ndarray, sorted_sins: np.ndarray, l: int, width: float):
    """Deterministic split of the sorted UAVs into exactly ``l`` contiguous groups.

    Greedy from the left under the spread limit, then extra cuts at the
    largest internal sine gaps (leftmost on ties) until ``l`` groups remain.
    """
    m0 = len(order)
    cuts = []  # index i means a boundary between position i-1 and i
    anchor = sorted_sins[0]
    for i in range(1, m0):
        if sorted_sins[i] - anchor > width:
            cuts.append(i)
            anchor = sorted_sins[i]
    extra_needed = l - (len(cuts) + 1)
    if extra_needed > 0:
        gaps = np.diff(sorted_sins)
        candidates = [i for i in range(1, m0) if i not in cuts]
        # sort by descending gap, then ascending position
        candidates.sort(key=lambda i: (-gaps[i - 1], i))
        cuts.extend(candidates[:extra_needed])
    cuts = sorted(cuts)
    bounds = [0] + cuts + [m0]
    return [tuple(order[bounds[i]:bounds[i + 1]]) for i in range(l)]


def choose_partition(q, ris: RisGeometry, uav_positions, l_max=None) -> Partition:
    """Smallest L whose contiguous sine-sorted split keeps every group in-lobe.

    Scans L = 1..l_max (default: one block per UAV); a candidate L is
    feasible when the sine-sorted UAVs split into at most L contiguous groups
    of spread <= hpbw(floor(N/L)). The full-array case is L = 1.
    """
    positions = [as_vec3(p) for p in uav_positions]
    m0 = len(positions)
    if m0 == 0:
        raise ValueError("need at least one UAV")
    if ris.n_elements < m0:
        raise PartitionError(
            f"{ris.n_elements} elements cannot serve {m0} UAVs with one block each"
        )
    if l_max is None:
        l_max = m0
    l_max = min(l_max, m0, ris.n_elements)

    sins = np.array([sin_aod(q, ris.altitude, p) for p in positions])
    order = np.lexsort((np.arange(m0), sins))  # sine ascending, ties by index
    sorted_sins = sins[order]

    for l in range(1, l_max + 1):
        n_bar = ris.n_elements // l
        width = hpbw(n_bar, ris.spacing_wavelengths)
        if _greedy_group_count(sorted_sins, width) <= l:
            groups = _split_into_l_groups(order, sorted_sins, l, width)
            return _build_partition(q, ris, positions, sins, l, n_bar, groups)
    raise PartitionError(
        f"no feasible grouping with at most {l_max} blocks "
        f"(sine spread {sorted_sins[-1] - sorted_sins[0]:.4g})"
    )


def _build_partition(q, ris, positions, sins, l, n_bar, groups):
    align_points = []
    align_sins = []
    group_of = np.empty(len(positions), dtype=int)
    dphi = np.empty(len(positions))
    for i, grp in enumerate(groups):
        point = align_point_for_group(q, ris, [positions[m] for m in grp])
        s_align = sin_aod(q, ris.altitude, point)
        align_points.append(point)
        align_sins.append(s_align)
        for m in grp:
            group_of[m] = i
            dphi[m] = sins[m] - s_align
    ranges = tuple((i * n_bar, (i + 1) * n_bar) for i in range(l))
    return Partition(
        l=l,
        n_bar=n_bar,
        groups=tuple(groups),
        element_ranges=ranges,
        align_points=tuple(align_points),
        align_sins=tuple(align_sins),
        delta_phi=dphi,
        group_of=group_of,
        sin_uav=sins,
        sin_arrival=sin_arrival_from_source(q, ris.altitude),
    )


def assemble_phases(q, ris: RisGeometry, partition: Partition, theta_bar: float = 0.0):
    """Full N-element phase vector and the active-element mask.

    Block i carries coherent-combining phases toward its alignment point with
    local element indexing; elements not covered by any block are flagged
    inactive (zero amplification).
    """
    theta = np.zeros(ris.n_elements)
    active = np.zeros(ris.n_elements, dtype=bool)
    covered = np.zeros(ris.n_elements, dtype=int)
    for (start, stop), point in zip(partition.element_ranges, partition.align_points):
        covered[start:stop] += 1
        theta[start:stop] = phase_shifts(q, ris, point, stop - start, theta_bar)
        active[start:stop] = True
    if np.any(covered > 1):
        raise AssertionError("internal invariant violated: overlapping element ranges")
    return theta, active
