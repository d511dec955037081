"""Discrete-event Monte Carlo simulator of the offloading protocol.

Each realization draws a fresh UE field, thins it to the interested users,
samples their request times from the class profile, and replays the
protocol: requests are served D2D by the nearest cached copy within range,
otherwise wait out the class timeout (becoming eligible for D2D the moment
a neighbor receives the content) and fall back to the base station.
Statistics are taken over central-cell deliveries only to avoid border
effects.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .layout import NetworkLayout, UEField, generate_ue_field
from .radio import D2D, I2D, PathLossModel, RadioConfig, channel_gain, tx_energy
from .traffic import ContentClass, sample_request_time
from .analytic import EnergyBreakdown

LINEAR_SCAN_LIMIT = 64


@dataclass(frozen=True)
class RequestEvent:
    ue_index: int
    request_time_s: float


@dataclass(frozen=True)
class DeliveryRecord:
    ue_index: int
    request_time_s: float
    delivery_time_s: float
    mode: str  # "d2d" | "i2d"
    distance_m: float
    energy_j: float
    in_central_cell: bool


class UniformGridIndex:
    """Uniform-grid spatial index over fixed 2-D points with a per-point
    activation flag; answers exact nearest-active queries within a closed
    radius (ties to the smallest index). Falls back to a linear scan for
    tiny populations."""

    def __init__(self, positions: np.ndarray, bucket_m: float):
        positions = np.atleast_2d(np.asarray(positions, dtype=float))
        self.x = positions[:, 0].tolist() if len(positions) else []
        self.y = positions[:, 1].tolist() if len(positions) else []
        self.n = len(self.x)
        self.active = [False] * self.n
        self._linear = self.n < LINEAR_SCAN_LIMIT
        if self.n and not self._linear:
            extent = max(
                max(self.x) - min(self.x), max(self.y) - min(self.y)
            )
            self._cell = max(bucket_m, extent / 256.0, 1e-6)
            self._x0 = min(self.x)
            self._y0 = min(self.y)
            self._buckets: dict = {}
            for i in range(self.n):
                key = (
                    int((self.x[i] - self._x0) / self._cell),
                    int((self.y[i] - self._y0) / self._cell),
                )
                self._buckets.setdefault(key, []).append(i)

    def activate(self, i: int):
        self.active[i] = True

    def _candidates(self, qx: float, qy: float, r_max: float):
        # the 3x3 neighborhood covers the query ball only up to the bucket
        # edge; wider queries degrade to a full scan
        if self._linear or r_max > self._cell:
            return range(self.n)
        cx = int((qx - self._x0) / self._cell)
        cy = int((qy - self._y0) / self._cell)
        out = []
        for bx in range(cx - 1, cx + 2):
            for by in range(cy - 1, cy + 2):
                out.extend(self._buckets.get((bx, by), ()))
        return out

    def nearest_active(self, query, r_max: float):
        """Nearest active point within the closed ball of radius ``r_max``
        around ``query``, or None."""
        if self.n == 0:
            return None
        qx, qy = float(query[0]), float(query[1])
        r_sq = r_max * r_max
        best_d2, best_j = math.inf, -1
        for j in self._candidates(qx, qy, r_max):
            if not self.active[j]:
                continue
            dx = self.x[j] - qx
            dy = self.y[j] - qy
            d2 = dx * dx + dy * dy
            if d2 <= r_sq and (d2 < best_d2 or (d2 == best_d2 and j < best_j)):
                best_d2, best_j = d2, j
        if best_j < 0:
            return None
        return best_j, math.sqrt(best_d2)


def nearest_holder(index: UniformGridIndex, query, r_max: float):
    """Nearest content holder within ``r_max`` of ``query`` (closed ball),
    or None when no holder is in range."""
    return index.nearest_active(query, r_max)


@dataclass(frozen=True)
class SimOutcome:
    """Delivery outcome of one realization, stored as parallel arrays sorted
    by (delivery time, UE index)."""

    ue_index: np.ndarray
    request_s: np.ndarray
    delivery_s: np.ndarray
    mode: np.ndarray  # int8: 1 = d2d, 0 = i2d
    distance_m: np.ndarray
    energy_j: np.ndarray
    server_index: np.ndarray  # transmitting UE, -1 for the base station
    central: np.ndarray  # bool
    r_max_m: float
    content_class: ContentClass
    seed: Optional[int] = None

    def __len__(self) -> int:
        return len(self.ue_index)

    @property
    def request_events(self) -> list:
        return [
            RequestEvent(int(i), float(t))
            for i, t in zip(self.ue_index, self.request_s)
        ]

    @property
    def records(self) -> list:
        return [
            DeliveryRecord(
                ue_index=int(self.ue_index[k]),
                request_time_s=float(self.request_s[k]),
                delivery_time_s=float(self.delivery_s[k]),
                mode="d2d" if self.mode[k] else "i2d",
                distance_m=float(self.distance_m[k]),
                energy_j=float(self.energy_j[k]),
                in_central_cell=bool(self.central[k]),
            )
            for k in range(len(self))
        ]


def _empty_outcome(cls, r_max, seed):
    empty = np.empty(0)
    return SimOutcome(
        ue_index=np.empty(0, dtype=np.int64),
        request_s=empty,
        delivery_s=empty,
        mode=np.empty(0, dtype=np.int8),
        distance_m=empty,
        energy_j=empty,
        server_index=np.empty(0, dtype=np.int64),
        central=np.empty(0, dtype=bool),
        r_max_m=r_max,
        content_class=cls,
        seed=seed,
    )


def run_content_delivery(
    field: UEField,
    cls: ContentClass,
    r_max: float,
    radio: RadioConfig,
    channel: PathLossModel,
    rng: np.random.Generator,
    seed: Optional[int] = None,
    backend=None,
) -> SimOutcome:
    """Simulate the delivery of one content to every interested UE.

    Thins the field by the class popularity, draws one request time per
    interested UE, and replays the event loop. ``backend`` overrides the
    kernel module (used by the backend-equivalence tests).
    """
    if r_max < 0:
        raise ValueError("r_max must be nonnegative")
    kern = backend or _kernels
    n = len(field)
    if n == 0:
        return _empty_outcome(cls, r_max, seed)
    interested = rng.random(n) < cls.popularity
    idx = np.flatnonzero(interested)
    if len(idx) == 0:
        return _empty_outcome(cls, r_max, seed)
    t_req = np.atleast_1d(sample_request_time(cls, rng, size=len(idx)))

    t_del, mode, dist, server = kern.deliver_events(
        field.positions[idx, 0],
        field.positions[idx, 1],
        t_req,
        field.bs_distance_m[idx],
        cls.timeout_s,
        r_max,
    )
    is_d2d = mode == 1
    energy = np.where(
        is_d2d,
        tx_energy(channel_gain(channel, D2D, dist), radio),
        tx_energy(channel_gain(channel, I2D, dist), radio),
    )
    order = np.lexsort((idx, t_del))
    server_global = np.where(server >= 0, idx[np.clip(server, 0, None)], -1)
    return SimOutcome(
        ue_index=idx[order],
        request_s=t_req[order],
        delivery_s=t_del[order],
        mode=mode[order],
        distance_m=dist[order],
        energy_j=energy[order],
        server_index=server_global[order],
        central=field.central_cell_mask[idx][order],
        r_max_m=r_max,
        content_class=cls,
        seed=seed,
    )


@dataclass(frozen=True)
class SimulatedBreakdown:
    """Mean per-delivery energies over realizations, central cell only,
    with standard errors and per-realization detail."""

    breakdown: EnergyBreakdown
    stderr_d2d_j: float
    stderr_i2d_j: float
    stderr_total_j: float
    stderr_offload: float
    n_realizations: int
    n_empty: int  # realizations with no central-cell interested UE
    per_e_d2d_j: np.ndarray = field(repr=False, default=None)
    per_e_i2d_j: np.ndarray = field(repr=False, default=None)
    per_offload: np.ndarray = field(repr=False, default=None)
    per_i2d_count: np.ndarray = field(repr=False, default=None)
    per_central_count: np.ndarray = field(repr=False, default=None)


def _stderr(values: np.ndarray) -> float:
    if len(values) < 2:
        return 0.0
    return float(values.std(ddof=1) / math.sqrt(len(values)))


RECORD_DUMP_COLUMNS = [
    "realization",
    "ue_index",
    "request_s",
    "delivery_s",
    "mode",
    "distance_m",
    "energy_j",
    "central",
]


def write_record_dump(path, outcomes):
    """Dump per-delivery records of ``(realization, SimOutcome)`` pairs to a
    CSV; canonical float formatting keeps reruns byte-identical."""
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORD_DUMP_COLUMNS)
        for realization, out in outcomes:
            for k in range(len(out)):
                writer.writerow(
                    [
                        realization,
                        int(out.ue_index[k]),
                        f"{out.request_s[k]:.12g}",
                        f"{out.delivery_s[k]:.12g}",
                        "d2d" if out.mode[k] else "i2d",
                        f"{out.distance_m[k]:.12g}",
                        f"{out.energy_j[k]:.12g}",
                        "true" if out.central[k] else "false",
                    ]
                )


def simulate_class(
    cls: ContentClass,
    r_max: float,
    n_realizations: int,
    layout: NetworkLayout,
    radio: RadioConfig,
    channel: PathLossModel,
    base_seed: int,
    backend=None,
    dump_path=None,
) -> SimulatedBreakdown:
    """Average the delivery energies of ``n_realizations`` independent UE
    fields (realization k uses seed ``base_seed XOR k``).

    Per realization, each energy component is the summed component energy of
    central-cell deliveries divided by the count of all central-cell
    deliveries; realizations without central-cell interested UEs contribute
    nothing and are tallied in ``n_empty``. ``dump_path`` optionally writes
    every delivery record to a CSV (see ``RECORD_DUMP_COLUMNS``).
    """
    if n_realizations < 1:
        raise ValueError("n_realizations must be at least 1")
    e_d2d, e_i2d, offload, i2d_count, central_count = [], [], [], [], []
    n_empty = 0
    dumped = [] if dump_path is not None else None
    for k in range(n_realizations):
        seed = base_seed ^ k
        rng = np.random.default_rng(seed)
        fld = generate_ue_field(layout, rng)
        out = run_content_delivery(
            fld, cls, r_max, radio, channel, rng, seed=seed, backend=backend
        )
        if dumped is not None:
            dumped.append((k, out))
        c = out.central
        n_c = int(c.sum())
        if n_c == 0:
            n_empty += 1
            continue
        d2d_mask = c & (out.mode == 1)
        i2d_mask = c & (out.mode == 0)
        e_d2d.append(float(out.energy_j[d2d_mask].sum()) / n_c)
        e_i2d.append(float(out.energy_j[i2d_mask].sum()) / n_c)
        offload.append(float(d2d_mask.sum()) / n_c)
        i2d_count.append(int(i2d_mask.sum()))
        central_count.append(n_c)

    if dumped is not None:
        write_record_dump(dump_path, dumped)

    e_d2d = np.asarray(e_d2d)
    e_i2d = np.asarray(e_i2d)
    offload = np.asarray(offload)
    if len(e_d2d) == 0:
        mean = EnergyBreakdown.from_components(0.0, 0.0, 0.0)
        zero = np.empty(0)
        return SimulatedBreakdown(
            breakdown=mean,
            stderr_d2d_j=0.0,
            stderr_i2d_j=0.0,
            stderr_total_j=0.0,
            stderr_offload=0.0,
            n_realizations=n_realizations,
            n_empty=n_empty,
            per_e_d2d_j=zero,
            per_e_i2d_j=zero,
            per_offload=zero,
            per_i2d_count=np.empty(0, dtype=int),
            per_central_count=np.empty(0, dtype=int),
        )
    mean = EnergyBreakdown.from_components(
        float(e_d2d.mean()), float(e_i2d.mean()), float(offload.mean())
    )
    return SimulatedBreakdown(
        breakdown=mean,
        stderr_d2d_j=_stderr(e_d2d),
        stderr_i2d_j=_stderr(e_i2d),
        stderr_total_j=_stderr(e_d2d + e_i2d),
        stderr_offload=_stderr(offload),
        n_realizations=n_realizations,
        n_empty=n_empty,
        per_e_d2d_j=e_d2d,
        per_e_i2d_j=e_i2d,
        per_offload=offload,
        per_i2d_count=np.asarray(i2d_count, dtype=int),
        per_central_count=np.asarray(central_count, dtype=int),
    )
