"""Monte Carlo trial loop, model/parameter sweeps, aggregation, CSV export.

One trial places the UEs, draws the three links (direct, BS-to-surface,
surface-to-UE) under the selected channel model, configures the surface
tile by tile, and solves the minimum-power precoder.  Sweeps pair the
per-trial randomness across models and surface sizes: UE positions and
cluster draws depend only on (master seed, trial index, link, UE), which
isolates the channel-model delta from Monte Carlo noise.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, replace

import numpy as np

from . import seeding, units
from .channels import (
    ChannelModel,
    LinkRole,
    draw_clusters,
    los_matrix,
    lowrank_from_clusters,
    nearfield_from_clusters,
    nearfield_los,
    pathloss,
    sample_iid_rayleigh,
)
from .correlation import CorrelationMatrix, sample_matrix_normal_factor, sinc_correlation
from .geometry import ArrayGeometry, fraunhofer_distance, pairwise_distance
from .precoding import InfeasibleError, min_power_precoder
from .ris import build_codebook, build_tile_partition, configure_tiles
from .scenario import ScenarioConfig, with_q

logger = logging.getLogger(__name__)

_PLANAR_MODELS = (
    ChannelModel.IID_RICIAN,
    ChannelModel.CORRELATED_RAYLEIGH,
    ChannelModel.LOWRANK_GEOMETRIC,
)
_GEOMETRIC_MODELS = (ChannelModel.LOWRANK_GEOMETRIC, ChannelModel.NEARFIELD_GEOMETRIC)


@dataclass
class TrialResult:
    model: str
    q: int
    n_ue: int
    trial: int
    feasible: bool
    total_power_watts: float  # nan when infeasible
    seed: int
    wall_time: float


@dataclass
class AggregateRow:
    model: str
    q: int
    n_ue: int
    trials: int
    feasible_frac: float
    mean_ptx_dbm: float  # mean over linear watts of feasible trials, in dBm
    std_ptx_db: float  # std of per-trial dBm values over feasible trials
    seed: int


@dataclass
class SweepResult:
    aggregates: list[AggregateRow]
    raw: list[TrialResult]


def noise_power(config: ScenarioConfig) -> float:
    """Receiver noise power ``W * N_0 * N_f`` in watts."""
    dbm = (
        config.n0_dbm_per_hz
        + 10.0 * math.log10(config.bandwidth_hz)
        + config.noise_figure_db
    )
    return units.dbm_to_watts(dbm)


class SimContext:
    """Per-configuration caches shared across trials (read-only once built)."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        spacing = config.element_spacing
        self.bs_geom = ArrayGeometry.upa_centered(
            config.bs_counts[0], config.bs_counts[1], spacing, config.bs_center
        )
        n_y, n_z = config.ris_counts
        self.ris_geom = ArrayGeometry.upa_centered(n_y, n_z, spacing, config.ris_center)
        self.partition = build_tile_partition(
            config.ris_counts, config.tile_shape, config.tile_order
        )
        self.codebook = build_codebook(config.tile_shape)
        self.noise_power = noise_power(config)
        self._corr: dict = {}
        self._flagged: set = set()

    def correlation(self, geom: ArrayGeometry) -> CorrelationMatrix:
        """Sinc correlation (with cached square-root factor) for a geometry.

        Correlations depend only on element separations, so single-antenna
        UEs at different positions share one trivial entry.
        """
        key = (geom.counts, geom.spacing)
        if key not in self._corr:
            self._corr[key] = sinc_correlation(geom, self.config.wavelength)
            self._corr[key].sqrt_factor  # build the factor once, up front
        return self._corr[key]

    def flag_near_field(self, model: ChannelModel, role: LinkRole, tx, rx, distance):
        """Warn once when a far-field model is evaluated inside the near field."""
        key = (model, role)
        if key in self._flagged:
            return
        self._flagged.add(key)
        for geom, name in ((tx, "tx"), (rx, "rx")):
            if geom.aperture <= 0:
                continue
            boundary = fraunhofer_distance(geom.aperture, self.config.wavelength)
            if distance < boundary:
                logger.warning(
                    "far-field model %s on link %s: %s-side distance %.1f m is inside "
                    "the Fraunhofer boundary %.1f m",
                    model.value, role.value, name, distance, boundary,
                )


def _draw_link(
    model: ChannelModel,
    role: LinkRole,
    tx_geom: ArrayGeometry,
    rx_geom: ArrayGeometry,
    config: ScenarioConfig,
    ctx: SimContext,
    trial: int,
    ue_index: int,
) -> np.ndarray:
    """One channel matrix for one link under the selected model."""
    link = config.links[role]
    distance = pairwise_distance(tx_geom.center, rx_geom.center)
    h_p = pathloss(link.params, distance)
    wl = config.wavelength
    seed_tail = (seeding.LINK_IDS[role.value], ue_index)
    rng_fading = seeding.derive_rng(
        config.master_seed, trial, seeding.STREAM_FADING, *seed_tail
    )

    if model == ChannelModel.IID_RAYLEIGH:
        # Pure scatter everywhere; the K-factor is deliberately ignored.
        return sample_iid_rayleigh(rng_fading, rx_geom.size, tx_geom.size, h_p).h

    if model in _PLANAR_MODELS:
        ctx.flag_near_field(model, role, tx_geom, rx_geom, distance)

    if model in _GEOMETRIC_MODELS:
        rng_clusters = seeding.derive_rng(
            config.master_seed, trial, seeding.STREAM_CLUSTERS, *seed_tail
        )
        clusters = draw_clusters(
            rng_clusters,
            link.cluster_volume,
            config.n_clusters,
            config.n_subpaths,
            h_p,
            config.gain_distribution,
            avoid_points=np.concatenate(
                [tx_geom.element_positions, rx_geom.element_positions]
            ),
        )
        if model == ChannelModel.LOWRANK_GEOMETRIC:
            nlos = lowrank_from_clusters(clusters, tx_geom, rx_geom, wl)
        else:
            nlos = nearfield_from_clusters(clusters, tx_geom, rx_geom, wl)
    elif model == ChannelModel.IID_RICIAN:
        nlos = sample_iid_rayleigh(rng_fading, rx_geom.size, tx_geom.size, h_p).h
    elif model == ChannelModel.CORRELATED_RAYLEIGH:
        nlos = sample_matrix_normal_factor(
            rng_fading, ctx.correlation(rx_geom), ctx.correlation(tx_geom), math.sqrt(h_p)
        )
    else:
        raise ValueError(f"unknown channel model {model!r}")

    if model == ChannelModel.NEARFIELD_GEOMETRIC:
        los = nearfield_los(tx_geom, rx_geom, h_p, wl)
    else:
        los = los_matrix(
            tx_geom, rx_geom,
            tx_geom.departure_angle(rx_geom.center),
            rx_geom.arrival_angle(tx_geom.center),
            h_p, wl,
        )
    k = link.params.k_factor
    return math.sqrt(k / (1.0 + k)) * los + math.sqrt(1.0 / (1.0 + k)) * nlos


def ue_positions(config: ScenarioConfig, trial: int) -> np.ndarray:
    """UE positions for a trial: uniform in the square area, fixed height.

    UE ``j`` gets its own seed path, so its position is identical across
    models and across sweep cells with different UE counts.
    """
    cx, cy, cz = config.ue_area.center
    half = config.ue_area.side / 2.0
    out = np.empty((config.ue_count, 3))
    for j in range(config.ue_count):
        rng = seeding.derive_rng(config.master_seed, trial, seeding.STREAM_UE_POSITION, j)
        out[j] = (
            cx + rng.uniform(-half, half),
            cy + rng.uniform(-half, half),
            cz,
        )
    return out


def run_trial(
    config: ScenarioConfig,
    trial_index: int,
    model: ChannelModel | None = None,
    ctx: SimContext | None = None,
) -> TrialResult:
    """One Monte Carlo trial; deterministic given (config, trial_index, model)."""
    if model is None:
        if len(config.models) != 1:
            raise ValueError("config selects several models; pass one explicitly")
        model = config.models[0]
    if ctx is None:
        ctx = SimContext(config)
    t0 = time.perf_counter()

    positions = ue_positions(config, trial_index)
    n_t = ctx.bs_geom.size
    k = config.ue_count
    direct = np.empty((n_t, k), dtype=complex)
    h_r = np.empty((ctx.ris_geom.size, k), dtype=complex)
    h_t = _draw_link(
        model, LinkRole.TX_TO_RIS, ctx.bs_geom, ctx.ris_geom, config, ctx, trial_index, 0
    )
    for j in range(k):
        ue_geom = ArrayGeometry.single(positions[j])
        d_row = _draw_link(
            model, LinkRole.DIRECT, ctx.bs_geom, ue_geom, config, ctx, trial_index, j
        )
        r_row = _draw_link(
            model, LinkRole.RIS_TO_RX, ctx.ris_geom, ue_geom, config, ctx, trial_index, j
        )
        direct[:, j] = np.conj(d_row[0])  # h_{d,k} with h^H the received row
        h_r[:, j] = np.conj(r_row[0])

    _, effective = configure_tiles(direct, h_t, h_r, ctx.partition, ctx.codebook)
    try:
        solution = min_power_precoder(
            effective,
            config.gamma_thr,
            ctx.noise_power,
            max_iters=config.precoder_max_iters,
            tol=config.precoder_tol,
        )
        feasible, power = True, solution.total_power
    except InfeasibleError:
        feasible, power = False, math.nan

    return TrialResult(
        model=model.value,
        q=config.q_total,
        n_ue=k,
        trial=trial_index,
        feasible=feasible,
        total_power_watts=power,
        seed=config.master_seed,
        wall_time=time.perf_counter() - t0,
    )


def aggregate(results: list[TrialResult]) -> AggregateRow:
    """Collapse the trials of one sweep cell into a summary row.

    The mean is taken over linear watts of the feasible trials and reported
    in dBm; the spread is the population standard deviation of the per-trial
    dBm values.  Cells with no feasible trial report NaN for both.
    """
    if not results:
        raise ValueError("no trials to aggregate")
    first = results[0]
    powers = np.array([r.total_power_watts for r in results if r.feasible])
    if powers.size:
        mean_dbm = units.watts_to_dbm(float(powers.mean()))
        dbm = 10.0 * np.log10(powers) + 30.0
        std_db = float(dbm.std())
    else:
        mean_dbm = math.nan
        std_db = math.nan
    return AggregateRow(
        model=first.model,
        q=first.q,
        n_ue=first.n_ue,
        trials=len(results),
        feasible_frac=powers.size / len(results),
        mean_ptx_dbm=mean_dbm,
        std_ptx_db=std_db,
        seed=first.seed,
    )


def run_cell(config: ScenarioConfig, model: ChannelModel) -> list[TrialResult]:
    """All trials of one (model, Q, N_UE) cell with a shared context."""
    ctx = SimContext(config)
    return [run_trial(config, i, model=model, ctx=ctx) for i in range(config.trials)]


def run_sweep(config: ScenarioConfig) -> SweepResult:
    """Cartesian sweep over (model, Q, N_UE) with paired per-trial seeds."""
    if not (config.models and config.sweep_q and config.sweep_n_ue):
        raise ValueError("sweep axes must be non-empty")
    aggregates: list[AggregateRow] = []
    raw: list[TrialResult] = []
    for model in config.models:
        for q in config.sweep_q:
            for n_ue in config.sweep_n_ue:
                cell = replace(with_q(config, q), ue_count=n_ue, models=[model])
                t0 = time.perf_counter()
                results = run_cell(cell, model)
                logger.info(
                    "cell model=%s q=%d n_ue=%d: %d trials in %.1f s",
                    model.value, q, n_ue, len(results), time.perf_counter() - t0,
                )
                raw.extend(results)
                aggregates.append(aggregate(results))
    return SweepResult(aggregates=aggregates, raw=raw)


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

AGGREGATE_HEADER = "model,Q,n_ue,trials,feasible_frac,mean_ptx_dbm,std_ptx_db,seed"
RAW_HEADER = "model,Q,n_ue,trial,feasible,ptx_watts,seed"


def _num(x: float) -> str:
    return format(x, ".10g")


def aggregate_csv(rows: list[AggregateRow]) -> str:
    lines = [AGGREGATE_HEADER]
    for r in rows:
        lines.append(
            f"{r.model},{r.q},{r.n_ue},{r.trials},{_num(r.feasible_frac)},"
            f"{_num(r.mean_ptx_dbm)},{_num(r.std_ptx_db)},{r.seed}"
        )
    return "\n".join(lines) + "\n"


def raw_csv(results: list[TrialResult]) -> str:
    lines = [RAW_HEADER]
    for r in results:
        lines.append(
            f"{r.model},{r.q},{r.n_ue},{r.trial},{int(r.feasible)},"
            f"{_num(r.total_power_watts)},{r.seed}"
        )
    return "\n".join(lines) + "\n"
