"""Channel generators of increasing modeling fidelity.

Five small-scale fading models share a common per-link power budget ``h_p``:

* iid Rayleigh entries,
* iid Rician (rank-one planar line-of-sight plus iid scatter),
* correlated Rayleigh (matrix-normal scatter with sinc correlations),
* low-rank geometric (clustered sub-paths, planar wave per array),
* near-field geometric (exact per-element-pair spherical distances).

All samplers normalize so that ``E||H||_F^2 = h_p * N_rx * N_tx`` and are
pure functions of their RNG, so identical seeds reproduce identical draws.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import units
from .geometry import Angle, ArrayGeometry, steering_vector

# Minimum allowed separation between a scatterer and any antenna element;
# draws closer than this are rejected and resampled.
_MIN_SCATTER_CLEARANCE = 1e-9


class ChannelModel(str, enum.Enum):
    IID_RAYLEIGH = "iid_rayleigh"
    IID_RICIAN = "iid_rician"
    CORRELATED_RAYLEIGH = "correlated_rayleigh"
    LOWRANK_GEOMETRIC = "lowrank_geometric"
    NEARFIELD_GEOMETRIC = "nearfield_geometric"


class LinkRole(str, enum.Enum):
    DIRECT = "bs_ue"
    TX_TO_RIS = "bs_ris"
    RIS_TO_RX = "ris_ue"


@dataclass
class LinkParams:
    """Large-scale parameters of one link.

    ``beta`` is the linear pathloss at reference distance ``d0``; ``eta`` the
    pathloss exponent; ``k_factor`` the (linear) Rician K-factor; blockage and
    shadow terms are deterministic dB offsets folded into the power budget.
    """

    beta: float
    d0: float = 1.0
    eta: float = 2.0
    k_factor: float = 0.0
    blockage_db: float = 0.0
    shadow_db: float = 0.0

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be > 0 (linear)")
        if self.d0 <= 0:
            raise ValueError("d0 must be > 0")
        if self.eta < 0:
            raise ValueError("eta must be >= 0")
        if self.k_factor < 0:
            raise ValueError("k_factor must be >= 0")


@dataclass
class ChannelMatrix:
    """Complex channel realization plus provenance metadata."""

    h: np.ndarray
    model: ChannelModel | None = None
    link: LinkRole | None = None
    seed: int | None = None

    @property
    def shape(self):
        return self.h.shape


def pathloss(params: LinkParams, d: float) -> float:
    """Composite linear power budget ``beta*(d0/d)^eta`` with blockage/shadow offsets."""
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    gain = params.beta * (params.d0 / d) ** params.eta
    return gain * units.db_to_linear(params.blockage_db) * units.db_to_linear(params.shadow_db)


def free_space_beta(wavelength: float) -> float:
    """Free-space reference pathloss ``(lambda / 4 pi)^2`` at 1 m."""
    return (wavelength / (4.0 * math.pi)) ** 2


def sample_iid_rayleigh(
    rng: np.random.Generator, n_rx: int, n_tx: int, h_p: float
) -> ChannelMatrix:
    """Entries iid CN(0, h_p): real/imaginary parts each of variance h_p/2."""
    if h_p < 0:
        raise ValueError("h_p must be >= 0")
    scale = math.sqrt(h_p / 2.0)
    h = scale * (rng.standard_normal((n_rx, n_tx)) + 1j * rng.standard_normal((n_rx, n_tx)))
    return ChannelMatrix(h=h, model=ChannelModel.IID_RAYLEIGH)


def los_matrix(
    tx_geom: ArrayGeometry,
    rx_geom: ArrayGeometry,
    tx_angle: Angle,
    rx_angle: Angle,
    h_p: float,
    wavelength: float,
) -> np.ndarray:
    """Rank-one planar line-of-sight matrix ``sqrt(h_p) * a_rx a_tx^H``.

    All steering entries are unit modulus, so the squared Frobenius norm is
    ``h_p * N_rx * N_tx``.
    """
    a_rx = steering_vector(rx_geom, rx_angle, wavelength)
    a_tx = steering_vector(tx_geom, tx_angle, wavelength)
    return math.sqrt(h_p) * np.outer(a_rx, np.conj(a_tx))


def nearfield_los(
    tx_geom: ArrayGeometry, rx_geom: ArrayGeometry, h_p: float, wavelength: float
) -> np.ndarray:
    """Line-of-sight matrix with exact spherical phases per element pair.

    Entry (m, n) is ``sqrt(h_p) * exp(j*kappa*||u_tx,n - u_rx,m||)``; no
    planar approximation, so the wavefront curvature across large arrays is
    retained.
    """
    kappa = 2.0 * math.pi / wavelength
    d = np.linalg.norm(
        rx_geom.element_positions[:, None, :] - tx_geom.element_positions[None, :, :],
        axis=-1,
    )
    return math.sqrt(h_p) * np.exp(1j * kappa * d)


def sample_rician(
    rng: np.random.Generator,
    los: np.ndarray,
    nlos_sampler,
    k_factor: float,
    model: ChannelModel = ChannelModel.IID_RICIAN,
) -> ChannelMatrix:
    """K-factor weighted combination of a LOS matrix and an nLOS draw.

    ``nlos_sampler(rng)`` must return an ndarray (or ChannelMatrix) matching
    the LOS shape; the result is
    ``sqrt(K/(1+K)) * los + sqrt(1/(1+K)) * nlos``.
    """
    if k_factor < 0:
        raise ValueError("k_factor must be >= 0")
    nlos = nlos_sampler(rng)
    if isinstance(nlos, ChannelMatrix):
        nlos = nlos.h
    w_los = math.sqrt(k_factor / (1.0 + k_factor))
    w_nlos = math.sqrt(1.0 / (1.0 + k_factor))
    return ChannelMatrix(h=w_los * los + w_nlos * nlos, model=model)


# ---------------------------------------------------------------------------
# Clustered geometric models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Box:
    """Axis-aligned volume in which scattering clusters are placed."""

    lo: tuple[float, float, float]
    hi: tuple[float, float, float]

    def __post_init__(self):
        if any(h <= l for l, h in zip(self.lo, self.hi)):
            raise ValueError(f"empty cluster volume: lo={self.lo}, hi={self.hi}")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(n, 3))

    def contains(self, point) -> bool:
        p = np.asarray(point, dtype=float)
        return bool(np.all(p >= self.lo) and np.all(p <= self.hi))


@dataclass
class ScatteringCluster:
    """One scattering object: a centroid, a gain, and R nearby sub-paths."""

    centroid: np.ndarray
    gain: float
    subpath_positions: np.ndarray  # (R, 3), inside the 2 m cube at the centroid
    subpath_phases: np.ndarray  # (R,), in [0, 2*pi)


@dataclass
class ClusterSet:
    """Cluster draw for one link, carrying the power budget it was drawn for."""

    clusters: list[ScatteringCluster]
    h_p: float

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    @property
    def n_subpaths(self) -> int:
        return self.clusters[0].subpath_positions.shape[0]

    def all_positions(self) -> np.ndarray:
        return np.concatenate([c.subpath_positions for c in self.clusters])

    def all_phases(self) -> np.ndarray:
        return np.concatenate([c.subpath_phases for c in self.clusters])

    def gains(self) -> np.ndarray:
        return np.array([c.gain for c in self.clusters])


# Sub-paths of one cluster live in a cube of this side length (meters)
# centered on the cluster centroid.
SUBPATH_CUBE_SIDE = 2.0


def draw_clusters(
    rng: np.random.Generator,
    volume: Box,
    n_clusters: int,
    n_subpaths: int,
    h_p: float,
    gain_distribution: str = "gaussian",
    avoid_points: np.ndarray | None = None,
) -> ClusterSet:
    """Draw cluster centroids, per-cluster gains, and sub-path positions/phases.

    Centroids are uniform in ``volume``; sub-paths are uniform in the 2 m cube
    around their centroid; gains are zero mean with variance ``h_p``
    (``gaussian`` or ``rademacher``); phases are iid uniform on [0, 2*pi).
    Sub-paths landing within the clearance distance of any point in
    ``avoid_points`` (e.g. antenna element positions) are resampled.
    """
    if n_clusters < 1 or n_subpaths < 1:
        raise ValueError("need at least one cluster and one sub-path")
    centroids = volume.sample(rng, n_clusters)
    if gain_distribution == "gaussian":
        gains = math.sqrt(h_p) * rng.standard_normal(n_clusters)
    elif gain_distribution == "rademacher":
        gains = math.sqrt(h_p) * rng.choice([-1.0, 1.0], size=n_clusters)
    else:
        raise ValueError(f"unknown gain distribution {gain_distribution!r}")
    half = SUBPATH_CUBE_SIDE / 2.0
    clusters = []
    for centroid, gain in zip(centroids, gains):
        pos = centroid + rng.uniform(-half, half, size=(n_subpaths, 3))
        if avoid_points is not None and len(avoid_points):
            for r in range(n_subpaths):
                while np.min(np.linalg.norm(avoid_points - pos[r], axis=1)) < _MIN_SCATTER_CLEARANCE:
                    pos[r] = centroid + rng.uniform(-half, half, size=3)
        phases = rng.uniform(0.0, 2.0 * math.pi, size=n_subpaths)
        clusters.append(
            ScatteringCluster(
                centroid=centroid, gain=float(gain), subpath_positions=pos, subpath_phases=phases
            )
        )
    return ClusterSet(clusters=clusters, h_p=h_p)


def _propagation_geometry(clusters: ClusterSet, tx_geom: ArrayGeometry, rx_geom: ArrayGeometry):
    """Per-sub-path center distances and local propagation directions.

    Directions follow the wave: at the transmitter the ray leaves toward the
    scatterer, at the receiver it continues from the scatterer through the
    array.
    """
    p = clusters.all_positions()  # (LR, 3)
    c_tx, c_rx = tx_geom.center, rx_geom.center
    v_tx = p - c_tx
    v_rx = c_rx - p
    d_tx = np.linalg.norm(v_tx, axis=1)
    d_rx = np.linalg.norm(v_rx, axis=1)
    if d_tx.min() < _MIN_SCATTER_CLEARANCE or d_rx.min() < _MIN_SCATTER_CLEARANCE:
        raise ValueError("sub-path coincides with an array center")
    dir_tx = tx_geom.rotation.T @ (v_tx / d_tx[:, None]).T  # (3, LR), local frame
    dir_rx = rx_geom.rotation.T @ (v_rx / d_rx[:, None]).T
    return d_tx, d_rx, dir_tx, dir_rx


def _centered_coords(geom: ArrayGeometry) -> np.ndarray:
    return geom.local_coords - geom.local_coords.mean(axis=0)


def lowrank_from_clusters(
    clusters: ClusterSet,
    tx_geom: ArrayGeometry,
    rx_geom: ArrayGeometry,
    wavelength: float,
) -> np.ndarray:
    """Clustered channel with planar wavefronts per array (far-field per path).

    Each sub-path contributes
    ``g_l * exp(j(psi + kappa*(d_tx + d_rx))) * a_rx a_tx^H`` where the
    steering vectors are evaluated at the center-to-scatterer directions and
    phase-referenced to the array centers; the sum is scaled by
    ``1/sqrt(L*R)``.
    """
    kappa = 2.0 * math.pi / wavelength
    d_tx, d_rx, dir_tx, dir_rx = _propagation_geometry(clusters, tx_geom, rx_geom)
    n_sub = clusters.n_subpaths
    gains = np.repeat(clusters.gains(), n_sub)
    coeff = gains * np.exp(1j * (clusters.all_phases() + kappa * (d_tx + d_rx)))
    a_tx = np.exp(1j * kappa * (_centered_coords(tx_geom) @ dir_tx))  # (N_tx, LR)
    a_rx = np.exp(1j * kappa * (_centered_coords(rx_geom) @ dir_rx))  # (N_rx, LR)
    scale = 1.0 / math.sqrt(len(coeff))
    return scale * ((a_rx * coeff) @ np.conj(a_tx).T)


def nearfield_from_clusters(
    clusters: ClusterSet,
    tx_geom: ArrayGeometry,
    rx_geom: ArrayGeometry,
    wavelength: float,
) -> np.ndarray:
    """Clustered channel with exact spherical phases per element pair.

    Entry (m, n) sums ``sqrt(h_p) * exp(j(kappa*d + psi))`` over sub-paths,
    where ``d = ||u_tx,n - p|| + ||p - u_rx,m||`` is the exact propagation
    distance through the scatterer.  Because the distance splits per end, the
    sum factors into two phase matrices and one product.
    """
    kappa = 2.0 * math.pi / wavelength
    p = clusters.all_positions()  # (LR, 3)
    d_tx = np.linalg.norm(tx_geom.element_positions[:, None, :] - p[None, :, :], axis=-1)
    d_rx = np.linalg.norm(p[None, :, :] - rx_geom.element_positions[:, None, :], axis=-1)
    if min(d_tx.min(), d_rx.min()) < _MIN_SCATTER_CLEARANCE:
        raise ValueError("sub-path coincides with an antenna element")
    amp = math.sqrt(clusters.h_p) * np.exp(1j * clusters.all_phases())
    scale = 1.0 / math.sqrt(len(amp))
    return scale * ((np.exp(1j * kappa * d_rx) * amp) @ np.exp(1j * kappa * d_tx).T)


def sample_lowrank_geometric(
    rng: np.random.Generator,
    tx_geom: ArrayGeometry,
    rx_geom: ArrayGeometry,
    volume: Box,
    h_p: float,
    wavelength: float,
    n_clusters: int,
    n_subpaths: int,
    gain_distribution: str = "gaussian",
) -> ChannelMatrix:
    """Draw clusters in ``volume`` and evaluate the low-rank geometric model."""
    clusters = draw_clusters(
        rng, volume, n_clusters, n_subpaths, h_p, gain_distribution,
        avoid_points=np.concatenate([tx_geom.element_positions, rx_geom.element_positions]),
    )
    h = lowrank_from_clusters(clusters, tx_geom, rx_geom, wavelength)
    return ChannelMatrix(h=h, model=ChannelModel.LOWRANK_GEOMETRIC)


def sample_nearfield_geometric(
    rng: np.random.Generator,
    tx_geom: ArrayGeometry,
    rx_geom: ArrayGeometry,
    volume: Box,
    h_p: float,
    wavelength: float,
    n_clusters: int,
    n_subpaths: int,
    gain_distribution: str = "gaussian",
) -> ChannelMatrix:
    """Draw clusters in ``volume`` and evaluate the near-field geometric model."""
    clusters = draw_clusters(
        rng, volume, n_clusters, n_subpaths, h_p, gain_distribution,
        avoid_points=np.concatenate([tx_geom.element_positions, rx_geom.element_positions]),
    )
    h = nearfield_from_clusters(clusters, tx_geom, rx_geom, wavelength)
    return ChannelMatrix(h=h, model=ChannelModel.NEARFIELD_GEOMETRIC)
