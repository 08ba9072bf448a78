"""
Transformada de Fourier de medidas discretas e espectro de Fourier.

As energias J_{s,θ} são avaliadas por cascas diádicas de frequência
[R, 2R). Em cada casca S = média de |μ̂|^{2/θ} · R^d; ajustando S ~ R^{-ρ}
na metade superior das cascas, J_{s,θ} é finita para s < θ(d + ρ), que é
a estimativa reportada (com piso 0). Para θ = 0 usa-se o máximo de |μ̂|²
por casca, cujo decaimento R^{-β} dá a dimensão de Fourier β.

Amostragem: d = 1 usa pontos estratificados determinísticos em z > 0
(|μ̂(−z)| = |μ̂(z)|); d = 2 usa ângulos estratificados com perturbação e
raios uniformes em área; d ≥ 3 usa Monte Carlo na esfera com raio de
densidade ∝ t^{d−1} e pares antitéticos no raio.
"""

from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from scr.core.capacity import MAX_SUPPORT, solve_equilibrium
from scr.core.covering import box_estimate
from scr.core.errors import (
    CutoffExceedsResolutionError,
    DimlabError,
    InsufficientScalesError,
    ParameterDomainError,
)
from scr.core.geometry import cell_codes, grid_indices
from scr.core.model.cloud import PointCloud
from scr.core.model.curves import FourierCurve, ShellEnergyCurve
from scr.core.model.measure import DiscreteMeasure, KernelSpec

SAMPLES_PER_SHELL = 512
# amostras por unidade de comprimento da circunferência (d = 2)
ANGULAR_DENSITY = 8.0
# raios por eixo acrescentados às amostras do supremo (d ≥ 2)
AXIS_SAMPLES = 64
# elementos por bloco da matriz de fases
BLOCK_ELEMENTS = 1 << 22
MIN_FIT_SHELLS = 2
# limite do suporte da testemunha produto
MAX_PRODUCT_SUPPORT = 1 << 18


def uniform_measure(cloud: PointCloud) -> DiscreteMeasure:
    """Medida uniforme sobre os pontos da nuvem."""
    return DiscreteMeasure(support=cloud, weights=np.full(cloud.size, 1.0 / cloud.size))


def ft_many(mu: DiscreteMeasure, z: np.ndarray) -> np.ndarray:
    """
    μ̂(z) = Σ_j w_j exp(−2πi z·x_j) para várias frequências.

    Args:
        mu: Medida discreta
        z: Frequências (m, d)

    Returns:
        Array complexo (m,)
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim == 1:
        z = z.reshape(-1, mu.support.dim_ambient)
    points, w = mu.points, mu.weights
    out = np.empty(z.shape[0], dtype=np.complex128)
    rows = max(1, BLOCK_ELEMENTS // max(1, points.shape[0]))
    for start in range(0, z.shape[0], rows):
        phase = -2.0 * np.pi * (z[start:start + rows] @ points.T)
        out[start:start + rows] = np.exp(1j * phase) @ w
    return out


def ft_measure(mu: DiscreteMeasure, z: Sequence[float]) -> complex:
    """μ̂(z) numa única frequência."""
    return complex(ft_many(mu, np.asarray(z, dtype=np.float64).reshape(1, -1))[0])


def _max_cutoff(mu: DiscreteMeasure) -> float:
    return 1.0 / (4.0 * mu.support.resolution)


def _shell_radii(z_max: float) -> np.ndarray:
    count = int(np.floor(np.log2(z_max) + 1e-9))
    return 2.0 ** np.arange(count)


def _shell_frequencies(d: int, R: float, n: int, rng: np.random.Generator) -> np.ndarray:
    if d == 1:
        return (R + R * (np.arange(n) + 0.5) / n).reshape(-1, 1)
    if d == 2:
        n = max(n, int(np.ceil(ANGULAR_DENSITY * np.pi * R)))
        angles = np.pi * (np.arange(n) + rng.random(n)) / n
        radii = R * np.sqrt(1.0 + 3.0 * rng.random(n))
        return radii[:, None] * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    half = (n + 1) // 2
    directions = rng.standard_normal((half, d))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    u = rng.random(half)
    scale = 2.0 ** d - 1.0
    radii = np.concatenate([
        R * (1.0 + scale * u) ** (1.0 / d),
        R * (1.0 + scale * (1.0 - u)) ** (1.0 / d),
    ])
    return radii[:, None] * np.concatenate([directions, directions])


def _axis_frequencies(d: int, R: float) -> np.ndarray:
    t = R + R * (np.arange(AXIS_SAMPLES) + 0.5) / AXIS_SAMPLES
    blocks = []
    for axis in range(d):
        z = np.zeros((AXIS_SAMPLES, d))
        z[:, axis] = t
        blocks.append(z)
    return np.concatenate(blocks)


class _ShellSamples:
    """|μ̂| amostrado por casca, reutilizado entre valores de θ."""

    def __init__(self, mu: DiscreteMeasure, z_max: float, samples_per_shell: int, seed: int):
        self.d = mu.support.dim_ambient
        self.z_max = z_max
        self.radii = _shell_radii(z_max)
        self.magnitudes: List[np.ndarray] = []
        self.suprema: List[float] = []
        for m, R in enumerate(self.radii):
            rng = np.random.default_rng([seed, m])
            z = _shell_frequencies(self.d, R, samples_per_shell, rng)
            magnitude = np.abs(ft_many(mu, z))
            sup = float(magnitude.max())
            if self.d > 1:
                sup = max(sup, float(np.abs(ft_many(mu, _axis_frequencies(self.d, R))).max()))
            self.magnitudes.append(np.minimum(magnitude, 1.0))
            self.suprema.append(min(sup, 1.0))
            logger.debug(f"Casca R={R:g}: {z.shape[0]} amostras, sup |μ̂|={sup:.4g}")

    def values(self, theta: float) -> np.ndarray:
        if theta == 0.0:
            return np.asarray(self.suprema) ** 2
        return np.array([
            np.mean(mag ** (2.0 / theta)) * R ** self.d for mag, R in zip(self.magnitudes, self.radii)
        ])

    def curve(self, theta: float) -> ShellEnergyCurve:
        return ShellEnergyCurve(
            radii=self.radii,
            values=self.values(theta),
            n_samples=[mag.size for mag in self.magnitudes],
            theta=theta,
            cutoff=self.z_max,
            dim_ambient=self.d,
        )

    def estimate(self, theta: float) -> Tuple[float, float, float]:
        """(estimativa, ρ ou β, r²) pelo ajuste na metade superior das cascas."""
        values = self.values(theta)
        upper = np.arange(self.radii.size // 2, self.radii.size)
        upper = upper[values[upper] > 0]
        if upper.size < MIN_FIT_SHELLS:
            raise InsufficientScalesError(
                f"Espectro de Fourier exige ≥ {MIN_FIT_SHELLS} cascas válidas, disponíveis {upper.size}"
            )
        x, y = np.log(self.radii[upper]), np.log(values[upper])
        slope, intercept = np.polyfit(x, y, 1)
        residual = y - (slope * x + intercept)
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        r_squared = 1.0 if ss_tot == 0 else float(np.clip(1.0 - np.sum(residual ** 2) / ss_tot, 0.0, 1.0))
        decay = float(-slope)
        if theta == 0.0:
            estimate = decay
        else:
            estimate = theta * (self.d + decay)
        return max(0.0, float(estimate)), decay, r_squared


def _prepare(
    mu: DiscreteMeasure,
    z_max: Optional[float],
    samples_per_shell: int,
    seed: int,
) -> _ShellSamples:
    limit = _max_cutoff(mu)
    z_max = limit if z_max is None else z_max
    if z_max > limit * (1.0 + 1e-12):
        raise CutoffExceedsResolutionError(
            f"Corte {z_max:g} acima de 1/(4δ) = {limit:g}"
        )
    if z_max < 2.0:
        raise InsufficientScalesError(f"Corte {z_max:g} não comporta nenhuma casca diádica")
    return _ShellSamples(mu, z_max, samples_per_shell, seed)


def _check_theta(theta: float, allow_zero: bool = False) -> None:
    low_ok = theta >= 0.0 if allow_zero else theta > 0.0
    if not (low_ok and theta <= 1.0):
        raise ParameterDomainError(f"θ fora do domínio: {theta}")


def shell_energies(
    mu: DiscreteMeasure,
    theta: float,
    z_max: Optional[float] = None,
    samples_per_shell: int = SAMPLES_PER_SHELL,
    seed: int = 0,
) -> ShellEnergyCurve:
    """
    Energias por casca diádica até z_max.

    Args:
        mu: Medida discreta
        theta: θ em (0, 1]
        z_max: Frequência de corte (padrão 1/(4δ))
        samples_per_shell: Amostras por casca
        seed: Semente mestre (sementes por casca derivadas dela)

    Returns:
        ShellEnergyCurve reproduzível para a mesma semente

    Raises:
        CutoffExceedsResolutionError: Se z_max > 1/(4δ)
    """
    _check_theta(theta)
    return _prepare(mu, z_max, samples_per_shell, seed).curve(theta)


def fourier_spectrum_point(
    mu: DiscreteMeasure,
    theta: float,
    z_max: Optional[float] = None,
    samples_per_shell: int = SAMPLES_PER_SHELL,
    seed: int = 0,
) -> float:
    """
    Estimativa de dim_F^θ μ = θ(d + ρ), sem limitar a d.

    Raises:
        InsufficientScalesError: Com menos de 2 cascas válidas
    """
    _check_theta(theta)
    return _prepare(mu, z_max, samples_per_shell, seed).estimate(theta)[0]


def fourier_dimension_point(
    mu: DiscreteMeasure,
    z_max: Optional[float] = None,
    samples_per_shell: int = SAMPLES_PER_SHELL,
    seed: int = 0,
) -> float:
    """Dimensão de Fourier: decaimento do envelope sup |μ̂|² por casca."""
    return _prepare(mu, z_max, samples_per_shell, seed).estimate(0.0)[0]


def fourier_curve(
    mu: DiscreteMeasure,
    thetas: Sequence[float],
    z_max: Optional[float] = None,
    samples_per_shell: int = SAMPLES_PER_SHELL,
    seed: int = 0,
    witness: str = "",
) -> FourierCurve:
    """
    Espectro de Fourier na grade, acrescido de θ = 0 e θ = 1.

    As mesmas amostras de |μ̂| servem a todos os θ.
    """
    grid = sorted({0.0, 1.0, *(float(t) for t in thetas)})
    for theta in grid:
        _check_theta(theta, allow_zero=True)
    samples = _prepare(mu, z_max, samples_per_shell, seed)
    values, rho, r2 = [], [], []
    for theta in grid:
        value, decay, fit_r2 = samples.estimate(theta)
        values.append(value)
        rho.append(decay)
        r2.append(fit_r2)
    logger.info(
        f"Espectro de Fourier de {mu.support.label or 'medida'}: "
        f"dim_F={values[0]:.4f}, dim_S={values[-1]:.4f}"
    )
    return FourierCurve(
        thetas=grid,
        values=values,
        rho=rho,
        fit_r2=r2,
        dim_ambient=mu.support.dim_ambient,
        witness=witness or mu.support.label,
    )


def coarse_net(cloud: PointCloud, max_support: int = MAX_SUPPORT) -> PointCloud:
    """
    Um ponto por cubo diádico ocupado, no nível mais fino com ≤ max_support cubos.

    O representante de cada cubo é seu primeiro ponto (lexicográfico); a
    resolução da rede é o lado do cubo.

    Raises:
        ParameterDomainError: Se nem o nível 1 cabe em max_support
    """
    top, bottom = cloud.points.max(axis=0), cloud.points.min(axis=0)
    for j in range(cloud.finest_level(), 0, -1):
        side = 2.0 ** (-j)
        _, first = np.unique(cell_codes(grid_indices(cloud.points, side, top, bottom)), return_index=True)
        if first.size <= max_support:
            return PointCloud(
                points=cloud.points[np.sort(first)],
                resolution=max(cloud.resolution, side),
                label=cloud.label,
            )
    raise ParameterDomainError(f"Nenhum nível diádico da nuvem cabe em {max_support} pontos")


def equilibrium_witness(
    cloud: PointCloud,
    s: Optional[float] = None,
    max_support: int = MAX_SUPPORT,
) -> DiscreteMeasure:
    """
    Medida de equilíbrio do kernel de caixa sobre a rede grossa da nuvem.

    Args:
        cloud: Nuvem de pontos
        s: Expoente do kernel (padrão: estimativa de caixa, ou d/2)
        max_support: Limite de pontos da rede

    Returns:
        Medida sobre coarse_net(cloud), com r igual ao lado da rede
    """
    net = coarse_net(cloud, max_support)
    if s is None:
        s = box_estimate(cloud, default=0.0)
    if s <= 0.0:
        s = cloud.dim_ambient / 2.0
    return solve_equilibrium(net, KernelSpec.box(net.resolution, s)).measure


def product_witness(cloud: PointCloud, max_support: int = MAX_PRODUCT_SUPPORT) -> Optional[DiscreteMeasure]:
    """
    Produto das medidas de equilíbrio das projeções nos eixos.

    Só existe quando a nuvem é o produto das suas projeções (d ≥ 2); o
    suporte é o produto das redes grossas dos eixos, contido na nuvem.

    Returns:
        Medida produto, ou None se a nuvem não é um produto
    """
    d = cloud.dim_ambient
    if d < 2:
        return None
    axes = [np.unique(cloud.points[:, i]) for i in range(d)]
    if float(np.prod([a.size for a in axes], dtype=np.float64)) != cloud.size:
        return None
    per_axis = max(2, int(max_support ** (1.0 / d)))
    factors = [
        equilibrium_witness(PointCloud(points=a, resolution=cloud.resolution), max_support=per_axis)
        for a in axes
    ]
    grids = np.meshgrid(*[f.points[:, 0] for f in factors], indexing="ij")
    weights = np.prod(np.meshgrid(*[f.weights for f in factors], indexing="ij"), axis=0)
    points = np.stack([g.reshape(-1) for g in grids], axis=1)
    resolution = max(f.support.resolution for f in factors)
    return DiscreteMeasure.from_points(points, weights.reshape(-1), resolution, label=cloud.label)


def witness_family(cloud: PointCloud) -> Dict[str, DiscreteMeasure]:
    """
    Família padrão de medidas testemunha: uniforme, equilíbrio e produto.

    Testemunhas que não podem ser construídas são omitidas com aviso.
    """
    family = {"uniform": uniform_measure(cloud)}
    builders: Dict[str, Callable[[], Optional[DiscreteMeasure]]] = {
        "equilibrium": lambda: equilibrium_witness(cloud),
        "product": lambda: product_witness(cloud),
    }
    for name, build in builders.items():
        try:
            mu = build()
        except DimlabError as e:
            logger.warning(f"Testemunha {name} omitida: {e}")
            continue
        if mu is not None:
            family[name] = mu
    return family


def set_fourier_spectrum(
    cloud: PointCloud,
    thetas: Sequence[float],
    witnesses: Optional[Mapping[str, DiscreteMeasure]] = None,
    z_max: Optional[float] = None,
    samples_per_shell: int = SAMPLES_PER_SHELL,
    seed: int = 0,
) -> FourierCurve:
    """
    Cota inferior do espectro de Fourier do conjunto.

    Máximo, por θ, dos espectros das medidas testemunha (padrão:
    witness_family), limitado a d. O campo witness lista as testemunhas
    que realizam o máximo em algum θ. Testemunhas cujo corte não comporta
    cascas suficientes são puladas.

    Raises:
        InsufficientScalesError: Se nenhuma testemunha produzir curva
    """
    witnesses = dict(witnesses) if witnesses else witness_family(cloud)
    curves: List[FourierCurve] = []
    for name, mu in witnesses.items():
        try:
            curves.append(fourier_curve(mu, thetas, z_max, samples_per_shell, seed, witness=name))
        except (InsufficientScalesError, CutoffExceedsResolutionError) as e:
            logger.warning(f"Testemunha {name} pulada: {e}")
    if not curves:
        raise InsufficientScalesError(f"Nenhuma testemunha de {cloud.label or 'nuvem'} produziu espectro")
    stacked = np.stack([c.values for c in curves])
    best = np.argmax(stacked, axis=0)
    columns = np.arange(stacked.shape[1])
    return FourierCurve(
        thetas=curves[0].thetas,
        values=np.minimum(stacked[best, columns], cloud.dim_ambient),
        rho=np.stack([c.rho for c in curves])[best, columns],
        fit_r2=np.stack([c.fit_r2 for c in curves])[best, columns],
        dim_ambient=cloud.dim_ambient,
        witness=",".join(sorted({curves[i].witness for i in best})),
    )
