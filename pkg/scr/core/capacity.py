"""
Energias de kernel, medidas de equilíbrio, capacidades e perfis de dimensão.

A energia w^T K w é minimizada no simplex por Frank–Wolfe com passos de
afastamento (away steps) e busca exata na reta. Periodicamente o suporte
atual é "polido" resolvendo o sistema de igualdade K_SS w_S = λ·1; quando
os pesos saem positivos e o potencial fora do suporte não fica abaixo da
energia, a solução satisfaz as condições de KKT.
"""

from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy.optimize import bisect
from scipy.spatial.distance import cdist

from scr.core.covering import fit_arrays
from scr.core.errors import InsufficientScalesError, ParameterDomainError
from scr.core.geometry import maximal_separated_subset
from scr.core.model.cloud import PointCloud
from scr.core.model.curves import CapacityCurve, SlopeFit
from scr.core.model.measure import DiscreteMeasure, EquilibriumSolution, KernelFamily, KernelSpec

FW_TOL = 1e-8
FW_MAX_ITER = 100_000
# tolerância usada dentro das estimativas de perfil
PROFILE_TOL = 1e-6
POLISH_EVERY = 200
POLISH_MAX = 2048
DENSE_LIMIT = 4096
BLOCK = 2048
# limite do suporte e fator da subamostra separada (escala r · fator)
MAX_SUPPORT = 2048
SUBSAMPLE_FACTOR = 0.25
MIN_PROFILE_SCALES = 3
BISECT_TOL = 1e-3


def kernel_values(spec: KernelSpec, dist: np.ndarray) -> np.ndarray:
    """
    Avalia o kernel em distâncias |x| (vetorizado).

    Args:
        spec: Família e parâmetros do kernel
        dist: Distâncias não negativas

    Returns:
        Valores em (0, 1], com φ(0) = 1
    """
    dist = np.asarray(dist, dtype=np.float64)
    r, s = spec.r, spec.s
    if spec.family == KernelFamily.BOX_PROFILE:
        return np.where(dist <= r, 1.0, (r / np.maximum(dist, r)) ** s)
    k, theta = spec.k, spec.theta
    knee = r ** theta
    middle = (r / np.maximum(dist, r)) ** s
    far = r ** (theta * (k - s) + s) / np.maximum(dist, knee) ** k
    return np.where(dist < r, 1.0, np.where(dist < knee, middle, far))


def kernel_eval(spec: KernelSpec, x: Sequence[float]) -> float:
    """φ(x) para um vetor x."""
    return float(kernel_values(spec, np.linalg.norm(np.asarray(x, dtype=np.float64))))


class _KernelOracle:
    """Acesso à matriz K por colunas, produtos e submatrizes."""

    def __init__(self, points: np.ndarray, spec: KernelSpec):
        self.points = points
        self.spec = spec
        self.n = points.shape[0]
        self.dense = None
        if self.n <= DENSE_LIMIT:
            self.dense = kernel_values(spec, cdist(points, points))

    def column(self, i: int) -> np.ndarray:
        if self.dense is not None:
            return self.dense[:, i]
        return kernel_values(self.spec, np.linalg.norm(self.points - self.points[i], axis=1))

    def matvec(self, w: np.ndarray, cols: Optional[np.ndarray] = None) -> np.ndarray:
        """K[:, cols] @ w (todas as colunas quando cols é None)."""
        if self.dense is not None:
            return self.dense @ w if cols is None else self.dense[:, cols] @ w
        col_points = self.points if cols is None else self.points[cols]
        out = np.empty(self.n)
        for start in range(0, self.n, BLOCK):
            block = self.points[start:start + BLOCK]
            out[start:start + BLOCK] = kernel_values(self.spec, cdist(block, col_points)) @ w
        return out

    def submatrix(self, idx: np.ndarray) -> np.ndarray:
        if self.dense is not None:
            return self.dense[np.ix_(idx, idx)]
        pts = self.points[idx]
        return kernel_values(self.spec, cdist(pts, pts))


def energy(mu: DiscreteMeasure, spec: KernelSpec) -> float:
    """
    Energia Σ_i Σ_j w_i w_j φ(x_i − x_j), avaliada em blocos.

    Termos diagonais contribuem w_i² (φ(0) = 1).
    """
    points, w = mu.points, mu.weights
    total = 0.0
    for start in range(0, points.shape[0], BLOCK):
        block = slice(start, start + BLOCK)
        total += float(w[block] @ (kernel_values(spec, cdist(points[block], points)) @ w))
    return total


def _polish(oracle: _KernelOracle, w: np.ndarray, tol: float):
    """
    Resolve K_SS x = 1 no suporte de w, descartando pesos não positivos.

    Returns:
        (pesos, potencial, energia, verificado) ou None se não aplicável
    """
    support = np.flatnonzero(w > 0)
    for _ in range(8):
        if support.size == 0 or support.size > POLISH_MAX:
            return None
        sub = oracle.submatrix(support)
        try:
            x = np.linalg.solve(sub, np.ones(support.size))
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(x)) or x.sum() <= 0:
            return None
        if np.all(x > 0):
            break
        support = support[x > 0]
    else:
        return None
    weights = np.zeros(oracle.n)
    weights[support] = x / x.sum()
    potential = oracle.matvec(weights[support], support)
    value = float(weights @ potential)
    verified = bool(potential.min() >= value * (1.0 - tol))
    return weights, potential, value, verified


def solve_equilibrium(
    cloud: PointCloud,
    spec: KernelSpec,
    tol: float = FW_TOL,
    max_iter: int = FW_MAX_ITER,
) -> EquilibriumSolution:
    """
    Minimiza a energia no simplex por Frank–Wolfe com passos de afastamento.

    Args:
        cloud: Suporte candidato
        spec: Kernel
        tol: Gap de dualidade relativo de parada
        max_iter: Limite de iterações

    Returns:
        EquilibriumSolution; ao atingir o limite devolve o melhor iterado
        com converged=False
    """
    oracle = _KernelOracle(cloud.points, spec)
    n = cloud.size
    w = np.full(n, 1.0 / n)
    kw = oracle.matvec(w)
    f = float(w @ kw)
    converged = verified = False
    iteration = 0

    polished = _polish(oracle, w, tol)
    if polished is not None and polished[2] <= f * (1.0 + 1e-12):
        w, kw, f, verified = polished
        converged = verified

    while not converged and iteration < max_iter:
        iteration += 1
        i = int(np.argmin(kw))
        support = np.flatnonzero(w > 0)
        a = int(support[np.argmax(kw[support])])
        gap = 2.0 * (f - kw[i])
        if gap <= tol * f:
            converged = True
            break
        if iteration % POLISH_EVERY == 0:
            polished = _polish(oracle, w, tol)
            if polished is not None and polished[2] <= f * (1.0 + 1e-12):
                w, kw, f, verified = polished
                if verified:
                    converged = True
                    break
                continue

        fw_gain, away_gain = f - kw[i], kw[a] - f
        if fw_gain >= away_gain or w[a] >= 1.0:
            col = oracle.column(i)
            slope, curvature = kw[i] - f, 1.0 - 2.0 * kw[i] + f
            step_max = 1.0
            step = step_max if curvature <= 0 else min(max(-slope / curvature, 0.0), step_max)
            w *= 1.0 - step
            w[i] += step
            kw = (1.0 - step) * kw + step * col
        else:
            col = oracle.column(a)
            slope, curvature = f - kw[a], f - 2.0 * kw[a] + 1.0
            step_max = w[a] / (1.0 - w[a])
            step = step_max if curvature <= 0 else min(max(-slope / curvature, 0.0), step_max)
            w *= 1.0 + step
            w[a] -= step
            if step == step_max:
                w[a] = 0.0
            kw = (1.0 + step) * kw - step * col
        f = float(w @ kw)

    if not verified:
        polished = _polish(oracle, w, tol)
        if polished is not None and polished[2] <= f * (1.0 + 1e-12):
            w, kw, f, verified = polished
            converged = converged or verified

    w = np.clip(w, 0.0, None)
    w /= w.sum()
    kw = oracle.matvec(w[w > 0], np.flatnonzero(w > 0))
    f = float(w @ kw)
    gap = 2.0 * (f - float(kw.min()))
    if not converged:
        logger.warning(
            f"Frank–Wolfe atingiu {max_iter} iterações com gap {gap:.3g} (energia {f:.6g})"
        )
    measure = DiscreteMeasure(support=cloud, weights=w)
    return EquilibriumSolution(
        measure=measure,
        energy=f,
        gap=gap,
        iterations=iteration,
        converged=converged,
        kkt_verified=verified,
    )


def equilibrium_measure(
    cloud: PointCloud,
    spec: KernelSpec,
    tol: float = FW_TOL,
    max_iter: int = FW_MAX_ITER,
) -> DiscreteMeasure:
    """Medida de equilíbrio (minimizadora da energia) sobre a nuvem."""
    return solve_equilibrium(cloud, spec, tol, max_iter).measure


def reduced_support(
    cloud: PointCloud,
    r: float,
    max_support: int,
    subsample_factor: float,
) -> PointCloud:
    """Subamostra r·fator-separada quando a nuvem excede max_support pontos."""
    if cloud.size <= max_support:
        return cloud
    sub = maximal_separated_subset(cloud, max(r * subsample_factor, cloud.resolution))
    if sub.size > max_support:
        raise ParameterDomainError(
            f"Subamostra separada com {sub.size} pontos excede o limite {max_support} na escala r={r:.4g}"
        )
    return sub


def capacity(
    cloud: PointCloud,
    spec: KernelSpec,
    tol: float = FW_TOL,
    max_support: int = MAX_SUPPORT,
    subsample_factor: float = SUBSAMPLE_FACTOR,
) -> float:
    """
    Capacidade C = 1 / energia de equilíbrio.

    Nuvens com mais de max_support pontos usam uma subamostra maximal
    separada na escala r·subsample_factor.

    Raises:
        ParameterDomainError: Se a subamostra ainda excede max_support
    """
    support = reduced_support(cloud, spec.r, max_support, subsample_factor)
    return solve_equilibrium(support, spec, tol).capacity


def separated_energy_bound(cloud: PointCloud, spec: KernelSpec) -> float:
    """
    Cota inferior de C_r: 1 / energia da medida uniforme num subconjunto
    maximal r-separado.
    """
    sub = maximal_separated_subset(cloud, max(spec.r, cloud.resolution))
    uniform = DiscreteMeasure(support=sub, weights=np.full(sub.size, 1.0 / sub.size))
    return 1.0 / energy(uniform, spec)


def _profile_supports(
    cloud: PointCloud,
    max_support: int,
    subsample_factor: float,
    levels: Optional[Sequence[int]] = None,
) -> Dict[int, PointCloud]:
    """Suportes por nível diádico, parando quando a subamostra não cabe."""
    candidates = levels if levels is not None else range(2, cloud.finest_level() + 1)
    supports: Dict[int, PointCloud] = {}
    for j in candidates:
        r = 2.0 ** (-j)
        if r < cloud.resolution:
            break
        try:
            supports[j] = reduced_support(cloud, r, max_support, subsample_factor)
        except ParameterDomainError as e:
            logger.debug(f"Escala 2^-{j} descartada: {e}")
            break
    return supports


def capacity_curve(
    cloud: PointCloud,
    make_spec: Callable[[float], KernelSpec],
    levels: Optional[Sequence[int]] = None,
    tol: float = PROFILE_TOL,
    max_support: int = MAX_SUPPORT,
    subsample_factor: float = SUBSAMPLE_FACTOR,
    supports: Optional[Dict[int, PointCloud]] = None,
) -> CapacityCurve:
    """
    Capacidades nas escalas 2^-j e o ajuste de log C contra −log r.

    Raises:
        InsufficientScalesError: Com menos de 3 escalas utilizáveis
    """
    if supports is None:
        supports = _profile_supports(cloud, max_support, subsample_factor, levels)
    if len(supports) < MIN_PROFILE_SCALES:
        raise InsufficientScalesError(
            f"Perfil exige ≥ {MIN_PROFILE_SCALES} escalas, disponíveis {len(supports)}"
        )
    scales, caps, gaps, sizes = [], [], [], []
    family, s = None, 0.0
    for j, support in sorted(supports.items()):
        r = 2.0 ** (-j)
        spec = make_spec(r)
        family, s = spec.family.value, spec.s
        solution = solve_equilibrium(support, spec, tol)
        scales.append(r)
        caps.append(solution.capacity)
        gaps.append(solution.gap)
        sizes.append(support.size)
    fit = fit_arrays(scales, caps)
    return CapacityCurve(
        scales=scales,
        capacities=caps,
        gaps=gaps,
        support_sizes=sizes,
        family=family,
        s=s,
        fit=fit,
    )


def box_profile_curve(
    cloud: PointCloud,
    s: float,
    tol: float = PROFILE_TOL,
    max_support: int = MAX_SUPPORT,
    subsample_factor: float = SUBSAMPLE_FACTOR,
) -> CapacityCurve:
    """Curva de capacidades C_r^s com o kernel de caixa min{1, (r/|x|)^s}."""
    if s <= 0:
        raise ParameterDomainError(f"Perfil de caixa exige s > 0, recebido {s}")
    return capacity_curve(
        cloud, lambda r: KernelSpec.box(r, s), tol=tol,
        max_support=max_support, subsample_factor=subsample_factor,
    )


def box_dimension_profile(
    cloud: PointCloud,
    s: float,
    tol: float = PROFILE_TOL,
    max_support: int = MAX_SUPPORT,
    subsample_factor: float = SUBSAMPLE_FACTOR,
) -> Tuple[float, SlopeFit]:
    """
    Perfil de dimensão de caixa dim_B^s pela inclinação de log C_r^s.

    Returns:
        (estimativa em [0, d], ajuste)

    Raises:
        ParameterDomainError: Se s ≤ 0
        InsufficientScalesError: Com menos de 3 escalas
    """
    curve = box_profile_curve(cloud, s, tol, max_support, subsample_factor)
    estimate = float(np.clip(curve.fit.slope, 0.0, cloud.dim_ambient))
    logger.info(f"Perfil de caixa s={s:g} de {cloud.label or 'nuvem'}: {estimate:.4f}")
    return estimate, curve.fit


def intermediate_dimension_profile(
    cloud: PointCloud,
    theta: float,
    k: int,
    tol: float = PROFILE_TOL,
    max_support: int = MAX_SUPPORT,
    subsample_factor: float = SUBSAMPLE_FACTOR,
    bisect_tol: float = BISECT_TOL,
) -> float:
    """
    Perfil de dimensão intermediária: raiz de h(s) = inclinação(log C^{s,k}_{r,θ}) − s.

    Args:
        cloud: Nuvem de pontos
        theta: θ em (0, 1]
        k: Dimensão do perfil, 1 ≤ k ≤ d

    Returns:
        Estimativa em [0, k]

    Raises:
        ParameterDomainError: Se k ou θ estiverem fora do domínio
        InsufficientScalesError: Com menos de 3 escalas
    """
    if not 1 <= k <= cloud.dim_ambient:
        raise ParameterDomainError(f"k deve estar em [1, {cloud.dim_ambient}], recebido {k}")
    if not 0.0 < theta <= 1.0:
        raise ParameterDomainError(f"θ deve estar em (0, 1], recebido {theta}")
    supports = _profile_supports(cloud, max_support, subsample_factor)

    def h(s: float) -> float:
        curve = capacity_curve(
            cloud, lambda r: KernelSpec.intermediate(r, s, k, theta), tol=tol, supports=supports,
        )
        return curve.fit.slope - s

    h_low, h_high = h(0.0), h(float(k))
    if h_low <= 0.0:
        estimate = 0.0
    elif h_high >= 0.0:
        logger.warning(f"h(s) sem troca de sinal em θ={theta:g}, k={k}; usando extremo s={k}")
        estimate = float(k)
    else:
        estimate = float(bisect(h, 0.0, float(k), xtol=bisect_tol))
    logger.info(f"Perfil intermediário θ={theta:g} k={k} de {cloud.label or 'nuvem'}: {estimate:.4f}")
    return estimate


__all__: List[str] = [
    "kernel_values",
    "kernel_eval",
    "energy",
    "solve_equilibrium",
    "equilibrium_measure",
    "capacity",
    "reduced_support",
    "separated_energy_bound",
    "box_profile_curve",
    "capacity_curve",
    "box_dimension_profile",
    "intermediate_dimension_profile",
]
