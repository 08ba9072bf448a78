"""
Projeções ortogonais sobre a grassmanniana G(d, k) e varreduras de direções.
"""

from concurrent.futures import ProcessPoolExecutor
from itertools import combinations
from typing import Dict, List, Optional, Tuple

import numpy as np
from loguru import logger

from scr.core.assouad import assouad_dimension, assouad_spectrum_point
from scr.core.covering import estimate_box_dimension
from scr.core.errors import DimensionMismatchError, DimlabError, ParameterDomainError
from scr.core.fourier import fourier_dimension_point, fourier_spectrum_point, uniform_measure
from scr.core.intermediate import intermediate_dimension
from scr.core.model.cloud import PointCloud
from scr.core.model.measure import DiscreteMeasure
from scr.core.model.projection import EstimatorKind, EstimatorSpec, Subspace, SweepResult

# direções da grade de ângulos em G(2, 1)
DEFAULT_ANGLE_GRID = 257
MAX_DRAWS = 16
# fração de δ usada na grade de fusão das projeções
SNAP_FRACTION = 0.25


def sample_grassmannian(d: int, k: int, seed: int, stream: int = 0) -> Subspace:
    """
    Sorteia V ∈ G(d, k) segundo a medida invariante γ_{d,k}.

    Ortonormaliza (QR com correção de sinal) k vetores normais padrão;
    sorteios degenerados são refeitos com sub-semente seguinte.

    Args:
        d: Dimensão ambiente
        k: Dimensão do subespaço, 1 ≤ k < d
        seed: Semente mestre
        stream: Índice do fluxo (uma direção por fluxo numa varredura)

    Raises:
        ParameterDomainError: Se k ∉ [1, d)
    """
    if not 1 <= k < d:
        raise ParameterDomainError(f"Grassmanniana exige 1 ≤ k < d (k={k}, d={d})")
    for attempt in range(MAX_DRAWS):
        rng = np.random.default_rng([seed, stream, attempt])
        gaussian = rng.standard_normal((d, k))
        q, r = np.linalg.qr(gaussian)
        diag = np.diag(r)
        if np.all(np.abs(diag) > 1e-12):
            frame = (q * np.sign(diag)).T
            angle = None
            if d == 2:
                angle = float(np.arctan2(frame[0, 1], frame[0, 0]) % np.pi)
            return Subspace(d=d, k=k, frame=frame, angle=angle)
        logger.debug(f"Sorteio degenerado em G({d},{k}), tentativa {attempt}")
    raise ParameterDomainError(f"Falha ao sortear G({d},{k}) após {MAX_DRAWS} tentativas")


def line_from_angle(angle: float) -> Subspace:
    """Reta de G(2, 1) com direção (cos a, sin a)."""
    frame = np.array([[np.cos(angle), np.sin(angle)]])
    return Subspace(d=2, k=1, frame=frame, angle=float(angle))


def coordinate_subspaces(d: int, k: int) -> List[Subspace]:
    """Subespaços gerados por k eixos coordenados."""
    subspaces = []
    for axes in combinations(range(d), k):
        frame = np.zeros((k, d))
        frame[np.arange(k), list(axes)] = 1.0
        angle = (np.pi / 2 if axes == (1,) else 0.0) if d == 2 else None
        subspaces.append(Subspace(d=d, k=k, frame=frame, angle=angle))
    return subspaces


def _check_dims(d: int, V: Subspace) -> None:
    if d != V.d:
        raise DimensionMismatchError(f"Dimensão ambiente {d} difere da do subespaço ({V.d})")


def project_cloud(cloud: PointCloud, V: Subspace) -> PointCloud:
    """
    Coordenadas de P_V(x) no referencial de V.

    Imagens são encaixadas numa grade de passo δ/4 e fundidas; a resolução
    é preservada (projeções são 1-Lipschitz).

    Raises:
        DimensionMismatchError: Se as dimensões não batem
    """
    _check_dims(cloud.dim_ambient, V)
    step = cloud.resolution * SNAP_FRACTION
    projected = np.round(V.project(cloud.points) / step) * step
    return PointCloud(points=projected, resolution=cloud.resolution, label=f"P_V({cloud.label})")


def pushforward_measure(mu: DiscreteMeasure, V: Subspace) -> DiscreteMeasure:
    """
    Medida imagem μ_V = μ ∘ P_V^{-1}; imagens coincidentes somam pesos.

    Raises:
        DimensionMismatchError: Se as dimensões não batem
    """
    _check_dims(mu.support.dim_ambient, V)
    return DiscreteMeasure.from_points(
        V.project(mu.points),
        mu.weights,
        resolution=mu.support.resolution,
        label=f"P_V({mu.support.label})",
    )


def estimate_projection(cloud: PointCloud, V: Subspace, estimator: EstimatorSpec) -> float:
    """Aplica o estimador à projeção da nuvem em V; resultado em [0, k]."""
    kind = estimator.kind
    if kind == EstimatorKind.FOURIER:
        measure = pushforward_measure(uniform_measure(cloud), V)
        if estimator.theta == 0.0:
            value = fourier_dimension_point(measure)
        else:
            value = fourier_spectrum_point(measure, estimator.theta)
        return float(min(value, V.k))
    projected = project_cloud(cloud, V)
    if kind == EstimatorKind.BOX:
        value = estimate_box_dimension(projected)[2].slope
    elif kind == EstimatorKind.ASSOUAD:
        value = assouad_dimension(projected)
    elif kind == EstimatorKind.ASSOUAD_SPECTRUM:
        value = assouad_spectrum_point(projected, estimator.theta)[0]
    else:
        value = intermediate_dimension(projected, estimator.theta).estimate
    return float(np.clip(value, 0.0, V.k))


def _estimate_direction(args: Tuple[PointCloud, Subspace, EstimatorSpec]) -> Tuple[float, Optional[str]]:
    cloud, V, estimator = args
    try:
        return estimate_projection(cloud, V, estimator), None
    except DimlabError as e:
        return float("nan"), str(e)


def sweep_directions(
    d: int,
    k: int,
    n_dirs: int,
    seed: int,
    include_axes: bool = True,
    angle_grid: bool = True,
) -> Tuple[List[Subspace], List[bool]]:
    """
    Direções de uma varredura e marcação das direções de eixo.

    Em G(2, 1) com angle_grid usa ângulos (i + 1/2)π/n; caso contrário
    sorteia n direções por fluxos independentes da semente.
    """
    if d == 2 and k == 1 and angle_grid:
        directions = [line_from_angle((i + 0.5) * np.pi / n_dirs) for i in range(n_dirs)]
    else:
        directions = [sample_grassmannian(d, k, seed, stream=i) for i in range(n_dirs)]
    is_axis = [False] * len(directions)
    if include_axes:
        axes = coordinate_subspaces(d, k)
        directions += axes
        is_axis += [True] * len(axes)
    return directions, is_axis


def direction_sweep(
    cloud: PointCloud,
    k: int,
    estimator: EstimatorSpec,
    n_dirs: int = DEFAULT_ANGLE_GRID,
    seed: int = 0,
    include_axes: bool = True,
    angle_grid: bool = True,
    workers: Optional[int] = None,
) -> SweepResult:
    """
    Aplica o estimador às projeções da nuvem numa família de direções.

    Falhas por direção viram NaN com a mensagem registrada. Com workers > 1
    usa um pool de processos; a ordem das direções é preservada.

    Args:
        cloud: Nuvem de pontos
        k: Dimensão dos subespaços
        estimator: Estimador nomeado
        n_dirs: Número de direções (grade ou sorteio)
        seed: Semente dos sorteios
        include_axes: Acrescenta os subespaços coordenados
        angle_grid: Usa grade de ângulos em G(2, 1)
        workers: Processos paralelos (None ou 1 = sequencial)
    """
    d = cloud.dim_ambient
    directions, is_axis = sweep_directions(d, k, n_dirs, seed, include_axes, angle_grid)
    tasks = [(cloud, V, estimator) for V in directions]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_estimate_direction, tasks))
    else:
        results = [_estimate_direction(task) for task in tasks]
    estimates = [value for value, _ in results]
    errors = [error for _, error in results]
    failed = sum(1 for e in errors if e is not None)
    if failed:
        logger.warning(f"{failed} de {len(directions)} direções falharam na varredura")
    logger.info(
        f"Varredura {estimator.estimator_id} de {cloud.label or 'nuvem'} em G({d},{k}): "
        f"{len(directions)} direções"
    )
    return SweepResult(
        d=d,
        k=k,
        estimator=estimator,
        directions=directions,
        estimates=estimates,
        is_axis=is_axis,
        errors=errors,
    )


def exceptional_fraction(sweep: SweepResult, u: float) -> float:
    """
    Fração das direções com estimativa < u.

    Raises:
        ParameterDomainError: Se u < 0
    """
    if u < 0:
        raise ParameterDomainError(f"Limiar u deve ser ≥ 0, recebido {u}")
    values = sweep.valid_estimates()
    if values.size == 0:
        return 0.0
    return float(np.count_nonzero(values < u) / values.size)


def sweep_summary(sweep: SweepResult) -> Dict[str, object]:
    """Mediana e quartis das direções genéricas e valores nas direções de eixo."""
    generic = sweep.valid_estimates(generic_only=True)
    if generic.size == 0:
        generic = sweep.valid_estimates()
    quartiles = np.percentile(generic, [25, 50, 75]) if generic.size else [np.nan] * 3
    axes = [
        {"direction": V.label(), "estimate": None if not np.isfinite(x) else float(x)}
        for V, x, axis in zip(sweep.directions, sweep.estimates, sweep.is_axis)
        if axis
    ]
    return {
        "estimator": sweep.estimator_id,
        "d": sweep.d,
        "k": sweep.k,
        "n_directions": len(sweep.directions),
        "n_failed": int(sum(1 for e in sweep.errors if e is not None)),
        "median": float(quartiles[1]),
        "q1": float(quartiles[0]),
        "q3": float(quartiles[2]),
        "axes": axes,
    }


def embed(y: np.ndarray, V: Subspace) -> np.ndarray:
    """y ∈ R^k ↦ y_V ∈ V ⊆ R^d."""
    return V.embed(y)
