"""
Testes para o módulo capacity.

O Frank–Wolfe é comparado ao ótimo exato obtido enumerando suportes em
instâncias pequenas de kernel diagonalmente dominante (matriz positiva
definida, problema convexo).
"""

from itertools import combinations

import numpy as np
import pytest
from scipy.linalg import cholesky, solve_triangular
from scipy.optimize import nnls
from scipy.spatial.distance import cdist, pdist

from scr.core.capacity import (
    box_dimension_profile,
    box_profile_curve,
    capacity,
    energy,
    intermediate_dimension_profile,
    kernel_eval,
    kernel_values,
    reduced_support,
    separated_energy_bound,
    solve_equilibrium,
)
from scr.core.covering import box_estimate
from scr.core.errors import ParameterDomainError
from scr.core.geometry import generate
from scr.core.intermediate import intermediate_dimension
from scr.core.model.cloud import GeneratorKind, GeneratorSpec, PointCloud
from scr.core.model.measure import DiscreteMeasure, KernelSpec


def _exact_min_energy(K: np.ndarray) -> float:
    """Menor energia no simplex entre as soluções K_SS x = 1 com x > 0."""
    n = K.shape[0]
    best = np.inf
    for size in range(1, n + 1):
        for support in combinations(range(n), size):
            idx = list(support)
            x = np.linalg.solve(K[np.ix_(idx, idx)], np.ones(size))
            if np.all(x > 0):
                best = min(best, 1.0 / x.sum())
    return best


def _nnls_equilibrium(K: np.ndarray):
    """
    Equilíbrio por mínimos quadrados não negativos.

    Com K = U^T U, min x^T K x − 2·Σx sobre x ≥ 0 é ||U x − b||² com U^T b = 1;
    o minimizador x* é proporcional à medida de equilíbrio e Σx* = 1 / energia.
    """
    U = cholesky(K)
    b = solve_triangular(U, np.ones(K.shape[0]), trans="T")
    x, _ = nnls(U, b)
    return x / x.sum(), 1.0 / x.sum()


def _diagonally_dominant(K: np.ndarray) -> bool:
    off = K.sum(axis=1) - np.diag(K)
    return bool(np.all(off < np.diag(K)))


class TestKernels:
    """Testes das famílias de kernel."""

    def test_box_profile(self):
        """min{1, (r/|x|)^s}."""
        spec = KernelSpec.box(0.1, 1.0)
        assert kernel_eval(spec, [0.0]) == 1.0
        assert kernel_eval(spec, [0.05, 0.0]) == 1.0
        assert kernel_eval(spec, [0.2]) == pytest.approx(0.5)

    def test_intermediate_profile_continuous_at_knee(self):
        """Ramos do meio e de longe coincidem em |x| = r^θ."""
        spec = KernelSpec.intermediate(0.01, 0.5, 1, 0.5)
        below, above = kernel_values(spec, np.array([0.1 - 1e-12, 0.1]))
        assert below == pytest.approx(above, rel=1e-6)
        assert kernel_eval(spec, [0.005]) == 1.0

    def test_intermediate_requires_s_at_most_k(self):
        """s > k é inválido."""
        with pytest.raises(ValueError, match="s ≤ k"):
            KernelSpec.intermediate(0.01, 1.5, 1, 0.5)

    def test_intermediate_requires_theta(self):
        """Família intermediária exige θ e k."""
        with pytest.raises(ValueError, match="exige k e theta"):
            KernelSpec(family="intermediate_profile", r=0.1, s=0.5)

    def test_intermediate_middle_branch(self):
        """Entre r e r^θ o kernel intermediário é (r/|x|)^s."""
        spec = KernelSpec.intermediate(0.01, 0.7, 2, 0.5)
        dist = np.array([0.01, 0.02, 0.05, 0.099])
        np.testing.assert_allclose(kernel_values(spec, dist), (0.01 / dist) ** 0.7)

    def test_theta_one_is_box_kernel(self):
        """Com θ = 1 o kernel intermediário coincide com o de caixa de expoente k."""
        dist = np.linspace(0.0, 1.5, 301)
        for k in (1, 2):
            spec = KernelSpec.intermediate(0.05, 0.5, k, 1.0)
            np.testing.assert_allclose(kernel_values(spec, dist), kernel_values(KernelSpec.box(0.05, k), dist))

    def test_intermediate_monotone(self):
        """Não crescente em |x| e, ponto a ponto, em k."""
        dist = np.linspace(0.0, 1.5, 1501)
        one = kernel_values(KernelSpec.intermediate(0.01, 0.8, 1, 0.4), dist)
        two = kernel_values(KernelSpec.intermediate(0.01, 0.8, 2, 0.4), dist)
        assert np.all(np.diff(one) <= 1e-15)
        assert np.all(np.diff(two) <= 1e-15)
        assert np.all(two <= one + 1e-15)


class TestEnergy:
    """Testes da energia de medidas discretas."""

    def test_point_mass(self):
        """Massa pontual tem energia φ(0) = 1."""
        cloud = PointCloud(points=[[0.3]], resolution=0.01)
        mu = DiscreteMeasure(support=cloud, weights=[1.0])
        assert energy(mu, KernelSpec.box(0.1, 1.0)) == pytest.approx(1.0)

    def test_two_points(self):
        """Dois pontos a distância 0.2 com pesos iguais."""
        cloud = PointCloud(points=[[0.0], [0.2]], resolution=0.01)
        mu = DiscreteMeasure(support=cloud, weights=[0.5, 0.5])
        # 2·(1/4)·1 + 2·(1/4)·(0.1/0.2)
        assert energy(mu, KernelSpec.box(0.1, 1.0)) == pytest.approx(0.75)

    def test_from_points_merges_duplicates(self):
        """Pontos repetidos somam pesos."""
        mu = DiscreteMeasure.from_points([[0.0], [1.0], [0.0]], [1.0, 1.0, 2.0], resolution=0.1)
        assert mu.support.size == 2
        assert mu.weights.tolist() == pytest.approx([0.75, 0.25])

    def test_weights_must_sum_to_one(self):
        """Massa diferente de 1 é rejeitada."""
        cloud = PointCloud(points=[[0.0], [1.0]], resolution=0.1)
        with pytest.raises(ValueError, match="somar 1"):
            DiscreteMeasure(support=cloud, weights=[0.5, 0.6])


class TestEquilibrium:
    """Testes do Frank–Wolfe contra o ótimo exato."""

    def test_line_instance(self):
        """Seis pontos na reta, kernel de caixa com s = 2."""
        cloud = PointCloud(points=[0.0, 0.1, 0.2, 0.5, 0.9, 1.0], resolution=0.01)
        spec = KernelSpec.box(0.05, 2.0)
        K = kernel_values(spec, cdist(cloud.points, cloud.points))
        assert _diagonally_dominant(K)
        solution = solve_equilibrium(cloud, spec)
        assert solution.energy == pytest.approx(_exact_min_energy(K), rel=1e-6)
        assert solution.converged
        assert solution.measure.weights.sum() == pytest.approx(1.0)

    def test_random_planar_instance(self):
        """Oito pontos no plano com r abaixo da menor distância."""
        rng = np.random.default_rng(7)
        cloud = PointCloud(points=rng.random((8, 2)), resolution=1e-3)
        spec = KernelSpec.box(0.3 * pdist(cloud.points).min(), 2.0)
        K = kernel_values(spec, cdist(cloud.points, cloud.points))
        assert _diagonally_dominant(K)
        solution = solve_equilibrium(cloud, spec)
        assert solution.energy == pytest.approx(_exact_min_energy(K), rel=1e-6)
        assert solution.capacity == pytest.approx(1.0 / solution.energy)

    @pytest.mark.parametrize("family", ["box", "intermediate"])
    def test_random_instances_against_nnls(self, family):
        """50 instâncias de até 20 pontos: energia e potencial constante no suporte."""
        rng = np.random.default_rng(23 if family == "box" else 29)
        for _ in range(50):
            cloud = PointCloud(points=rng.random((int(rng.integers(3, 21)), 2)), resolution=1e-4)
            r = 0.05 * pdist(cloud.points).min()
            if family == "box":
                spec = KernelSpec.box(r, 2.0)
            else:
                spec = KernelSpec.intermediate(r, 1.5, 2, 0.5)
            K = kernel_values(spec, cdist(cloud.points, cloud.points))
            _, expected = _nnls_equilibrium(K)
            solution = solve_equilibrium(cloud, spec)
            assert solution.energy == pytest.approx(expected, rel=1e-6)
            potential = K @ solution.measure.weights
            support = solution.measure.weights > 0
            gamma = solution.energy
            assert np.ptp(potential[support]) < 1e-5 * gamma
            assert np.all(potential >= gamma * (1.0 - 1e-5))

    def test_capacity_monotone_in_k(self):
        """Kernel menor em k = 2 dá capacidade maior ou igual."""
        rng = np.random.default_rng(31)
        cloud = PointCloud(points=rng.random((30, 2)), resolution=1e-4)
        one = capacity(cloud, KernelSpec.intermediate(0.01, 0.8, 1, 0.5))
        two = capacity(cloud, KernelSpec.intermediate(0.01, 0.8, 2, 0.5))
        assert one <= two * (1.0 + 1e-6)

    def test_single_point(self):
        """Nuvem de um ponto tem capacidade 1."""
        cloud = PointCloud(points=[[0.5, 0.5]], resolution=0.01)
        assert capacity(cloud, KernelSpec.box(0.1, 1.0)) == pytest.approx(1.0)

    def test_separated_bound(self):
        """Cota da medida uniforme num subconjunto separado fica em (0, m]."""
        cloud = generate(GeneratorSpec(kind=GeneratorKind.SEGMENT, delta=2.0 ** -6))
        spec = KernelSpec.box(0.125, 1.0)
        bound = separated_energy_bound(cloud, spec)
        assert 0.0 < bound <= 9.0


class TestReducedSupport:
    """Testes da subamostra separada."""

    def test_small_cloud_unchanged(self):
        """Nuvem dentro do limite é devolvida como está."""
        cloud = generate(GeneratorSpec(kind=GeneratorKind.SEGMENT, delta=2.0 ** -6))
        assert reduced_support(cloud, 0.25, 100, 0.25) is cloud

    def test_large_cloud_subsampled(self):
        """Nuvem acima do limite vira subconjunto r·fator-separado."""
        cloud = generate(GeneratorSpec(kind=GeneratorKind.SEGMENT, delta=2.0 ** -10))
        sub = reduced_support(cloud, 0.25, 100, 0.25)
        assert sub.size <= 100
        assert pdist(sub.points).min() > 0.0625

    def test_subsample_too_large(self):
        """Subamostra ainda acima do limite levanta ParameterDomainError."""
        cloud = generate(GeneratorSpec(kind=GeneratorKind.SEGMENT, delta=2.0 ** -10))
        with pytest.raises(ParameterDomainError, match="excede o limite"):
            reduced_support(cloud, 2.0 ** -8, 10, 0.25)


class TestProfiles:
    """Testes dos perfis de dimensão."""

    def test_box_profile_segment(self):
        """Com s acima de d o perfil recupera a dimensão de caixa do segmento."""
        cloud = generate(GeneratorSpec(kind=GeneratorKind.SEGMENT, delta=2.0 ** -7))
        estimate, fit = box_dimension_profile(cloud, 2.0)
        assert estimate == pytest.approx(1.0, abs=0.1)
        assert fit.n_points >= 3

    def test_box_profile_curve(self):
        """Curva de capacidades: positivas, com o ajuste da estimativa."""
        cloud = generate(GeneratorSpec(kind=GeneratorKind.SEGMENT, delta=2.0 ** -7))
        curve = box_profile_curve(cloud, 2.0)
        assert np.all(curve.capacities > 0)
        assert curve.s == 2.0
        assert np.clip(curve.fit.slope, 0.0, 1.0) == pytest.approx(box_dimension_profile(cloud, 2.0)[0], abs=1e-9)

    def test_box_profile_requires_positive_s(self):
        """s ≤ 0 é inválido."""
        cloud = generate(GeneratorSpec(kind=GeneratorKind.SEGMENT, delta=2.0 ** -7))
        with pytest.raises(ParameterDomainError, match="s > 0"):
            box_dimension_profile(cloud, 0.0)

    def test_intermediate_profile_domains(self):
        """k > d e θ = 0 são inválidos."""
        cloud = generate(GeneratorSpec(kind=GeneratorKind.SEGMENT, delta=2.0 ** -7))
        with pytest.raises(ParameterDomainError, match="k deve estar em"):
            intermediate_dimension_profile(cloud, 0.5, 2)
        with pytest.raises(ParameterDomainError, match="θ deve estar em"):
            intermediate_dimension_profile(cloud, 0.0, 1)


def _seq_times_segment(delta: float):
    return generate(GeneratorSpec(
        kind=GeneratorKind.PRODUCT,
        delta=delta,
        factors=[
            GeneratorSpec(kind=GeneratorKind.SEQUENCE_SET, delta=delta, p=1.0),
            GeneratorSpec(kind=GeneratorKind.SEGMENT, delta=delta),
        ],
    ))


@pytest.mark.slow
class TestProfileConsistency:
    """Perfis de capacidade contra as estimativas por cobertura."""

    def test_box_profile_matches_box_estimate(self):
        """s = 2 ≥ d: perfil de caixa do segmento a 0.05 da contagem de caixas."""
        cloud = generate(GeneratorSpec(kind=GeneratorKind.SEGMENT, delta=2.0 ** -10))
        estimate, _ = box_dimension_profile(cloud, 2.0)
        assert estimate == pytest.approx(box_estimate(cloud), abs=0.05)

    def test_intermediate_profile_matches_cover(self):
        """k = d: perfil intermediário de {1/n}×[0,1] próximo da estimativa por coberturas."""
        cloud = _seq_times_segment(2.0 ** -9)
        profile = intermediate_dimension_profile(cloud, 0.5, 2, max_support=4096)
        assert profile == pytest.approx(intermediate_dimension(cloud, 0.5).estimate, abs=0.1)

    def test_line_profile_lower_bounds(self):
        """Perfil de caixa com s = 1 de {1/n}×[0,1] acima de 6/7 e de 3/2 − 1/√2, com folga 0.05."""
        cloud = _seq_times_segment(2.0 ** -9)
        estimate, _ = box_dimension_profile(cloud, 1.0, max_support=4096)
        assert estimate >= 6 / 7 - 0.05
        assert estimate >= 1.5 - 1 / np.sqrt(2) - 0.05
