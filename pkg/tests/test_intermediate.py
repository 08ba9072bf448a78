"""
Testes para o módulo intermediate.

A programação dinâmica é comparada a uma enumeração exaustiva de
coberturas diádicas em nuvens pequenas.
"""

from itertools import combinations, product

import numpy as np
import pytest

from scr.core.capacity import capacity
from scr.core.covering import box_estimate
from scr.core.errors import InsufficientScalesError, ParameterDomainError, ResolutionExceededError
from scr.core.geometry import generate
from scr.core.intermediate import (
    CubeTree,
    bottom_level,
    hausdorff_proxy,
    intermediate_curve,
    intermediate_dimension,
    optimal_cover_cost,
)
from scr.core.model.cloud import GeneratorKind, GeneratorSpec, PointCloud
from scr.core.model.curves import SpectrumCurve
from scr.core.model.measure import KernelSpec
from scr.core.model.reports import ExampleId, SpectrumKind
from scr.core.oracles import reference_spectrum


def _brute_force_cost(points: np.ndarray, j_top: int, j_bot: int, s: float) -> float:
    """Menor Σ lado^s entre todos os conjuntos de cubos que cobrem os pontos."""
    cubes = sorted({
        (j, int(np.floor(x * 2 ** j)))
        for x in points
        for j in range(j_top, j_bot + 1)
    })
    best = np.inf
    for size in range(1, len(points) + 1):
        for chosen in combinations(cubes, size):
            covered = all(
                any(int(np.floor(x * 2 ** j)) == i for j, i in chosen)
                for x in points
            )
            if covered:
                best = min(best, sum(2.0 ** (-j * s) for j, _ in chosen))
    return best


def _assignment_cost(points: np.ndarray, j_top: int, j_bot: int, s: float) -> float:
    """Menor custo entre todas as escolhas de um nível por ponto; cada escolha induz uma cobertura."""
    cells = [{j: tuple(np.floor(x * 2 ** j).astype(int)) for j in range(j_top, j_bot + 1)} for x in points]
    best = np.inf
    for levels in product(range(j_top, j_bot + 1), repeat=len(points)):
        cubes = {(j, cell[j]) for cell, j in zip(cells, levels)}
        best = min(best, sum(2.0 ** (-j * s) for j, _ in cubes))
    return best


@pytest.fixture
def small_cloud():
    """Três centros de células de lado 1/64."""
    points = (np.array([0, 5, 40]) + 0.5) / 64
    return PointCloud(points=points, resolution=1 / 64)


@pytest.fixture(scope="module")
def segment():
    return generate(GeneratorSpec(kind=GeneratorKind.SEGMENT, delta=2.0 ** -10))


class TestCoverCost:
    """Testes do custo mínimo de cobertura."""

    @pytest.mark.parametrize("s", [0.0, 0.3, 0.5, 1.0])
    def test_matches_brute_force(self, small_cloud, s):
        """DP coincide com a enumeração exaustiva (j_top = 2, j_bot = 6)."""
        result = optimal_cover_cost(small_cloud, 0.25, 1 / 3, s)
        assert result.j_top == 2
        assert result.j_bot == 6
        expected = _brute_force_cost(small_cloud.points[:, 0], 2, 6, s)
        assert result.cost == pytest.approx(expected)

    def test_random_instances(self):
        """50 nuvens sorteadas em células de lado 1/64 (d = 1 e 2, j_bot = 6)."""
        rng = np.random.default_rng(11)
        for _ in range(50):
            d = int(rng.integers(1, 3))
            n = int(rng.integers(2, 6))
            cells = rng.choice(64 ** d, size=n, replace=False)
            points = (np.stack(np.unravel_index(cells, (64,) * d), axis=1) + 0.5) / 64
            cloud = PointCloud(points=points, resolution=1 / 64)
            j_top = int(rng.integers(1, 3))
            s = float(rng.uniform(0.0, d))
            result = optimal_cover_cost(cloud, 2.0 ** -j_top, j_top / 6, s)
            assert result.j_bot == 6
            assert result.cost == pytest.approx(_assignment_cost(cloud.points, j_top, 6, s), rel=1e-12)

    @pytest.mark.parametrize("rho", [0.25, 0.125])
    @pytest.mark.parametrize("s", [1.0, 1.5])
    def test_cost_bounded_by_capacity(self, rho, s):
        """Custo ≥ r^s · C^{s,d}_{r,θ} com r = ρ^{1/θ}; o fator 2 cobre lado contra diâmetro em d = 2."""
        delta = 2.0 ** -6
        cloud = generate(GeneratorSpec(
            kind=GeneratorKind.PRODUCT,
            delta=delta,
            factors=[
                GeneratorSpec(kind=GeneratorKind.SEQUENCE_SET, delta=delta, p=1.0),
                GeneratorSpec(kind=GeneratorKind.SEGMENT, delta=delta),
            ],
        ))
        theta = 0.5
        r = rho ** (1 / theta)
        cost = optimal_cover_cost(cloud, rho, theta, s).cost
        cap = capacity(cloud, KernelSpec.intermediate(r, s, 2, theta))
        assert cost >= r ** s * cap / 2.0

    def test_witness_covers_every_point(self, small_cloud):
        """Histograma da cobertura ótima soma no mínimo um cubo por ponto isolado."""
        result = optimal_cover_cost(small_cloud, 0.25, 1 / 3, 1.0)
        assert sum(result.witness_levels.values()) >= 2
        assert all(2 <= j <= 6 for j in result.witness_levels)

    def test_segment_ties_keep_coarse_cube(self, segment):
        """Segmento com s = 1: empate resolvido pelo cubo grosso, custo 1."""
        result = optimal_cover_cost(segment, 0.25, 0.5, 1.0)
        assert result.cost == pytest.approx(1.0)
        assert result.witness_levels == {2: 4}

    def test_zero_exponent_counts_coarse_cubes(self, segment):
        """s = 0: custo é o número de cubos ocupados no nível grosso."""
        assert optimal_cover_cost(segment, 0.125, 0.5, 0.0).cost == pytest.approx(8.0)

    def test_tree_reuse(self, segment):
        """Árvore pré-construída dá o mesmo custo."""
        tree = CubeTree(segment)
        a = optimal_cover_cost(segment, 0.25, 0.5, 0.7, tree=tree)
        b = optimal_cover_cost(segment, 0.25, 0.5, 0.7)
        assert a.cost == pytest.approx(b.cost)

    def test_bottom_level(self):
        """j_bot = ⌈j_top / θ⌉."""
        assert bottom_level(2, 1 / 3) == 6
        assert bottom_level(3, 0.5) == 6
        assert bottom_level(3, 0.4) == 8

    def test_non_dyadic_scale(self, segment):
        """r não diádica é inválida."""
        with pytest.raises(ParameterDomainError, match="não é diádica"):
            optimal_cover_cost(segment, 0.3, 0.5, 1.0)

    def test_parameter_domains(self, segment):
        """θ e s fora do domínio."""
        with pytest.raises(ParameterDomainError, match="θ deve estar em"):
            optimal_cover_cost(segment, 0.25, 0.0, 1.0)
        with pytest.raises(ParameterDomainError, match="s deve estar em"):
            optimal_cover_cost(segment, 0.25, 0.5, 1.5)

    def test_resolution_exceeded(self, segment):
        """r^{1/θ} abaixo da resolução."""
        with pytest.raises(ResolutionExceededError):
            optimal_cover_cost(segment, 0.25, 0.1, 1.0)


class TestIntermediateDimension:
    """Testes da dimensão intermediária."""

    def test_segment(self, segment):
        """Segmento tem dimensão intermediária 1."""
        result = intermediate_dimension(segment, 0.5)
        assert result.estimate == pytest.approx(1.0, abs=0.01)
        assert result.fit.n_points >= 3

    def test_chord_bounds(self, segment):
        """No segmento as raízes das cordas mínima e máxima coincidem com a central."""
        result = intermediate_dimension(segment, 0.5)
        assert result.lower == pytest.approx(1.0, abs=0.01)
        assert result.upper == pytest.approx(1.0, abs=0.01)

    def test_witness_cover(self, segment):
        """Testemunha é a cobertura ótima na escala mais fina com s = estimativa."""
        result = intermediate_dimension(segment, 0.5)
        witness = result.witness
        assert witness.s == pytest.approx(result.estimate)
        assert witness.j_bot == 2 * witness.j_top
        assert witness.j_bot <= 10
        expected = optimal_cover_cost(segment, witness.r, 0.5, result.estimate)
        assert witness.cost == pytest.approx(expected.cost)

    def test_square(self):
        """Quadrado tem dimensão intermediária 2."""
        square = generate(GeneratorSpec(kind=GeneratorKind.GRID_SQUARE, delta=2.0 ** -8))
        assert intermediate_dimension(square, 0.5).estimate == pytest.approx(2.0, abs=0.01)

    def test_theta_one_is_box_dimension(self):
        """Em θ = 1 a estimativa é a dimensão de caixa de {1/n}."""
        cloud = generate(GeneratorSpec(kind=GeneratorKind.SEQUENCE_SET, delta=2.0 ** -14, p=1.0))
        assert intermediate_dimension(cloud, 1.0).estimate == pytest.approx(0.5, abs=0.1)

    def test_insufficient_scales(self):
        """Resolução grossa não comporta 3 escalas."""
        coarse = generate(GeneratorSpec(kind=GeneratorKind.SEGMENT, delta=2.0 ** -4))
        with pytest.raises(InsufficientScalesError):
            intermediate_dimension(coarse, 0.5)


class TestIntermediateCurve:
    """Testes da curva θ → dimensão intermediária."""

    def test_monotone_and_bounded(self):
        """Curva de {1/n} é não decrescente e fica em [0, 1]."""
        cloud = generate(GeneratorSpec(kind=GeneratorKind.SEQUENCE_SET, delta=2.0 ** -12, p=1.0))
        curve = intermediate_curve(cloud, [0.25, 0.5, 0.75, 1.0])
        assert np.all(np.diff(curve.values) >= 0)
        assert np.all((curve.values >= 0) & (curve.values <= 1))
        assert curve.kind == "intermediate"
        assert curve.adjustment >= 0

    def test_skipped_thetas(self, segment):
        """θ pequenos sem escalas suficientes são pulados."""
        curve = intermediate_curve(segment, [0.1, 0.5])
        assert curve.skipped == [0.1]
        assert curve.thetas.tolist() == [0.5]

    def test_hausdorff_proxy(self):
        """Extrapolação linear pelos dois menores θ."""
        curve = SpectrumCurve(
            thetas=[0.2, 0.4, 0.6], values=[0.6, 0.8, 0.9], fit_r2=[1, 1, 1], n_anchors=[3, 3, 3],
            dim_ambient=1,
        )
        assert hausdorff_proxy(curve) == pytest.approx(0.4)


@pytest.mark.slow
class TestSeqTimesSegment:
    """Curva intermediária de {1/n}×[0,1] contra a fórmula (1 + 2θ)/(1 + θ)."""

    @pytest.fixture(scope="class")
    def fine_cloud(self):
        delta = 2.0 ** -12
        return generate(GeneratorSpec(
            kind=GeneratorKind.PRODUCT,
            delta=delta,
            factors=[
                GeneratorSpec(kind=GeneratorKind.SEQUENCE_SET, delta=delta, p=1.0),
                GeneratorSpec(kind=GeneratorKind.SEGMENT, delta=delta),
            ],
        ))

    def test_curve_matches_formula(self, fine_cloud):
        """θ de 0.5 a 0.9 e θ = 1 dentro de 0.07 da fórmula."""
        thetas = [0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
        curve = intermediate_curve(fine_cloud, thetas)
        assert curve.skipped == []
        expected = [reference_spectrum(ExampleId.SEQ_TIMES_SEGMENT, SpectrumKind.INTERMEDIATE, t) for t in thetas]
        np.testing.assert_allclose(curve.values, expected, atol=0.07)

    def test_theta_one_matches_box(self, fine_cloud):
        """Em θ = 1 a estimativa fica a 0.05 da dimensão de caixa."""
        box = box_estimate(fine_cloud)
        assert intermediate_dimension(fine_cloud, 1.0).estimate == pytest.approx(box, abs=0.05)
