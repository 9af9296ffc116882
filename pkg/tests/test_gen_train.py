import numpy as np
import pytest

from cfpath.gen_train import (
    FigureParams,
    GenSpec,
    empty_map_probability,
    figure_cells,
    gen_beta,
    gen_beta_figures,
    gen_uniform,
    generate,
)
from cfpath.rng import Rng


class TestUniform:
    def test_p_zero_all_free(self):
        g = gen_uniform(GenSpec("uniform", (16, 16), 1, p=0.0))
        assert not g.blocked.any()

    def test_p_one_all_blocked(self):
        g = gen_uniform(GenSpec("uniform", (16, 16), 1, p=1.0))
        assert g.blocked.all()

    def test_mean_blocked_fraction(self):
        total = 0.0
        for seed in range(1000):
            g = gen_uniform(GenSpec("uniform", (64, 64), seed))
            total += g.blocked.mean()
        assert total / 1000 == pytest.approx(0.5, abs=0.01)

    def test_deterministic(self):
        spec = GenSpec("uniform", (32, 32), 404)
        assert gen_uniform(spec) == gen_uniform(spec)


class TestBeta:
    def test_mean_density(self):
        densities = [
            gen_beta(GenSpec("beta", (64, 64), seed)).blocked.mean()
            for seed in range(10000)
        ]
        assert np.mean(densities) == pytest.approx(0.5, abs=0.02)

    def test_density_variance_matches_beta22(self):
        densities = np.array(
            [gen_beta(GenSpec("beta", (64, 64), seed)).blocked.mean() for seed in range(10000)]
        )
        # Var(Beta(2,2)) = 4 / (16 * 5) = 0.05; per-cell binomial noise adds ~6e-5
        assert densities.var() == pytest.approx(0.05, abs=0.01)

    def test_empty_map_probability_closed_form(self):
        # checked analytically, not by sampling
        assert empty_map_probability(64, 64) == pytest.approx(6 / (4098 * 4099), rel=1e-9)

    def test_deterministic(self):
        spec = GenSpec("beta", (64, 64), 17)
        assert gen_beta(spec) == gen_beta(spec)


class TestBetaFigures:
    def test_conjunction_subset(self):
        for seed in range(20):
            spec = GenSpec("beta_figures", (64, 64), seed)
            out = gen_beta_figures(spec)
            # replay the figure stream to recover the figure mask
            rng = Rng(seed)
            fig_mask = np.zeros((64, 64), dtype=bool)
            for cells in figure_cells(rng, 64, 64, spec.figures):
                for x, y in cells:
                    fig_mask[y, x] = True
            assert not (out.blocked & ~fig_mask).any()

    def test_figures_cover_at_least_10_cells(self):
        for seed in range(50):
            rng = Rng(seed)
            for cells in figure_cells(rng, 64, 64, FigureParams()):
                assert len(set(cells)) >= 10
                for x, y in cells:
                    assert 0 <= x < 64 and 0 <= y < 64

    def test_all_blocked_beta_mask_yields_figures(self):
        # beta component forced to block everything: output equals figure mask
        spec = GenSpec("beta_figures", (64, 64), 3, alpha=1e6, beta=1e-6)
        out = gen_beta_figures(spec)
        rng = Rng(3)
        fig_mask = np.zeros((64, 64), dtype=bool)
        for cells in figure_cells(rng, 64, 64, spec.figures):
            for x, y in cells:
                fig_mask[y, x] = True
        assert np.array_equal(out.blocked, fig_mask)

    def test_deterministic(self):
        spec = GenSpec("beta_figures", (64, 64), 55)
        assert gen_beta_figures(spec) == gen_beta_figures(spec)


class TestGenSpec:
    def test_size_validation(self):
        with pytest.raises(ValueError):
            GenSpec("uniform", (4, 4), 1)

    def test_param_validation(self):
        with pytest.raises(ValueError):
            GenSpec("uniform", (16, 16), 1, p=1.5)
        with pytest.raises(ValueError):
            GenSpec("beta", (16, 16), 1, alpha=0.0)

    def test_dispatch(self):
        assert generate(GenSpec("uniform", (8, 8), 1)).width == 8
        with pytest.raises(ValueError):
            generate(GenSpec("nope", (8, 8), 1))

    def test_dims_match_request(self):
        for kind in ("uniform", "beta", "beta_figures"):
            g = generate(GenSpec(kind, (48, 32), 9))
            assert (g.width, g.height) == (48, 32)
