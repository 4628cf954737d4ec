import numpy as np
import pytest

from bsmf.belief import identity, star_structure
from bsmf.dataset import ingest
from bsmf.factorization import FitConfig, fit
from bsmf.interpolation import RbfParams, bag_of_words, interpolate
from bsmf.pipeline import Stages, estimate_endorsements, run
from bsmf.synthetic import SynthSpec, generate

CFG = FitConfig(k=4, eta="mult", lambda2=0.0, eps_rbf=1.42, max_iters=40)


@pytest.fixture(scope="module")
def small_ds():
    return generate(SynthSpec(users_per_group=8, messages_per_user=4, seed=5))


@pytest.fixture
def retweet_ds(tmp_path):
    (tmp_path / "claims.jsonl").write_text(
        '{"claim_id": "a", "text": "vaccines work"}\n'
        '{"claim_id": "b", "text": "vaccines work well"}\n'
        '{"claim_id": "c", "text": "masks fail"}\n'
    )
    (tmp_path / "inc.csv").write_text("source_id,claim_id\nu1,a\nu2,b\nu3,c\n")
    (tmp_path / "edges.csv").write_text("retweeter_id,author_id,count\nu2,u1,3\nu1,u1,4\n")
    return ingest(tmp_path / "claims.jsonl", tmp_path / "inc.csv", tmp_path / "edges.csv")


class TestStages:
    @pytest.mark.parametrize(
        "use_m,use_s,name", [(True, True, "full"), (False, True, "no-m"), (True, False, "no-s"), (False, False, "no-m-no-s")]
    )
    def test_variant_names(self, use_m, use_s, name):
        assert Stages(use_m, use_s).variant == name


class TestEstimateEndorsements:
    def test_raw_input_without_stages(self, small_ds):
        x = estimate_endorsements(small_ds, CFG, Stages(False, False))
        np.testing.assert_array_equal(x, small_ds.source_claim_matrix().toarray())

    def test_identity_graph_leaves_interpolation_unchanged(self, small_ds):
        # with A = I the smoothing operator is ½(I + I) = I
        a = estimate_endorsements(small_ds, CFG, Stages(True, True))
        b = estimate_endorsements(small_ds, CFG, Stages(True, False))
        np.testing.assert_array_equal(a, b)

    def test_matches_stage_functions(self, small_ds):
        expect = interpolate(small_ds.source_claim_matrix(), bag_of_words(small_ds.token_lists()), RbfParams(1.42, 0.2))
        got = estimate_endorsements(small_ds, CFG, Stages(True, False))
        np.testing.assert_array_equal(got, expect.toarray())

    def test_retweets_spread_endorsements(self, retweet_ds):
        x = estimate_endorsements(retweet_ds, CFG, Stages(False, True))
        # u2 retweets u1, so u2's row is the mean of its own and u1's
        np.testing.assert_allclose(x[1], [0.5, 0.5, 0.0])
        np.testing.assert_allclose(x[0], [1.0, 0.0, 0.0])  # self-retweet dropped
        assert x[2].tolist() == [0, 0, 1]


class TestRun:
    def test_raw_ablation_matches_direct_fit(self, small_ds):
        res = run(small_ds, star_structure(4), CFG, Stages(False, False))
        direct = fit(small_ds.source_claim_matrix().toarray(), star_structure(4), CFG)
        assert res.fit.loss_trace == direct.loss_trace

    def test_metrics_present_with_labels(self, small_ds):
        res = run(small_ds, star_structure(4), CFG)
        assert 0.0 <= res.metrics.accuracy <= 1.0
        assert len(res.assignment.claim_region) == small_ds.n_claims

    def test_metrics_absent_without_labels(self, retweet_ds):
        res = run(retweet_ds, identity(2), FitConfig(k=2, eta="mult", lambda2=0, max_iters=5))
        assert res.metrics is None

    def test_reproducible(self, small_ds):
        a = run(small_ds, star_structure(4), CFG)
        b = run(small_ds, star_structure(4), CFG)
        np.testing.assert_array_equal(a.fit.factors.m, b.fit.factors.m)
