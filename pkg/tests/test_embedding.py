import numpy as np
import pytest

from pqa.embedding import HashNgramEncoder, cosine
from pqa.errors import DimensionMismatch, EmptyText


@pytest.fixture(scope="module")
def encoder():
    return HashNgramEncoder()


def test_determinism(encoder):
    a = encoder.encode("predict insurance charge")
    b = encoder.encode("predict insurance charge")
    assert np.array_equal(a, b)


def test_unit_norm(encoder):
    texts = ["y", "19", "predict real estate price", "a b c d e", "Zürich weather"]
    for text in texts:
        assert abs(np.linalg.norm(encoder.encode(text)) - 1.0) < 1e-9


def test_self_similarity(encoder):
    for text in ("predict charges", "recommend playlist for user 4407"):
        assert cosine(encoder.encode(text), encoder.encode(text)) == pytest.approx(1.0, abs=1e-9)


def test_typo_robustness(encoder):
    # one-character typo in a ~60-char query stays close in cosine
    q1 = "predict insurance charge for a 19 year old female non smoker"
    q2 = "predict insurence charge for a 19 year old female non smoker"
    assert cosine(encoder.encode(q1), encoder.encode(q2)) >= 0.6


def test_disjoint_buckets_give_zero(encoder):
    # these two short tokens hash to different single buckets
    a, b = "zq", "jx"
    assert not (encoder.buckets(a) & encoder.buckets(b))
    assert cosine(encoder.encode(a), encoder.encode(b)) == 0.0


def test_empty_text_rejected(encoder):
    for text in ("", "   ", "?!...", "---"):
        with pytest.raises(EmptyText):
            encoder.encode(text)


def test_cosine_bounds_and_symmetry(encoder):
    rng = np.random.default_rng(0)
    words = ["alpha", "beta", "gamma", "delta", "price", "charge", "model", "data"]
    texts = [" ".join(rng.choice(words, size=rng.integers(1, 6))) for _ in range(30)]
    vecs = [encoder.encode(t) for t in texts]
    for i in range(len(vecs)):
        for j in range(i, len(vecs)):
            s1 = cosine(vecs[i], vecs[j])
            s2 = cosine(vecs[j], vecs[i])
            assert s1 == s2
            assert abs(s1) <= 1.0 + 1e-9


def test_cosine_negation(encoder):
    v = encoder.encode("predict charges")
    assert cosine(v, -v) == pytest.approx(-1.0, abs=1e-9)


def test_dimension_mismatch():
    small = HashNgramEncoder(dimension=16)
    big = HashNgramEncoder(dimension=32)
    with pytest.raises(DimensionMismatch):
        cosine(small.encode("abc"), big.encode("abc"))


def test_seed_changes_vectors():
    a = HashNgramEncoder(seed=1).encode("insurance charge")
    b = HashNgramEncoder(seed=2).encode("insurance charge")
    assert not np.array_equal(a, b)


def test_short_tokens_still_embed(encoder):
    # tokens below the n-gram minimum count as whole-token grams
    assert np.linalg.norm(encoder.encode("y")) == pytest.approx(1.0, abs=1e-9)
    assert cosine(encoder.encode("ab"), encoder.encode("ab")) == pytest.approx(1.0, abs=1e-9)
