import pytest

from pqa.catalog import (
    Catalog,
    ModelCard,
    generate_model_name,
    infer_columns,
    parse_csv,
    parse_model_profile,
    render_dataset_profile,
    render_model_profile,
)
from pqa.embedding import HashNgramEncoder
from pqa.errors import (
    CsvParseError,
    DuplicateName,
    EmptyDataset,
    ProfileFormatError,
    UnknownDataset,
)
from pqa.sampledata import REAL_ESTATE_CSV, medical_insurance_csv


@pytest.fixture
def catalog(tmp_path):
    return Catalog(tmp_path / "data", HashNgramEncoder(dimension=64))


def insurance_card(**overrides) -> ModelCard:
    fields = dict(
        name="insurancecharge_linear_regression"[:30],
        dataset_name="insurance",
        task="regression",
        algorithm="Linear Regression",
        feature_order=(
            "age", "bmi", "children", "sex_female", "sex_male", "smoker_no",
            "smoker_yes", "region_northeast", "region_northwest",
            "region_southeast", "region_southwest",
        ),
        target="charges",
        metrics={"mse": 33497825.553683, "r2": 0.761543},
        limitations="Assumes a linear relationship between inputs and charges.",
        weights_path="unused.bin",
        training_rows=1338,
    )
    fields.update(overrides)
    return ModelCard(**fields)


# ----------------------------------------------------------------- ingestion

def test_ingest_insurance_dtypes(catalog):
    profile = catalog.ingest_dataset(medical_insurance_csv(), "insurance")
    dtypes = {c.name: c.dtype for c in profile.columns}
    assert dtypes == {
        "age": "numeric",
        "sex": "categorical",
        "bmi": "numeric",
        "children": "numeric",
        "smoker": "categorical",
        "region": "categorical",
        "charges": "numeric",
    }
    assert profile.row_count == 1338
    assert len(profile.sample_rows) == 10


def test_ingest_ragged_row_rejected(catalog):
    with pytest.raises(CsvParseError):
        catalog.ingest_dataset("a,b\n1,2\n3\n", "ragged")


def test_ingest_empty_dataset_rejected(catalog):
    with pytest.raises(EmptyDataset):
        catalog.ingest_dataset("a,b\n", "empty")


def test_ingest_duplicate_name_rejected(catalog):
    catalog.ingest_dataset("a,b\n1,2\n", "dup")
    with pytest.raises(DuplicateName):
        catalog.ingest_dataset("a,b\n3,4\n", "dup")


def test_real_estate_sample_row(catalog):
    profile = catalog.ingest_dataset(REAL_ESTATE_CSV, "Real_estate")
    assert ", ".join(profile.sample_rows[0]) == (
        "1, 2012.917, 32, 84.87882, 10, 24.98298, 121.54024, 37.9"
    )


def test_dataset_mutation_mirrored_in_index(catalog):
    profile = catalog.ingest_dataset(medical_insurance_csv(), "insurance")
    vec = catalog.encoder.encode(profile.profile_text)
    hits = catalog.dataset_index.top_k(vec, "dataset", 1)
    assert hits[0].id == "insurance"
    assert hits[0].score == pytest.approx(1.0, abs=1e-12)


def test_csv_quoting_handled():
    header, rows = parse_csv('name,notes\nalice,"hello, world"\n')
    assert rows == [["alice", "hello, world"]]


def test_all_empty_column_counts_as_numeric():
    # vacuous "every non-empty cell parses" keeps the dtype rule literal
    cols = infer_columns(["a", "b"], [["1", ""], ["2", ""]])
    assert cols[1].dtype == "numeric"


# ------------------------------------------------------------------ profiles

def test_dataset_profile_domain_token(catalog):
    profile = catalog.ingest_dataset(REAL_ESTATE_CSV, "Real_estate")
    assert "in the Real domain" in profile.profile_text


def test_dataset_profile_render_deterministic(catalog):
    profile = catalog.ingest_dataset(REAL_ESTATE_CSV, "Real_estate")
    again = render_dataset_profile("Real_estate", profile.columns, profile.sample_rows)
    assert again == profile.profile_text


def test_dataset_profile_lists_every_column_once(catalog):
    profile = catalog.ingest_dataset(medical_insurance_csv(), "insurance")
    overview = profile.profile_text.split("Usage:")[0]
    column_list = overview[overview.index("[") : overview.index("]")]
    for col in profile.columns:
        assert column_list.count(f"'{col.name}'") == 1


def test_model_profile_metric_formatting():
    text = render_model_profile(insurance_card())
    assert "Mean Squared Error (MSE): 33497825.553683" in text
    assert "R² Score: 0.761543" in text


def test_recommendation_profile_accuracy_line():
    card = ModelCard(
        name="customerproductrecommender7172",
        dataset_name="trx_data",
        task="recommendation",
        algorithm="Mixed Collaborative Filtering with Neural Networks",
        user_col="customer_id",
        item_col="product_id",
        metrics={"accuracy": 0.807, "precision": 0.81, "recall": 0.79},
        limitations="Sparse interactions degrade quality.",
        weights_path="unused.bin",
    )
    text = render_model_profile(card)
    assert "Accuracy: 0.807000" in text


def test_model_profile_section_order():
    text = render_model_profile(insurance_card())
    headers = [
        "Model Name:", "Dataset Name:", "Model Overview:", "Intended Use:",
        "Technical Details:", "Model Performance:", "Limitations:",
    ]
    positions = [text.index(h) for h in headers]
    assert positions == sorted(positions)


def test_parse_round_trip():
    card = insurance_card()
    parsed = parse_model_profile(render_model_profile(card))
    assert parsed.name == card.name
    assert parsed.dataset_name == card.dataset_name
    assert parsed.algorithm == card.algorithm
    assert parsed.feature_order == card.feature_order
    assert parsed.metrics == card.metrics


def test_parse_missing_section_rejected():
    text = render_model_profile(insurance_card()).replace("Dataset Name:", "Data Source:")
    with pytest.raises(ProfileFormatError):
        parse_model_profile(text)


def test_parse_externally_authored_profile():
    # same section structure, multi-line bodies, full-precision metrics
    text = """Model Name: insurancecharge_linear_regression

Dataset Name: insurance

Model Overview:
The insurancecharge_linear_regression model is trained on the insurance dataset
to predict insurance charges based on a person's medical information.

Intended Use:
Estimating insurance charges for individuals.

Technical Details:
- Algorithm Type: Linear Regression
- Input Features: ['age', 'bmi', 'children', 'sex_female', 'sex_male', 'smoker_no', 'smoker_yes', 'region_northeast', 'region_northwest', 'region_southeast', 'region_southwest']
- Output: Predicted value of insurance charges

Model Performance:
- Mean Squared Error (MSE): 33497825.55368333
- R² Score: 0.7615425718903163

Limitations:
- Assumes a linear relationship between inputs and charges.
"""
    parsed = parse_model_profile(text)
    assert parsed.dataset_name == "insurance"
    assert len(parsed.feature_order) == 11
    assert parsed.metrics["r2"] == pytest.approx(0.7615425718903163)


def test_parse_recommendation_profile_columns():
    card = ModelCard(
        name="playlistrecommender",
        dataset_name="spotify",
        task="recommendation",
        algorithm="Mixed Collaborative Filtering with Neural Networks",
        user_col="user_id",
        item_col="playlistname",
        metrics={"accuracy": 0.9, "precision": 0.9, "recall": 0.9},
        limitations="n/a",
        weights_path="unused.bin",
    )
    parsed = parse_model_profile(render_model_profile(card))
    assert parsed.user_col == "user_id"
    assert parsed.item_col == "playlistname"


# -------------------------------------------------------------------- naming

def test_generate_model_name_regression():
    assert generate_model_name("regression", "charges", set()) == "charges_linear_regression"


def test_generate_model_name_collision_pattern():
    import re

    name = generate_model_name("recommendation", "product", {"productrecommender"})
    assert re.match(r"^productrecommender[0-9]{4}$", name)


def test_generate_model_name_format_rule():
    import re

    for task, target in [
        ("regression", "Y house price of unit area"),
        ("binary_classification", "Extremely Long Target Column Name Indeed"),
        ("recommendation", "playlistname"),
    ]:
        name = generate_model_name(task, target, set())
        assert len(name) <= 30
        assert re.match(r"^[a-z0-9_]+$", name)


def test_generate_model_name_drops_trailing_words_first():
    # over-long targets lose whole trailing tokens before characters
    assert (
        generate_model_name("regression", "Performance Index", set())
        == "performance_linear_regression"
    )


def test_generate_model_name_never_collides():
    existing = set()
    for _ in range(50):
        name = generate_model_name("recommendation", "product", existing)
        assert name not in existing
        existing.add(name)


# -------------------------------------------------------------- registration

def test_register_then_get(catalog):
    catalog.ingest_dataset(medical_insurance_csv(), "insurance")
    card = catalog.register_model(insurance_card())
    fetched = catalog.get_model(card.name)
    assert fetched.dataset_name == "insurance"
    assert fetched.metrics == card.metrics
    assert fetched.profile_text == render_model_profile(card)


def test_register_unknown_dataset_rejected(catalog):
    with pytest.raises(UnknownDataset):
        catalog.register_model(insurance_card(dataset_name="nosuch"))


def test_registered_model_retrievable_by_own_profile(catalog):
    catalog.ingest_dataset(medical_insurance_csv(), "insurance")
    card = catalog.register_model(insurance_card())
    vec = catalog.encoder.encode(card.profile_text)
    hits = catalog.model_index.top_k(vec, "model", 1)
    assert hits[0].id == card.name


def test_list_models_sorted(catalog):
    catalog.ingest_dataset(medical_insurance_csv(), "insurance")
    catalog.register_model(insurance_card(name="zeta_model"))
    catalog.register_model(insurance_card(name="alpha_model"))
    assert [c.name for c in catalog.list_models()] == ["alpha_model", "zeta_model"]


def test_catalog_reload_preserves_profiles(tmp_path):
    encoder = HashNgramEncoder(dimension=64)
    catalog = Catalog(tmp_path / "d", encoder)
    catalog.ingest_dataset(medical_insurance_csv(), "insurance")
    card = catalog.register_model(insurance_card())
    reloaded = Catalog(tmp_path / "d", encoder)
    assert reloaded.get_dataset("insurance").profile_text == catalog.get_dataset("insurance").profile_text
    assert reloaded.get_model(card.name).profile_text == card.profile_text
