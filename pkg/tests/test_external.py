import pytest

from meshqa.errors import UnknownStimulus
from meshqa.stats import import_external_metric


def test_join_against_manifest():
    csv_text = "stimulus_id,value\na,0.1\nb,0.2\nc,0.3\n"
    values = import_external_metric(csv_text, known_ids={"a", "b", "c", "d"})
    assert values == {"a": 0.1, "b": 0.2, "c": 0.3}


def test_headerless_csv():
    csv_text = "a,0.5\nb,1.5\n"
    values = import_external_metric(csv_text, known_ids={"a", "b"})
    assert values == {"a": 0.5, "b": 1.5}


def test_unknown_stimulus_listed():
    csv_text = "id,value\na,1\nmystery,2\n"
    with pytest.raises(UnknownStimulus) as err:
        import_external_metric(csv_text, known_ids={"a"})
    assert "mystery" in str(err.value)


def test_duplicate_last_wins_with_warning():
    csv_text = "id,value\na,1\na,2\n"
    with pytest.warns(UserWarning):
        values = import_external_metric(csv_text, known_ids={"a"})
    assert values == {"a": 2.0}


def test_named_columns():
    csv_text = "foo,stim,score\nx,a,0.25\ny,b,0.75\n"
    values = import_external_metric(
        csv_text, known_ids={"a", "b"}, id_column="stim", value_column="score"
    )
    assert values == {"a": 0.25, "b": 0.75}


def test_file_source(tmp_path):
    path = tmp_path / "metric.csv"
    path.write_text("id,value\nz,9.5\n")
    assert import_external_metric(str(path), known_ids={"z"}) == {"z": 9.5}
