import csv
import json

import pytest

from synthgen import make_document


@pytest.fixture
def write_users_csv(tmp_path):
    def _write(rows, name="users.csv", header=("user_id", "label", "bio")):
        path = tmp_path / name
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        return path

    return _write


@pytest.fixture
def write_tweets_csv(tmp_path):
    def _write(rows, name="tweets.csv"):
        path = tmp_path / name
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["user_id", "text"])
            writer.writerows(rows)
        return path

    return _write


@pytest.fixture
def write_jsonl(tmp_path):
    def _write(records, name):
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as fh:
            for record in records:
                fh.write(json.dumps(record) + "\n")
        return path

    return _write


@pytest.fixture
def document_factory():
    return make_document
