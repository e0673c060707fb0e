import json
from pathlib import Path

import pytest

N_TOPICS = 40


def _passage_record(i: int) -> dict:
    return {
        "DocumentID": 1 + i // 10,
        "PassageID": f"{i % 10 + 1}.{i}",
        "Passage": (
            f"Regulation section {i}: requirements for topic{i} operations "
            f"including item{i} compliance duties."
        ),
    }


@pytest.fixture(scope="session")
def synthetic_dataset(tmp_path_factory) -> dict:
    """Small topical corpus with train/dev splits whose gold is unambiguous."""
    root = tmp_path_factory.mktemp("dataset")
    passages = [_passage_record(i) for i in range(N_TOPICS)]
    (root / "docs.json").write_text(json.dumps(passages))

    def gold(i):
        return [{"DocumentID": passages[i]["DocumentID"], "PassageID": passages[i]["PassageID"]}]

    train = []
    for i in range(N_TOPICS):
        train.append(
            {"QuestionID": f"t{i}a", "Question": f"What are the topic{i} requirements for item{i} compliance?", "Passages": gold(i)}
        )
        train.append(
            {"QuestionID": f"t{i}b", "Question": f"Which rules govern topic{i} operations?", "Passages": gold(i)}
        )
    (root / "train.json").write_text(json.dumps(train))
    dev = [
        {"QuestionID": f"d{i}", "Question": f"Explain the compliance duties for topic{i} operations.", "Passages": gold(i)}
        for i in range(N_TOPICS)
    ]
    (root / "dev.json").write_text(json.dumps(dev))
    return {
        "root": root,
        "corpus": root / "docs.json",
        "train": root / "train.json",
        "dev": root / "dev.json",
        "texts": [p["Passage"] for p in passages]
        + [q["Question"] for q in train]
        + [q["Question"] for q in dev],
    }


@pytest.fixture(scope="session")
def tiny_model_dir(synthetic_dataset, tmp_path_factory) -> Path:
    from embedbridge.tiny import build_tiny_model

    out = tmp_path_factory.mktemp("tiny")
    return build_tiny_model(synthetic_dataset["texts"], out, seed=7)
