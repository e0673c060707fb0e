import os
from pathlib import Path

import pytest

from lexsem.corpus import Corpus, Passage, PassageKey

REPO_ROOT = Path(__file__).resolve().parent.parent
SAMPLE_DIR = REPO_ROOT / "data" / "sample"

# Full dataset location for the dataset-gated acceptance checks.
OBLIQA_DIR = os.environ.get("OBLIQA_DIR", str(REPO_ROOT / "data" / "ObliQA"))


def obliqa_available() -> bool:
    root = Path(OBLIQA_DIR)
    return (root / "StructuredRegulatoryDocuments").is_dir() and (root / "ObliQA_train.json").is_file()


requires_obliqa = pytest.mark.skipif(
    not obliqa_available(),
    reason=f"ObliQA dataset not found under {OBLIQA_DIR} (set OBLIQA_DIR); "
    "cannot be fetched in this environment",
)


@pytest.fixture
def toy_corpus() -> Corpus:
    """Three-passage corpus: N=3, df(market)=df(rule)=2, df(penalty)=1, avgdl=11/3."""
    return Corpus(
        [
            Passage(PassageKey("1", "1.1"), "rule about market conduct"),
            Passage(PassageKey("1", "1.2"), "market disclosure rule"),
            Passage(PassageKey("2", "2.1"), "penalty for late filing"),
        ]
    )


@pytest.fixture
def fusion_corpus() -> Corpus:
    """Five-passage corpus used by the rerank fixtures."""
    return Corpus(
        [
            Passage(PassageKey("1", "a"), "market conduct rule"),
            Passage(PassageKey("1", "b"), "disclosure of market information"),
            Passage(PassageKey("2", "a"), "rule on late filing penalty"),
            Passage(PassageKey("2", "b"), "annual report disclosure rule"),
            Passage(PassageKey("3", "a"), "guidance on supervision"),
        ]
    )


@pytest.fixture
def sample_documents() -> Path:
    return SAMPLE_DIR / "documents"


@pytest.fixture
def sample_questions() -> Path:
    return SAMPLE_DIR / "questions.json"
