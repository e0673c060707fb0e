"""Build a small randomly initialized sentence-embedding model.

For offline smoke runs and tests: a word-level vocabulary is derived from
the given texts, wrapped around a small transformer encoder with mean
pooling. Real runs should point BridgeConfig.model at a published
sentence-embedding checkpoint instead.
"""

from __future__ import annotations

import re
from pathlib import Path

import torch

_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)

SPECIAL_TOKENS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]


def _word_level_tokenizer(vocab: list[str]):
    """WordPiece over whole words only; anything out of vocabulary maps to [UNK]."""
    from tokenizers import Tokenizer
    from tokenizers.models import WordPiece
    from tokenizers.normalizers import BertNormalizer
    from tokenizers.pre_tokenizers import BertPreTokenizer
    from tokenizers.processors import TemplateProcessing
    from transformers import PreTrainedTokenizerFast

    tokenizer = Tokenizer(WordPiece({word: i for i, word in enumerate(vocab)}, unk_token="[UNK]"))
    tokenizer.normalizer = BertNormalizer(lowercase=True)
    tokenizer.pre_tokenizer = BertPreTokenizer()
    tokenizer.post_processor = TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", vocab.index("[CLS]")), ("[SEP]", vocab.index("[SEP]"))],
    )
    return PreTrainedTokenizerFast(
        tokenizer_object=tokenizer,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
    )


def build_tiny_model(
    texts: list[str],
    out_dir: str | Path,
    hidden_size: int = 32,
    num_layers: int = 1,
    num_heads: int = 2,
    max_seq_length: int = 64,
    seed: int = 7,
) -> Path:
    from sentence_transformers import SentenceTransformer, models
    from transformers import BertConfig, BertModel

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    vocab = SPECIAL_TOKENS + sorted({w.lower() for text in texts for w in _WORD_RE.findall(text)})
    hf_dir = out_dir / "hf"
    hf_dir.mkdir(exist_ok=True)
    tokenizer = _word_level_tokenizer(vocab)
    tokenizer.save_pretrained(hf_dir)

    torch.manual_seed(seed)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=hidden_size,
        num_hidden_layers=num_layers,
        num_attention_heads=num_heads,
        intermediate_size=hidden_size * 2,
        max_position_embeddings=max_seq_length,
    )
    BertModel(config).save_pretrained(hf_dir)

    transformer = models.Transformer(str(hf_dir), max_seq_length=max_seq_length)
    pooling = models.Pooling(hidden_size, pooling_mode="mean")
    model = SentenceTransformer(modules=[transformer, pooling], device="cpu")
    model_dir = out_dir / "model"
    model.save(str(model_dir))
    return model_dir
