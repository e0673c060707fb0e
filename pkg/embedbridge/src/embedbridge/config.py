"""Bridge configuration."""

from dataclasses import dataclass

# Softmax temperature multiplier for the contrastive loss. Must equal the
# retrieval engine's configured loss scale for cross-component parity.
DEFAULT_LOSS_SCALE = 20.0


@dataclass
class BridgeConfig:
    model: str = "sentence-transformers/all-MiniLM-L6-v2"  # HF id or local directory
    device: str = "cpu"
    encode_batch_size: int = 32
    finetune: bool = False
    epochs: int = 10
    train_batch_size: int = 64
    learning_rate: float = 2e-5
    loss_scale: float = DEFAULT_LOSS_SCALE
    seed: int = 42

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.train_batch_size < 2:
            raise ValueError("train_batch_size must be >= 2 (in-batch negatives)")
        if self.encode_batch_size < 1:
            raise ValueError("encode_batch_size must be >= 1")
        if not self.loss_scale > 0:
            raise ValueError("loss_scale must be positive")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
