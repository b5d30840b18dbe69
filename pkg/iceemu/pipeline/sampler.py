from typing import List, Sequence, Tuple

import numpy as np

from iceemu.common.errors import ConfigError

FrameIndex = Tuple[int, int]


class FrameShoe:
    def __init__(self, frames: Sequence[FrameIndex], seed: int = 0):
        """
        Initialize a FrameShoe instance.

        Deals every training frame once per epoch in a seeded random order.

        :param frames: (rate index, month) pairs to deal
        :param seed: Seed of the shuffling generator
        """
        if len(frames) < 1:
            raise ConfigError("FrameShoe needs at least one frame")

        self.frames: List[FrameIndex] = list(frames)
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.epochs_dealt = 0

    def shuffle(self) -> List[FrameIndex]:
        """Return the frames in a fresh random order."""
        order = self.rng.permutation(len(self.frames))
        return [self.frames[i] for i in order]

    def deal_epoch(self) -> List[FrameIndex]:
        """Deal one epoch: every frame exactly once."""
        self.epochs_dealt += 1
        return self.shuffle()

    def __len__(self) -> int:
        return len(self.frames)

    def __str__(self) -> str:
        return f"FrameShoe with {len(self.frames)} frames, {self.epochs_dealt} epochs dealt"

    def __repr__(self) -> str:
        return f"FrameShoe(frames={len(self.frames)}, seed={self.seed})"
