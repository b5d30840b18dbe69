"""
This module contains the TrainingHistory class which records per-epoch losses
of a training run and writes them as the history CSV.
"""

import csv
import math
from dataclasses import dataclass
from typing import List, Optional

from iceemu.common.util import format_row


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: Optional[float]
    wall_seconds: float


class TrainingHistory:
    """
    A class that holds the per-epoch losses of a training run.
    """

    COLUMNS = ("epoch", "train_loss", "val_loss", "wall_seconds")

    def __init__(self):
        self.records: List[EpochRecord] = []
        self.best_epoch: Optional[int] = None
        self.best_val_loss = math.inf

    def update(self, epoch: int, train_loss: float, val_loss: Optional[float], wall_seconds: float) -> bool:
        """
        Record one epoch.

        :return: True when the validation loss improved on every earlier epoch
        """
        self.records.append(EpochRecord(epoch, train_loss, val_loss, wall_seconds))
        if val_loss is not None and val_loss < self.best_val_loss:
            self.best_val_loss = val_loss
            self.best_epoch = epoch
            return True
        return False

    @property
    def train_losses(self) -> List[float]:
        return [record.train_loss for record in self.records]

    @property
    def val_losses(self) -> List[Optional[float]]:
        return [record.val_loss for record in self.records]

    def report(self):
        """
        Returns a dictionary summarizing the run.
        """
        return {
            "epochs": len(self.records),
            "final_train_loss": self.records[-1].train_loss if self.records else None,
            "best_epoch": self.best_epoch,
            "best_val_loss": self.best_val_loss if self.best_epoch is not None else None,
        }

    def write_csv(self, path, include_timing: bool = True):
        """Write epoch, train_loss, val_loss, wall_seconds; timing is blanked when not included."""
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(self.COLUMNS)
            for record in self.records:
                writer.writerow(
                    format_row(
                        [
                            record.epoch,
                            record.train_loss,
                            "" if record.val_loss is None else record.val_loss,
                            record.wall_seconds if include_timing else "",
                        ]
                    )
                )
