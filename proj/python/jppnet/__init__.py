# SPDX-License-Identifier: Apache-2.0
"""Joint human parsing and pose estimation toolkit."""

from ._core import (
    NUM_JOINTS,
    NUM_PART_CLASSES,
    NUM_PSEUDO_JOINTS,
    ConfigError,
    DataError,
    ShapeError,
    ablate,
    confusion_matrix,
    evaluate,
    gen_data,
    joint_names,
    joint_structure_loss,
    parsing_scores,
    part_names,
    pckh,
    pckh_total,
    pseudo_joints,
    structure_report,
    structure_sensitive_loss,
    train,
)

__all__ = [name for name in dir() if not name.startswith("_")]
