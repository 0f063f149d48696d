"""Structured 3D scene data plane: quantization, unified vocabulary, scene
serialization, task sequence assembly, token reordering, and evaluation."""

__version__ = "0.1.0"

from .evaluate import (
    ARKITSCENES_TAUS,
    DEFAULT_TAUS,
    EvalReport,
    MatchCriteria,
    criteria_for,
    jaccard_dataset,
    jaccard_scene,
    qa_accuracy,
    qa_baselines,
    taus_for,
)
from .generate import EditOp, EditParams, GenConfig, edit_scene, generate_scene, generate_scenes
from .numenc import EncodingMode, EncodingTable, combine, sincos_table
from .quantize import QuantizerConfig, dequantize, numeric_vocab, quantize
from .reorder import ReorderPlan, center_plan
from .scene import (
    AnswerType,
    DatasetStyle,
    QAItem,
    Scene,
    SceneObject,
    scene_from_json,
    scene_to_json,
)
from .sequences import (
    ModalityOrder,
    Role,
    SequenceBuilder,
    SequenceOptions,
    TaskSequence,
    decompose,
    loss_weights,
)
from .serialize import (
    ParseDiagnostic,
    ParseMode,
    TokenString,
    fragmenting_baseline_length,
    mean_sequence_length,
    parse_scene,
    serialize_scene,
)
from .stats import UsageHistogram, position_concentration, usage_histogram
from .vocab import (
    ImageCode,
    ShapeCode,
    Vocabulary,
    build_vocab,
    load_manifest,
)
