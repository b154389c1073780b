"""Non-neural machinery for hierarchical multi-label persuasion-technique
detection: taxonomy-aware scoring, per-technique threshold tuning, ensemble
fusion, and paraphrase-based augmentation planning."""

from .augmentation import (
    AugmentationPlan,
    ParaphraseRequest,
    execute_plan,
    load_plan,
    parse_plan,
    plan_para_bal,
    plan_para_benef,
    plan_para_n,
    save_plan,
)
from .dataset import (
    Dataset,
    Instance,
    SplitMap,
    bundled_split_map,
    cardinality_stats,
    dumps_dataset,
    label_counts,
    load_dataset,
    load_split_map,
    merge_with_split,
    parse_dataset,
    save_dataset,
)
from .ensembling import mean_ensemble
from .errors import (
    PersuakitError,
    PlanExecutionError,
    ProviderError,
    ValidationError,
)
from .pipeline import (
    RunManifest,
    ZeroShotResult,
    load_label_map,
    mock_members_producer,
    predict_labels,
    save_labels,
    zero_shot_predict,
)
from .scoring import (
    BenefitSet,
    ClassScore,
    ScoreReport,
    benefit_set,
    f1_delta,
    hierarchical_prf,
    per_class_f1,
)
from .services import (
    ChatCompletionParaphraser,
    HttpTranslator,
    MockParaphraseProvider,
    MockTranslator,
    ProviderConfig,
)
from .taxonomy import (
    LabelHierarchy,
    ancestor_closure,
    ancestors,
    bundled_hierarchy,
    load_hierarchy,
    parse_hierarchy,
)
from .thresholding import (
    Grid,
    PredictionMatrix,
    ThresholdProfile,
    apply_thresholds,
    as_probabilities,
    load_matrix,
    save_matrix,
    sigmoid_matrix,
    tune_thresholds,
)

__version__ = "0.1.0"
