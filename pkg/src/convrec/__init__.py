"""Multi-agent conversational recommendation engine.

Four specialized scorers (conversation, preference, context, ranking) feed an
adaptive coordinator that learns agent weights online and fuses normalized
scores into ranked recommendations; a complexity router dispatches each turn
to one of three processing tiers.
"""

from .catalog import Catalog, load_catalog, save_catalog
from .config import EngineConfig, Lexicon, default_lexicon, load_config, synthetic_lexicon
from .conversation import (
    ConversationHistory,
    ConversationState,
    IntentDistribution,
    PreferenceStatement,
    Role,
    Utterance,
    UtteranceAnalyzer,
    classify_intent,
    encode_state,
    extract_preferences,
    rule_based_analyzer,
)
from .context import (
    Candidate,
    ContextSnapshot,
    LocationTag,
    SocialSetting,
    TimeBucket,
    score_candidates_ctx,
    snapshot_context,
)
from .coordinator import (
    Coordinator,
    CoordinatorFeatures,
    RankedList,
    Weights,
    WeightNet,
    compute_weights,
    fuse_scores,
    load_weightnet,
    refine_round,
    save_weightnet,
    turn_reward,
    update_net,
)
from .engine import Engine, EngineSession, TurnResult
from .errors import (
    ConvRecError,
    InvalidConfig,
    InvalidContext,
    InvalidUtterance,
    NotFound,
    NumericError,
    StateDesync,
)
from .preferences import (
    FeedbackSignal,
    PreferenceProfile,
    init_profile,
    profile_coverage,
    score_candidates_pref,
    update_profile,
)
from .ranking import AgentId, AgentScores, FactorWeights, attention_weights, score_candidates_rank
from .routing import (
    ComplexityScore,
    ResponseCache,
    Tier,
    TierDecision,
    calibrate_thresholds,
    complexity_score,
    route,
)
from .simulation import (
    ConversationLog,
    ExperimentConfig,
    MetricsReport,
    SimUser,
    UserSimulator,
    generate_world,
    ndcg_at_k,
    run_experiment,
)

__version__ = "0.1.0"
