from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr


class Goal(str, Enum):
    PRECISION = "precision"
    RECALL = "recall"


class Direction(str, Enum):
    GT = ">"
    LE = "<="


class FeatureKind(str, Enum):
    TFIDF = "tfidf"
    TOPIC = "topic"


class FitnessMode(str, Enum):
    STABILITY = "stability"
    CLASSIFICATION = "classification"


# --- corpus ---

class RawDocument(BaseModel):
    """
    One bug report as it arrives from the dataset file.
    """
    id: str
    text: str = ""
    severity: str


class Vocabulary(BaseModel):
    """
    Term <-> id bijection plus the counts TFIDF needs.
    Ids are dense: terms[i] is the string for id i.
    """
    terms: List[str]
    doc_freq: List[int]
    total_docs: int
    total_terms: int

    _index: Dict[str, int] = PrivateAttr(default_factory=dict)

    def model_post_init(self, __context) -> None:
        self._index = {term: i for i, term in enumerate(self.terms)}

    @property
    def size(self) -> int:
        return len(self.terms)

    def term_id(self, term: str) -> Optional[int]:
        return self._index.get(term)

    def term(self, term_id: int) -> str:
        return self.terms[term_id]


class Document(BaseModel):
    id: str
    token_ids: List[int]
    label: bool


class Corpus(BaseModel):
    """
    Preprocessed documents with binary labels (true = severe).
    """
    name: str = "corpus"
    documents: List[Document]
    vocabulary: Vocabulary
    positive_class: str
    positive_fraction: float

    @property
    def n_docs(self) -> int:
        return len(self.documents)

    @property
    def total_tokens(self) -> int:
        return sum(len(d.token_ids) for d in self.documents)

    def labels(self) -> np.ndarray:
        return np.array([d.label for d in self.documents], dtype=bool)

    def doc_ids(self) -> List[str]:
        return [d.id for d in self.documents]


# --- features ---

class FeatureMatrix(BaseModel):
    """
    Documents x features, non-negative reals. Topic rows sum to 1.
    """
    kind: FeatureKind
    doc_ids: List[str]
    values: np.ndarray
    feature_names: List[str]

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @property
    def n_docs(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.values.shape[1])


class LdaConfig(BaseModel):
    k: int
    alpha: float
    beta: float = 0.01
    iterations: int = 200
    seed: int = 1

    @classmethod
    def with_defaults(cls, k: int, alpha: Optional[float] = None, beta: Optional[float] = None,
                      iterations: int = 200, seed: int = 1) -> "LdaConfig":
        # alpha = 50/K, beta = 0.01 unless given
        return cls(
            k=k,
            alpha=alpha if alpha is not None else 50.0 / k,
            beta=beta if beta is not None else 0.01,
            iterations=iterations,
            seed=seed,
        )


class TopicModel(BaseModel):
    """
    Fitted LDA state. topic_word_counts is K x V, doc_topic is n_docs x K.
    """
    config: LdaConfig
    topic_word_counts: np.ndarray
    doc_topic: np.ndarray
    vocabulary: Vocabulary

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @property
    def k(self) -> int:
        return self.config.k


# --- fft ---

class ExitPolicy(BaseModel):
    """
    One exit label per level; the final leaf takes the opposite of the last bit.
    """
    bits: List[bool]

    @property
    def depth(self) -> int:
        return len(self.bits)

    @property
    def final_label(self) -> bool:
        return not self.bits[-1]

    def as_string(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)

    @classmethod
    def from_string(cls, text: str) -> "ExitPolicy":
        return cls(bits=[c == "1" for c in text])


class Cue(BaseModel):
    feature: int
    direction: Direction
    threshold: float

    def matches(self, value: float) -> bool:
        if self.direction == Direction.GT:
            return value > self.threshold
        return value <= self.threshold

    @property
    def is_pass_through(self) -> bool:
        return self.direction == Direction.GT and self.threshold == float("inf")


class FrugalTree(BaseModel):
    policy: ExitPolicy
    cues: List[Cue]
    goal: Goal
    training_score: float
    n_features: int = 0  # 0 when unknown, e.g. parsed from rule text

    @property
    def depth(self) -> int:
        return len(self.cues)

    def referenced_features(self) -> List[int]:
        """Distinct features in level order, pass-through levels excluded."""
        seen: List[int] = []
        for cue in self.cues:
            if not cue.is_pass_through and cue.feature not in seen:
                seen.append(cue.feature)
        return seen


# --- svm ---

class LinearModel(BaseModel):
    weights: np.ndarray
    bias: float
    lam: float = Field(alias="lambda")
    epochs: int
    seed: int

    model_config = ConfigDict(arbitrary_types_allowed=True, populate_by_name=True)

    @property
    def n_features(self) -> int:
        return int(self.weights.shape[0])


# --- tuner ---

class DEConfig(BaseModel):
    population_size: int = 10
    f: float = 0.7
    cr: float = 0.3
    generations: int = 3
    k_bounds: Tuple[int, int] = (10, 100)
    alpha_bounds: Tuple[float, float] = (0.001, 1.0)
    beta_bounds: Tuple[float, float] = (0.001, 1.0)
    runs: int = 5
    lda_iterations: int = 100
    fitness: FitnessMode = FitnessMode.STABILITY
    seed: int = 1


class Candidate(BaseModel):
    k: int
    alpha: float
    beta: float
    fitness: Optional[float] = None


class TraceRow(BaseModel):
    generation: int
    candidate: int
    k: int
    alpha: float
    beta: float
    fitness: float


# --- evalrig ---

class FoldPlan(BaseModel):
    """
    assignments[r][i] is the bin of document i in repeat r.
    """
    repeats: int
    bins: int
    seed: int
    assignments: List[List[int]]

    def test_indices(self, repeat: int, fold: int) -> List[int]:
        return [i for i, b in enumerate(self.assignments[repeat]) if b == fold]

    def train_indices(self, repeat: int, fold: int) -> List[int]:
        return [i for i, b in enumerate(self.assignments[repeat]) if b != fold]

    def bin_indices(self, repeat: int, bins: List[int]) -> List[int]:
        wanted = set(bins)
        return [i for i, b in enumerate(self.assignments[repeat]) if b in wanted]


class ConfusionMatrix(BaseModel):
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @classmethod
    def from_predictions(cls, actual: np.ndarray, predicted: np.ndarray) -> "ConfusionMatrix":
        actual = np.asarray(actual, dtype=bool)
        predicted = np.asarray(predicted, dtype=bool)
        return cls(
            tp=int(np.sum(actual & predicted)),
            fp=int(np.sum(~actual & predicted)),
            tn=int(np.sum(~actual & ~predicted)),
            fn=int(np.sum(actual & ~predicted)),
        )


class RunRecord(BaseModel):
    """
    One measurement: a metric of one method on one (repeat, fold) cell.
    """
    dataset: str
    method: str
    repeat: int
    fold: int
    metric: Goal
    value: float
    runtime_ms: float

    def sort_key(self) -> Tuple[str, str, int, int, str]:
        return (self.dataset, self.method, self.repeat, self.fold, self.metric.value)


# --- stats ---

class MethodSummary(BaseModel):
    method: str
    median: float
    iqr: float


class RankGroup(BaseModel):
    rank: int
    methods: List[MethodSummary]


class Ranking(BaseModel):
    groups: List[RankGroup]

    def rank_of(self, method: str) -> int:
        for group in self.groups:
            if any(m.method == method for m in group.methods):
                return group.rank
        raise KeyError(method)

    @property
    def n_ranks(self) -> int:
        return len(self.groups)
