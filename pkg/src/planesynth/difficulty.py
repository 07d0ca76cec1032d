"""Multi-dimensional difficulty scoring and micro-level stratification.

Total difficulty is a weighted sum of graph complexity (element count and
mean dependency level), question complexity (task coefficient times target
level), and answer complexity (a normalized power law in the canonical
answer string's length).  Scores map to 1..10 micro-levels through fixed
decile upper bounds; an empirical refit over a batch of scores is provided
for new corpora.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction

from .errors import EngineError
from .exactnum import ExactScalar
from .manifold import Manifold
from .solver import QueryTarget

AREA_FAMILY = (
    "Entity Area",
    "Shadow Area",
    "Shadow Ratio",
    "Shadow Entity Ratio",
    "Overall Shadow Area",
)


def _default_mu() -> dict[str, Fraction]:
    mu = {k: Fraction(3, 2) for k in AREA_FAMILY}
    mu.update({"Length": Fraction(1), "Angle": Fraction(1), "Perimeter": Fraction(1)})
    return mu


@dataclass(frozen=True)
class DifficultyWeights:
    w_g: Fraction = Fraction(3, 10)
    w_q: Fraction = Fraction(1, 2)
    w_a: Fraction = Fraction(1, 5)
    alpha: Fraction = Fraction(1, 20)
    beta: Fraction = Fraction(2, 5)
    mu_task: dict[str, Fraction] = field(default_factory=_default_mu)
    K: Fraction = Fraction(5)
    gamma: Fraction = Fraction(3, 5)
    N_max: int = 150


DEFAULTS = DifficultyWeights()

# Fixed decile upper bounds; level 10 is the open tail.
REFERENCE_BOUNDS = (
    Decimal("3.0472"),
    Decimal("3.5651"),
    Decimal("3.9422"),
    Decimal("4.3568"),
    Decimal("4.7553"),
    Decimal("5.1505"),
    Decimal("5.6536"),
    Decimal("6.4718"),
    Decimal("8.0453"),
)


@dataclass(frozen=True)
class MicroLevelTable:
    bounds: tuple[Decimal, ...] = REFERENCE_BOUNDS

    def __post_init__(self):
        if len(self.bounds) != 9:
            raise ValueError("need exactly 9 decile upper bounds")


def graph_complexity(m: Manifold, w: DifficultyWeights = DEFAULTS) -> Fraction:
    """alpha * element count + beta * mean entity level.

    Elements are non-point entities (segments, arcs, circles, polygons,
    shaded blocks); loop bookkeeping pieces are excluded.
    """
    ents = m.nonpoint_entities()
    n = len(ents)
    if n == 0:
        return Fraction(0)
    mean_level = Fraction(sum(e.level for e in ents), n)
    return w.alpha * n + w.beta * mean_level


def question_complexity(t: QueryTarget, w: DifficultyWeights = DEFAULTS) -> Fraction:
    return w.mu_task[t.kind] * t.level


def answer_complexity(gt: ExactScalar, w: DifficultyWeights = DEFAULTS) -> Decimal:
    """1 + K * ((len - 1)/N_max)**gamma over the canonical string length.

    The fractional power is evaluated in high-precision decimal arithmetic
    and rounded to 12 fractional digits for determinism.
    """
    return answer_complexity_from_length(len(gt.to_canonical_string()), w)


def answer_complexity_from_length(n_chars: int, w: DifficultyWeights = DEFAULTS) -> Decimal:
    base = Fraction(n_chars - 1, w.N_max)
    if base == 0:
        return Decimal(1)
    with localcontext() as ctx:
        ctx.prec = 40
        x = Decimal(base.numerator) / Decimal(base.denominator)
        g = Decimal(w.gamma.numerator) / Decimal(w.gamma.denominator)
        powed = (x.ln() * g).exp()
        k = Decimal(w.K.numerator) / Decimal(w.K.denominator)
        out = 1 + k * powed
    return out.quantize(Decimal("1.000000000000"))


def total_difficulty(
    c_graph: Fraction, c_question: Fraction, c_answer: Decimal,
    w: DifficultyWeights = DEFAULTS,
) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = 40
        total = (
            Decimal(w.w_g.numerator) / Decimal(w.w_g.denominator)
            * (Decimal(c_graph.numerator) / Decimal(c_graph.denominator))
            + Decimal(w.w_q.numerator) / Decimal(w.w_q.denominator)
            * (Decimal(c_question.numerator) / Decimal(c_question.denominator))
            + Decimal(w.w_a.numerator) / Decimal(w.w_a.denominator) * c_answer
        )
    return total.quantize(Decimal("1.000000000000"))


def score_sample(m: Manifold, t: QueryTarget, gt: ExactScalar,
                 w: DifficultyWeights = DEFAULTS) -> Decimal:
    return total_difficulty(
        graph_complexity(m, w), question_complexity(t, w), answer_complexity(gt, w), w
    )


def micro_level(score: Decimal | float | str, table: MicroLevelTable = MicroLevelTable()) -> int:
    """1 + number of decile bounds strictly below the score (first bound
    at or above the score wins; above all bounds is level 10)."""
    s = Decimal(str(score))
    for i, bound in enumerate(table.bounds, start=1):
        if s <= bound:
            return i
    return 10


def fit_quantiles(scores: list) -> MicroLevelTable:
    """Empirical nearest-rank deciles of a score batch."""
    if len(scores) < 10:
        raise EngineError("need at least 10 scores to fit quantiles")
    ordered = sorted(Decimal(str(s)) for s in scores)
    n = len(ordered)
    bounds = []
    for i in range(1, 10):
        rank = -(-i * n // 10)  # ceil(i*n/10), nearest-rank
        bounds.append(ordered[rank - 1])
    return MicroLevelTable(tuple(bounds))


def format_score(score: Decimal) -> str:
    """Serialized difficulty: decimal string with 4 fractional digits."""
    return str(Decimal(str(score)).quantize(Decimal("1.0000")))


__all__ = [
    "DifficultyWeights",
    "DEFAULTS",
    "MicroLevelTable",
    "REFERENCE_BOUNDS",
    "graph_complexity",
    "question_complexity",
    "answer_complexity",
    "answer_complexity_from_length",
    "total_difficulty",
    "score_sample",
    "micro_level",
    "fit_quantiles",
    "format_score",
]
