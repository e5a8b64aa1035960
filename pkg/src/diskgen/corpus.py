"""Corpus handling: equation tokenization, vocabulary, synthetic data, JSONL I/O.

The synthetic generator emits templated equation/problem pairs that carry gold
dependency edges, a constituency bracketing and POS tags by construction, so
no external parser is ever needed.
"""

import json
import random
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    ConfigError,
    CorpusParseError,
    EmptyInputError,
    UnknownKindError,
    ValidationError,
)
from .trees import leaf_count

PAD, UNK, BOS, EOS = 0, 1, 2, 3
RESERVED = {"<pad>": PAD, "<unk>": UNK, "<bos>": BOS, "<eos>": EOS}

VARIABLE_SURFACES = frozenset("xyzw")
OPERATOR_SURFACES = frozenset({"+", "-", "*", "/", "=", "(", ")", "^"})
SEPARATOR_SURFACES = frozenset({"equ", ":"})

_NUMBER_RE = re.compile(r"^(\d+(\.\d+)?|\d+/\d+)$")


def is_number_token(surface: str) -> bool:
    return bool(_NUMBER_RE.match(surface))


class TokenKind(Enum):
    VARIABLE = "VARIABLE"
    NUMBER = "NUMBER"
    OPERATOR = "OPERATOR"
    SEPARATOR = "SEPARATOR"


@dataclass(frozen=True)
class EquationToken:
    surface: str
    kind: TokenKind


@dataclass
class MWPInstance:
    """One equation/problem pair with its gold parse annotations."""

    id: str
    equation: list  # list[EquationToken]
    text: list  # list[str]
    dep_edges: list  # list[(head, dep, rel)], head == -1 marks root
    constituency: str
    pos_tags: list  # list[str], aligned with text

    def validate(self):
        L = len(self.text)
        if L < 1:
            raise ValidationError(f"{self.id}: empty text")
        if len(self.pos_tags) != L:
            raise ValidationError(f"{self.id}: pos_tags length != text length")
        for head, dep, _rel in self.dep_edges:
            if dep < 0 or dep >= L or head >= L or head < -1:
                raise ValidationError(f"{self.id}: dep edge ({head},{dep}) out of range")
        if leaf_count(self.constituency) != L:
            raise ValidationError(f"{self.id}: constituency leaf count != text length")
        return self

    @property
    def template(self):
        """Template tag encoded in the id ('t3-00042' -> 't3'), or None."""
        prefix = self.id.split("-", 1)[0]
        return prefix if prefix.startswith("t") else None


def tokenize_equation(raw: str):
    """Split a normalized equation string into kind-labeled tokens."""
    if not raw or not raw.strip():
        raise EmptyInputError("empty equation string")
    tokens, bad = [], []
    for surface in raw.lower().split():
        if surface in SEPARATOR_SURFACES:
            kind = TokenKind.SEPARATOR
        elif surface in VARIABLE_SURFACES:
            kind = TokenKind.VARIABLE
        elif is_number_token(surface):
            kind = TokenKind.NUMBER
        elif surface in OPERATOR_SURFACES:
            kind = TokenKind.OPERATOR
        else:
            bad.append(surface)
            continue
        tokens.append(EquationToken(surface, kind))
    if bad:
        raise UnknownKindError(bad)
    return tokens


def equation_surfaces(tokens):
    return [t.surface for t in tokens]


class Vocabulary:
    """Frequency-ordered token->id map with fixed reserved ids 0..3."""

    def __init__(self, tokens):
        self.token_to_id = dict(RESERVED)
        for tok in tokens:
            if tok not in self.token_to_id:
                self.token_to_id[tok] = len(self.token_to_id)
        self.id_to_token = {i: t for t, i in self.token_to_id.items()}

    def __len__(self):
        return len(self.token_to_id)

    def __contains__(self, tok):
        return tok in self.token_to_id

    def encode(self, tokens):
        return [self.token_to_id.get(t, UNK) for t in tokens]

    def decode(self, ids):
        return [self.id_to_token.get(i, "<unk>") for i in ids]


def build_vocab(corpus, min_freq=1):
    """Build one shared vocabulary over problem text and equation surfaces."""
    if not corpus:
        raise ConfigError("cannot build a vocabulary from an empty corpus")
    counts = Counter()
    for inst in corpus:
        counts.update(inst.text)
        counts.update(equation_surfaces(inst.equation))
    kept = [t for t, c in counts.items() if c >= min_freq]
    kept.sort(key=lambda t: (-counts[t], t))
    return Vocabulary(kept)


# ---------------------------------------------------------------------------
# Synthetic templates.  Each template is a fixed token skeleton with numeric
# slots; the dependency edges, bracketing and POS tags are written once per
# template and hold for every slot filling.
# ---------------------------------------------------------------------------


@dataclass
class Template:
    name: str
    equation: str
    text: list
    pos: list
    dep_edges: list
    constituency: str
    slots: dict = field(default_factory=dict)  # slot -> sampler(rng)

    def instantiate(self, rng, idx):
        values = {k: sampler(rng) for k, sampler in self.slots.items()}
        text = [values.get(t[1:-1], t) if t.startswith("{") else t for t in self.text]
        eq_str = self.equation.format(**values)
        const = self.constituency
        for k, v in values.items():
            const = const.replace("{%s}" % k, v)
        return MWPInstance(
            id=f"{self.name}-{idx:05d}",
            equation=tokenize_equation(eq_str),
            text=text,
            dep_edges=[list(e) for e in self.dep_edges],
            constituency=const,
            pos_tags=list(self.pos),
        ).validate()


def _int(lo, hi):
    return lambda rng: str(rng.randint(lo, hi))


def _build_templates():
    templates = []
    templates.append(Template(
        name="t0",
        equation="equ : x + y = {s} equ : x - y = {d}",
        text="the sum of two numbers is {s} . their difference is {d} . find both numbers .".split(),
        pos=["DT", "NN", "IN", "CD", "NNS", "VBZ", "CD", ".", "PRP$", "NN",
             "VBZ", "CD", ".", "VB", "DT", "NNS", "."],
        dep_edges=[(-1, 5, "root"), (5, 1, "nsubj"), (1, 0, "det"), (1, 2, "prep"),
                   (2, 4, "pobj"), (4, 3, "num"), (5, 6, "attr"), (5, 7, "punct"),
                   (5, 10, "conj"), (10, 9, "nsubj"), (9, 8, "poss"), (10, 11, "attr"),
                   (10, 12, "punct"), (5, 13, "conj"), (13, 15, "dobj"),
                   (15, 14, "det"), (13, 16, "punct")],
        constituency=("(S (NP (DT the) (NN sum) (PP (IN of) (NP (CD two) (NNS numbers))))"
                      " (VP (VBZ is) (CD {s})) (. .)"
                      " (S (NP (PRP$ their) (NN difference)) (VP (VBZ is) (CD {d})) (. .))"
                      " (VP (VB find) (NP (DT both) (NNS numbers)) (. .)))"),
        slots={"s": _int(20, 99), "d": _int(2, 18)},
    ))
    templates.append(Template(
        name="t1",
        equation="equ : x = {a} + {b}",
        text="john has {a} apples and mary has {b} oranges . how many fruits do they have altogether ?".split(),
        pos=["NNP", "VBZ", "CD", "NNS", "CC", "NNP", "VBZ", "CD", "NNS", ".",
             "WRB", "JJ", "NNS", "VBP", "PRP", "VB", "RB", "."],
        dep_edges=[(-1, 1, "root"), (1, 0, "nsubj"), (1, 3, "dobj"), (3, 2, "num"),
                   (1, 4, "cc"), (1, 6, "conj"), (6, 5, "nsubj"), (6, 8, "dobj"),
                   (8, 7, "num"), (1, 9, "punct"), (1, 15, "conj"), (15, 13, "aux"),
                   (15, 14, "nsubj"), (15, 12, "dobj"), (12, 11, "amod"),
                   (11, 10, "advmod"), (15, 16, "advmod"), (15, 17, "punct")],
        constituency=("(S (S (NP (NNP john)) (VP (VBZ has) (NP (CD {a}) (NNS apples))))"
                      " (CC and)"
                      " (S (NP (NNP mary)) (VP (VBZ has) (NP (CD {b}) (NNS oranges)))) (. .)"
                      " (SBARQ (WHNP (WRB how) (JJ many) (NNS fruits))"
                      " (SQ (VBP do) (NP (PRP they)) (VP (VB have) (RB altogether))) (. ?)))"),
        slots={"a": _int(2, 60), "b": _int(2, 60)},
    ))
    templates.append(Template(
        name="t2",
        equation="equ : x = {v} * {t}",
        text="a car travels {v} miles per hour for {t} hours . how far does the car go ?".split(),
        pos=["DT", "NN", "VBZ", "CD", "NNS", "IN", "NN", "IN", "CD", "NNS", ".",
             "WRB", "RB", "VBZ", "DT", "NN", "VB", "."],
        dep_edges=[(-1, 2, "root"), (2, 1, "nsubj"), (1, 0, "det"), (2, 4, "dobj"),
                   (4, 3, "num"), (4, 5, "prep"), (5, 6, "pobj"), (2, 7, "prep"),
                   (7, 9, "pobj"), (9, 8, "num"), (2, 10, "punct"), (2, 16, "conj"),
                   (16, 13, "aux"), (16, 15, "nsubj"), (15, 14, "det"),
                   (16, 12, "advmod"), (12, 11, "advmod"), (16, 17, "punct")],
        constituency=("(S (NP (DT a) (NN car))"
                      " (VP (VBZ travels) (NP (CD {v}) (NNS miles) (PP (IN per) (NN hour)))"
                      " (PP (IN for) (NP (CD {t}) (NNS hours)))) (. .)"
                      " (SBARQ (WHADVP (WRB how) (RB far))"
                      " (SQ (VBZ does) (NP (DT the) (NN car)) (VB go)) (. ?)))"),
        slots={"v": _int(20, 90), "t": _int(2, 12)},
    ))
    templates.append(Template(
        name="t3",
        equation="equ : x = {n} * {p} + {q}",
        text="a pen costs {p} dollars and a book costs {q} dollars . what is the cost of {n} pens and one book ?".split(),
        pos=["DT", "NN", "VBZ", "CD", "NNS", "CC", "DT", "NN", "VBZ", "CD", "NNS",
             ".", "WP", "VBZ", "DT", "NN", "IN", "CD", "NNS", "CC", "CD", "NN", "."],
        dep_edges=[(-1, 2, "root"), (2, 1, "nsubj"), (1, 0, "det"), (2, 4, "dobj"),
                   (4, 3, "num"), (2, 5, "cc"), (2, 8, "conj"), (8, 7, "nsubj"),
                   (7, 6, "det"), (8, 10, "dobj"), (10, 9, "num"), (2, 11, "punct"),
                   (2, 13, "conj"), (13, 12, "attr"), (13, 15, "nsubj"),
                   (15, 14, "det"), (15, 16, "prep"), (16, 18, "pobj"),
                   (18, 17, "num"), (18, 19, "cc"), (18, 21, "conj"),
                   (21, 20, "num"), (13, 22, "punct")],
        constituency=("(S (S (NP (DT a) (NN pen)) (VP (VBZ costs) (NP (CD {p}) (NNS dollars))))"
                      " (CC and)"
                      " (S (NP (DT a) (NN book)) (VP (VBZ costs) (NP (CD {q}) (NNS dollars)))) (. .)"
                      " (SBARQ (WHNP (WP what))"
                      " (SQ (VBZ is) (NP (NP (DT the) (NN cost))"
                      " (PP (IN of) (NP (NP (CD {n}) (NNS pens)) (CC and) (NP (CD one) (NN book)))))) (. ?)))"),
        slots={"p": _int(2, 15), "q": _int(5, 40), "n": _int(2, 12)},
    ))
    templates.append(Template(
        name="t4",
        equation="equ : x + y = {s} equ : x / y = {a} / {b}",
        text="the ratio of boys to girls in a class is {a} : {b} . there are {s} students in total . how many boys are there ?".split(),
        pos=["DT", "NN", "IN", "NNS", "TO", "NNS", "IN", "DT", "NN", "VBZ", "CD",
             ":", "CD", ".", "EX", "VBP", "CD", "NNS", "IN", "NN", ".", "WRB",
             "JJ", "NNS", "VBP", "EX", "."],
        dep_edges=[(-1, 9, "root"), (9, 1, "nsubj"), (1, 0, "det"), (1, 2, "prep"),
                   (2, 3, "pobj"), (3, 4, "prep"), (4, 5, "pobj"), (1, 6, "prep"),
                   (6, 8, "pobj"), (8, 7, "det"), (9, 10, "attr"), (10, 11, "cc"),
                   (10, 12, "conj"), (9, 13, "punct"), (9, 15, "conj"),
                   (15, 14, "expl"), (15, 17, "attr"), (17, 16, "num"),
                   (15, 18, "prep"), (18, 19, "pobj"), (15, 20, "punct"),
                   (15, 24, "conj"), (24, 23, "nsubj"), (23, 22, "amod"),
                   (22, 21, "advmod"), (24, 25, "expl"), (24, 26, "punct")],
        constituency=("(S (NP (NP (DT the) (NN ratio))"
                      " (PP (IN of) (NP (NNS boys) (PP (TO to) (NNS girls))))"
                      " (PP (IN in) (NP (DT a) (NN class))))"
                      " (VP (VBZ is) (NP (CD {a}) (: :) (CD {b}))) (. .)"
                      " (S (EX there) (VP (VBP are) (NP (CD {s}) (NNS students))"
                      " (PP (IN in) (NN total))) (. .))"
                      " (SBARQ (WHNP (WRB how) (JJ many) (NNS boys)) (SQ (VBP are) (EX there)) (. ?)))"),
        slots={"a": _int(2, 9), "b": _int(2, 9), "s": _int(20, 99)},
    ))
    templates.append(Template(
        name="t5",
        equation="equ : {a} / {b} * x + {g} = {c} / {e} * x",
        text="a tank is {a} / {b} full . after adding {g} gallons it is {c} / {e} full . how many gallons can the tank hold ?".split(),
        pos=["DT", "NN", "VBZ", "CD", "SYM", "CD", "JJ", ".", "IN", "VBG", "CD",
             "NNS", "PRP", "VBZ", "CD", "SYM", "CD", "JJ", ".", "WRB", "JJ",
             "NNS", "MD", "DT", "NN", "VB", "."],
        dep_edges=[(-1, 2, "root"), (2, 1, "nsubj"), (1, 0, "det"), (2, 6, "acomp"),
                   (6, 3, "num"), (6, 4, "punct"), (6, 5, "num"), (2, 7, "punct"),
                   (2, 13, "conj"), (13, 12, "nsubj"), (13, 17, "acomp"),
                   (17, 14, "num"), (17, 15, "punct"), (17, 16, "num"),
                   (13, 9, "advcl"), (9, 8, "mark"), (9, 11, "dobj"),
                   (11, 10, "num"), (13, 18, "punct"), (2, 25, "conj"),
                   (25, 22, "aux"), (25, 24, "nsubj"), (24, 23, "det"),
                   (25, 21, "dobj"), (21, 20, "amod"), (20, 19, "advmod"),
                   (25, 26, "punct")],
        constituency=("(S (NP (DT a) (NN tank))"
                      " (VP (VBZ is) (ADJP (CD {a}) (SYM /) (CD {b}) (JJ full))) (. .)"
                      " (S (PP (IN after) (S (VBG adding) (NP (CD {g}) (NNS gallons))))"
                      " (NP (PRP it)) (VP (VBZ is) (ADJP (CD {c}) (SYM /) (CD {e}) (JJ full))) (. .))"
                      " (SBARQ (WHNP (WRB how) (JJ many) (NNS gallons))"
                      " (SQ (MD can) (NP (DT the) (NN tank)) (VB hold)) (. ?)))"),
        slots={"a": _int(1, 4), "b": _int(5, 9), "g": _int(2, 40),
               "c": _int(1, 4), "e": _int(5, 9)},
    ))
    templates.append(Template(
        name="t6",
        equation="equ : ( {u} + {w} ) * x = {m}",
        text="two trains leave a station in opposite directions at {u} mph and {w} mph . in how many hours are they {m} miles apart ?".split(),
        pos=["CD", "NNS", "VBP", "DT", "NN", "IN", "JJ", "NNS", "IN", "CD", "NN",
             "CC", "CD", "NN", ".", "IN", "WRB", "JJ", "NNS", "VBP", "PRP",
             "CD", "NNS", "RB", "."],
        dep_edges=[(-1, 2, "root"), (2, 1, "nsubj"), (1, 0, "num"), (2, 4, "dobj"),
                   (4, 3, "det"), (2, 5, "prep"), (5, 7, "pobj"), (7, 6, "amod"),
                   (2, 8, "prep"), (8, 10, "pobj"), (10, 9, "num"), (10, 11, "cc"),
                   (10, 13, "conj"), (13, 12, "num"), (2, 14, "punct"),
                   (2, 19, "conj"), (19, 15, "prep"), (15, 18, "pobj"),
                   (18, 17, "amod"), (17, 16, "advmod"), (19, 20, "nsubj"),
                   (19, 22, "attr"), (22, 21, "num"), (22, 23, "advmod"),
                   (19, 24, "punct")],
        constituency=("(S (NP (CD two) (NNS trains))"
                      " (VP (VBP leave) (NP (DT a) (NN station))"
                      " (PP (IN in) (NP (JJ opposite) (NNS directions)))"
                      " (PP (IN at) (NP (NP (CD {u}) (NN mph)) (CC and) (NP (CD {w}) (NN mph))))) (. .)"
                      " (SBARQ (PP (IN in) (WHNP (WRB how) (JJ many) (NNS hours)))"
                      " (SQ (VBP are) (NP (PRP they)) (ADJP (CD {m}) (NNS miles) (RB apart))) (. ?)))"),
        slots={"u": _int(30, 80), "w": _int(30, 80), "m": _int(100, 600)},
    ))
    templates.append(Template(
        name="t7",
        equation="equ : x = {r} * y equ : x + y = {s}",
        text="a teacher is {r} times as old as her student . the sum of their ages is {s} . how old is the teacher ?".split(),
        pos=["DT", "NN", "VBZ", "CD", "NNS", "RB", "JJ", "IN", "PRP$", "NN", ".",
             "DT", "NN", "IN", "PRP$", "NNS", "VBZ", "CD", ".", "WRB", "JJ",
             "VBZ", "DT", "NN", "."],
        dep_edges=[(-1, 2, "root"), (2, 1, "nsubj"), (1, 0, "det"), (2, 6, "acomp"),
                   (6, 4, "npadvmod"), (4, 3, "num"), (6, 5, "advmod"),
                   (6, 7, "prep"), (7, 9, "pobj"), (9, 8, "poss"), (2, 10, "punct"),
                   (2, 16, "conj"), (16, 12, "nsubj"), (12, 11, "det"),
                   (12, 13, "prep"), (13, 15, "pobj"), (15, 14, "poss"),
                   (16, 17, "attr"), (16, 18, "punct"), (2, 21, "conj"),
                   (21, 20, "advmod"), (20, 19, "advmod"), (21, 23, "nsubj"),
                   (23, 22, "det"), (21, 24, "punct")],
        constituency=("(S (NP (DT a) (NN teacher))"
                      " (VP (VBZ is) (ADJP (NP (CD {r}) (NNS times)) (RB as) (JJ old)"
                      " (PP (IN as) (NP (PRP$ her) (NN student))))) (. .)"
                      " (S (NP (NP (DT the) (NN sum)) (PP (IN of) (NP (PRP$ their) (NNS ages))))"
                      " (VP (VBZ is) (CD {s})) (. .))"
                      " (SBARQ (WHADVP (WRB how) (JJ old)) (SQ (VBZ is) (NP (DT the) (NN teacher))) (. ?)))"),
        slots={"r": _int(2, 6), "s": _int(20, 80)},
    ))
    return templates


TEMPLATES = _build_templates()


def generate_synthetic_corpus(n_examples=2000, n_templates=8, seed=0):
    """Generate a deterministic templated corpus with gold parse annotations."""
    if n_examples <= 0:
        raise ConfigError(f"n_examples must be positive, got {n_examples}")
    if not 2 <= n_templates <= len(TEMPLATES):
        raise ConfigError(f"n_templates must be in [2, {len(TEMPLATES)}]")
    rng = random.Random(seed)
    pool = TEMPLATES[:n_templates]
    return [rng.choice(pool).instantiate(rng, i) for i in range(n_examples)]


# ---------------------------------------------------------------------------
# JSONL round trip.
# ---------------------------------------------------------------------------

_REQUIRED_KEYS = ("id", "equation", "text", "dep_edges", "constituency", "pos")


def save_corpus(instances, path):
    with open(path, "w") as fh:
        for inst in instances:
            fh.write(json.dumps({
                "id": inst.id,
                "equation": " ".join(equation_surfaces(inst.equation)),
                "text": inst.text,
                "dep_edges": [list(e) for e in inst.dep_edges],
                "constituency": inst.constituency,
                "pos": inst.pos_tags,
            }) + "\n")


def load_corpus(path):
    instances = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusParseError(str(exc), line=lineno) from exc
            missing = [k for k in _REQUIRED_KEYS if k not in rec]
            if missing:
                raise CorpusParseError(f"missing keys {missing}", line=lineno)
            inst = MWPInstance(
                id=rec["id"],
                equation=tokenize_equation(rec["equation"]),
                text=list(rec["text"]),
                dep_edges=[(int(h), int(d), str(r)) for h, d, r in rec["dep_edges"]],
                constituency=rec["constituency"],
                pos_tags=list(rec["pos"]),
            ).validate()
            instances.append(inst)
    return instances
