"""Deterministic intent classification and slot clearing.

Replaces the statistical NLU layer with exact template alignment over the
same training-file dialect (``## intent:`` headers, ``- `` items,
``[value](slot)`` markers). Classification aligns the utterance against
every template; the score is the fraction of a template's fixed words that
match exactly, and slot spans capture the raw values.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Union

from jarvis_kg._speed import levenshtein
from jarvis_kg.errors import FormatError, NotANumber, SlotClearingFailed
from jarvis_kg.kg.graph import Graph
from jarvis_kg.kg.terms import AERO, Iri, Term, decimal, text

SCORE_THRESHOLD = 0.6
MAX_SLOT_SPAN = 3  # tokens; longest slot value in the training data is two

# --- slot registry -----------------------------------------------------------

@dataclass(frozen=True)
class SlotType:
    kind: str  # "number" | "enum" | "kg_label"
    members: tuple[str, ...] = ()
    class_iri: Optional[Iri] = None


REGISTRY: dict[str, SlotType] = {
    "engine_name": SlotType("kg_label", class_iri=AERO.Engine),
    "subsystem": SlotType("enum", ("fan", "LPC", "IPC", "HPC")),
    "characteristic": SlotType(
        "enum", ("efficiency", "speed", "pressure ratio", "mass flow")
    ),
    "num_value": SlotType("number"),
    "subsystem_state": SlotType("enum", ("choke", "stall")),
    "best_direction": SlotType("enum", ("highest", "lowest")),
    "hours": SlotType("number"),
    "fleet_name": SlotType("kg_label", class_iri=AERO.Fleet),
}

# canonical graph terms for the two enum slots that name graph entities
SUBSYSTEM_TERMS = {
    "fan": AERO.Fan,
    "LPC": AERO.LPC,
    "IPC": AERO.IPC,
    "HPC": AERO.HPC,
}
CHARACTERISTIC_TERMS = {
    "efficiency": AERO.Efficiency,
    "speed": AERO.Speed,
    "pressure ratio": AERO.PressureRatio,
    "mass flow": AERO.MassFlow,
}


# --- training file -----------------------------------------------------------

@dataclass(frozen=True)
class Fixed:
    word: str


@dataclass(frozen=True)
class Slot:
    name: str


TemplateToken = Union[Fixed, Slot]


@dataclass
class UtteranceTemplate:
    tokens: list[TemplateToken]
    examples: dict[str, str]  # slot name -> bracketed example value
    line: int

    @property
    def fixed_count(self) -> int:
        return sum(1 for t in self.tokens if isinstance(t, Fixed))

    @property
    def slot_names(self) -> list[str]:
        return [t.name for t in self.tokens if isinstance(t, Slot)]


@dataclass
class IntentSpec:
    name: str
    templates: list[UtteranceTemplate] = field(default_factory=list)


_PUNCT_SPLIT_RE = re.compile(r"([.?!,'])")
_MARKER_RE = re.compile(r"\[([^\]\[]+)\]\(([A-Za-z_][A-Za-z0-9_]*)\)")
_INTENT_HEADER_RE = re.compile(r"^##\s*intent:\s*([A-Za-z_][A-Za-z0-9_]*)\s*$")


def tokenize(utterance: str) -> list[str]:
    """Lowercase, split punctuation into its own tokens, drop possessive 's."""
    lowered = utterance.lower().replace("’", "'")
    spaced = _PUNCT_SPLIT_RE.sub(r" \1 ", lowered)
    tokens: list[str] = []
    pending_apostrophe = False
    for tok in spaced.split():
        if pending_apostrophe:
            pending_apostrophe = False
            if tok == "s":
                continue  # "'s" is a stop token
            tokens.append("'")
        if tok == "'":
            pending_apostrophe = True
            continue
        tokens.append(tok)
    if pending_apostrophe:
        tokens.append("'")
    return tokens


def _parse_template_line(body: str, line_no: int) -> UtteranceTemplate:
    tokens: list[TemplateToken] = []
    examples: dict[str, str] = {}
    pos = 0
    for m in _MARKER_RE.finditer(body):
        for word in tokenize(body[pos:m.start()]):
            tokens.append(Fixed(word))
        slot_name = m.group(2)
        if slot_name not in REGISTRY:
            raise FormatError(f"unregistered slot '{slot_name}'", line_no)
        tokens.append(Slot(slot_name))
        examples[slot_name] = m.group(1)
        pos = m.end()
    tail = body[pos:]
    if "[" in tail or "]" in tail:
        raise FormatError("malformed [value](slot) marker", line_no)
    for word in tokenize(tail):
        tokens.append(Fixed(word))
    if not any(isinstance(t, Fixed) for t in tokens):
        raise FormatError("template has no fixed words", line_no)
    return UtteranceTemplate(tokens, examples, line_no)


def parse_training_file(src: str) -> list[IntentSpec]:
    """Parse ``## intent:`` sections with ``- `` utterance templates."""
    specs: list[IntentSpec] = []
    seen: set[str] = set()
    current: Optional[IntentSpec] = None
    for line_no, raw_line in enumerate(src.splitlines(), 1):
        line = raw_line.strip()
        if not line:
            continue
        header = _INTENT_HEADER_RE.match(line)
        if header:
            if current is not None and not current.templates:
                raise FormatError(f"intent '{current.name}' has no templates", line_no)
            name = header.group(1)
            if name in seen:
                raise FormatError(f"duplicate intent '{name}'", line_no)
            seen.add(name)
            current = IntentSpec(name)
            specs.append(current)
        elif line.startswith("- "):
            if current is None:
                raise FormatError("template outside any intent section", line_no)
            current.templates.append(_parse_template_line(line[2:], line_no))
        else:
            raise FormatError(f"unrecognized line {line!r}", line_no)
    if current is not None and not current.templates:
        raise FormatError(f"intent '{current.name}' has no templates", len(src.splitlines()))
    return specs


# --- number words ------------------------------------------------------------

_UNITS = {
    "zero": 0, "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10, "eleven": 11,
    "twelve": 12, "thirteen": 13, "fourteen": 14, "fifteen": 15,
    "sixteen": 16, "seventeen": 17, "eighteen": 18, "nineteen": 19,
}
_TENS = {
    "twenty": 20, "thirty": 30, "forty": 40, "fifty": 50,
    "sixty": 60, "seventy": 70, "eighty": 80, "ninety": 90,
}
_ORDINAL_IRREGULAR = {
    "first": "one", "second": "two", "third": "three", "fifth": "five",
    "eighth": "eight", "ninth": "nine", "twelfth": "twelve",
}
_DIGITS_RE = re.compile(r"^\d+(\.\d+)?$")
_DIGIT_ORDINAL_RE = re.compile(r"^(\d+)(st|nd|rd|th)$")


def _ordinal_to_cardinal(token: str) -> str:
    if token in _ORDINAL_IRREGULAR:
        return _ORDINAL_IRREGULAR[token]
    if token.endswith("ieth"):
        return token[:-4] + "y"
    if token.endswith("th"):
        return token[:-2]
    return token


def clear_number(raw: str) -> float:
    """Parse digits, cardinal words up to 9999, or ordinals ("fourth" -> 4)."""
    s = raw.strip().lower()
    if _DIGITS_RE.match(s):
        return float(s)
    m = _DIGIT_ORDINAL_RE.match(s)
    if m:
        return float(m.group(1))
    tokens = []
    for part in s.replace("-", " ").split():
        if part == "and":
            continue
        tokens.append(_ordinal_to_cardinal(part))
    if not tokens:
        raise NotANumber(f"cannot parse {raw!r} as a number")
    total = 0
    current = 0
    for tok in tokens:
        if tok in _UNITS:
            current += _UNITS[tok]
        elif tok in _TENS:
            current += _TENS[tok]
        elif tok == "hundred":
            current = (current or 1) * 100
        elif tok == "thousand":
            total += (current or 1) * 1000
            current = 0
        else:
            raise NotANumber(f"cannot parse {raw!r} as a number")
    value = total + current
    if value > 9999:
        raise NotANumber(f"{raw!r} exceeds the supported word-number range")
    return float(value)


def clear_enum(raw: str, allowed: tuple[str, ...]) -> str:
    """Case-insensitive edit-distance nearest member; ties go lexicographic."""
    if not allowed:
        raise ValueError("allowed set must be non-empty")
    raw_lower = raw.strip().lower()
    return min(allowed, key=lambda m: (levenshtein(raw_lower, m.lower()), m))


# --- classification ----------------------------------------------------------

@dataclass
class ParsedCommand:
    intent: str
    raw_slots: dict[str, str]
    score: float


def _span_implausibility(slot: SlotType, span: str) -> float:
    """Lower is better; used only to break ties between equal-score alignments."""
    if slot.kind == "number":
        try:
            clear_number(span)
            # tiny reward per consumed token so "one hundred" beats "one"
            return -1e-6 * (span.count(" ") + 1)
        except NotANumber:
            return 1.0
    if slot.kind == "enum":
        return min(
            levenshtein(span, m.lower()) / max(len(span), len(m), 1)
            for m in slot.members
        )
    return 0.0  # kg_label: any text can be a label


def _align(template: UtteranceTemplate, utterance: list[str]):
    """Best alignment of template tokens onto the utterance.

    Fixed tokens either match one utterance token exactly or are skipped;
    extra utterance tokens may be skipped; each slot captures a contiguous
    span of 1..MAX_SLOT_SPAN tokens. Maximizes matched fixed tokens, then
    minimizes slot implausibility. Returns (matched, slots) or None.
    """
    tokens = template.tokens
    nt, nu = len(tokens), len(utterance)

    @lru_cache(maxsize=None)
    def best(i: int, j: int):
        # value: (matched, -implausibility, choice)
        if i == nt:
            return (0, 0.0, ("end",))
        tok = tokens[i]
        options = []
        if isinstance(tok, Fixed):
            if j < nu and tok.word == utterance[j]:
                sub = best(i + 1, j + 1)
                if sub is not None:
                    options.append((sub[0] + 1, sub[1], ("match",)))
            sub = best(i + 1, j)
            if sub is not None:
                options.append((sub[0], sub[1], ("skip_fixed",)))
            if j < nu:
                sub = best(i, j + 1)
                if sub is not None:
                    options.append((sub[0], sub[1], ("skip_utt",)))
        else:
            for span in range(1, MAX_SLOT_SPAN + 1):
                if j + span > nu:
                    break
                cost = _span_implausibility(
                    REGISTRY[tok.name], " ".join(utterance[j:j + span])
                )
                sub = best(i + 1, j + span)
                if sub is not None:
                    options.append((sub[0], sub[1] - cost, ("slot", span)))
            if j < nu:
                sub = best(i, j + 1)
                if sub is not None:
                    options.append((sub[0], sub[1], ("skip_utt",)))
        if not options:
            return None
        # stable: first option wins ties, fixing the preference order above
        winner = options[0]
        for opt in options[1:]:
            if (opt[0], opt[1]) > (winner[0], winner[1]):
                winner = opt
        return winner

    if best(0, 0) is None:
        return None
    # reconstruct slot spans by replaying the winning choices
    slots: dict[str, str] = {}
    i = j = 0
    while i < nt:
        state = best(i, j)
        if state is None:
            return None
        choice = state[2]
        if choice[0] == "match":
            i += 1
            j += 1
        elif choice[0] == "skip_fixed":
            i += 1
        elif choice[0] == "skip_utt":
            j += 1
        elif choice[0] == "slot":
            span = choice[1]
            slots[tokens[i].name] = " ".join(utterance[j:j + span])
            i += 1
            j += span
        else:
            break
    matched = best(0, 0)[0]
    if len(slots) != len(template.slot_names):
        return None  # a slot could not be given a non-empty span
    return matched, slots


def classify(
    utterance: str,
    specs: list[IntentSpec],
    threshold: float = SCORE_THRESHOLD,
) -> Optional[ParsedCommand]:
    """Best-matching intent for an utterance, or None below the threshold.

    Ties between templates: higher fixed-token count, then lexicographically
    smaller intent name, then earlier template in file order.
    """
    tokens = tokenize(utterance)[:60]
    token_set = set(tokens)
    best_key = None
    best_cmd = None
    file_index = 0
    for spec in specs:
        for template in spec.templates:
            file_index += 1
            total = template.fixed_count
            upper = sum(
                1 for t in template.tokens
                if isinstance(t, Fixed) and t.word in token_set
            )
            upper_score = upper / total
            if upper_score < threshold:
                continue
            if best_key is not None and upper_score < -best_key[0]:
                continue
            result = _align(template, tokens)
            if result is None:
                continue
            matched, slots = result
            score = matched / total
            if score < threshold:
                continue
            key = (-score, -total, spec.name, file_index)
            if best_key is None or key < best_key:
                best_key = key
                best_cmd = ParsedCommand(spec.name, slots, score)
    return best_cmd


# --- slot clearing -----------------------------------------------------------

@dataclass
class ClearedCommand:
    intent: str
    slots: dict[str, Term]


def _trim_decimal(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(value)


def clear_slots(cmd: ParsedCommand, graph: Graph) -> ClearedCommand:
    """Canonicalize raw slot captures against the registry and the graph."""
    cleared: dict[str, Term] = {}
    for name, raw in cmd.raw_slots.items():
        slot = REGISTRY[name]
        try:
            if slot.kind == "number":
                cleared[name] = decimal(clear_number(raw))
            elif slot.kind == "enum":
                member = clear_enum(raw, slot.members)
                if name == "subsystem":
                    cleared[name] = SUBSYSTEM_TERMS[member]
                elif name == "characteristic":
                    cleared[name] = CHARACTERISTIC_TERMS[member]
                else:
                    cleared[name] = text(member)
            else:  # kg_label
                probe = raw
                if name == "engine_name":
                    try:
                        probe = _trim_decimal(clear_number(raw))
                    except NotANumber:
                        pass
                resource, _label, _dist = graph.closest_label(slot.class_iri, probe)
                cleared[name] = resource
        except Exception as exc:
            raise SlotClearingFailed(name, exc) from exc
    return ClearedCommand(cmd.intent, cleared)
