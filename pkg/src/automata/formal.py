"""
형식 언어 오라클 (L1 / L2 / L3)

- L1: a 와 b 를 각각 하나 이상 포함하는 단어 (유한 오토마타)
- L2: 괄호 Dyck 언어 (1-스택 PDA)
- L3: a^n b^n c^n, n > 0 (2-스택 PDA / TM)
- 차분 테스트용 단어 열거

화학 시뮬레이션 판정과 비교할 정확한 기준 판정기.
한국어 주석 포함.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import product
from typing import Any, Dict, List, Optional, Sequence, Tuple

from src.engine.errors import WordError


class Symbol(Enum):
    """입력 기호. END(#)는 스케줄이 처리하며 단어에 저장하지 않는다."""
    A = "a"
    B = "b"
    C = "c"
    OPEN = "("
    CLOSE = ")"
    END = "#"


class Language(Enum):
    """대상 언어"""
    L1 = "L1"
    L2 = "L2"
    L3 = "L3"

    @property
    def alphabet(self) -> Tuple[Symbol, ...]:
        return _ALPHABETS[self]


_ALPHABETS: Dict[Language, Tuple[Symbol, ...]] = {
    Language.L1: (Symbol.A, Symbol.B),
    Language.L2: (Symbol.OPEN, Symbol.CLOSE),
    Language.L3: (Symbol.A, Symbol.B, Symbol.C),
}


class Outcome(Enum):
    ACCEPT = "Accept"
    REJECT = "Reject"


class RejectKind(Enum):
    """추상 기계의 reject 상태 종류"""
    BAD_ORDER = "BadOrder"
    EXCESS_A = "ExcessA"
    EXCESS_B = "ExcessB"
    EXCESS_C = "ExcessC"
    POP_EMPTY_STACK = "PopEmptyStack"
    NON_EMPTY_STACK = "NonEmptyStack"
    NO_REACTION = "NoReaction"


# 언어별로 허용되는 reject 종류
VALID_REJECT_KINDS: Dict[Language, Tuple[RejectKind, ...]] = {
    Language.L1: (RejectKind.NO_REACTION,),
    Language.L2: (RejectKind.POP_EMPTY_STACK, RejectKind.NON_EMPTY_STACK),
    Language.L3: (
        RejectKind.BAD_ORDER,
        RejectKind.EXCESS_A,
        RejectKind.EXCESS_B,
        RejectKind.EXCESS_C,
    ),
}


@dataclass(frozen=True)
class Verdict:
    """판정 결과. reject_kind 는 outcome 이 REJECT 일 때만 존재한다."""

    outcome: Outcome
    reject_kind: Optional[RejectKind] = None

    def __post_init__(self) -> None:
        if (self.outcome is Outcome.REJECT) != (self.reject_kind is not None):
            raise ValueError(
                f"판정 불일치: outcome={self.outcome.value}, reject_kind={self.reject_kind}"
            )

    @classmethod
    def accept(cls) -> "Verdict":
        return cls(Outcome.ACCEPT)

    @classmethod
    def reject(cls, kind: RejectKind) -> "Verdict":
        return cls(Outcome.REJECT, kind)

    @property
    def accepted(self) -> bool:
        return self.outcome is Outcome.ACCEPT

    def label(self) -> str:
        """CSV 용 짧은 표기: Accept 또는 Reject(Kind)"""
        if self.reject_kind is None:
            return self.outcome.value
        return f"{self.outcome.value}({self.reject_kind.value})"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "outcome": self.outcome.value,
            "reject_kind": self.reject_kind.value if self.reject_kind else None,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Verdict":
        kind = data.get("reject_kind")
        return cls(Outcome(data["outcome"]), RejectKind(kind) if kind else None)

    def valid_for(self, language: Language) -> bool:
        return self.reject_kind is None or self.reject_kind in VALID_REJECT_KINDS[language]


@dataclass(frozen=True)
class Word:
    """기호 시퀀스. 직렬화는 기호 문자를 이어 붙인 문자열."""

    symbols: Tuple[Symbol, ...] = ()

    @property
    def length(self) -> int:
        return len(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __str__(self) -> str:
        return "".join(s.value for s in self.symbols)

    def count(self, symbol: Symbol) -> int:
        return sum(1 for s in self.symbols if s is symbol)

    @classmethod
    def parse(cls, text: str, language: Optional[Language] = None) -> "Word":
        """문자열을 Word 로 변환한다.

        Args:
            text: 'aab', '(())' 같은 문자열 ('#' 은 허용하지 않음)
            language: 주어지면 해당 언어의 알파벳으로 검증

        Raises:
            WordError: 알파벳 밖 문자
        """
        allowed = language.alphabet if language else tuple(s for s in Symbol if s is not Symbol.END)
        lookup = {s.value: s for s in allowed}
        symbols = []
        for pos, ch in enumerate(text):
            if ch not in lookup:
                scope = language.value if language else "전체"
                raise WordError(f"알파벳({scope}) 밖의 기호 '{ch}' (위치 {pos})")
            symbols.append(lookup[ch])
        return cls(tuple(symbols))


def _check_alphabet(word: Word, language: Language) -> None:
    alphabet = language.alphabet
    for pos, s in enumerate(word.symbols):
        if s not in alphabet:
            raise WordError(f"{language.value} 알파벳 밖의 기호 '{s.value}' (위치 {pos})")


def recognize_l1(word: Word) -> Verdict:
    """a 와 b 가 모두 하나 이상 있으면 Accept, 아니면 Reject(NoReaction)"""
    _check_alphabet(word, Language.L1)
    if word.count(Symbol.A) > 0 and word.count(Symbol.B) > 0:
        return Verdict.accept()
    return Verdict.reject(RejectKind.NO_REACTION)


def recognize_l2(word: Word) -> Verdict:
    """접두사 카운팅으로 Dyck 여부를 판정한다.

    - 어떤 접두사에서 닫는 괄호가 더 많아지면 PopEmptyStack
    - 끝에서 여는 괄호가 남으면 NonEmptyStack
    - 빈 단어는 수학적으로 Dyck 단어이므로 Accept
    """
    _check_alphabet(word, Language.L2)
    depth = 0
    for s in word.symbols:
        depth += 1 if s is Symbol.OPEN else -1
        if depth < 0:
            return Verdict.reject(RejectKind.POP_EMPTY_STACK)
    if depth > 0:
        return Verdict.reject(RejectKind.NON_EMPTY_STACK)
    return Verdict.accept()


def follows_abc_order(symbols: Sequence[Symbol]) -> bool:
    """a*b*c* 순서 규칙을 지키는지 확인"""
    rank = {Symbol.A: 0, Symbol.B: 1, Symbol.C: 2}
    phase = 0
    for s in symbols:
        r = rank[s]
        if r < phase:
            return False
        phase = r
    return True


def recognize_l3(word: Word) -> Verdict:
    """a^n b^n c^n (n > 0) 판정. 2-스택 PDA 를 그대로 모사한다.

    - 빈 단어 또는 a*b*c* 순서 위반: BadOrder
    - 순서가 맞으면 스택 시뮬레이션에서 처음 위반된 제약으로 분류
        a: 스택1 push
        b: 스택1 pop (비어 있으면 ExcessB) 후 스택2 push
        c: 스택2 pop (비어 있으면 ExcessC)
        종료 시 스택1 잔여 → ExcessA, 스택2 잔여 → ExcessB
    """
    _check_alphabet(word, Language.L3)
    if word.length == 0 or not follows_abc_order(word.symbols):
        return Verdict.reject(RejectKind.BAD_ORDER)

    stack_a = 0
    stack_b = 0
    for s in word.symbols:
        if s is Symbol.A:
            stack_a += 1
        elif s is Symbol.B:
            if stack_a == 0:
                return Verdict.reject(RejectKind.EXCESS_B)
            stack_a -= 1
            stack_b += 1
        else:
            if stack_b == 0:
                return Verdict.reject(RejectKind.EXCESS_C)
            stack_b -= 1

    if stack_a > 0:
        return Verdict.reject(RejectKind.EXCESS_A)
    if stack_b > 0:
        return Verdict.reject(RejectKind.EXCESS_B)
    return Verdict.accept()


_RECOGNIZERS = {
    Language.L1: recognize_l1,
    Language.L2: recognize_l2,
    Language.L3: recognize_l3,
}


def recognize(language: Language, word: Word) -> Verdict:
    return _RECOGNIZERS[language](word)


def enumerate_words(
    alphabet: Sequence[Symbol], max_len: int, include_empty: bool = False
) -> List[Word]:
    """길이 1..max_len 의 모든 단어를 길이순, 같은 길이에서는 사전순으로 반환한다.

    사전순은 alphabet 인자에 주어진 기호 순서를 따른다.
    """
    if max_len < 0:
        raise ValueError(f"max_len 은 0 이상이어야 합니다: {max_len}")
    if not alphabet:
        raise ValueError("알파벳이 비어 있습니다")

    words: List[Word] = [Word(())] if include_empty else []
    for n in range(1, max_len + 1):
        words.extend(Word(tuple(combo)) for combo in product(alphabet, repeat=n))
    return words


def expected_word_count(alphabet_size: int, max_len: int) -> int:
    """등비합 |S|^1 + ... + |S|^max_len"""
    return sum(alphabet_size ** k for k in range(1, max_len + 1))


def curated_l3_words(max_n: int = 4, max_violation_len: int = 4) -> List[Word]:
    """L3 화학 차분 테스트용 큐레이션 단어 집합.

    - a^n b^n c^n (n = 1..max_n)
    - 길이 max_violation_len 이하의 모든 순서 위반 단어
    - n = 2, 3 에서 한 블록을 ±1, ±2 만큼 바꾼 단어 (블록 크기 0 허용)
    """
    seen = set()
    out: List[Word] = []

    def add(word: Word) -> None:
        key = str(word)
        if key not in seen:
            seen.add(key)
            out.append(word)

    for n in range(1, max_n + 1):
        add(abc_word(n, n, n))

    for word in enumerate_words(Language.L3.alphabet, max_violation_len):
        if not follows_abc_order(word.symbols):
            add(word)

    for n in (2, 3):
        for block in range(3):
            for delta in (-2, -1, 1, 2):
                counts = [n, n, n]
                counts[block] += delta
                if sum(counts) > 0:
                    add(abc_word(*counts))
    return out


def abc_word(n_a: int, n_b: int, n_c: int) -> Word:
    return Word((Symbol.A,) * n_a + (Symbol.B,) * n_b + (Symbol.C,) * n_c)
