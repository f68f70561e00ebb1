"""Word model: finite symbol sequences addressing cells K_w."""

from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

from .errors import DomainError


@dataclass(frozen=True)
class Word:
    """A word w = w_1 w_2 ... w_m over S = {1, ..., #S}.

    Symbols are 1-based as in the mathematical notation; the services convert
    to 0-based indices when they touch arrays.
    """

    symbols: Tuple[int, ...] = ()

    @classmethod
    def empty(cls) -> "Word":
        return cls(())

    @classmethod
    def of(cls, symbols: Iterable[int], num_symbols: Optional[int] = None) -> "Word":
        word = cls(tuple(int(s) for s in symbols))
        if num_symbols is not None:
            word.validate(num_symbols)
        return word

    @classmethod
    def parse(cls, text: str, num_symbols: Optional[int] = None) -> "Word":
        """Parse ``"1,2,3"``, ``"1.2.3"`` or a digit string like ``"123"``.

        An empty string or ``"-"`` denotes the empty word. Digit strings are
        read symbol by symbol only when every symbol is a single digit
        (``num_symbols <= 9``); for larger alphabets a string without
        separators is one symbol, so ``"12"`` is the word (12,).
        """
        text = text.strip()
        if text in ("", "-"):
            return cls.empty()
        try:
            if "," in text or "." in text:
                parts = text.replace(".", ",").split(",")
                symbols = tuple(int(p) for p in parts if p.strip())
            elif num_symbols is not None and num_symbols > 9:
                symbols = (int(text),)
            else:
                symbols = tuple(int(c) for c in text)
        except ValueError as e:
            raise DomainError(f"cannot parse word {text!r}") from e
        return cls.of(symbols, num_symbols)

    @classmethod
    def from_index(cls, index: int, length: int, num_symbols: int) -> "Word":
        """The word at position ``index`` in lexicographic order of S^length."""
        digits = []
        for _ in range(length):
            index, digit = divmod(index, num_symbols)
            digits.append(digit + 1)
        return cls(tuple(reversed(digits)))

    def validate(self, num_symbols: int) -> None:
        for s in self.symbols:
            if not 1 <= s <= num_symbols:
                raise DomainError(
                    f"symbol {s} out of range 1..{num_symbols} in word {self.label()}"
                )

    def index(self, num_symbols: int) -> int:
        """Inverse of ``from_index``."""
        value = 0
        for s in self.symbols:
            value = value * num_symbols + (s - 1)
        return value

    def append(self, symbol: int) -> "Word":
        return Word(self.symbols + (symbol,))

    def power(self, symbol: int, n: int) -> "Word":
        """w followed by n copies of ``symbol`` (the word w j^n)."""
        return Word(self.symbols + (symbol,) * n)

    def zero_based(self) -> Tuple[int, ...]:
        return tuple(s - 1 for s in self.symbols)

    def label(self, num_symbols: Optional[int] = None) -> str:
        """Digit string over an alphabet of at most 9 symbols, else dot-separated.

        Without ``num_symbols`` the symbols themselves decide. The result is
        read back by ``parse`` with the same ``num_symbols``.
        """
        compact = num_symbols <= 9 if num_symbols is not None else all(s < 10 for s in self.symbols)
        if compact:
            return "".join(str(s) for s in self.symbols)
        return ".".join(str(s) for s in self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return self.label() or "()"
