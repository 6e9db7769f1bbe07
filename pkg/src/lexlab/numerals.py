"""Chinese and Arabic numeral handling for statute article designations.

Statutes and generated responses cite articles as 第一千零四十七条 (Chinese
numerals), 第1047条 (Arabic), "Article 1,047" (English with thousands
separators) or a bare integer. Everything here is deterministic and
aims at the 1..9999 range that article numbering actually uses.
"""

import re

from .errors import ParseError

_DIGITS = {
    "零": 0, "〇": 0,
    "一": 1, "二": 2, "两": 2, "三": 3, "四": 4,
    "五": 5, "六": 6, "七": 7, "八": 8, "九": 9,
}
_UNITS = {"十": 10, "百": 100, "千": 1000}

_DIGIT_CHARS = "".join(_DIGITS)
_UNIT_CHARS = "".join(_UNITS)
_CN_NUMERAL_RE = re.compile(f"[{_DIGIT_CHARS}{_UNIT_CHARS}]+")

_ARTICLE_RE = re.compile(
    r"^\s*(?:第\s*)?(?P<num>[0-9,，]+|[" + _DIGIT_CHARS + _UNIT_CHARS + r"]+)\s*(?:条)?"
    r"(?:\s*第\s*(?P<para>[0-9]+|[" + _DIGIT_CHARS + _UNIT_CHARS + r"]+)\s*款)?\s*$"
)
_ENGLISH_ARTICLE_RE = re.compile(
    r"^\s*[Aa]rticle\s+(?P<num>[0-9][0-9,]*)"
    r"(?:\s*,?\s*[Pp]aragraph\s+(?P<para>[0-9]+))?\s*$"
)

_RENDER_DIGITS = "零一二三四五六七八九"


def chinese_numeral_to_int(text: str) -> int:
    """Decode a Chinese numeral like 一千零四十七 to 1047.

    Handles 十/百/千 units, interior 零, the bare-十 idiom (十七 = 17) and
    两 as an alternate two. Raises ParseError on empty input or any
    character outside the numeral alphabet.
    """
    if not text:
        raise ParseError("empty Chinese numeral")
    total = 0
    pending = 0
    seen_unit_value = None
    for ch in text:
        if ch in _DIGITS:
            if _DIGITS[ch] == 0:
                pending = 0
                continue
            if pending:
                raise ParseError(f"malformed numeral {text!r}: consecutive digits")
            pending = _DIGITS[ch]
        elif ch in _UNITS:
            unit = _UNITS[ch]
            if seen_unit_value is not None and unit >= seen_unit_value:
                raise ParseError(f"malformed numeral {text!r}: unit order")
            seen_unit_value = unit
            total += (pending or 1) * unit
            pending = 0
        else:
            raise ParseError(f"unrecognized numeral character {ch!r} in {text!r}")
    return total + pending


def int_to_chinese_numeral(n: int) -> str:
    """Render a positive integer below 10000 as a Chinese numeral.

    Follows the statute-numbering convention: one 零 per interior zero
    gap (1047 → 一千零四十七) and explicit unit digits (110 → 一百一十).
    """
    if not 1 <= n <= 9999:
        raise ParseError(f"numeral out of supported range: {n}")
    parts: list[str] = []
    need_zero = False
    for unit_value, unit_char in ((1000, "千"), (100, "百"), (10, "十")):
        d, n = divmod(n, unit_value)
        if d:
            if need_zero:
                parts.append("零")
                need_zero = False
            if d == 1 and unit_char == "十" and not parts:
                parts.append(unit_char)  # leading ten is bare: 十七, never 一十七
            else:
                parts.append(_RENDER_DIGITS[d] + unit_char)
        elif parts:
            need_zero = True
    if n:
        if need_zero:
            parts.append("零")
        parts.append(_RENDER_DIGITS[n])
    return "".join(parts)


def _decode_number(token: str) -> int:
    token = token.replace(",", "").replace("，", "")
    if token.isdigit():
        return int(token)
    return chinese_numeral_to_int(token)


def parse_article_designation(designation: str) -> tuple[int, int | None]:
    """Parse an article designation to (article_no, paragraph_no).

    Accepts 第一千零四十七条, 第1047条第2款, "Article 1,047", "Article 32,
    paragraph 1" and bare integers. paragraph_no is None when no 款 /
    paragraph part is present.
    """
    if not isinstance(designation, str):
        raise ParseError(f"designation must be a string, got {type(designation).__name__}")
    m = _ARTICLE_RE.match(designation) or _ENGLISH_ARTICLE_RE.match(designation)
    if m is None:
        raise ParseError(f"unrecognized article designation {designation!r}")
    article_no = _decode_number(m.group("num"))
    if article_no < 1:
        raise ParseError(f"article number must be positive: {designation!r}")
    para = m.group("para")
    paragraph_no = _decode_number(para) if para else None
    if paragraph_no is not None and paragraph_no < 1:
        raise ParseError(f"paragraph number must be positive: {designation!r}")
    return article_no, paragraph_no


def parse_article_number(designation: str) -> int:
    """Parse an article designation, returning just the article number."""
    return parse_article_designation(designation)[0]
