"""
Token Module for the election file format

This module defines the token types and token class used by the lexer
to represent the pieces of an election document.
"""

from enum import Enum
from typing import Any


class TokenType(Enum):
    # Special Tokens
    EOF = "EOF"
    ILLEGAL = "ILLEGAL"
    NEWLINE = "NEWLINE"

    # Data Types
    IDENT = "IDENT"
    INT = "INT"
    STRING = "STRING"

    # Symbols
    COLON = "COLON"
    COMMA = "COMMA"
    GT = '>'

    # Header keywords
    NAME = "NAME"
    VACANCIES = "VACANCIES"
    CANDIDATES = "CANDIDATES"


class Token:
    """
    Represents a token in an election document.

    Attributes:
        type: The type of token (TokenType enum)
        literal: The actual value/text of the token
        line_no: Line number where the token appears
        position: Column in the line, starting at 1
    """
    def __init__(self, type: TokenType, literal: Any, line_no: int, position: int) -> None:
        self.type = type
        self.literal = literal
        self.line_no = line_no
        self.position = position

    def __str__(self) -> str:
        return f"Token[{self.type} : {self.literal} : Line {self.line_no} : Position {self.position}]"

    def __repr__(self) -> str:
        return str(self)


KEYWORDS: dict[str, TokenType] = {
    "name": TokenType.NAME,
    "vacancies": TokenType.VACANCIES,
    "candidates": TokenType.CANDIDATES,
}

# Tokens that can stand for a candidate name
NAME_TOKENS = (TokenType.IDENT, TokenType.STRING, TokenType.NAME,
               TokenType.VACANCIES, TokenType.CANDIDATES)


def lookup_ident(ident: str) -> TokenType:
    tt: TokenType | None = KEYWORDS.get(ident.lower())
    if tt is not None:
        return tt
    return TokenType.IDENT
