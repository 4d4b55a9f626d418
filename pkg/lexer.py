from ballot_token import Token, TokenType, lookup_ident
from typing import Any


class Lexer:
    """
    Splits an election document into tokens. Line breaks are significant,
    so they come out as NEWLINE tokens; '#' starts a comment that runs to
    the end of the line.
    """

    def __init__(self, source: str) -> None:
        self.source = source

        self.position: int = -1
        self.read_position: int = 0
        self.line_no: int = 1
        self.line_start: int = 0

        self.current_char: str | None = None

        # Problems the lexer noticed; the parser reports them with its own
        self.errors: list[tuple[int, int, str]] = []

        self.__read_char()

    def __read_char(self) -> None:
        """ Reads the next char in the source document """
        if self.read_position >= len(self.source):
            self.current_char = None
        else:
            self.current_char = self.source[self.read_position]

        self.position = self.read_position
        self.read_position += 1

    def __skip_whitespace(self) -> None:
        """ Skips blanks; line breaks are tokens here """
        while self.current_char in [' ', '\t', '\r', '\ufeff']:
            self.__read_char()

    def __skip_comment(self) -> None:
        """ Skips a '#' comment up to, not including, the line break """
        while self.current_char is not None and self.current_char != '\n':
            self.__read_char()

    @property
    def column(self) -> int:
        return self.position - self.line_start + 1

    def __new_token(self, tt: TokenType, literal: Any, column: int | None = None) -> Token:
        """ Creates and returns a new token from specified values """
        return Token(type=tt, literal=literal, line_no=self.line_no,
                     position=self.column if column is None else column)

    def __is_digit(self, ch: str | None) -> bool:
        return ch is not None and '0' <= ch <= '9'

    def __is_name_char(self, ch: str | None) -> bool:
        return ch is not None and (ch.isalnum() or ch in "_-'.")

    def __read_number(self) -> Token:
        """ Reads a whole number; a trailing letter makes it an identifier instead """
        column = self.column
        start: int = self.position
        while self.__is_digit(self.current_char):
            self.__read_char()

        if self.__is_name_char(self.current_char):
            while self.__is_name_char(self.current_char):
                self.__read_char()
            return self.__new_token(TokenType.IDENT, self.source[start:self.position], column)

        return self.__new_token(TokenType.INT, int(self.source[start:self.position]), column)

    def __read_identifier(self) -> Token:
        column = self.column
        start = self.position
        while self.__is_name_char(self.current_char):
            self.__read_char()

        literal = self.source[start:self.position]
        return self.__new_token(lookup_ident(literal), literal, column)

    def __peek_char(self) -> str | None:
        if self.read_position >= len(self.source):
            return None
        return self.source[self.read_position]

    def __read_string(self) -> Token:
        """ Reads a quoted name; a backslash escapes a following quote or backslash """
        column = self.column
        chars: list[str] = []
        self.__read_char()
        while self.current_char not in ('"', '\n', None):
            if self.current_char == '\\' and self.__peek_char() in ('"', '\\'):
                self.__read_char()
            chars.append(self.current_char)
            self.__read_char()

        literal = "".join(chars)
        if self.current_char != '"':
            self.errors.append((self.line_no, column, "unterminated quoted name"))
            return self.__new_token(TokenType.ILLEGAL, literal, column)

        self.__read_char()
        return self.__new_token(TokenType.STRING, literal, column)

    def next_token(self) -> Token:
        """
            Main function for executing the Lexer
        """
        tok: Token = None

        self.__skip_whitespace()

        match self.current_char:
            case '#':
                self.__skip_comment()
                return self.next_token()
            case '\n':
                tok = self.__new_token(TokenType.NEWLINE, "\\n")
                self.__read_char()
                self.line_no += 1
                self.line_start = self.position
                return tok
            case ':':
                tok = self.__new_token(TokenType.COLON, self.current_char)
            case ',':
                tok = self.__new_token(TokenType.COMMA, self.current_char)
            case '>':
                tok = self.__new_token(TokenType.GT, self.current_char)
            case '"':
                return self.__read_string()
            case None:
                return self.__new_token(TokenType.EOF, "")
            case _:
                if self.__is_digit(self.current_char):
                    return self.__read_number()
                elif self.__is_name_char(self.current_char):
                    return self.__read_identifier()
                else:
                    tok = self.__new_token(TokenType.ILLEGAL, self.current_char)

        self.__read_char()
        return tok

    def tokenize(self) -> list[Token]:
        tokens: list[Token] = []
        while True:
            tok = self.next_token()
            tokens.append(tok)
            if tok.type == TokenType.EOF:
                return tokens
