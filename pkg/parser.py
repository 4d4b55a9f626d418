"""
Election Parser Module

Turns an election document into a validated Election. Two encodings are
accepted: the line format below, and a JSON object with the same fields.

    # comments run to the end of the line
    name: Example
    vacancies: 2
    candidates: Ash, Birch, "Cedar Grove"
    10: Ash > Birch > Cedar Grove
    6: 1                       # preferences may also be candidate indices

Every problem found is collected with its line and column; parse_election
raises one ElectionParseError carrying all of them.
"""

import json
import re
from typing import Optional

from ballot_token import NAME_TOKENS, Token, TokenType
from error_handler import ElectionParseError, ErrorType, ReportedError
from lexer import Lexer
from model import Election, make_election, validate_election

_NEGATIVE_INT = re.compile(r"^-\d+$")


class Parser:
    def __init__(self, lexer: Lexer) -> None:
        self.lexer: Lexer = lexer

        # Every error caught during parsing, in document order
        self.errors: list[ReportedError] = []

        self.current_token: Token = None
        self.peek_token: Token = None

        self.name: Optional[str] = None
        self.vacancies: Optional[int] = None
        self.vacancies_line: int = 0
        self.candidates: Optional[list[str]] = None
        self.ballots: list[tuple[list[int], int]] = []

        # Populate the current_token and peek_token
        self.__next_token()
        self.__next_token()

    # region Parser Helpers
    def __next_token(self) -> None:
        """ Advances the lexer to retrieve the next token """
        self.current_token = self.peek_token
        self.peek_token = self.lexer.next_token()

    def __current_token_is(self, tt: TokenType) -> bool:
        return self.current_token.type == tt

    def __peek_token_is(self, tt: TokenType) -> bool:
        """ Peeks one token ahead and checks the type """
        return self.peek_token.type == tt

    def __expect_peek(self, tt: TokenType) -> bool:
        if self.__peek_token_is(tt):
            self.__next_token()
            return True
        else:
            self.__peek_error(tt)
            return False

    def __at_line_end(self) -> bool:
        return self.current_token.type in (TokenType.NEWLINE, TokenType.EOF)

    def __error(self, message: str, token: Optional[Token] = None, error_type: ErrorType = ErrorType.SYNTAX,
                suggestion: Optional[str] = None) -> None:
        token = token or self.current_token
        self.errors.append(ReportedError(error_type, message, token.line_no, token.position,
                                         suggestion=suggestion))

    def __peek_error(self, tt: TokenType) -> None:
        self.__error(f"expected {tt.value}, got '{self.peek_token.literal}' instead", self.peek_token)

    def __skip_line(self) -> None:
        """ Error recovery: drop the rest of the current line """
        while not self.__at_line_end():
            self.__next_token()
    # endregion

    def parse_election(self) -> Optional[Election]:
        """ Main execution entry to the Parser """
        while not self.__current_token_is(TokenType.EOF):
            if not self.__current_token_is(TokenType.NEWLINE):
                self.__parse_line()
            self.__skip_line()
            self.__next_token()

        for line_no, column, message in self.lexer.errors:
            self.errors.append(ReportedError(ErrorType.SYNTAX, message, line_no, column))

        if self.vacancies is None:
            self.errors.append(ReportedError(ErrorType.SYNTAX, "missing 'vacancies:' line"))
        if self.candidates is None:
            self.errors.append(ReportedError(ErrorType.SYNTAX, "missing 'candidates:' line"))
        if self.errors:
            self.errors.sort(key=lambda e: (e.line_no, e.position))
            return None

        election = make_election(self.name or "election", self.candidates, self.vacancies, self.ballots)
        for violation in validate_election(election):
            line_no = self.vacancies_line if "vacancies" in violation else 0
            self.errors.append(ReportedError(ErrorType.ELECTION, violation, line_no))
        return None if self.errors else election

    def __parse_line(self) -> None:
        match self.current_token.type:
            case TokenType.NAME if self.__peek_token_is(TokenType.COLON):
                self.__parse_name()
            case TokenType.VACANCIES if self.__peek_token_is(TokenType.COLON):
                self.__parse_vacancies()
            case TokenType.CANDIDATES if self.__peek_token_is(TokenType.COLON):
                self.__parse_candidates()
            case TokenType.INT:
                self.__parse_ballot()
            case TokenType.IDENT if _NEGATIVE_INT.match(self.current_token.literal):
                self.__error("multiplicity must be positive", error_type=ErrorType.ELECTION)
            case TokenType.ILLEGAL:
                self.__error(f"unexpected character '{self.current_token.literal}'")
            case _:
                self.__error(f"expected a header or a ballot line, got '{self.current_token.literal}'",
                             suggestion="ballot lines look like '10: Ash > Birch'")

    def __parse_name(self) -> None:
        line_no = self.current_token.line_no
        self.__next_token()  # skip the keyword
        self.__next_token()  # skip the ':'
        if self.__current_token_is(TokenType.STRING) and self.peek_token.type in (TokenType.NEWLINE, TokenType.EOF):
            self.name = self.current_token.literal
            return
        # Unquoted names keep their spaces, so take the raw text of the line
        line = self.lexer.source.split("\n")[line_no - 1]
        text = line.split(":", 1)[1].split("#", 1)[0].strip()
        if not text:
            self.__error("election name is empty")
            return
        self.name = text

    def __parse_vacancies(self) -> None:
        if self.vacancies is not None:
            self.__error("'vacancies:' given more than once")
            return
        self.vacancies_line = self.current_token.line_no
        self.__next_token()
        if not self.__expect_peek(TokenType.INT):
            return
        self.vacancies = self.current_token.literal
        self.__next_token()
        if not self.__at_line_end():
            self.__error(f"unexpected '{self.current_token.literal}' after vacancies")

    def __parse_candidates(self) -> None:
        if self.candidates is not None:
            self.__error("'candidates:' given more than once")
            return
        if self.ballots:
            self.__error("'candidates:' must come before the first ballot line")
            return
        self.__next_token()
        self.__next_token()

        names: list[str] = []
        while True:
            if self.current_token.type not in NAME_TOKENS:
                self.__error(f"expected a candidate name, got '{self.current_token.literal}'")
                return
            name = str(self.current_token.literal)
            if name in names:
                self.__error(f"duplicate candidate name '{name}'", error_type=ErrorType.ELECTION)
            names.append(name)
            self.__next_token()
            if self.__at_line_end():
                break
            if not self.__current_token_is(TokenType.COMMA):
                self.__error(f"expected ',' between candidate names, got '{self.current_token.literal}'")
                return
            self.__next_token()
        self.candidates = names

    def __parse_ballot(self) -> None:
        multiplicity_token = self.current_token
        if self.candidates is None:
            self.__error("ballot line before the 'candidates:' line")
            return
        if not self.__expect_peek(TokenType.COLON):
            return
        self.__next_token()
        if self.__at_line_end():
            self.__error("empty preference list", multiplicity_token, ErrorType.ELECTION)
            return

        valid = True
        if multiplicity_token.literal <= 0:
            self.__error("multiplicity must be positive", multiplicity_token, ErrorType.ELECTION)
            valid = False

        preferences: list[int] = []
        while True:
            index = self.__parse_preference()
            if index is None:
                valid = False
            elif index in preferences:
                self.__error(f"duplicate candidate '{self.candidates[index]}' in ballot",
                             error_type=ErrorType.ELECTION)
                valid = False
            else:
                preferences.append(index)
            self.__next_token()
            if self.__at_line_end():
                break
            if not self.__current_token_is(TokenType.GT):
                self.__error(f"expected '>' between preferences, got '{self.current_token.literal}'")
                return
            self.__next_token()

        if valid:
            self.ballots.append((preferences, multiplicity_token.literal))

    def __parse_preference(self) -> Optional[int]:
        tok = self.current_token
        if tok.type == TokenType.INT:
            if 0 <= tok.literal < len(self.candidates):
                return tok.literal
            self.__error(f"unknown candidate index {tok.literal}", error_type=ErrorType.ELECTION)
            return None
        if tok.type in NAME_TOKENS:
            if tok.literal in self.candidates:
                return self.candidates.index(tok.literal)
            self.__error(f"unknown candidate '{tok.literal}'", error_type=ErrorType.ELECTION)
            return None
        self.__error(f"expected a candidate, got '{tok.literal}'")
        return None


def election_from_json(data: dict) -> Election:
    """ The JSON encoding: {"name", "vacancies", "candidates": [...], "ballots": [{"preferences", "count"}]} """
    errors: list[ReportedError] = []

    def fail(message: str) -> None:
        errors.append(ReportedError(ErrorType.ELECTION, message))

    if not isinstance(data, dict):
        raise ElectionParseError([ReportedError(ErrorType.SYNTAX, "election document must be a JSON object")])
    candidates = data.get("candidates")
    vacancies = data.get("vacancies")
    if not isinstance(candidates, list) or not all(isinstance(c, str) for c in candidates):
        raise ElectionParseError([ReportedError(ErrorType.SYNTAX, "'candidates' must be a list of names")])
    if not isinstance(vacancies, int) or isinstance(vacancies, bool):
        raise ElectionParseError([ReportedError(ErrorType.SYNTAX, "'vacancies' must be an integer")])

    ballots: list[tuple[list[int], int]] = []
    for number, entry in enumerate(data.get("ballots", [])):
        prefs = entry.get("preferences", []) if isinstance(entry, dict) else []
        count = entry.get("count", 1) if isinstance(entry, dict) else 0
        if not isinstance(prefs, list):
            fail(f"preferences must be a list in ballot {number}")
            continue
        indices: list[int] = []
        for pref in prefs:
            if isinstance(pref, int) and 0 <= pref < len(candidates):
                indices.append(pref)
            elif isinstance(pref, str) and pref in candidates:
                indices.append(candidates.index(pref))
            else:
                fail(f"unknown candidate {pref!r} in ballot {number}")
        ballots.append((indices, count if isinstance(count, int) else 0))

    if errors:
        raise ElectionParseError(errors)
    election = make_election(str(data.get("name", "election")), candidates, vacancies, ballots)
    violations = validate_election(election)
    if violations:
        raise ElectionParseError([ReportedError(ErrorType.ELECTION, v) for v in violations])
    return election


def parse_election(source: str) -> Election:
    """ Parses either encoding; raises ElectionParseError listing every problem found """
    if source.lstrip().startswith("{"):
        try:
            data = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ElectionParseError([ReportedError(ErrorType.SYNTAX, exc.msg, exc.lineno, exc.colno)])
        return election_from_json(data)

    parser = Parser(Lexer(source))
    election = parser.parse_election()
    if election is None:
        raise ElectionParseError(parser.errors)
    return election
